#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qperc/data.hpp"
#include "qperc/params.hpp"
#include "qperc/statevec.hpp"

namespace qperc {

/// How a layer's trainable Hamiltonian coefficients are interpreted.
enum class HamiltonianModel {
    /// Per output k: [Omega_k, Delta_k, J_k1..J_kN] used directly in
    /// Omega X_o + (-Delta + sum J_i Z_i) Z_o.
    perceptron,
    /// Per output k: [Omega_ok, Delta_ok, V_1k..V_Nk] Rydberg parameters; the
    /// input detunings are fixed by the cancellation condition
    /// (2 Delta_i = sum_k V_ik) and the layer is mapped to perceptron form.
    mapped_rydberg,
};

std::string to_string(HamiltonianModel model);
HamiltonianModel hamiltonian_model_from_string(const std::string& name);

struct CircuitShape {
    int num_inputs = 1;
    int num_outputs = 1;
    int depth = 1;
    HamiltonianModel model = HamiltonianModel::perceptron;

    int num_qubits() const noexcept { return num_inputs + num_outputs; }
    int layer_coefficient_count() const noexcept { return num_outputs * (2 + num_inputs); }
    std::size_t angle_count() const noexcept {
        return static_cast<std::size_t>(depth) * 2 * num_qubits() * 3;
    }
    std::size_t hamiltonian_count() const noexcept {
        return static_cast<std::size_t>(depth) * layer_coefficient_count();
    }
    void validate() const;
};

enum class Euler { gamma = 0, beta = 1, alpha = 2 };

/// Full variational parameter set of the layered circuit
///   U = prod_l U2^l exp(-i tau H^l) U1^l
/// with Euler rotations exp(-i g Z) exp(-i b X) exp(-i a Z) on every qubit.
struct CircuitParams {
    CircuitShape shape;
    double tau = 1.0;
    std::vector<double> angles;        // [layer][block][qubit][gamma, beta, alpha]
    std::vector<double> hamiltonian;   // [layer][coefficient], layout per HamiltonianModel
    std::vector<double> input_drives;  // fixed, not trained; length num_inputs

    static CircuitParams zeros(const CircuitShape& shape, double tau);
    /// Angles and Hamiltonian coefficients uniform in [-scale, scale].
    static CircuitParams random(const CircuitShape& shape, double tau, Rng& rng, double scale = 0.1);

    double& angle(int layer, int block, int qubit, Euler which);
    double angle(int layer, int block, int qubit, Euler which) const;
    std::span<double> layer_coefficients(int layer);
    std::span<const double> layer_coefficients(int layer) const;

    /// Angles followed by Hamiltonian coefficients.
    std::size_t num_trainable() const noexcept { return angles.size() + hamiltonian.size(); }
    std::vector<double> trainable() const;
    void set_trainable(std::span<const double> values);

    bool has_input_drives() const;
    void validate() const;
};

/// Perceptron-form coefficients of one layer, after mapping if needed.
struct LayerHamiltonian {
    struct Output {
        double omega = 0.0;
        double delta = 0.0;
        std::vector<double> couplings;
    };
    std::vector<Output> outputs;
    std::vector<double> input_drives;

    PerceptronParams single() const;
    TwoOutputParams pair() const;
};

/// For mapped_rydberg layers: the Rydberg parameter set the layer encodes.
RydbergParams layer_rydberg(const CircuitParams& params, int layer);
LayerHamiltonian layer_hamiltonian(const CircuitParams& params, int layer);
DenseOperator build_layer(const CircuitParams& params, int layer);

/// exp(-i g Z) exp(-i b X) exp(-i a Z); full angles in the exponents.
Gate2 euler_rotation(double gamma, double beta, double alpha);

/// Appends num_outputs qubits in |0> after the inputs.
QuantumState with_outputs(const QuantumState& inputs, int num_outputs);

QuantumState forward(const CircuitParams& params, const QuantumState& input_state);

/// <Z> on each output qubit after forward.
std::vector<double> output_expectations(const CircuitParams& params, const QuantumState& input_state);

struct ExpectationGradient {
    std::vector<double> expectations;  // <Z_o> per output
    std::vector<double> gradient;      // d(sum_o w_o <Z_o>) / d(trainable)
};

/// Circuit with every gate, propagator and gate derivative precomputed, for
/// evaluating one parameter set on many inputs. Between layers the block-1
/// and next block-0 Euler rotations are fused into one gate per qubit.
class PreparedCircuit {
  public:
    explicit PreparedCircuit(const CircuitParams& params);

    const CircuitParams& params() const noexcept { return params_; }

    QuantumState forward(const QuantumState& input_state) const;
    std::vector<double> output_expectations(const QuantumState& input_state) const;

    /// Forward pass retained for a reverse sweep. The trailing rotations on
    /// input qubits are left out since they commute with every output <Z>.
    struct Tape {
        std::vector<Complex> state;
        std::vector<double> expectations;
    };
    Tape record(const QuantumState& input_state) const;

    /// d(sum_o w_o <Z_o>) / d(trainable) from a recorded tape. Requires zero
    /// input drives.
    std::vector<double> reverse(const Tape& tape, std::span<const double> output_weights) const;

  private:
    struct Rotation {
        Gate2 gate;
        // (trainable index, dGate) for each angle that feeds this gate
        std::vector<std::pair<std::size_t, Gate2>> derivatives;
    };
    struct Evolution {
        std::vector<Gate2> blocks, undo, d_field, d_omega;
        std::vector<double> fields;
    };

    void apply_rotations(std::vector<Complex>& amps, std::size_t segment, bool skip_inputs) const;

    CircuitParams params_;
    bool dense_ = false;
    // segments_[j][q]: rotation before layer j (j = depth: after the last layer)
    std::vector<std::vector<Rotation>> segments_;
    // evolutions_[l][k]
    std::vector<std::vector<Evolution>> evolutions_;
    std::vector<DenseOperator> dense_layers_;
    Eigen::MatrixXd jacobian_;
};

/// Exact gradient of a weighted sum of output <Z> by reverse-mode sweep
/// through the circuit (one forward, one backward pass). Requires zero input
/// drives.
ExpectationGradient expectation_gradient(const CircuitParams& params, const QuantumState& input_state,
                                         std::span<const double> output_weights);

/// 0.5 * sum over samples and components of (label - prediction)^2.
double squared_error_loss(const std::vector<std::vector<double>>& predictions, const LabeledDataset& dataset);

/// Squared-error loss of the bare circuit: predictions are the observable on
/// each output qubit, inputs are the dataset states with outputs in |0>.
double circuit_loss(const CircuitParams& params, const LabeledDataset& dataset,
                    Observable observable = Observable::pauli_z);

inline constexpr double kFiniteDifferenceStep = 1e-4;

using Objective = std::function<double(std::span<const double>)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
std::vector<double> finite_difference_gradient(const Objective& f, std::span<const double> x,
                                               double h = kFiniteDifferenceStep);

std::vector<double> circuit_loss_gradient(const CircuitParams& params, const LabeledDataset& dataset,
                                          Observable observable = Observable::pauli_z,
                                          double h = kFiniteDifferenceStep);

enum class OptimizerKind { gradient_descent, adam, adagrad };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double adagrad_epsilon = 1e-8;
    int max_epochs = 300;
    /// Stop once |L(t) - L(t - patience)| < tolerance.
    double tolerance = 1e-8;
    int patience = 10;

    void validate() const;
};

struct OptimizerState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;  // Adam v, Adagrad sum of squares
    long steps = 0;
};

void optimizer_step(const OptimizerConfig& config, OptimizerState& state, std::span<double> params,
                    std::span<const double> gradient);

/// True once the loss history has stalled per config.tolerance / patience.
bool converged(const OptimizerConfig& config, const std::vector<double>& loss_history);

}  // namespace qperc
