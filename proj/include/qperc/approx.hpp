#pragma once

// Cosine-feature approximation circuit on N = 4n basis states: V spreads
// |0...0> uniformly over the block starts |4i>, then block i applies
// U1(i) (x) U2(i) to its two low qubits. Rotations use the half-angle
// convention R_a(t) = exp(-i t sigma_a / 2).

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qperc/data.hpp"
#include "qperc/statevec.hpp"
#include "qperc/variational.hpp"

namespace qperc {

Gate2 rx_gate(double theta);
Gate2 ry_gate(double theta);
Gate2 rz_gate(double theta);

struct ApproxSpec {
    int n = 1;  // feature blocks; 4n must be a power of two
    int d = 1;  // input dimension
    std::vector<std::vector<double>> a;  // n frequency vectors of length d
    std::vector<double> b;               // n phases
    std::vector<double> gamma;           // n amplitudes angles in [0, 2 pi]
    double R = 1.0;

    static ApproxSpec zeros(int n, int d);
    static ApproxSpec random(int n, int d, Rng& rng, double freq_scale = 2.0);

    int num_qubits() const;
    /// l_i(x) = b_i + a_i . x
    double phase(int i, std::span<const double> x) const;
    void validate() const;
    nlohmann::json to_json() const;
};

/// H Rz(-b) Rz(-a_d x_d) ... Rz(-a_1 x_1) H, which equals Rx(-l(x)).
Gate2 u1_gate(std::span<const double> a, double b, std::span<const double> x);
/// Ry(gamma)
Gate2 u2_gate(double gamma);

/// H on the first num_qubits - 2 qubits, identity on the last two.
DenseOperator v_prep(int num_qubits);

/// Block diagonal with U1(i) (x) U2(i) as block i.
DenseOperator block_unitary(const ApproxSpec& spec, std::span<const double> x);

/// State U(theta, x) V |0...0>, simulated block by block.
QuantumState circuit_state(const ApproxSpec& spec, std::span<const double> x);

/// P^m = probability that the measured index is congruent to m mod 4.
std::array<double, 4> circuit_probabilities(const ApproxSpec& spec, std::span<const double> x);

/// R - 2 R (P^1 + P^2)
double f_circuit(const ApproxSpec& spec, std::span<const double> x);
/// (R / n) sum_i cos(gamma_i) cos(l_i(x))
double f_cosine(const ApproxSpec& spec, std::span<const double> x);

enum class RotationAxis { x, y };

Eigen::Matrix4cd cz_gate();
/// Control on the first qubit: identity on |0>, R_axis(angle) on |1>.
Eigen::Matrix4cd controlled_rotation(double angle, RotationAxis axis);
/// CZ (I (x) R(-phi)) CZ (I (x) R(phi)), which is controlled R(2 phi).
Eigen::Matrix4cd controlled_rotation_decomposition(double phi, RotationAxis axis);

/// Three-qubit (n = 2) realization of U(theta, x) V from H, single-qubit
/// rotations and the CZ decompositions; qubit 0 selects the block.
DenseOperator realization_circuit(const ApproxSpec& spec, std::span<const double> x);

/// One sampled cosine feature: a, b and gamma of a single block.
struct FourierFeature {
    std::vector<double> a;
    double b = 0.0;
    double gamma = 0.0;
};

struct TargetFunction {
    std::string name;
    int dim = 1;
    std::function<double(std::span<const double>)> evaluate;
    double fourier_l1 = 0.0;
    /// Draws x from the measure mu.
    std::function<std::vector<double>(Rng&)> sample_measure;
    /// Draws a feature with frequency density |f^| / L1 and the matching
    /// Fourier phase. Empty for targets without a sampler.
    std::function<FourierFeature(Rng&)> sample_feature;
};

/// exp(-pi |x|^2): self-dual under the e^{-2 pi i xi.x} transform, L1 = 1.
/// mu is the standard normal on R^d.
TargetFunction gaussian_target(int dim);

struct CosineTerm {
    double amplitude = 1.0;
    std::vector<double> frequency;
    double phase = 0.0;
};

/// sum_k c_k cos(w_k . x + phi_k), L1 = sum |c_k|; mu is standard normal.
TargetFunction cosine_target(std::vector<CosineTerm> terms);

/// n features drawn from the target's sampler, R = L1.
ApproxSpec sample_barron_features(const TargetFunction& target, int n, Rng& rng);

struct FitConfig {
    int samples = 512;
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
};

/// Minimizes the empirical squared error over mu-samples with respect to
/// a, b, gamma and R, starting from `spec`.
ApproxSpec fit_refine(const ApproxSpec& spec, const TargetFunction& target, const FitConfig& config);

double empirical_rmse(const ApproxSpec& spec, const TargetFunction& target,
                      const std::vector<std::vector<double>>& points);

struct ErrorCurveRow {
    int n = 0;
    double median_rmse = 0.0;
    double bound = 0.0;  // L1 / sqrt(n)
};

struct ErrorDraw {
    int n = 0;
    int draw = 0;
    double rmse = 0.0;
    double bound = 0.0;
    std::uint64_t seed = 0;
};

struct ErrorCurve {
    std::string target;
    std::vector<ErrorCurveRow> rows;
    std::vector<ErrorDraw> draws;
    /// Least-squares slope of log(median RMSE) against log(n); NaN when a
    /// median is zero.
    double slope = 0.0;
};

ErrorCurve error_curve(const TargetFunction& target, const std::vector<int>& n_list, int draws, int mu_samples,
                       Rng& rng, int threads = 1);

}  // namespace qperc
