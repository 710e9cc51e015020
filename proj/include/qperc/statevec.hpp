#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qperc/params.hpp"

namespace qperc {

using Complex = std::complex<double>;
using Gate2 = Eigen::Matrix2cd;
using DenseOperator = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-12;

/// Dense pure state on num_qubits qubits.
///
/// Basis ordering: qubit 0 is the most significant bit, so in basis index b
/// qubit k sits at bit position num_qubits - 1 - k. Every module shares this.
class QuantumState {
  public:
    /// |0...0>
    explicit QuantumState(int num_qubits);

    /// Validates the length and that the norm is 1 within kNormTolerance.
    QuantumState(int num_qubits, std::vector<Complex> amplitudes);

    static QuantumState basis(int num_qubits, std::uint64_t index);
    /// "0110" -> |0110>, leftmost character is qubit 0.
    static QuantumState from_bits(std::string_view bits);
    /// Tensor product of single-qubit states, factors[0] is qubit 0.
    static QuantumState product(std::span<const std::array<Complex, 2>> factors);
    /// Normalizes an arbitrary nonzero vector.
    static QuantumState normalized(int num_qubits, std::vector<Complex> amplitudes);

    int num_qubits() const noexcept { return num_qubits_; }
    std::size_t dim() const noexcept { return amps_.size(); }
    std::span<const Complex> amplitudes() const noexcept { return amps_; }
    Complex amplitude(std::uint64_t index) const { return amps_.at(index); }
    double norm_squared() const noexcept;

    /// this (x) other, with this on the leading qubits.
    QuantumState tensor(const QuantumState& other) const;

    Eigen::VectorXcd to_vector() const;
    static QuantumState from_vector(int num_qubits, const Eigen::VectorXcd& v);

    /// Raw mutable access for in-place kernels; the caller keeps the norm.
    std::span<Complex> data() noexcept { return amps_; }

    bool operator==(const QuantumState&) const = default;

  private:
    struct Unchecked {};
    QuantumState(Unchecked, int num_qubits, std::vector<Complex> amplitudes)
        : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {}

    int num_qubits_;
    std::vector<Complex> amps_;
};

/// Which scalar is read off an output qubit.
enum class Observable {
    pauli_z,   // <Z>
    prob_zero  // P(|0>) = (1 + <Z>) / 2
};

double observable_value(Observable obs, double expectation_z);

// Single-qubit constants.
Gate2 pauli_x();
Gate2 pauli_y();
Gate2 pauli_z();
Gate2 hadamard();

bool is_unitary(const Eigen::Ref<const Eigen::MatrixXcd>& m, double tol = kUnitaryTolerance);
bool is_hermitian(const Eigen::Ref<const Eigen::MatrixXcd>& m, double tol = kHermitianTolerance);

QuantumState apply_single_qubit(QuantumState state, int qubit, const Gate2& gate);
/// Applies a 4x4 gate on (q0, q1); q0 indexes the more significant bit of the gate basis.
QuantumState apply_two_qubit(QuantumState state, int q0, int q1, const Eigen::Matrix4cd& gate);
QuantumState apply_operator(const DenseOperator& op, const QuantumState& state);

double expectation_z(const QuantumState& state, int qubit);
double expectation(const QuantumState& state, const DenseOperator& op);

/// |<a|b>|^2
double fidelity(const QuantumState& a, const QuantumState& b);
Complex inner_product(const QuantumState& a, const QuantumState& b);

/// exp(-i tau H) by scaling and squaring of a degree-20 Taylor polynomial,
/// with the scaled argument kept below 1/2 in the 1-norm.
DenseOperator propagator(const DenseOperator& hamiltonian, double tau);
/// Reference route: exp(-i tau H) from the Hermitian eigendecomposition.
DenseOperator propagator_eig(const DenseOperator& hamiltonian, double tau);

QuantumState evolve_dense(const DenseOperator& hamiltonian, double tau, const QuantumState& state);

/// Analytic propagator exp(-i tau (a Z + omega X)).
Gate2 block_propagator(double a, double omega, double tau);

/// Evolution under a perceptron Hamiltonian with no input drives. The
/// Hamiltonian is block diagonal over input computational-basis
/// configurations, and each block is a 2x2 (per output) propagator.
QuantumState evolve_perceptron_blocks(const PerceptronParams& params, double tau, QuantumState state);
QuantumState evolve_perceptron_blocks(const TwoOutputParams& params, double tau, QuantumState state);

}  // namespace qperc
