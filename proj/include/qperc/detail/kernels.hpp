#pragma once

// In-place state-vector kernels shared by the public operations and the
// variational engine. No validation happens here.

#include <span>
#include <vector>

#include "qperc/statevec.hpp"

namespace qperc::detail {

inline std::size_t bit_stride(int num_qubits, int qubit) {
    return std::size_t{1} << (num_qubits - 1 - qubit);
}

void apply_gate(std::span<Complex> amps, int num_qubits, int qubit, const Gate2& gate);

double expectation_z(std::span<const Complex> amps, int num_qubits, int qubit);

/// K(a, b) = sum over index pairs of conj(lambda_a) * psi_b on the given qubit,
/// so that <lambda| (M on qubit) |psi> = sum_ab M(a, b) K(a, b).
Gate2 pair_overlap(std::span<const Complex> lambda, std::span<const Complex> psi, int num_qubits,
                   int qubit);

/// a(z) = -delta + sum_i J_i s_i(z) for every input configuration z of
/// couplings.size() inputs, with s_i = +1 for bit 0 and -1 for bit 1.
std::vector<double> configuration_fields(double delta, std::span<const double> couplings);

/// Applies gates[z] to `qubit` in the sector where the leading num_inputs
/// qubits are in configuration z.
void apply_conditioned(std::span<Complex> amps, int num_qubits, int num_inputs, int qubit,
                       std::span<const Gate2> gates);

/// Per-configuration version of pair_overlap.
void conditioned_overlaps(std::span<const Complex> lambda, std::span<const Complex> psi,
                          int num_qubits, int num_inputs, int qubit, std::span<Gate2> out);

/// d/da and d/domega of exp(-i tau (a Z + omega X)).
void block_propagator_derivatives(double a, double omega, double tau, Gate2& d_a, Gate2& d_omega);

}  // namespace qperc::detail
