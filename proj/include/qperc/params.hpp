#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace qperc {

// Coefficient sets for the perceptron-family Hamiltonians. All coefficients
// are angular frequencies (hbar = 1). The output qubit(s) are always the last
// qubit(s) of the register.

/// H = -delta_o Z_o + omega_o X_o + sum_i J_i Z_i Z_o + sum_i input_drives_i X_i
struct PerceptronParams {
    int num_inputs = 0;
    double delta_o = 0.0;
    double omega_o = 0.0;
    std::vector<double> couplings;     // J_i
    std::vector<double> input_drives;  // coefficient of X_i (Omega_i / 2 after mapping)

    static PerceptronParams zeros(int num_inputs);
    void validate() const;
    bool has_input_drives() const;
};

/// Two outputs sharing the inputs; output k uses delta_o[k], omega_o[k],
/// couplings[k] with the same sign convention as PerceptronParams.
struct TwoOutputParams {
    int num_inputs = 0;
    std::array<double, 2> delta_o{};
    std::array<double, 2> omega_o{};
    std::array<std::vector<double>, 2> couplings;
    std::vector<double> input_drives;

    static TwoOutputParams zeros(int num_inputs);
    void validate() const;
    bool has_input_drives() const;
    PerceptronParams output(int k) const;
};

/// H = sum_i (Omega_i/2) X_i - sum_i Delta_i n_i + sum_{i<j, masked} V_ij n_i n_j
struct RydbergParams {
    int num_atoms = 0;
    std::vector<double> omegas;
    std::vector<double> detunings;
    Eigen::MatrixXd interactions;  // symmetric, zero diagonal

    static RydbergParams zeros(int num_atoms);
    void validate() const;
};

}  // namespace qperc
