#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qperc/params.hpp"
#include "qperc/statevec.hpp"

namespace qperc {

/// Active interaction pairs (i < j) for build_rydberg.
using PairMask = std::vector<std::pair<int, int>>;

/// Every input coupled to every output, nothing else. Outputs are the last
/// num_outputs atoms.
PairMask perceptron_mask(int num_inputs, int num_outputs = 1);
PairMask full_mask(int num_atoms);

DenseOperator build_perceptron(const PerceptronParams& params);
/// Omega X_o + (-Delta + sum J_i Z_i) Z_o. Identical operator to
/// build_perceptron; kept separate because training code reads in this form.
DenseOperator build_learning_perceptron(const PerceptronParams& layer);
DenseOperator build_two_output(const TwoOutputParams& params);
DenseOperator build_rydberg(const RydbergParams& params, const PairMask& mask);
/// Rydberg form with inputs 0..N-1 and outputs N, N+1 (perceptron topology).
DenseOperator build_two_output_rydberg(const RydbergParams& params);
/// sum_i J_i (X_i X_o + Y_i Y_o)
DenseOperator build_xy_perceptron(const std::vector<double>& couplings);

/// sum_i n_i with n_i = (I - Z_i) / 2
DenseOperator excitation_number(int num_qubits);

inline constexpr double kDefaultMappingTolerance = 1e-9;

struct PerceptronMapping {
    PerceptronParams params;
    double constant_shift = 0.0;  // H_rydberg = H_perceptron + constant_shift * I
};

struct TwoOutputMapping {
    TwoOutputParams params;
    double constant_shift = 0.0;
};

/// Last atom is the output. Requires V_i = 2 Delta_i for every input
/// (relative tolerance rel_tol) with V_i = interactions(i, output). Only
/// input-output couplings are read.
PerceptronMapping map_rydberg_to_perceptron(const RydbergParams& params,
                                            double rel_tol = kDefaultMappingTolerance);

/// Last two atoms are outputs; requires 2 Delta_i = V_i + V'_i.
TwoOutputMapping map_two_output(const RydbergParams& params, double rel_tol = kDefaultMappingTolerance);

/// min over c of max |H_a - H_b - c I|, with c = tr(H_a - H_b) / dim.
double verify_mapping(const DenseOperator& a, const DenseOperator& b);

/// Atom positions and the constants needed for van der Waals and dipolar
/// flip-flop couplings. Species pairs are unordered.
struct AtomLayout {
    using SpeciesPair = std::pair<std::string, std::string>;

    std::vector<Eigen::Vector3d> positions;
    std::vector<std::string> species;
    Eigen::Vector3d quantization_axis = Eigen::Vector3d::UnitZ();
    double dipole = 1.0;
    std::map<SpeciesPair, double> c6;
    /// Interaction ratios V_pair / V_reference, used for pairs missing from c6.
    SpeciesPair ratio_reference;
    std::map<SpeciesPair, double> species_ratios;

    static SpeciesPair key(const std::string& a, const std::string& b);
    double c6_for(const std::string& a, const std::string& b) const;
    void validate() const;
};

struct LayoutCouplings {
    Eigen::MatrixXd van_der_waals;  // C6 / R^6
    Eigen::MatrixXd flip_flop;      // d^2 (3 cos^2 theta - 1) / R^3
};

/// arccos(1/sqrt(3)), where the dipolar flip-flop coupling vanishes.
double magic_angle();

LayoutCouplings layout_to_couplings(const AtomLayout& layout);

AtomLayout parse_layout(const std::string& json_text);
AtomLayout load_layout(const std::filesystem::path& path);

}  // namespace qperc
