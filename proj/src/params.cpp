#include "qperc/params.hpp"

#include <algorithm>
#include <string>

#include "qperc/error.hpp"

namespace qperc {

namespace {

void check_length(const std::vector<double>& v, int n, const char* what) {
    if (static_cast<int>(v.size()) != n) {
        throw InvalidArgument(std::string(what) + " must have length " + std::to_string(n) + ", got " +
                              std::to_string(v.size()));
    }
}

bool any_nonzero(const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; });
}

}  // namespace

PerceptronParams PerceptronParams::zeros(int num_inputs) {
    PerceptronParams p;
    p.num_inputs = num_inputs;
    p.couplings.assign(num_inputs, 0.0);
    p.input_drives.assign(num_inputs, 0.0);
    return p;
}

void PerceptronParams::validate() const {
    if (num_inputs < 1) throw InvalidArgument("perceptron needs at least one input");
    check_length(couplings, num_inputs, "couplings");
    check_length(input_drives, num_inputs, "input_drives");
}

bool PerceptronParams::has_input_drives() const { return any_nonzero(input_drives); }

TwoOutputParams TwoOutputParams::zeros(int num_inputs) {
    TwoOutputParams p;
    p.num_inputs = num_inputs;
    p.couplings[0].assign(num_inputs, 0.0);
    p.couplings[1].assign(num_inputs, 0.0);
    p.input_drives.assign(num_inputs, 0.0);
    return p;
}

void TwoOutputParams::validate() const {
    if (num_inputs < 1) throw InvalidArgument("perceptron needs at least one input");
    check_length(couplings[0], num_inputs, "couplings[0]");
    check_length(couplings[1], num_inputs, "couplings[1]");
    check_length(input_drives, num_inputs, "input_drives");
}

bool TwoOutputParams::has_input_drives() const { return any_nonzero(input_drives); }

PerceptronParams TwoOutputParams::output(int k) const {
    PerceptronParams p;
    p.num_inputs = num_inputs;
    p.delta_o = delta_o.at(k);
    p.omega_o = omega_o.at(k);
    p.couplings = couplings.at(k);
    p.input_drives = input_drives;
    return p;
}

RydbergParams RydbergParams::zeros(int num_atoms) {
    RydbergParams p;
    p.num_atoms = num_atoms;
    p.omegas.assign(num_atoms, 0.0);
    p.detunings.assign(num_atoms, 0.0);
    p.interactions = Eigen::MatrixXd::Zero(num_atoms, num_atoms);
    return p;
}

void RydbergParams::validate() const {
    if (num_atoms < 1) throw InvalidArgument("Rydberg array needs at least one atom");
    check_length(omegas, num_atoms, "omegas");
    check_length(detunings, num_atoms, "detunings");
    if (interactions.rows() != num_atoms || interactions.cols() != num_atoms) {
        throw InvalidArgument("interaction matrix must be num_atoms x num_atoms");
    }
    for (int i = 0; i < num_atoms; ++i) {
        if (interactions(i, i) != 0.0) throw InvalidArgument("interaction matrix diagonal must be zero");
        for (int j = i + 1; j < num_atoms; ++j) {
            if (interactions(i, j) != interactions(j, i)) {
                throw InvalidArgument("interaction matrix must be symmetric");
            }
        }
    }
}

}  // namespace qperc
