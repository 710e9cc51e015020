#include "qperc/hamiltonian.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qperc/detail/kernels.hpp"
#include "qperc/error.hpp"

namespace qperc {

namespace {

using detail::bit_stride;

double z_sign(std::size_t index, std::size_t stride) { return (index & stride) ? -1.0 : 1.0; }

void add_x(DenseOperator& h, int n, int qubit, double coeff) {
    if (coeff == 0.0) return;
    const std::size_t s = bit_stride(n, qubit);
    for (Eigen::Index b = 0; b < h.rows(); ++b) h(b ^ static_cast<Eigen::Index>(s), b) += coeff;
}

void add_z(DenseOperator& h, int n, int qubit, double coeff) {
    if (coeff == 0.0) return;
    const std::size_t s = bit_stride(n, qubit);
    for (Eigen::Index b = 0; b < h.rows(); ++b) h(b, b) += coeff * z_sign(b, s);
}

void add_zz(DenseOperator& h, int n, int q0, int q1, double coeff) {
    if (coeff == 0.0) return;
    const std::size_t s0 = bit_stride(n, q0), s1 = bit_stride(n, q1);
    for (Eigen::Index b = 0; b < h.rows(); ++b) h(b, b) += coeff * z_sign(b, s0) * z_sign(b, s1);
}

// Adds a perceptron with output qubit `out` to h.
void add_perceptron_terms(DenseOperator& h, int n, int out, double delta, double omega,
                          const std::vector<double>& couplings) {
    add_z(h, n, out, -delta);
    add_x(h, n, out, omega);
    for (int i = 0; i < static_cast<int>(couplings.size()); ++i) add_zz(h, n, i, out, couplings[i]);
}

DenseOperator zeros(int n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    return DenseOperator::Zero(dim, dim);
}

bool infeasible(double lhs, double rhs, double rel_tol) {
    return std::abs(lhs - rhs) > rel_tol * std::max(std::abs(lhs), 1.0);
}

std::string atom_list(const std::vector<int>& atoms) {
    std::ostringstream os;
    for (std::size_t k = 0; k < atoms.size(); ++k) os << (k ? ", " : "") << atoms[k];
    return os.str();
}

}  // namespace

PairMask perceptron_mask(int num_inputs, int num_outputs) {
    PairMask mask;
    for (int o = 0; o < num_outputs; ++o) {
        for (int i = 0; i < num_inputs; ++i) mask.emplace_back(i, num_inputs + o);
    }
    return mask;
}

PairMask full_mask(int num_atoms) {
    PairMask mask;
    for (int i = 0; i < num_atoms; ++i) {
        for (int j = i + 1; j < num_atoms; ++j) mask.emplace_back(i, j);
    }
    return mask;
}

DenseOperator build_perceptron(const PerceptronParams& params) {
    params.validate();
    const int n = params.num_inputs + 1;
    DenseOperator h = zeros(n);
    add_perceptron_terms(h, n, params.num_inputs, params.delta_o, params.omega_o, params.couplings);
    for (int i = 0; i < params.num_inputs; ++i) add_x(h, n, i, params.input_drives[i]);
    return h;
}

DenseOperator build_learning_perceptron(const PerceptronParams& layer) { return build_perceptron(layer); }

DenseOperator build_two_output(const TwoOutputParams& params) {
    params.validate();
    const int n = params.num_inputs + 2;
    DenseOperator h = zeros(n);
    for (int k = 0; k < 2; ++k) {
        add_perceptron_terms(h, n, params.num_inputs + k, params.delta_o[k], params.omega_o[k],
                             params.couplings[k]);
    }
    for (int i = 0; i < params.num_inputs; ++i) add_x(h, n, i, params.input_drives[i]);
    return h;
}

DenseOperator build_rydberg(const RydbergParams& params, const PairMask& mask) {
    params.validate();
    const int n = params.num_atoms;
    for (const auto& [i, j] : mask) {
        if (i < 0 || j >= n || i >= j) {
            throw InvalidArgument("interaction mask pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") is invalid for " + std::to_string(n) + " atoms");
        }
    }
    DenseOperator h = zeros(n);
    for (int i = 0; i < n; ++i) add_x(h, n, i, params.omegas[i] / 2.0);
    // n_i = |1><1|_i in the computational basis.
    for (Eigen::Index b = 0; b < h.rows(); ++b) {
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
            if (b & bit_stride(n, i)) diag -= params.detunings[i];
        }
        for (const auto& [i, j] : mask) {
            if ((b & bit_stride(n, i)) && (b & bit_stride(n, j))) diag += params.interactions(i, j);
        }
        h(b, b) += diag;
    }
    return h;
}

DenseOperator build_two_output_rydberg(const RydbergParams& params) {
    if (params.num_atoms < 3) throw InvalidArgument("two-output Rydberg form needs at least three atoms");
    return build_rydberg(params, perceptron_mask(params.num_atoms - 2, 2));
}

DenseOperator build_xy_perceptron(const std::vector<double>& couplings) {
    const int num_inputs = static_cast<int>(couplings.size());
    if (num_inputs < 1) throw InvalidArgument("XY perceptron needs at least one input");
    const int n = num_inputs + 1;
    DenseOperator h = zeros(n);
    const std::size_t out = bit_stride(n, num_inputs);
    // X_i X_o + Y_i Y_o = 2 (|01><10| + |10><01|) on the pair.
    for (int i = 0; i < num_inputs; ++i) {
        const std::size_t si = bit_stride(n, i);
        for (Eigen::Index b = 0; b < h.rows(); ++b) {
            const bool bi = b & si, bo = b & out;
            if (bi != bo) h(b ^ static_cast<Eigen::Index>(si | out), b) += 2.0 * couplings[i];
        }
    }
    return h;
}

DenseOperator excitation_number(int num_qubits) {
    DenseOperator h = zeros(num_qubits);
    for (Eigen::Index b = 0; b < h.rows(); ++b) h(b, b) = std::popcount(static_cast<std::uint64_t>(b));
    return h;
}

PerceptronMapping map_rydberg_to_perceptron(const RydbergParams& params, double rel_tol) {
    params.validate();
    if (params.num_atoms < 2) throw InvalidArgument("mapping needs at least one input and one output");
    const int num_inputs = params.num_atoms - 1;
    const int out = num_inputs;

    std::vector<int> bad;
    for (int i = 0; i < num_inputs; ++i) {
        if (infeasible(params.interactions(i, out), 2.0 * params.detunings[i], rel_tol)) bad.push_back(i);
    }
    if (!bad.empty()) {
        throw MappingInfeasible("mapping infeasible: V_i != 2 Delta_i for input atoms " + atom_list(bad), bad);
    }

    PerceptronMapping m;
    m.params = PerceptronParams::zeros(num_inputs);
    double sum_v = 0.0, sum_delta = 0.0;
    for (int i = 0; i < num_inputs; ++i) {
        const double v = params.interactions(i, out);
        m.params.couplings[i] = v / 4.0;
        m.params.input_drives[i] = params.omegas[i] / 2.0;
        sum_v += v;
        sum_delta += params.detunings[i];
    }
    m.params.delta_o = sum_v / 4.0 - params.detunings[out] / 2.0;
    m.params.omega_o = params.omegas[out] / 2.0;
    m.constant_shift = -sum_delta / 2.0 - params.detunings[out] / 2.0 + sum_v / 4.0;
    return m;
}

TwoOutputMapping map_two_output(const RydbergParams& params, double rel_tol) {
    params.validate();
    if (params.num_atoms < 3) throw InvalidArgument("two-output mapping needs at least three atoms");
    const int num_inputs = params.num_atoms - 2;
    const int o1 = num_inputs, o2 = num_inputs + 1;

    std::vector<int> bad;
    for (int i = 0; i < num_inputs; ++i) {
        const double v_sum = params.interactions(i, o1) + params.interactions(i, o2);
        if (infeasible(v_sum, 2.0 * params.detunings[i], rel_tol)) bad.push_back(i);
    }
    if (!bad.empty()) {
        throw MappingInfeasible("mapping infeasible: 2 Delta_i != V_i + V'_i for input atoms " + atom_list(bad),
                                bad);
    }

    TwoOutputMapping m;
    m.params = TwoOutputParams::zeros(num_inputs);
    double sum_delta = 0.0;
    std::array<double, 2> sum_v{};
    for (int i = 0; i < num_inputs; ++i) {
        for (int k = 0; k < 2; ++k) {
            const double v = params.interactions(i, num_inputs + k);
            m.params.couplings[k][i] = v / 4.0;
            sum_v[k] += v;
        }
        m.params.input_drives[i] = params.omegas[i] / 2.0;
        sum_delta += params.detunings[i];
    }
    // Stored with the -delta Z_o convention shared by every params struct.
    for (int k = 0; k < 2; ++k) {
        m.params.delta_o[k] = sum_v[k] / 4.0 - params.detunings[num_inputs + k] / 2.0;
        m.params.omega_o[k] = params.omegas[num_inputs + k] / 2.0;
    }
    m.constant_shift = -sum_delta / 2.0 - params.detunings[o1] / 2.0 - params.detunings[o2] / 2.0 +
                       (sum_v[0] + sum_v[1]) / 4.0;
    return m;
}

double verify_mapping(const DenseOperator& a, const DenseOperator& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("verify_mapping needs operators of equal dimension");
    }
    DenseOperator d = a - b;
    const Complex shift = d.trace() / static_cast<double>(d.rows());
    d.diagonal().array() -= shift;
    return d.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Layouts

AtomLayout::SpeciesPair AtomLayout::key(const std::string& a, const std::string& b) {
    return a <= b ? SpeciesPair{a, b} : SpeciesPair{b, a};
}

double AtomLayout::c6_for(const std::string& a, const std::string& b) const {
    const auto k = key(a, b);
    if (auto it = c6.find(k); it != c6.end()) return it->second;
    if (auto it = species_ratios.find(k); it != species_ratios.end()) {
        const auto ref = c6.find(key(ratio_reference.first, ratio_reference.second));
        if (ref == c6.end()) throw InvalidArgument("species ratio given but reference pair has no C6");
        const auto ref_ratio = species_ratios.find(key(ratio_reference.first, ratio_reference.second));
        const double base = ref_ratio == species_ratios.end() ? 1.0 : ref_ratio->second;
        return ref->second * it->second / base;
    }
    throw InvalidArgument("no C6 coefficient for species pair (" + a + ", " + b + ")");
}

void AtomLayout::validate() const {
    if (positions.size() != species.size()) {
        throw InvalidArgument("layout needs one species tag per position");
    }
    if (std::abs(quantization_axis.norm() - 1.0) > 1e-12) {
        throw InvalidArgument("quantization axis must be a unit vector");
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            if ((positions[i] - positions[j]).norm() == 0.0) {
                throw InvalidArgument("atoms " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
            }
        }
    }
}

double magic_angle() { return std::acos(1.0 / std::sqrt(3.0)); }

LayoutCouplings layout_to_couplings(const AtomLayout& layout) {
    layout.validate();
    const auto n = static_cast<Eigen::Index>(layout.positions.size());
    LayoutCouplings out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    const double d2 = layout.dipole * layout.dipole;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Eigen::Vector3d r = layout.positions[j] - layout.positions[i];
            const double dist = r.norm();
            const double cos_theta = r.dot(layout.quantization_axis) / dist;
            const double vdw = layout.c6_for(layout.species[i], layout.species[j]) / std::pow(dist, 6);
            const double ff = d2 * (3.0 * cos_theta * cos_theta - 1.0) / (dist * dist * dist);
            out.van_der_waals(i, j) = out.van_der_waals(j, i) = vdw;
            out.flip_flop(i, j) = out.flip_flop(j, i) = ff;
        }
    }
    return out;
}

namespace {

Eigen::Vector3d vec3(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::map<AtomLayout::SpeciesPair, double> pair_table(const nlohmann::json& arr, const std::string& where) {
    std::map<AtomLayout::SpeciesPair, double> out;
    if (!arr.is_array()) throw ConfigError(where + ": expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const auto& e = arr[k];
        const auto& pair = e.at("pair");
        if (!pair.is_array() || pair.size() != 2) throw ConfigError(where + "[" + std::to_string(k) + "].pair");
        out[AtomLayout::key(pair[0].get<std::string>(), pair[1].get<std::string>())] = e.at("value").get<double>();
    }
    return out;
}

}  // namespace

AtomLayout parse_layout(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("layout parse error: ") + e.what());
    }
    AtomLayout layout;
    try {
        const auto& atoms = j.at("atoms");
        for (std::size_t k = 0; k < atoms.size(); ++k) {
            layout.positions.push_back(vec3(atoms[k].at("position"), "atoms[" + std::to_string(k) + "].position"));
            layout.species.push_back(atoms[k].at("species").get<std::string>());
        }
        if (j.contains("quantization_axis")) layout.quantization_axis = vec3(j["quantization_axis"], "quantization_axis");
        layout.dipole = j.value("dipole", 1.0);
        if (j.contains("c6")) layout.c6 = pair_table(j["c6"], "c6");
        if (j.contains("species_ratios")) {
            const auto& sr = j["species_ratios"];
            const auto& ref = sr.at("reference");
            layout.ratio_reference = AtomLayout::key(ref.at(0).get<std::string>(), ref.at(1).get<std::string>());
            layout.species_ratios = pair_table(sr.at("ratios"), "species_ratios.ratios");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("layout schema error: ") + e.what());
    }
    layout.validate();
    return layout;
}

AtomLayout load_layout(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open layout file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_layout(ss.str());
}

}  // namespace qperc
