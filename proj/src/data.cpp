#include "qperc/data.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qperc/error.hpp"

namespace qperc {

void NoiseSpec::validate() const {
    if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("noise level p must lie in [0, 1)");
    if (!(window.lo >= 0.0 && window.lo <= window.hi && window.hi <= 1.0)) {
        throw InvalidArgument("fidelity window must satisfy 0 <= lo <= hi <= 1");
    }
    if (!(r_min >= 0.0 && r_min <= 1.0)) throw InvalidArgument("r_min must lie in [0, 1]");
}

nlohmann::json NoiseSpec::to_json() const {
    nlohmann::json j;
    switch (kind) {
        case Kind::amplitude_error:
            j["kind"] = "amplitude_error";
            j["p"] = p;
            break;
        case Kind::disordered:
            j["kind"] = "disordered";
            break;
        case Kind::fidelity_window:
            j["kind"] = "fidelity_window";
            j["window"] = {window.lo, window.hi};
            j["r_min"] = r_min;
            break;
    }
    j["seed"] = seed;
    return j;
}

int LabeledDataset::num_qubits() const {
    if (samples.empty()) throw InvalidArgument("dataset is empty");
    return samples.front().state.num_qubits();
}

int LabeledDataset::label_width() const {
    if (samples.empty()) throw InvalidArgument("dataset is empty");
    return static_cast<int>(samples.front().labels.size());
}

void LabeledDataset::validate() const {
    if (samples.empty()) throw InvalidArgument("dataset is empty");
    const int n = num_qubits();
    const int k = label_width();
    for (const auto& s : samples) {
        if (s.state.num_qubits() != n) throw DimensionMismatch("dataset states differ in qubit count");
        if (static_cast<int>(s.labels.size()) != k) throw InvalidArgument("dataset label widths differ");
        for (const int l : s.labels) {
            if (l != -1 && l != 1) throw InvalidArgument("labels must be -1 or +1");
        }
    }
}

std::array<Complex, 2> noisy_qubit(int bit, double r) {
    if (bit != 0 && bit != 1) throw InvalidArgument("bit must be 0 or 1");
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("r must lie in [0, 1]");
    const double major = std::sqrt(r);
    const double minor = std::sqrt(1.0 - r);
    if (bit == 0) return {Complex(major), Complex(minor)};
    return {Complex(minor), Complex(major)};
}

QuantumState phase_state(std::string_view pattern, double p, Rng& rng) {
    if (pattern.empty()) throw InvalidArgument("pattern must be nonempty");
    if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("noise level p must lie in [0, 1)");
    std::uniform_real_distribution<double> dist(1.0 - p, 1.0);
    std::vector<std::array<Complex, 2>> factors;
    factors.reserve(pattern.size());
    for (const char c : pattern) {
        if (c != '0' && c != '1') throw InvalidArgument("pattern may only contain 0 and 1");
        const double r = p == 0.0 ? 1.0 : dist(rng);
        factors.push_back(noisy_qubit(c - '0', r));
    }
    return QuantumState::product(factors);
}

QuantumState disordered_state(int num_qubits, Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<std::array<Complex, 2>> factors(num_qubits);
    for (auto& f : factors) f = noisy_qubit(0, dist(rng));
    return QuantumState::product(factors);
}

std::vector<std::string> phase_patterns(std::string_view phase, int length) {
    if (phase.size() < 2 || phase[0] != 'Z') throw InvalidArgument("unknown phase '" + std::string(phase) + "'");
    int period = 0;
    try {
        period = std::stoi(std::string(phase.substr(1)));
    } catch (const std::exception&) {
        throw InvalidArgument("unknown phase '" + std::string(phase) + "'");
    }
    if (period < 2 || length < period) throw InvalidArgument("phase period must be in [2, chain length]");
    std::vector<std::string> out;
    for (int shift = 0; shift < period; ++shift) {
        std::string s(length, '0');
        for (int k = shift; k < length; k += period) s[k] = '1';
        out.push_back(std::move(s));
    }
    return out;
}

QuantumState pure_state(const Superposition& branches) {
    if (branches.empty()) throw InvalidArgument("superposition needs at least one branch");
    const int n = static_cast<int>(branches.front().size());
    std::vector<Complex> amps(std::size_t{1} << n);
    for (const auto& b : branches) {
        if (static_cast<int>(b.size()) != n) throw InvalidArgument("branches differ in length");
        amps[std::stoull(b, nullptr, 2)] += 1.0;
    }
    return QuantumState::normalized(n, std::move(amps));
}

QuantumState entangled_state(const Superposition& branches, FidelityWindow window, double r_min, Rng& rng,
                             int max_attempts) {
    const QuantumState target = pure_state(branches);
    const int n = target.num_qubits();
    std::uniform_real_distribution<double> dist(r_min, 1.0);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<Complex> amps(target.dim());
        for (const auto& b : branches) {
            std::vector<std::array<Complex, 2>> factors(n);
            for (int q = 0; q < n; ++q) factors[q] = noisy_qubit(b[q] - '0', dist(rng));
            const QuantumState branch = QuantumState::product(factors);
            for (std::size_t i = 0; i < amps.size(); ++i) amps[i] += branch.amplitude(i);
        }
        QuantumState candidate = QuantumState::normalized(n, std::move(amps));
        const double f = fidelity(target, candidate);
        if (f >= window.lo && f <= window.hi) return candidate;
    }
    std::ostringstream os;
    os << "rejection budget of " << max_attempts << " exceeded for state";
    for (const auto& b : branches) os << " |" << b << ">";
    os << " with fidelity window [" << window.lo << ", " << window.hi << "] and r_min " << r_min;
    throw RejectionBudgetExceeded(os.str());
}

namespace {

std::string with_bits_set(int n, std::initializer_list<int> ones) {
    std::string s(n, '0');
    for (const int k : ones) s[k] = '1';
    return s;
}

std::string ones_except(int n, int a, int b) {
    std::string s(n, '1');
    s[a] = s[b] = '0';
    return s;
}

}  // namespace

std::vector<EntanglementClass> entanglement_classes(int num_inputs) {
    const int n = num_inputs;
    const std::string zeros(n, '0');
    const std::string ones(n, '1');
    Superposition w;
    for (int k = 0; k < n; ++k) w.push_back(with_bits_set(n, {k}));

    if (n == 3) {
        EntanglementClass sep{"separable", {{zeros}}, {-1, -1}};
        EntanglementClass wcls{"W", {w}, {-1, 1}};
        EntanglementClass bi{"bi-separable", {}, {1, -1}};
        for (int k = n - 1; k >= 0; --k) bi.members.push_back({with_bits_set(n, {k}), ones});
        EntanglementClass ghz{"GHZ", {{zeros, ones}}, {1, 1}};
        return {sep, wcls, bi, ghz};
    }
    if (n == 4) {
        EntanglementClass sep{"separable", {{zeros}}, {-1, -1}};
        EntanglementClass tri{"tri-separable", {{zeros, "1100"}, {zeros, "1001"}, {zeros, "0011"}}, {-1, 1}};
        EntanglementClass bi{"bi-separable", {}, {1, -1}};
        for (int k = 0; k < n; ++k) bi.members.push_back({with_bits_set(n, {k}), ones});
        EntanglementClass insep{"inseparable", {{zeros, ones}, w}, {1, 1}};
        return {sep, tri, bi, insep};
    }
    if (n == 8) {
        EntanglementClass sep{"separable", {{zeros}}, {-1, -1}};
        // |0..0> + a string of six ones with a cyclically sliding pair of zeros.
        EntanglementClass tri{"tri-separable", {}, {-1, 1}};
        tri.members.push_back({zeros, ones_except(n, 0, 1)});
        tri.members.push_back({zeros, ones_except(n, 1, 2)});
        tri.members.push_back({zeros, ones_except(n, 2, 3)});
        tri.members.push_back({zeros, ones_except(n, 3, 4)});
        tri.members.push_back({zeros, ones_except(n, 4, 5)});
        tri.members.push_back({zeros, ones_except(n, 5, 6)});
        tri.members.push_back({zeros, ones_except(n, 6, 7)});
        EntanglementClass bi{"bi-separable", {}, {1, -1}};
        for (int k = 0; k < n - 1; ++k) bi.members.push_back({with_bits_set(n, {k}), ones});
        EntanglementClass insep{"inseparable", {{zeros, ones}, w}, {1, 1}};
        return {sep, tri, bi, insep};
    }
    throw InvalidArgument("entanglement class tables exist for 3, 4 and 8 inputs, not " + std::to_string(n));
}

LabeledDataset build_phase_dataset(const std::vector<std::string>& classes, int num_qubits, int per_class,
                                   double p, std::uint64_t seed) {
    if (classes.size() != 2) throw InvalidArgument("phase dataset needs exactly two classes");
    if (per_class < 1) throw InvalidArgument("per_class must be at least 1");
    if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("noise level p must lie in [0, 1)");

    std::vector<std::vector<std::string>> patterns(2);
    for (int c = 0; c < 2; ++c) {
        if (classes[c] != "disordered") patterns[c] = phase_patterns(classes[c], num_qubits);
    }

    Rng rng(seed);
    LabeledDataset ds;
    nlohmann::json composition = nlohmann::json::array();
    for (int c = 0; c < 2; ++c) {
        const int label = c == 0 ? -1 : 1;
        for (int k = 0; k < per_class; ++k) {
            if (patterns[c].empty()) {
                ds.samples.push_back({disordered_state(num_qubits, rng), {label}});
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, patterns[c].size() - 1);
                const auto& pattern = patterns[c][pick(rng)];
                ds.samples.push_back({phase_state(pattern, p, rng), {label}});
            }
        }
        composition.push_back({{"class", classes[c]}, {"label", {label}}, {"count", per_class},
                               {"patterns", patterns[c]}});
    }
    NoiseSpec noise{NoiseSpec::Kind::amplitude_error, p, {}, 0.0, seed};
    ds.metadata = {{"generator", "phase"},
                   {"num_qubits", num_qubits},
                   {"noise", noise.to_json()},
                   {"classes", composition},
                   {"per_class", per_class},
                   {"seed", seed}};
    return ds;
}

LabeledDataset build_entanglement_dataset(const std::vector<EntanglementClass>& classes, int per_class,
                                          FidelityWindow window, double r_min, std::uint64_t seed) {
    if (classes.empty()) throw InvalidArgument("entanglement dataset needs at least one class");
    if (per_class < 1) throw InvalidArgument("per_class must be at least 1");
    NoiseSpec noise{NoiseSpec::Kind::fidelity_window, 0.0, window, r_min, seed};
    noise.validate();

    Rng rng(seed);
    LabeledDataset ds;
    nlohmann::json composition = nlohmann::json::array();
    for (const auto& cls : classes) {
        if (cls.members.empty()) throw InvalidArgument("class '" + cls.name + "' has no member states");
        std::uniform_int_distribution<std::size_t> pick(0, cls.members.size() - 1);
        for (int k = 0; k < per_class; ++k) {
            const auto& member = cls.members[pick(rng)];
            ds.samples.push_back({entangled_state(member, window, r_min, rng), cls.labels});
        }
        composition.push_back({{"class", cls.name}, {"label", cls.labels}, {"count", per_class},
                               {"members", cls.members}});
    }
    ds.metadata = {{"generator", "entanglement"},
                   {"num_qubits", ds.samples.front().state.num_qubits()},
                   {"noise", noise.to_json()},
                   {"classes", composition},
                   {"per_class", per_class},
                   {"seed", seed}};
    return ds;
}

void write_dataset(const LabeledDataset& dataset, std::ostream& out) {
    nlohmann::json header = {{"record", "header"}, {"count", dataset.size()}, {"metadata", dataset.metadata}};
    out << header.dump() << '\n';
    for (const auto& s : dataset.samples) {
        nlohmann::json amps = nlohmann::json::array();
        for (const auto& a : s.state.amplitudes()) amps.push_back({a.real(), a.imag()});
        nlohmann::json rec = {{"num_qubits", s.state.num_qubits()}, {"labels", s.labels}, {"amplitudes", amps}};
        out << rec.dump() << '\n';
    }
}

LabeledDataset read_dataset(std::istream& in) {
    LabeledDataset ds;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (!have_header) {
                if (j.value("record", "") != "header") throw ConfigError("first record must be the header");
                ds.metadata = j.at("metadata");
                have_header = true;
                continue;
            }
            const int n = j.at("num_qubits").get<int>();
            std::vector<Complex> amps;
            for (const auto& pair : j.at("amplitudes")) amps.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
            ds.samples.push_back({QuantumState(n, std::move(amps)), j.at("labels").get<std::vector<int>>()});
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("dataset line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw ConfigError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw ConfigError("dataset file has no header record");
    ds.validate();
    return ds;
}

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write dataset file " + path.string());
    write_dataset(dataset, out);
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file " + path.string());
    return read_dataset(in);
}

}  // namespace qperc
