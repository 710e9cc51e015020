#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qperc/statevec.hpp"

namespace qperc {

using Rng = std::mt19937_64;

struct FidelityWindow {
    double lo = 0.93;
    double hi = 0.97;
};

/// Generation noise for a dataset.
struct NoiseSpec {
    enum class Kind { amplitude_error, disordered, fidelity_window };

    Kind kind = Kind::amplitude_error;
    double p = 0.0;             // amplitude_error: r ~ U[1 - p, 1)
    FidelityWindow window{};    // fidelity_window
    double r_min = 0.99;        // fidelity_window: per-qubit r ~ U[r_min, 1)
    std::uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
};

struct Sample {
    QuantumState state;
    std::vector<int> labels;  // entries are -1 or +1
};

struct LabeledDataset {
    std::vector<Sample> samples;
    /// generator, noise, classes, label_map, per_class, seed
    nlohmann::json metadata = nlohmann::json::object();

    std::size_t size() const noexcept { return samples.size(); }
    int num_qubits() const;
    int label_width() const;
    void validate() const;
};

/// Bit 0 -> sqrt(r)|0> + sqrt(1-r)|1>, bit 1 -> sqrt(1-r)|0> + sqrt(r)|1>.
std::array<Complex, 2> noisy_qubit(int bit, double r);

/// Product of noisy qubits following `pattern`, r drawn independently per
/// qubit from U[1 - p, 1). p = 0 gives the exact basis state.
QuantumState phase_state(std::string_view pattern, double p, Rng& rng);

/// Product of sqrt(r)|0> + sqrt(1-r)|1> with r ~ U[0, 1) per qubit.
QuantumState disordered_state(int num_qubits, Rng& rng);

/// Degenerate bit patterns of a crystalline phase ("Z2", "Z3", "Z4", ...) on
/// a chain: every cyclic shift of "1" followed by (period - 1) zeros.
std::vector<std::string> phase_patterns(std::string_view phase, int length);

/// Equal-weight superposition of computational basis strings.
using Superposition = std::vector<std::string>;

QuantumState pure_state(const Superposition& branches);

/// Replaces every bit of every branch by a noisy qubit with r ~ U[r_min, 1),
/// renormalizes, and rejection-samples until the fidelity to the pure state
/// lies in the window.
QuantumState entangled_state(const Superposition& branches, FidelityWindow window, double r_min, Rng& rng,
                             int max_attempts = 100000);

struct EntanglementClass {
    std::string name;
    std::vector<Superposition> members;
    std::vector<int> labels;  // two-output label pair
};

/// Class tables for 3, 4 and 8 input qubits.
std::vector<EntanglementClass> entanglement_classes(int num_inputs);

/// Two-class phase dataset: classes[0] is labeled -1, classes[1] is +1.
/// Class names are phase names ("Z2", ...) or "disordered".
LabeledDataset build_phase_dataset(const std::vector<std::string>& classes, int num_qubits, int per_class,
                                   double p, std::uint64_t seed);

LabeledDataset build_entanglement_dataset(const std::vector<EntanglementClass>& classes, int per_class,
                                          FidelityWindow window, double r_min, std::uint64_t seed);

/// JSON lines: a header record with the metadata, then one record per
/// sample with num_qubits, labels and (re, im) amplitude pairs.
void write_dataset(const LabeledDataset& dataset, std::ostream& out);
LabeledDataset read_dataset(std::istream& in);
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path);
LabeledDataset load_dataset(const std::filesystem::path& path);

}  // namespace qperc
