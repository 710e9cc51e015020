#pragma once

// Config-driven experiment runners behind the qperc command-line tool.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qperc/approx.hpp"
#include "qperc/classify.hpp"
#include "qperc/data.hpp"

namespace qperc {

enum class ExperimentKind { phase_classify, ent_classify, approx_bench, map_verify, gen_data };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct SeedConfig {
    std::uint64_t data_train = 1;
    std::uint64_t data_test = 2;
    std::vector<std::uint64_t> init{0};
    std::uint64_t approx = 0;
    std::uint64_t map = 0;
};

struct DatasetConfig {
    /// "phase" or "entanglement"
    std::string kind = "phase";
    /// phase datasets: two class names, the first labeled -1
    std::vector<std::string> classes{"Z2", "Z3"};
    int num_inputs = 8;
    int per_class = 36;
    /// phase datasets: amplitude error levels; more than one entry is a sweep
    std::vector<double> noise{0.3};
    FidelityWindow window{};
    /// entanglement datasets; 0 selects the default for num_inputs
    double r_min = 0.0;
};

struct CircuitConfig {
    int depth = 2;
    std::vector<double> taus = default_tau_grid();
    std::string hamiltonian_model = "mapped-rydberg";
    bool shared_parameters = true;
    std::vector<double> input_drives;
    double init_scale = 0.1;
};

struct ApproxBenchConfig {
    /// "gaussian" or "cosine"
    std::string target = "gaussian";
    int dim = 1;
    std::vector<int> n_list{4, 16, 64, 256};
    int draws = 20;
    int mu_samples = 2000;
    std::vector<CosineTerm> cosine_terms;
};

struct MapVerifyConfig {
    int draws = 200;
    int max_inputs = 6;
    double coefficient_range = 10.0;
    double tolerance = 1e-10;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::phase_classify;
    SeedConfig seeds;
    DatasetConfig dataset;
    CircuitConfig circuit;
    OptimizerConfig optimizer;
    ApproxBenchConfig approx;
    MapVerifyConfig map_verify;
    int threads = 1;

    /// Defaults for the experiment kind, before any file is applied.
    static ExperimentConfig defaults(ExperimentKind kind);

    /// Every field, defaults included.
    nlohmann::json to_json() const;
    void validate() const;
    double resolved_r_min() const;
    TrainConfig train_config(std::uint64_t init_seed) const;
};

/// Overlays a JSON document onto the defaults for its "experiment" (or
/// `kind` when the document omits it). Unknown keys and type errors raise
/// ConfigError naming the key path.
ExperimentConfig parse_config(const nlohmann::json& doc, ExperimentKind kind);
/// Parses text; syntax errors carry line and column.
ExperimentConfig parse_config_text(const std::string& text, ExperimentKind kind);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind kind);

/// "K=V" with K one of data_train, data_test, init, approx, map; init takes a
/// comma-separated list.
void apply_seed_override(ExperimentConfig& config, const std::string& assignment);

struct ExperimentOutput {
    nlohmann::json result;
    /// Extra files: (name, contents).
    std::vector<std::pair<std::string, std::string>> files;
    /// Nonzero when the run completed but a checked property failed.
    int status = 0;
};

ExperimentOutput run_phase_classify(const ExperimentConfig& config);
ExperimentOutput run_ent_classify(const ExperimentConfig& config);
ExperimentOutput run_approx_bench(const ExperimentConfig& config);
ExperimentOutput run_map_verify(const ExperimentConfig& config);
ExperimentOutput run_gen_data(const ExperimentConfig& config);
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// result.json plus the extra files, written into `dir` (created if needed).
void write_outputs(const ExperimentOutput& output, const std::filesystem::path& dir);

/// Shortest round-trip decimal form used in every CSV cell.
std::string format_number(double value);

}  // namespace qperc
