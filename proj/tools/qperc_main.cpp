#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "qperc/error.hpp"
#include "qperc/experiment.hpp"

namespace {

struct Options {
    std::string config;
    std::vector<std::string> seed_overrides;
    std::string out = "out";
    int threads = 0;
};

int run(qperc::ExperimentKind kind, const Options& opt) {
    qperc::ExperimentConfig config = opt.config.empty() ? qperc::ExperimentConfig::defaults(kind)
                                                        : qperc::load_config(opt.config, kind);
    for (const auto& s : opt.seed_overrides) qperc::apply_seed_override(config, s);
    if (opt.threads > 0) config.threads = opt.threads;
    config.validate();

    const qperc::ExperimentOutput output = qperc::run_experiment(config);
    qperc::write_outputs(output, opt.out);

    std::cout << qperc::to_string(kind) << ": wrote " << (std::filesystem::path(opt.out) / "result.json").string();
    for (const auto& [name, text] : output.files) std::cout << ", " << name;
    std::cout << '\n';
    if (output.status != 0) std::cerr << "check failed; see result.json\n";
    return output.status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum perceptron experiments"};
    app.require_subcommand(1);

    Options opt;
    qperc::ExperimentKind selected{};
    const std::pair<qperc::ExperimentKind, const char*> commands[] = {
        {qperc::ExperimentKind::phase_classify, "train and score single-output phase classifiers"},
        {qperc::ExperimentKind::ent_classify, "train and score two-output entanglement classifiers"},
        {qperc::ExperimentKind::approx_bench, "approximation error against the number of features"},
        {qperc::ExperimentKind::map_verify, "check the Rydberg to perceptron mappings on random draws"},
        {qperc::ExperimentKind::gen_data, "write train and test datasets as JSON lines"},
    };
    for (const auto& [kind, description] : commands) {
        auto* sub = app.add_subcommand(qperc::to_string(kind), description);
        sub->add_option("--config", opt.config, "JSON config file; omitted keys take their defaults")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed-override", opt.seed_overrides,
                        "K=V with K in data_train, data_test, init (comma list), approx, map")
            ->take_all();
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--threads", opt.threads, "worker thread cap (overrides the config)")
            ->check(CLI::PositiveNumber);
        sub->callback([&selected, kind] { selected = kind; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return run(selected, opt);
    } catch (const qperc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
    } catch (const qperc::MappingInfeasible& e) {
        std::cerr << "infeasible mapping: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return 2;
}
