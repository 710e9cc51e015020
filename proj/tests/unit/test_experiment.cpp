#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qperc/error.hpp"
#include "qperc/experiment.hpp"

using namespace qperc;
using nlohmann::json;

namespace {

std::string config_error_message(const std::string& text, ExperimentKind kind) {
    try {
        parse_config_text(text, kind);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

ExperimentConfig small_phase() {
    return parse_config(json::parse(R"({
      "seeds": {"init": [0, 1]},
      "dataset": {"classes": ["Z2", "Z4"], "num_inputs": 4, "per_class": 3, "noise": [0.2, 0.4]},
      "circuit": {"taus": [0.5, 1.0]},
      "optimizer": {"max_epochs": 3}
    })"),
                        ExperimentKind::phase_classify);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(ExperimentKind, StringRoundTrip) {
    for (auto k : {ExperimentKind::phase_classify, ExperimentKind::ent_classify, ExperimentKind::approx_bench,
                   ExperimentKind::map_verify, ExperimentKind::gen_data}) {
        EXPECT_EQ(experiment_kind_from_string(to_string(k)), k);
    }
    EXPECT_EQ(to_string(ExperimentKind::phase_classify), "phase-classify");
}

TEST(ParseConfig, EmptyDocumentGivesDefaults) {
    const auto c = parse_config(json::object(), ExperimentKind::ent_classify);
    const auto d = ExperimentConfig::defaults(ExperimentKind::ent_classify);
    EXPECT_EQ(c.to_json(), d.to_json());
    EXPECT_EQ(c.circuit.depth, 4);
    EXPECT_EQ(c.optimizer.kind, OptimizerKind::adagrad);
    EXPECT_EQ(c.dataset.kind, "entanglement");
}

TEST(ParseConfig, OverlayKeepsUnspecifiedDefaults) {
    const auto c = parse_config(json::parse(R"({"optimizer": {"learning_rate": 0.2}})"), ExperimentKind::phase_classify);
    EXPECT_EQ(c.optimizer.learning_rate, 0.2);
    EXPECT_EQ(c.optimizer.kind, OptimizerKind::adam);
    EXPECT_EQ(c.dataset.classes, (std::vector<std::string>{"Z2", "Z3"}));
    EXPECT_EQ(parse_config(c.to_json(), ExperimentKind::phase_classify).to_json(), c.to_json());
}

TEST(ParseConfig, UnknownKeyNamesThePath) {
    const auto msg = config_error_message(R"({"optimizer": {"learning_rte": 0.1}})", ExperimentKind::phase_classify);
    EXPECT_NE(msg.find("optimizer.learning_rte"), std::string::npos) << msg;
}

TEST(ParseConfig, TypeErrorNamesThePath) {
    const auto msg = config_error_message(R"({"dataset": {"per_class": "many"}})", ExperimentKind::phase_classify);
    EXPECT_NE(msg.find("dataset.per_class"), std::string::npos) << msg;
}

TEST(ParseConfig, SyntaxErrorReportsLocation) {
    const auto msg = config_error_message("{\n  \"threads\": ,\n}", ExperimentKind::phase_classify);
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(ParseConfig, SemanticChecks) {
    EXPECT_FALSE(config_error_message(R"({"dataset": {"noise": [1.0]}})", ExperimentKind::phase_classify).empty());
    EXPECT_FALSE(
        config_error_message(R"({"circuit": {"hamiltonian_model": "xy"}})", ExperimentKind::phase_classify).empty());
    EXPECT_FALSE(config_error_message(R"({"experiment": "map-verify"})", ExperimentKind::phase_classify).empty());
    EXPECT_FALSE(config_error_message(R"({"approx": {"n_list": [3]}})", ExperimentKind::approx_bench).empty());
    EXPECT_FALSE(config_error_message(R"({"dataset": {"num_inputs": 5}})", ExperimentKind::ent_classify).empty());
    EXPECT_FALSE(config_error_message(R"({"threads": 0})", ExperimentKind::map_verify).empty());
}

TEST(ResolvedRMin, DefaultsBySystemSize) {
    auto c = ExperimentConfig::defaults(ExperimentKind::ent_classify);
    c.dataset.num_inputs = 3;
    EXPECT_EQ(c.resolved_r_min(), 0.97);
    c.dataset.num_inputs = 4;
    EXPECT_EQ(c.resolved_r_min(), 0.98);
    c.dataset.num_inputs = 8;
    EXPECT_EQ(c.resolved_r_min(), 0.99);
    c.dataset.r_min = 0.95;
    EXPECT_EQ(c.resolved_r_min(), 0.95);
}

TEST(SeedOverride, AssignmentsAndErrors) {
    auto c = ExperimentConfig::defaults(ExperimentKind::phase_classify);
    apply_seed_override(c, "data_train=9");
    apply_seed_override(c, "init=3,4,5");
    apply_seed_override(c, "map=11");
    EXPECT_EQ(c.seeds.data_train, 9u);
    EXPECT_EQ(c.seeds.init, (std::vector<std::uint64_t>{3, 4, 5}));
    EXPECT_EQ(c.seeds.map, 11u);
    EXPECT_THROW(apply_seed_override(c, "data_train"), ConfigError);
    EXPECT_THROW(apply_seed_override(c, "colour=1"), ConfigError);
    EXPECT_THROW(apply_seed_override(c, "approx=-1"), ConfigError);
    EXPECT_THROW(apply_seed_override(c, "init=1,,2"), ConfigError);
}

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(2.0), "2");
    EXPECT_EQ(format_number(-1.5e-20), "-1.5e-20");
    const double third = 1.0 / 3.0;
    EXPECT_EQ(std::stod(format_number(third)), third);
}

TEST(RunPhaseClassify, SweepOutputsAndByteDeterminism) {
    const auto config = small_phase();
    const auto a = run_phase_classify(config);
    const auto b = run_phase_classify(config);
    EXPECT_EQ(a.result.dump(2), b.result.dump(2));
    ASSERT_EQ(a.files.size(), b.files.size());
    for (std::size_t k = 0; k < a.files.size(); ++k) EXPECT_EQ(a.files[k], b.files[k]);
    EXPECT_EQ(a.result["results"].size(), 2u);
    bool has_sweep = false;
    for (const auto& [name, text] : a.files) has_sweep = has_sweep || name == "sweep.csv";
    EXPECT_TRUE(has_sweep);
    for (const auto& row : a.result["results"]) {
        const double acc = row["median_test_accuracy"].get<double>();
        EXPECT_GE(acc, 0.0);
        EXPECT_LE(acc, 1.0);
        EXPECT_EQ(row["runs"].size(), 2u);
    }
}

TEST(RunPhaseClassify, ThreadCountChangesNothingButTheEcho) {
    auto config = small_phase();
    config.dataset.noise = {0.3};
    const auto one = run_phase_classify(config);
    config.threads = 2;
    auto two = run_phase_classify(config);
    two.result["config"]["threads"] = 1;
    EXPECT_EQ(one.result.dump(), two.result.dump());
}

TEST(RunEntClassify, SmallRun) {
    const auto config = parse_config(json::parse(R"({
      "seeds": {"init": [0]},
      "dataset": {"num_inputs": 3, "per_class": 2},
      "circuit": {"depth": 1, "taus": [0.5]},
      "optimizer": {"max_epochs": 2}
    })"),
                                     ExperimentKind::ent_classify);
    const auto out = run_ent_classify(config);
    EXPECT_EQ(out.result["classes"].size(), 4u);
    EXPECT_EQ(out.result["r_min"], 0.97);
    EXPECT_EQ(out.result["test_accuracies"].size(), 1u);
    EXPECT_EQ(out.files.front().first, "samples.csv");
}

TEST(RunApproxBench, BoundColumnAndCsv) {
    const auto config = parse_config(json::parse(R"({
      "approx": {"n_list": [4, 16], "draws": 3, "mu_samples": 50}
    })"),
                                     ExperimentKind::approx_bench);
    const auto out = run_approx_bench(config);
    for (const auto& row : out.result["rows"]) {
        EXPECT_EQ(row["bound"].get<double>(), 1.0 / std::sqrt(row["n"].get<double>()));
    }
    ASSERT_EQ(out.files.size(), 2u);
    EXPECT_EQ(out.files[0].second.substr(0, out.files[0].second.find('\n')), "target,n,draw,rmse,bound,seed");
}

TEST(RunMapVerify, PassesAndReportsCounterexample) {
    const auto config = parse_config(json::parse(R"({"map_verify": {"draws": 20}})"), ExperimentKind::map_verify);
    const auto out = run_map_verify(config);
    EXPECT_EQ(out.status, 0);
    EXPECT_TRUE(out.result["passed"].get<bool>());
    EXPECT_LE(out.result["max_residual_single"].get<double>(), 1e-10);
    EXPECT_LE(out.result["max_residual_two_output"].get<double>(), 1e-10);
    EXPECT_FALSE(out.result["counterexample"].is_null());
}

TEST(RunGenData, RoundTripAndFiles) {
    const auto config = parse_config(json::parse(R"({"dataset": {"num_inputs": 4, "per_class": 2}})"),
                                     ExperimentKind::gen_data);
    const auto out = run_gen_data(config);
    EXPECT_TRUE(out.result["round_trip_identical"].get<bool>());
    EXPECT_EQ(out.files.size(), 2u);
}

TEST(WriteOutputs, WritesResultAndExtraFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "qperc_write_outputs_test";
    std::filesystem::remove_all(dir);
    ExperimentOutput out;
    out.result = {{"x", 1}};
    out.files.emplace_back("samples.csv", "a,b\n1,2\n");
    write_outputs(out, dir);
    EXPECT_EQ(read_file(dir / "result.json"), "{\n  \"x\": 1\n}\n");
    EXPECT_EQ(read_file(dir / "samples.csv"), "a,b\n1,2\n");
    std::filesystem::remove_all(dir);
}
