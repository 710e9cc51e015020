#include "qperc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "qperc/error.hpp"
#include "qperc/hamiltonian.hpp"

namespace qperc {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Typed config access with key-path diagnostics

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

const json& member(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) config_error(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) config_error(path + "." + key, "missing");
    return *it;
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) config_error(path, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) config_error(path, "expected an integer");
    return v.get<int>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    config_error(path, "expected a nonnegative integer");
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) config_error(path, "expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) config_error(path, "expected a string");
    return v.get<std::string>();
}

template <class T, class F>
std::vector<T> as_list(const json& v, const std::string& path, F&& convert) {
    if (!v.is_array()) config_error(path, "expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

double get_double(const json& obj, const std::string& path, const char* key) {
    return as_double(member(obj, path, key), path + "." + key);
}
int get_int(const json& obj, const std::string& path, const char* key) {
    return as_int(member(obj, path, key), path + "." + key);
}
bool get_bool(const json& obj, const std::string& path, const char* key) {
    return as_bool(member(obj, path, key), path + "." + key);
}
std::string get_string(const json& obj, const std::string& path, const char* key) {
    return as_string(member(obj, path, key), path + "." + key);
}
std::vector<double> get_doubles(const json& obj, const std::string& path, const char* key) {
    return as_list<double>(member(obj, path, key), path + "." + key, as_double);
}

// Overlays `overlay` onto `base`; every overlay key must already exist.
// Arrays and scalars replace wholesale.
void merge_into(json& base, const json& overlay, const std::string& path) {
    if (!overlay.is_object()) config_error(path.empty() ? "config" : path, "expected an object");
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        const std::string child = path.empty() ? it.key() : path + "." + it.key();
        auto target = base.find(it.key());
        if (target == base.end()) config_error(child, "unknown key");
        if (target->is_object()) {
            merge_into(*target, it.value(), child);
        } else {
            *target = it.value();
        }
    }
}

json optimizer_json(const OptimizerConfig& o) {
    return {{"kind", to_string(o.kind)},         {"learning_rate", o.learning_rate},
            {"beta1", o.beta1},                  {"beta2", o.beta2},
            {"adam_epsilon", o.adam_epsilon},    {"adagrad_epsilon", o.adagrad_epsilon},
            {"max_epochs", o.max_epochs},        {"tolerance", o.tolerance},
            {"patience", o.patience}};
}

OptimizerConfig optimizer_from(const json& j, const std::string& p) {
    OptimizerConfig o;
    try {
        o.kind = optimizer_kind_from_string(get_string(j, p, "kind"));
    } catch (const InvalidArgument& e) {
        config_error(p + ".kind", e.what());
    }
    o.learning_rate = get_double(j, p, "learning_rate");
    o.beta1 = get_double(j, p, "beta1");
    o.beta2 = get_double(j, p, "beta2");
    o.adam_epsilon = get_double(j, p, "adam_epsilon");
    o.adagrad_epsilon = get_double(j, p, "adagrad_epsilon");
    o.max_epochs = get_int(j, p, "max_epochs");
    o.tolerance = get_double(j, p, "tolerance");
    o.patience = get_int(j, p, "patience");
    return o;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string csv_row(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    return line + '\n';
}

std::string dataset_text(const LabeledDataset& ds) {
    std::ostringstream out;
    write_dataset(ds, out);
    return out.str();
}

bool is_phase_name(const std::string& name) {
    static const std::regex pattern("Z[1-9][0-9]*");
    return name == "disordered" || std::regex_match(name, pattern);
}

// ---------------------------------------------------------------------------
// Classification runs

struct ClassifyRun {
    std::uint64_t seed = 0;
    ExperimentResult result;
    Evaluation train_evaluation;
    std::vector<std::vector<double>> test_features;
    std::vector<std::vector<double>> train_features;
};

ClassifyRun classify_once(const ExperimentConfig& config, const LabeledDataset& train, const LabeledDataset& test,
                          std::uint64_t seed) {
    ClassifyRun run;
    run.seed = seed;
    run.result = train_classifier(train, test, config.train_config(seed));
    run.train_evaluation = evaluate(run.result.model, train, config.threads);
    for (const auto& s : train.samples) run.train_features.push_back(features(run.result.model, s.state));
    for (const auto& s : test.samples) run.test_features.push_back(features(run.result.model, s.state));
    return run;
}

json run_json(const ClassifyRun& run) {
    json j = run.result.to_json();
    j.erase("config");
    j["init_seed"] = run.seed;
    return j;
}

// One row per (run, split, sample).
void append_samples(std::string& csv, const std::string& prefix, const ClassifyRun& run, const LabeledDataset& train,
                    const LabeledDataset& test) {
    auto emit = [&](const char* split, const LabeledDataset& ds, const Evaluation& ev,
                    const std::vector<std::vector<double>>& feats) {
        for (std::size_t i = 0; i < ds.size(); ++i) {
            std::vector<std::string> cells{prefix, std::to_string(run.seed), split, std::to_string(i)};
            std::string labels;
            for (std::size_t k = 0; k < ds.samples[i].labels.size(); ++k) {
                labels += (k ? ";" : "") + std::to_string(ds.samples[i].labels[k]);
            }
            cells.push_back(labels);
            cells.push_back(std::to_string(ev.actual[i]));
            cells.push_back(std::to_string(ev.predicted[i]));
            std::string outs;
            for (std::size_t k = 0; k < ev.outputs[i].size(); ++k) outs += (k ? ";" : "") + format_number(ev.outputs[i][k]);
            cells.push_back(outs);
            for (double f : feats[i]) cells.push_back(format_number(f));
            csv += csv_row(cells);
        }
    };
    emit("train", train, run.train_evaluation, run.train_features);
    emit("test", test, run.result.test_evaluation, run.test_features);
}

std::string samples_header(const std::string& group, std::size_t num_features) {
    std::vector<std::string> cells{group, "init_seed", "split", "sample_id", "labels", "class", "predicted", "outputs"};
    for (std::size_t f = 0; f < num_features; ++f) cells.push_back("feature_" + std::to_string(f));
    return csv_row(cells);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::phase_classify:
            return "phase-classify";
        case ExperimentKind::ent_classify:
            return "ent-classify";
        case ExperimentKind::approx_bench:
            return "approx-bench";
        case ExperimentKind::map_verify:
            return "map-verify";
        case ExperimentKind::gen_data:
            return "gen-data";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    for (auto k : {ExperimentKind::phase_classify, ExperimentKind::ent_classify, ExperimentKind::approx_bench,
                   ExperimentKind::map_verify, ExperimentKind::gen_data}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown experiment '" + name + "'");
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
    ExperimentConfig c;
    c.experiment = kind;
    if (kind == ExperimentKind::ent_classify) {
        c.dataset.kind = "entanglement";
        c.dataset.classes.clear();
        c.dataset.noise.clear();
        c.circuit.depth = 4;
        c.optimizer.kind = OptimizerKind::adagrad;
    }
    return c;
}

double ExperimentConfig::resolved_r_min() const {
    if (dataset.r_min > 0.0) return dataset.r_min;
    switch (dataset.num_inputs) {
        case 3:
            return 0.97;
        case 4:
            return 0.98;
        default:
            return 0.99;
    }
}

json ExperimentConfig::to_json() const {
    json terms = json::array();
    for (const auto& t : approx.cosine_terms) {
        terms.push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}, {"phase", t.phase}});
    }
    return {{"experiment", to_string(experiment)},
            {"threads", threads},
            {"seeds",
             {{"data_train", seeds.data_train},
              {"data_test", seeds.data_test},
              {"init", seeds.init},
              {"approx", seeds.approx},
              {"map", seeds.map}}},
            {"dataset",
             {{"kind", dataset.kind},
              {"classes", dataset.classes},
              {"num_inputs", dataset.num_inputs},
              {"per_class", dataset.per_class},
              {"noise", dataset.noise},
              {"window", {dataset.window.lo, dataset.window.hi}},
              {"r_min", dataset.r_min}}},
            {"circuit",
             {{"depth", circuit.depth},
              {"taus", circuit.taus},
              {"hamiltonian_model", circuit.hamiltonian_model},
              {"shared_parameters", circuit.shared_parameters},
              {"input_drives", circuit.input_drives},
              {"init_scale", circuit.init_scale}}},
            {"optimizer", optimizer_json(optimizer)},
            {"approx",
             {{"target", approx.target},
              {"dim", approx.dim},
              {"n_list", approx.n_list},
              {"draws", approx.draws},
              {"mu_samples", approx.mu_samples},
              {"cosine_terms", terms}}},
            {"map_verify",
             {{"draws", map_verify.draws},
              {"max_inputs", map_verify.max_inputs},
              {"coefficient_range", map_verify.coefficient_range},
              {"tolerance", map_verify.tolerance}}}};
}

void ExperimentConfig::validate() const {
    if (threads < 1) throw ConfigError("threads: must be at least 1");
    if (seeds.init.empty()) throw ConfigError("seeds.init: at least one init seed is required");
    const bool classify = experiment == ExperimentKind::phase_classify || experiment == ExperimentKind::ent_classify;
    const bool data = classify || experiment == ExperimentKind::gen_data;
    if (data) {
        if (dataset.per_class < 1) throw ConfigError("dataset.per_class: must be at least 1");
        if (dataset.kind == "phase") {
            if (experiment == ExperimentKind::ent_classify) {
                throw ConfigError("dataset.kind: ent-classify needs an entanglement dataset");
            }
            if (dataset.classes.size() != 2) throw ConfigError("dataset.classes: phase datasets need exactly two classes");
            for (const auto& c : dataset.classes) {
                if (!is_phase_name(c)) throw ConfigError("dataset.classes: unknown class '" + c + "'");
            }
            if (dataset.num_inputs < 1) throw ConfigError("dataset.num_inputs: must be at least 1");
            if (dataset.noise.empty()) throw ConfigError("dataset.noise: at least one noise level is required");
            for (double p : dataset.noise) {
                if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dataset.noise: levels must lie in [0, 1)");
            }
        } else if (dataset.kind == "entanglement") {
            if (experiment == ExperimentKind::phase_classify) {
                throw ConfigError("dataset.kind: phase-classify needs a phase dataset");
            }
            if (dataset.num_inputs != 3 && dataset.num_inputs != 4 && dataset.num_inputs != 8) {
                throw ConfigError("dataset.num_inputs: entanglement class tables exist for 3, 4 and 8 inputs");
            }
            if (!(dataset.window.lo >= 0.0 && dataset.window.lo <= dataset.window.hi && dataset.window.hi <= 1.0)) {
                throw ConfigError("dataset.window: need 0 <= lo <= hi <= 1");
            }
            if (!(dataset.r_min >= 0.0 && dataset.r_min < 1.0)) throw ConfigError("dataset.r_min: must lie in [0, 1)");
        } else {
            throw ConfigError("dataset.kind: expected 'phase' or 'entanglement', got '" + dataset.kind + "'");
        }
    }
    if (classify) {
        if (circuit.hamiltonian_model == "xy") {
            throw ConfigError("circuit.hamiltonian_model: the xy model is available as a Hamiltonian builder only");
        }
        try {
            hamiltonian_model_from_string(circuit.hamiltonian_model);
            train_config(seeds.init.front()).validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("circuit/optimizer: ") + e.what());
        }
        if (!circuit.input_drives.empty() && static_cast<int>(circuit.input_drives.size()) != dataset.num_inputs) {
            throw ConfigError("circuit.input_drives: need one entry per input qubit or an empty list");
        }
    }
    if (experiment == ExperimentKind::approx_bench) {
        if (approx.target != "gaussian" && approx.target != "cosine") {
            throw ConfigError("approx.target: expected 'gaussian' or 'cosine'");
        }
        if (approx.target == "cosine" && approx.cosine_terms.empty()) {
            throw ConfigError("approx.cosine_terms: cosine target needs at least one term");
        }
        if (approx.dim < 1) throw ConfigError("approx.dim: must be at least 1");
        if (approx.draws < 1 || approx.mu_samples < 1) throw ConfigError("approx: draws and mu_samples must be positive");
        if (approx.n_list.empty() || !std::is_sorted(approx.n_list.begin(), approx.n_list.end())) {
            throw ConfigError("approx.n_list: must be nonempty and ascending");
        }
        for (int n : approx.n_list) {
            if (n < 1 || !std::has_single_bit(static_cast<unsigned>(4 * n))) {
                throw ConfigError("approx.n_list: 4n must be a power of two, got n = " + std::to_string(n));
            }
        }
        for (const auto& t : approx.cosine_terms) {
            if (static_cast<int>(t.frequency.size()) != approx.dim) {
                throw ConfigError("approx.cosine_terms: frequency length must equal approx.dim");
            }
        }
    }
    if (experiment == ExperimentKind::map_verify) {
        if (map_verify.draws < 1) throw ConfigError("map_verify.draws: must be at least 1");
        if (map_verify.max_inputs < 1 || map_verify.max_inputs > 8) {
            throw ConfigError("map_verify.max_inputs: must lie in [1, 8]");
        }
        if (!(map_verify.coefficient_range > 0.0)) throw ConfigError("map_verify.coefficient_range: must be positive");
    }
}

TrainConfig ExperimentConfig::train_config(std::uint64_t init_seed) const {
    TrainConfig t;
    t.depth = circuit.depth;
    t.taus = circuit.taus;
    t.model = hamiltonian_model_from_string(circuit.hamiltonian_model);
    t.shared_parameters = circuit.shared_parameters;
    t.input_drives = circuit.input_drives;
    t.optimizer = optimizer;
    t.init_seed = init_seed;
    t.init_scale = circuit.init_scale;
    t.threads = threads;
    return t;
}

ExperimentConfig parse_config(const json& doc, ExperimentKind kind) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object at top level");
    if (doc.contains("experiment")) {
        const auto named = experiment_kind_from_string(as_string(doc["experiment"], "experiment"));
        if (named != kind) {
            throw ConfigError("experiment: config is for '" + to_string(named) + "' but the command is '" +
                              to_string(kind) + "'");
        }
    }
    json merged = ExperimentConfig::defaults(kind).to_json();
    merge_into(merged, doc, "");

    ExperimentConfig c;
    c.experiment = kind;
    c.threads = get_int(merged, "config", "threads");

    const json& s = merged["seeds"];
    c.seeds.data_train = as_u64(member(s, "seeds", "data_train"), "seeds.data_train");
    c.seeds.data_test = as_u64(member(s, "seeds", "data_test"), "seeds.data_test");
    c.seeds.init = as_list<std::uint64_t>(member(s, "seeds", "init"), "seeds.init", as_u64);
    c.seeds.approx = as_u64(member(s, "seeds", "approx"), "seeds.approx");
    c.seeds.map = as_u64(member(s, "seeds", "map"), "seeds.map");

    const json& d = merged["dataset"];
    c.dataset.kind = get_string(d, "dataset", "kind");
    c.dataset.classes = as_list<std::string>(member(d, "dataset", "classes"), "dataset.classes", as_string);
    c.dataset.num_inputs = get_int(d, "dataset", "num_inputs");
    c.dataset.per_class = get_int(d, "dataset", "per_class");
    c.dataset.noise = get_doubles(d, "dataset", "noise");
    const auto window = get_doubles(d, "dataset", "window");
    if (window.size() != 2) config_error("dataset.window", "expected [lo, hi]");
    c.dataset.window = {window[0], window[1]};
    c.dataset.r_min = get_double(d, "dataset", "r_min");

    const json& ci = merged["circuit"];
    c.circuit.depth = get_int(ci, "circuit", "depth");
    c.circuit.taus = get_doubles(ci, "circuit", "taus");
    c.circuit.hamiltonian_model = get_string(ci, "circuit", "hamiltonian_model");
    c.circuit.shared_parameters = get_bool(ci, "circuit", "shared_parameters");
    c.circuit.input_drives = get_doubles(ci, "circuit", "input_drives");
    c.circuit.init_scale = get_double(ci, "circuit", "init_scale");

    c.optimizer = optimizer_from(merged["optimizer"], "optimizer");

    const json& a = merged["approx"];
    c.approx.target = get_string(a, "approx", "target");
    c.approx.dim = get_int(a, "approx", "dim");
    c.approx.n_list = as_list<int>(member(a, "approx", "n_list"), "approx.n_list", as_int);
    c.approx.draws = get_int(a, "approx", "draws");
    c.approx.mu_samples = get_int(a, "approx", "mu_samples");
    c.approx.cosine_terms = as_list<CosineTerm>(member(a, "approx", "cosine_terms"), "approx.cosine_terms",
                                                [](const json& t, const std::string& p) {
                                                    CosineTerm term;
                                                    term.amplitude = get_double(t, p, "amplitude");
                                                    term.frequency = get_doubles(t, p, "frequency");
                                                    term.phase = get_double(t, p, "phase");
                                                    return term;
                                                });

    const json& m = merged["map_verify"];
    c.map_verify.draws = get_int(m, "map_verify", "draws");
    c.map_verify.max_inputs = get_int(m, "map_verify", "max_inputs");
    c.map_verify.coefficient_range = get_double(m, "map_verify", "coefficient_range");
    c.map_verify.tolerance = get_double(m, "map_verify", "tolerance");

    c.validate();
    return c;
}

ExperimentConfig parse_config_text(const std::string& text, ExperimentKind kind) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    return parse_config(doc, kind);
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind kind) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config_text(buf.str(), kind);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void apply_seed_override(ExperimentConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("seed override '" + assignment + "' is not of the form K=V");
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    auto parse = [&](const std::string& text) {
        std::uint64_t v = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
            throw ConfigError("seed override " + key + ": '" + text + "' is not a nonnegative integer");
        }
        return v;
    };
    if (key == "data_train") {
        config.seeds.data_train = parse(value);
    } else if (key == "data_test") {
        config.seeds.data_test = parse(value);
    } else if (key == "approx") {
        config.seeds.approx = parse(value);
    } else if (key == "map") {
        config.seeds.map = parse(value);
    } else if (key == "init") {
        std::vector<std::uint64_t> seeds;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) seeds.push_back(parse(item));
        if (seeds.empty()) throw ConfigError("seed override init: empty list");
        config.seeds.init = std::move(seeds);
    } else {
        throw ConfigError("seed override: unknown seed '" + key + "'");
    }
}

// ---------------------------------------------------------------------------

ExperimentOutput run_phase_classify(const ExperimentConfig& config) {
    config.validate();
    if (config.experiment != ExperimentKind::phase_classify) throw ConfigError("config is not a phase-classify config");
    const auto& ds = config.dataset;
    ExperimentOutput out;
    out.result["config"] = config.to_json();
    json sweep = json::array();
    std::string samples;
    std::string sweep_csv = csv_row({"noise", "median_test_accuracy", "median_train_accuracy", "seeds", "test_accuracies"});
    bool header_written = false;

    for (double p : ds.noise) {
        const LabeledDataset train = build_phase_dataset(ds.classes, ds.num_inputs, ds.per_class, p, config.seeds.data_train);
        const LabeledDataset test = build_phase_dataset(ds.classes, ds.num_inputs, ds.per_class, p, config.seeds.data_test);
        json runs = json::array();
        std::vector<double> test_acc, train_acc;
        for (std::uint64_t seed : config.seeds.init) {
            const ClassifyRun run = classify_once(config, train, test, seed);
            if (!header_written) {
                samples += samples_header("noise", run.test_features.front().size());
                header_written = true;
            }
            append_samples(samples, format_number(p), run, train, test);
            test_acc.push_back(run.result.test_accuracy);
            train_acc.push_back(run.result.train_accuracy);
            runs.push_back(run_json(run));
        }
        std::string acc_list;
        for (std::size_t i = 0; i < test_acc.size(); ++i) acc_list += (i ? ";" : "") + format_number(test_acc[i]);
        sweep_csv += csv_row({format_number(p), format_number(median(test_acc)), format_number(median(train_acc)),
                              std::to_string(test_acc.size()), acc_list});
        sweep.push_back({{"noise", p},
                         {"median_test_accuracy", median(test_acc)},
                         {"median_train_accuracy", median(train_acc)},
                         {"test_accuracies", test_acc},
                         {"runs", std::move(runs)}});
    }
    out.result["experiment"] = "phase-classify";
    out.result["classes"] = ds.classes;
    out.result["results"] = std::move(sweep);
    out.files.emplace_back("samples.csv", std::move(samples));
    if (ds.noise.size() > 1) out.files.emplace_back("sweep.csv", std::move(sweep_csv));
    return out;
}

ExperimentOutput run_ent_classify(const ExperimentConfig& config) {
    config.validate();
    if (config.experiment != ExperimentKind::ent_classify) throw ConfigError("config is not an ent-classify config");
    const auto& ds = config.dataset;
    const auto classes = entanglement_classes(ds.num_inputs);
    const double r_min = config.resolved_r_min();
    const LabeledDataset train = build_entanglement_dataset(classes, ds.per_class, ds.window, r_min, config.seeds.data_train);
    const LabeledDataset test = build_entanglement_dataset(classes, ds.per_class, ds.window, r_min, config.seeds.data_test);

    ExperimentOutput out;
    out.result["config"] = config.to_json();
    out.result["experiment"] = "ent-classify";
    json class_table = json::array();
    for (const auto& c : classes) {
        class_table.push_back({{"name", c.name}, {"labels", c.labels}, {"class_index", class_index(c.labels)}});
    }
    out.result["classes"] = std::move(class_table);
    out.result["r_min"] = r_min;

    std::string samples;
    json runs = json::array();
    std::vector<double> test_acc, train_acc;
    for (std::uint64_t seed : config.seeds.init) {
        const ClassifyRun run = classify_once(config, train, test, seed);
        if (samples.empty()) samples += samples_header("num_inputs", run.test_features.front().size());
        append_samples(samples, std::to_string(ds.num_inputs), run, train, test);
        test_acc.push_back(run.result.test_accuracy);
        train_acc.push_back(run.result.train_accuracy);
        runs.push_back(run_json(run));
    }
    out.result["median_test_accuracy"] = median(test_acc);
    out.result["median_train_accuracy"] = median(train_acc);
    out.result["test_accuracies"] = test_acc;
    out.result["runs"] = std::move(runs);
    out.files.emplace_back("samples.csv", std::move(samples));
    return out;
}

ExperimentOutput run_approx_bench(const ExperimentConfig& config) {
    config.validate();
    if (config.experiment != ExperimentKind::approx_bench) throw ConfigError("config is not an approx-bench config");
    const auto& a = config.approx;
    const TargetFunction target = a.target == "gaussian" ? gaussian_target(a.dim) : cosine_target(a.cosine_terms);
    Rng rng(config.seeds.approx);
    const ErrorCurve curve = error_curve(target, a.n_list, a.draws, a.mu_samples, rng, config.threads);

    ExperimentOutput out;
    out.result["config"] = config.to_json();
    out.result["experiment"] = "approx-bench";
    out.result["target"] = target.name;
    out.result["fourier_l1"] = target.fourier_l1;
    json rows = json::array();
    std::string summary = csv_row({"n", "median_rmse", "bound"});
    for (const auto& r : curve.rows) {
        rows.push_back({{"n", r.n}, {"median_rmse", r.median_rmse}, {"bound", r.bound}});
        summary += csv_row({std::to_string(r.n), format_number(r.median_rmse), format_number(r.bound)});
    }
    out.result["rows"] = std::move(rows);
    out.result["slope"] = curve.slope;
    std::string samples = csv_row({"target", "n", "draw", "rmse", "bound", "seed"});
    for (const auto& d : curve.draws) {
        samples += csv_row({target.name, std::to_string(d.n), std::to_string(d.draw), format_number(d.rmse),
                            format_number(d.bound), std::to_string(d.seed)});
    }
    out.files.emplace_back("samples.csv", std::move(samples));
    out.files.emplace_back("sweep.csv", std::move(summary));
    return out;
}

ExperimentOutput run_map_verify(const ExperimentConfig& config) {
    config.validate();
    if (config.experiment != ExperimentKind::map_verify) throw ConfigError("config is not a map-verify config");
    const auto& m = config.map_verify;
    Rng rng(config.seeds.map);
    std::uniform_real_distribution<double> coef(-m.coefficient_range, m.coefficient_range);
    std::uniform_int_distribution<int> inputs(1, m.max_inputs);

    std::string samples = csv_row({"draw", "kind", "num_inputs", "residual", "shift_error"});
    double worst_single = 0.0, worst_two = 0.0, worst_shift = 0.0;

    auto shift_error = [](const DenseOperator& ryd, const DenseOperator& perc, double shift) {
        return std::abs((ryd - perc).trace().real() / static_cast<double>(ryd.rows()) - shift);
    };

    for (int draw = 0; draw < m.draws; ++draw) {
        {
            const int n = inputs(rng);
            RydbergParams p = RydbergParams::zeros(n + 1);
            for (int i = 0; i <= n; ++i) {
                p.omegas[i] = coef(rng);
                p.detunings[i] = coef(rng);
            }
            for (int i = 0; i < n; ++i) p.interactions(i, n) = p.interactions(n, i) = 2.0 * p.detunings[i];
            const auto mapped = map_rydberg_to_perceptron(p);
            const DenseOperator hr = build_rydberg(p, perceptron_mask(n, 1));
            const DenseOperator hp = build_perceptron(mapped.params);
            const double res = verify_mapping(hr, hp);
            const double se = shift_error(hr, hp, mapped.constant_shift);
            worst_single = std::max(worst_single, res);
            worst_shift = std::max(worst_shift, se);
            samples += csv_row({std::to_string(draw), "single", std::to_string(n), format_number(res), format_number(se)});
        }
        {
            const int n = std::min(inputs(rng), 6);
            RydbergParams p = RydbergParams::zeros(n + 2);
            for (int i = 0; i < n + 2; ++i) p.omegas[i] = coef(rng);
            p.detunings[n] = coef(rng);
            p.detunings[n + 1] = coef(rng);
            for (int i = 0; i < n; ++i) {
                const double v1 = coef(rng), v2 = coef(rng);
                p.interactions(i, n) = p.interactions(n, i) = v1;
                p.interactions(i, n + 1) = p.interactions(n + 1, i) = v2;
                p.detunings[i] = 0.5 * (v1 + v2);
            }
            const auto mapped = map_two_output(p);
            const DenseOperator hr = build_two_output_rydberg(p);
            const DenseOperator hp = build_two_output(mapped.params);
            const double res = verify_mapping(hr, hp);
            const double se = shift_error(hr, hp, mapped.constant_shift);
            worst_two = std::max(worst_two, res);
            worst_shift = std::max(worst_shift, se);
            samples += csv_row({std::to_string(draw), "two_output", std::to_string(n), format_number(res), format_number(se)});
        }
    }

    // Feasible three-input draw with one detuning pushed off the condition.
    json counterexample;
    {
        RydbergParams p = RydbergParams::zeros(4);
        for (int i = 0; i < 4; ++i) {
            p.omegas[i] = coef(rng);
            p.detunings[i] = coef(rng);
        }
        for (int i = 0; i < 3; ++i) p.interactions(i, 3) = p.interactions(3, i) = 2.0 * p.detunings[i];
        p.detunings[1] += 1.0;
        counterexample["perturbed_atom"] = 1;
        try {
            map_rydberg_to_perceptron(p);
            counterexample["rejected"] = false;
        } catch (const MappingInfeasible& e) {
            counterexample["rejected"] = true;
            counterexample["offending_atoms"] = e.offending_atoms();
            counterexample["message"] = e.what();
        }
    }

    const bool passed = worst_single <= m.tolerance && worst_two <= m.tolerance && worst_shift <= m.tolerance &&
                        counterexample["rejected"].get<bool>();
    ExperimentOutput out;
    out.result["config"] = config.to_json();
    out.result["experiment"] = "map-verify";
    out.result["max_residual_single"] = worst_single;
    out.result["max_residual_two_output"] = worst_two;
    out.result["max_shift_error"] = worst_shift;
    out.result["tolerance"] = m.tolerance;
    out.result["counterexample"] = std::move(counterexample);
    out.result["passed"] = passed;
    out.status = passed ? 0 : 1;
    out.files.emplace_back("samples.csv", std::move(samples));
    return out;
}

ExperimentOutput run_gen_data(const ExperimentConfig& config) {
    config.validate();
    if (config.experiment != ExperimentKind::gen_data) throw ConfigError("config is not a gen-data config");
    const auto& ds = config.dataset;
    ExperimentOutput out;
    out.result["config"] = config.to_json();
    out.result["experiment"] = "gen-data";
    json files = json::array();
    bool round_trip = true;

    auto add = [&](const std::string& name, const LabeledDataset& data) {
        std::string text = dataset_text(data);
        std::istringstream in(text);
        const LabeledDataset back = read_dataset(in);
        bool same = back.size() == data.size();
        for (std::size_t i = 0; same && i < data.size(); ++i) {
            same = back.samples[i].labels == data.samples[i].labels && back.samples[i].state == data.samples[i].state;
        }
        round_trip = round_trip && same;
        files.push_back({{"file", name}, {"count", data.size()}, {"num_qubits", data.num_qubits()}});
        out.files.emplace_back(name, std::move(text));
    };

    if (ds.kind == "phase") {
        for (double p : ds.noise) {
            const std::string suffix = ds.noise.size() > 1 ? "_p" + format_number(p) : "";
            add("train" + suffix + ".jsonl",
                build_phase_dataset(ds.classes, ds.num_inputs, ds.per_class, p, config.seeds.data_train));
            add("test" + suffix + ".jsonl",
                build_phase_dataset(ds.classes, ds.num_inputs, ds.per_class, p, config.seeds.data_test));
        }
    } else {
        const auto classes = entanglement_classes(ds.num_inputs);
        const double r_min = config.resolved_r_min();
        add("train.jsonl", build_entanglement_dataset(classes, ds.per_class, ds.window, r_min, config.seeds.data_train));
        add("test.jsonl", build_entanglement_dataset(classes, ds.per_class, ds.window, r_min, config.seeds.data_test));
    }
    out.result["files"] = std::move(files);
    out.result["round_trip_identical"] = round_trip;
    out.status = round_trip ? 0 : 1;
    return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
    switch (config.experiment) {
        case ExperimentKind::phase_classify:
            return run_phase_classify(config);
        case ExperimentKind::ent_classify:
            return run_ent_classify(config);
        case ExperimentKind::approx_bench:
            return run_approx_bench(config);
        case ExperimentKind::map_verify:
            return run_map_verify(config);
        case ExperimentKind::gen_data:
            return run_gen_data(config);
    }
    throw ConfigError("unknown experiment");
}

void write_outputs(const ExperimentOutput& output, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / name).string());
        f << text;
    };
    write("result.json", output.result.dump(2) + "\n");
    for (const auto& [name, text] : output.files) write(name, text);
}

}  // namespace qperc
