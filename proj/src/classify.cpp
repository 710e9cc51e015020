#include "qperc/classify.hpp"

#include <cmath>

#include "qperc/error.hpp"
#include "qperc/parallel.hpp"

namespace qperc {

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

void check_dataset(const ClassifierModel& model, const LabeledDataset& dataset) {
    if (dataset.samples.empty()) throw InvalidArgument("dataset is empty");
    if (dataset.num_qubits() != model.shape.num_inputs) {
        throw DimensionMismatch("dataset has " + std::to_string(dataset.num_qubits()) + " qubits, model expects " +
                                std::to_string(model.shape.num_inputs) + " inputs");
    }
    if (dataset.label_width() != model.shape.num_outputs) {
        throw DimensionMismatch("label width does not match the number of output qubits");
    }
}

std::vector<PreparedCircuit> prepare(const ClassifierModel& model) {
    std::vector<PreparedCircuit> out;
    for (std::size_t t = 0; t < model.taus.size(); ++t) out.emplace_back(model.circuit(t));
    return out;
}

std::vector<double> prepared_features(const std::vector<PreparedCircuit>& grid, const QuantumState& input) {
    std::vector<double> r;
    for (const auto& c : grid) {
        const auto e = c.output_expectations(input);
        r.insert(r.end(), e.begin(), e.end());
    }
    return r;
}

}  // namespace

std::vector<double> default_tau_grid() {
    std::vector<double> taus;
    for (int i = 1; i <= 10; ++i) taus.push_back(i / 10.0);
    return taus;
}

std::vector<double> feature_vector(const QuantumState& state, const std::vector<CircuitParams>& circuits) {
    std::vector<double> r;
    for (const auto& c : circuits) {
        const auto e = output_expectations(c, state);
        r.insert(r.end(), e.begin(), e.end());
    }
    return r;
}

Eigen::VectorXd readout(const ReadoutWeights& w, const std::vector<double>& features) {
    if (static_cast<std::size_t>(w.cols()) != features.size()) {
        throw DimensionMismatch("readout has " + std::to_string(w.cols()) + " columns but got " +
                                std::to_string(features.size()) + " features");
    }
    const Eigen::Map<const Eigen::VectorXd> r(features.data(), static_cast<Eigen::Index>(features.size()));
    return (w * r).array().tanh().matrix();
}

std::vector<int> predicted_labels(const Eigen::VectorXd& outputs) {
    std::vector<int> labels(outputs.size());
    for (Eigen::Index k = 0; k < outputs.size(); ++k) labels[k] = outputs[k] < 0.0 ? -1 : 1;
    return labels;
}

int class_index(const std::vector<int>& labels) {
    int index = 0;
    for (int l : labels) index = (index << 1) | (l > 0 ? 1 : 0);
    return index;
}

ClassifierModel ClassifierModel::random(const CircuitShape& shape, const std::vector<double>& taus, bool shared,
                                        Rng& rng, double scale) {
    if (taus.empty()) throw InvalidArgument("tau grid is empty");
    ClassifierModel m;
    m.shape = shape;
    m.taus = taus;
    m.shared_parameters = shared;
    const std::size_t count = shared ? 1 : taus.size();
    for (std::size_t t = 0; t < count; ++t) m.circuits.push_back(CircuitParams::random(shape, taus[t], rng, scale));
    std::uniform_real_distribution<double> dist(-scale, scale);
    m.weights.resize(shape.num_outputs, static_cast<Eigen::Index>(m.num_features()));
    for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.weights.cols(); ++c) m.weights(r, c) = dist(rng);
    }
    return m;
}

CircuitParams ClassifierModel::circuit(std::size_t t) const {
    if (t >= taus.size()) throw InvalidArgument("tau index out of range");
    CircuitParams c = circuits[shared_parameters ? 0 : t];
    c.tau = taus[t];
    return c;
}

std::vector<CircuitParams> ClassifierModel::circuits_over_grid() const {
    std::vector<CircuitParams> out;
    for (std::size_t t = 0; t < taus.size(); ++t) out.push_back(circuit(t));
    return out;
}

std::size_t ClassifierModel::num_trainable() const {
    std::size_t n = static_cast<std::size_t>(weights.size());
    for (const auto& c : circuits) n += c.num_trainable();
    return n;
}

std::vector<double> ClassifierModel::trainable() const {
    std::vector<double> x;
    x.reserve(num_trainable());
    for (const auto& c : circuits) {
        const auto v = c.trainable();
        x.insert(x.end(), v.begin(), v.end());
    }
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < weights.cols(); ++c) x.push_back(weights(r, c));
    }
    return x;
}

void ClassifierModel::set_trainable(std::span<const double> values) {
    if (values.size() != num_trainable()) throw DimensionMismatch("trainable vector has the wrong length");
    std::size_t offset = 0;
    for (auto& c : circuits) {
        const std::size_t n = c.num_trainable();
        c.set_trainable(values.subspan(offset, n));
        offset += n;
    }
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < weights.cols(); ++c) weights(r, c) = values[offset++];
    }
}

void ClassifierModel::validate() const {
    shape.validate();
    if (taus.empty()) throw InvalidArgument("tau grid is empty");
    if (circuits.size() != (shared_parameters ? 1 : taus.size())) {
        throw InvalidArgument("circuit count does not match the parameter sharing mode");
    }
    for (const auto& c : circuits) c.validate();
    if (weights.rows() != shape.num_outputs || static_cast<std::size_t>(weights.cols()) != num_features()) {
        throw DimensionMismatch("readout weights must be num_outputs x num_features");
    }
    if (!weights.allFinite()) throw InvalidArgument("readout weights must be finite");
}

nlohmann::json ClassifierModel::to_json() const {
    nlohmann::json j;
    j["num_inputs"] = shape.num_inputs;
    j["num_outputs"] = shape.num_outputs;
    j["depth"] = shape.depth;
    j["hamiltonian_model"] = to_string(shape.model);
    j["taus"] = taus;
    j["shared_parameters"] = shared_parameters;
    auto cs = nlohmann::json::array();
    for (const auto& c : circuits) {
        cs.push_back({{"angles", c.angles}, {"hamiltonian", c.hamiltonian}, {"input_drives", c.input_drives}});
    }
    j["circuits"] = std::move(cs);
    j["readout_weights"] = matrix_json(weights);
    return j;
}

std::vector<double> features(const ClassifierModel& model, const QuantumState& input_state) {
    return prepared_features(prepare(model), with_outputs(input_state, model.shape.num_outputs));
}

double classifier_loss(const ClassifierModel& model, const LabeledDataset& dataset, int threads) {
    model.validate();
    check_dataset(model, dataset);
    std::vector<double> per_sample(dataset.size());
    const auto grid = prepare(model);
    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        const auto& s = dataset.samples[i];
        const Eigen::VectorXd y =
            readout(model.weights, prepared_features(grid, with_outputs(s.state, model.shape.num_outputs)));
        double acc = 0.0;
        for (Eigen::Index k = 0; k < y.size(); ++k) acc += (s.labels[k] - y[k]) * (s.labels[k] - y[k]);
        per_sample[i] = 0.5 * acc;
    });
    double loss = 0.0;
    for (double v : per_sample) loss += v;
    return loss;
}

LossGradient classifier_loss_gradient(const ClassifierModel& model, const LabeledDataset& dataset, int threads) {
    model.validate();
    check_dataset(model, dataset);
    for (const auto& c : model.circuits) {
        if (c.has_input_drives()) throw InvalidArgument("analytic gradient requires zero input drives");
    }
    const int outputs = model.shape.num_outputs;
    const std::size_t taus = model.taus.size();
    const std::size_t nt = model.num_trainable();
    const std::size_t per_circuit = model.circuits.front().num_trainable();
    const std::size_t weight_offset = per_circuit * model.circuits.size();

    std::vector<double> losses(dataset.size());
    std::vector<std::vector<double>> grads(dataset.size());
    const auto grid = prepare(model);

    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        const auto& s = dataset.samples[i];
        const QuantumState input = with_outputs(s.state, outputs);
        std::vector<PreparedCircuit::Tape> tapes;
        std::vector<double> r;
        for (const auto& c : grid) {
            tapes.push_back(c.record(input));
            r.insert(r.end(), tapes.back().expectations.begin(), tapes.back().expectations.end());
        }
        const Eigen::VectorXd y = readout(model.weights, r);
        Eigen::VectorXd delta(outputs);
        double loss = 0.0;
        for (int k = 0; k < outputs; ++k) {
            const double diff = y[k] - s.labels[k];
            loss += diff * diff;
            delta[k] = diff * (1.0 - y[k] * y[k]);
        }
        losses[i] = 0.5 * loss;
        const Eigen::VectorXd d_r = model.weights.transpose() * delta;

        std::vector<double> g(nt, 0.0);
        for (std::size_t t = 0; t < taus; ++t) {
            const std::size_t base = model.shared_parameters ? 0 : t * per_circuit;
            const auto gt = grid[t].reverse(tapes[t], std::span<const double>(d_r.data() + t * outputs, outputs));
            for (std::size_t p = 0; p < per_circuit; ++p) g[base + p] += gt[p];
        }
        std::size_t o = weight_offset;
        for (int k = 0; k < outputs; ++k) {
            for (std::size_t j = 0; j < r.size(); ++j) g[o++] = delta[k] * r[j];
        }
        grads[i] = std::move(g);
    });

    LossGradient out;
    out.gradient.assign(nt, 0.0);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out.loss += losses[i];
        for (std::size_t p = 0; p < nt; ++p) out.gradient[p] += grads[i][p];
    }
    return out;
}

std::vector<double> classifier_loss_gradient_fd(const ClassifierModel& model, const LabeledDataset& dataset,
                                                double h, int threads) {
    ClassifierModel work = model;
    const Objective f = [&](std::span<const double> x) {
        work.set_trainable(x);
        return classifier_loss(work, dataset, threads);
    };
    return finite_difference_gradient(f, model.trainable(), h);
}

Evaluation evaluate_outputs(const std::vector<std::vector<double>>& outputs, const LabeledDataset& dataset) {
    if (outputs.size() != dataset.size()) throw DimensionMismatch("one output vector per sample required");
    if (dataset.samples.empty()) throw InvalidArgument("dataset is empty");
    const int width = dataset.label_width();
    const std::size_t classes = std::size_t{1} << width;
    Evaluation ev;
    ev.confusion.assign(classes, std::vector<long>(classes, 0));
    ev.outputs = outputs;
    long correct = 0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (static_cast<int>(outputs[i].size()) != width) throw DimensionMismatch("output width != label width");
        const Eigen::Map<const Eigen::VectorXd> y(outputs[i].data(), width);
        const int pred = class_index(predicted_labels(y));
        const int truth = class_index(dataset.samples[i].labels);
        ev.predicted.push_back(pred);
        ev.actual.push_back(truth);
        ++ev.confusion[truth][pred];
        if (pred == truth) ++correct;
    }
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(outputs.size());
    return ev;
}

Evaluation evaluate(const ClassifierModel& model, const LabeledDataset& dataset, int threads) {
    model.validate();
    check_dataset(model, dataset);
    std::vector<std::vector<double>> outputs(dataset.size());
    const auto grid = prepare(model);
    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        const auto input = with_outputs(dataset.samples[i].state, model.shape.num_outputs);
        const Eigen::VectorXd y = readout(model.weights, prepared_features(grid, input));
        outputs[i].assign(y.data(), y.data() + y.size());
    });
    return evaluate_outputs(outputs, dataset);
}

void TrainConfig::validate() const {
    if (depth < 1) throw InvalidArgument("depth must be at least 1");
    if (taus.empty()) throw InvalidArgument("tau grid is empty");
    for (double t : taus) {
        if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("tau values must be finite and nonnegative");
    }
    if (!(init_scale >= 0.0)) throw InvalidArgument("init_scale must be nonnegative");
    if (threads < 1) throw InvalidArgument("threads must be at least 1");
    optimizer.validate();
}

nlohmann::json TrainConfig::to_json() const {
    return {{"depth", depth},
            {"taus", taus},
            {"hamiltonian_model", to_string(model)},
            {"shared_parameters", shared_parameters},
            {"input_drives", input_drives},
            {"optimizer",
             {{"kind", to_string(optimizer.kind)},
              {"learning_rate", optimizer.learning_rate},
              {"beta1", optimizer.beta1},
              {"beta2", optimizer.beta2},
              {"adam_epsilon", optimizer.adam_epsilon},
              {"adagrad_epsilon", optimizer.adagrad_epsilon},
              {"max_epochs", optimizer.max_epochs},
              {"tolerance", optimizer.tolerance},
              {"patience", optimizer.patience}}},
            {"init_seed", init_seed},
            {"init_scale", init_scale}};
}

nlohmann::json ExperimentResult::to_json() const {
    return {{"train_accuracy", train_accuracy},
            {"test_accuracy", test_accuracy},
            {"train_confusion", train_confusion},
            {"test_confusion", test_confusion},
            {"loss_history", loss_history},
            {"final_loss", final_loss},
            {"converged", converged},
            {"epochs", epochs},
            {"seed", seed},
            {"config", config},
            {"parameters", model.to_json()}};
}

ExperimentResult train_classifier(const LabeledDataset& train, const LabeledDataset& test,
                                  const TrainConfig& config) {
    config.validate();
    train.validate();
    test.validate();
    if (train.samples.empty() || test.samples.empty()) throw InvalidArgument("train and test sets must be nonempty");
    if (train.num_qubits() != test.num_qubits() || train.label_width() != test.label_width()) {
        throw DimensionMismatch("train and test sets have different shapes");
    }
    CircuitShape shape{train.num_qubits(), train.label_width(), config.depth, config.model};
    shape.validate();

    Rng rng(config.init_seed);
    ExperimentResult result;
    result.seed = config.init_seed;
    result.config = config.to_json();
    ClassifierModel model = ClassifierModel::random(shape, config.taus, config.shared_parameters, rng,
                                                    config.init_scale);
    if (!config.input_drives.empty()) {
        if (static_cast<int>(config.input_drives.size()) != shape.num_inputs) {
            throw InvalidArgument("input_drives must have one entry per input qubit");
        }
        for (auto& c : model.circuits) c.input_drives = config.input_drives;
    }
    const bool analytic = std::none_of(model.circuits.begin(), model.circuits.end(),
                                       [](const CircuitParams& c) { return c.has_input_drives(); });

    std::vector<double> x = model.trainable();
    OptimizerState state;
    for (int epoch = 0; epoch < config.optimizer.max_epochs; ++epoch) {
        std::vector<double> grad;
        double loss = 0.0;
        if (analytic) {
            auto lg = classifier_loss_gradient(model, train, config.threads);
            loss = lg.loss;
            grad = std::move(lg.gradient);
        } else {
            loss = classifier_loss(model, train, config.threads);
            grad = classifier_loss_gradient_fd(model, train, kFiniteDifferenceStep, config.threads);
        }
        result.loss_history.push_back(loss);
        if (converged(config.optimizer, result.loss_history)) {
            result.converged = true;
            break;
        }
        optimizer_step(config.optimizer, state, x, grad);
        model.set_trainable(x);
        ++result.epochs;
    }
    result.final_loss = classifier_loss(model, train, config.threads);

    const Evaluation tr = evaluate(model, train, config.threads);
    result.test_evaluation = evaluate(model, test, config.threads);
    result.train_accuracy = tr.accuracy;
    result.train_confusion = tr.confusion;
    result.test_accuracy = result.test_evaluation.accuracy;
    result.test_confusion = result.test_evaluation.confusion;
    result.model = std::move(model);
    return result;
}

}  // namespace qperc
