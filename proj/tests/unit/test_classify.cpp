#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "circuit_oracle.hpp"
#include "qperc/classify.hpp"
#include "qperc/error.hpp"

using namespace qperc;

namespace {

LabeledDataset toy_dataset(int inputs, int outputs, int size, std::mt19937_64& rng) {
    LabeledDataset d;
    std::bernoulli_distribution coin(0.5);
    for (int s = 0; s < size; ++s) {
        std::vector<int> labels(outputs);
        for (auto& y : labels) y = coin(rng) ? 1 : -1;
        d.samples.push_back({QuantumState::from_vector(inputs, oracle::random_state(1 << inputs, rng)), labels});
    }
    return d;
}

}  // namespace

TEST(TauGrid, TenEvenlySpacedValues) {
    const auto g = default_tau_grid();
    ASSERT_EQ(g.size(), 10u);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(g[k], 0.1 * static_cast<double>(k + 1), 1e-15);
}

TEST(FeatureVector, ZeroParametersGiveOnes) {
    const CircuitShape shape{3, 1, 2, HamiltonianModel::mapped_rydberg};
    std::vector<CircuitParams> circuits;
    for (double t : default_tau_grid()) circuits.push_back(CircuitParams::zeros(shape, t));
    Rng rng(1);
    const auto f = feature_vector(with_outputs(phase_state("101", 0.3, rng), 1), circuits);
    ASSERT_EQ(f.size(), 10u);
    for (double v : f) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(FeatureVector, MatchesDenseOracleAndIsBounded) {
    Rng r(2);
    std::mt19937_64 rng(2);
    const CircuitShape shape{3, 2, 2, HamiltonianModel::mapped_rydberg};
    const auto model = ClassifierModel::random(shape, default_tau_grid(), true, r, 1.0);
    const auto input = QuantumState::from_vector(3, oracle::random_state(8, rng));
    const auto f = features(model, input);
    ASSERT_EQ(f.size(), 20u);
    const Eigen::VectorXcd psi = with_outputs(input, 2).to_vector();
    for (std::size_t t = 0; t < model.taus.size(); ++t) {
        const Eigen::VectorXcd out = oracle::circuit_oracle(model.circuit(t)) * psi;
        for (int k = 0; k < 2; ++k) {
            const double z = out.dot(oracle::embed(5, {{3 + k, oracle::Z()}}) * out).real();
            EXPECT_NEAR(f[t * 2 + k], z, 1e-10);
            EXPECT_LE(std::abs(f[t * 2 + k]), 1.0);
        }
    }
}

TEST(Readout, ExamplesAndTieBreak) {
    ReadoutWeights w(1, 2);
    w << 1.0, -1.0;
    EXPECT_NEAR(readout(w, {0.5, 0.25})[0], std::tanh(0.25), 1e-15);
    const ReadoutWeights zero = ReadoutWeights::Zero(1, 2);
    const auto y = readout(zero, {0.3, 0.9});
    EXPECT_EQ(y[0], 0.0);
    EXPECT_EQ(predicted_labels(y), std::vector<int>{1});
    ReadoutWeights big(1, 1);
    big << 100.0;
    EXPECT_NEAR(readout(big, {1.0})[0], 1.0, 1e-15);
    EXPECT_THROW(readout(w, {1.0}), DimensionMismatch);
}

TEST(ClassIndex, OutputZeroIsMostSignificant) {
    EXPECT_EQ(class_index({-1, -1}), 0);
    EXPECT_EQ(class_index({-1, 1}), 1);
    EXPECT_EQ(class_index({1, -1}), 2);
    EXPECT_EQ(class_index({1, 1}), 3);
    EXPECT_EQ(class_index({1}), 1);
}

TEST(ClassifierModel, TrainableRoundTripAndSharing) {
    Rng r(3);
    const CircuitShape shape{2, 1, 2, HamiltonianModel::perceptron};
    auto shared = ClassifierModel::random(shape, default_tau_grid(), true, r);
    auto independent = ClassifierModel::random(shape, default_tau_grid(), false, r);
    EXPECT_EQ(shared.circuits.size(), 1u);
    EXPECT_EQ(independent.circuits.size(), 10u);
    EXPECT_EQ(shared.num_trainable(), shared.circuits[0].num_trainable() + 10);
    auto x = independent.trainable();
    x.back() = 0.75;
    independent.set_trainable(x);
    EXPECT_EQ(independent.weights(0, 9), 0.75);
    EXPECT_EQ(independent.trainable(), x);
    EXPECT_DOUBLE_EQ(shared.circuit(3).tau, 0.4);
    EXPECT_EQ(shared.circuit(3).angles, shared.circuit(7).angles);
}

TEST(ClassifierLoss, MatchesDirectSummation) {
    Rng r(4);
    std::mt19937_64 rng(4);
    const auto model = ClassifierModel::random({3, 2, 1, HamiltonianModel::mapped_rydberg}, {0.3, 0.9}, true, r, 1.0);
    const auto d = toy_dataset(3, 2, 5, rng);
    double expected = 0.0;
    for (const auto& s : d.samples) {
        const auto f = features(model, s.state);
        const Eigen::VectorXd y = model.weights * Eigen::Map<const Eigen::VectorXd>(f.data(), f.size());
        for (int k = 0; k < 2; ++k) expected += 0.5 * std::pow(s.labels[k] - std::tanh(y[k]), 2);
    }
    EXPECT_NEAR(classifier_loss(model, d), expected, 1e-12);
    EXPECT_EQ(classifier_loss(model, d, 1), classifier_loss(model, d, 3));
}

TEST(ClassifierLossGradient, AnalyticMatchesFiniteDifferences) {
    Rng r(5);
    std::mt19937_64 rng(5);
    for (bool shared : {true, false}) {
        for (int outputs = 1; outputs <= 2; ++outputs) {
            const auto model = ClassifierModel::random({3, outputs, 2, HamiltonianModel::mapped_rydberg},
                                                       {0.2, 0.7}, shared, r, 0.8);
            const auto d = toy_dataset(3, outputs, 4, rng);
            const auto g = classifier_loss_gradient(model, d);
            const auto fd = classifier_loss_gradient_fd(model, d);
            EXPECT_NEAR(g.loss, classifier_loss(model, d), 1e-12);
            ASSERT_EQ(g.gradient.size(), fd.size());
            for (std::size_t i = 0; i < fd.size(); ++i) {
                EXPECT_NEAR(g.gradient[i], fd[i], 1e-6 * std::max(1.0, std::abs(fd[i]))) << "component " << i;
            }
        }
    }
}

TEST(Evaluate, CountsFromStoredOutputs) {
    LabeledDataset d;
    const std::vector<std::vector<int>> labels{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
    for (const auto& l : labels) d.samples.push_back({QuantumState(1), l});
    const std::vector<std::vector<double>> perfect{{-0.5, -0.2}, {-0.1, 0.4}, {0.3, -0.9}, {0.2, 0.0}};
    const auto e = evaluate_outputs(perfect, d);
    EXPECT_EQ(e.accuracy, 1.0);
    for (int c = 0; c < 4; ++c) {
        for (int p = 0; p < 4; ++p) EXPECT_EQ(e.confusion[c][p], c == p ? 1 : 0);
    }
    const std::vector<std::vector<double>> constant(4, std::vector<double>{0.5, 0.5});
    const auto one_class = evaluate_outputs(constant, d);
    EXPECT_EQ(one_class.accuracy, 0.25);
    for (int c = 0; c < 4; ++c) EXPECT_EQ(one_class.confusion[c][3], 1);
}

TEST(Evaluate, RecountMatchesAndPermutationConsistency) {
    Rng r(6);
    const auto model = ClassifierModel::random({3, 2, 1, HamiltonianModel::mapped_rydberg}, {0.5}, true, r, 2.0);
    const auto d = build_entanglement_dataset(entanglement_classes(3), 3, {0.93, 0.97}, 0.97, 9);
    const auto e = evaluate(model, d);
    long correct = 0;
    for (std::size_t i = 0; i < d.size(); ++i) correct += e.predicted[i] == e.actual[i];
    EXPECT_DOUBLE_EQ(e.accuracy, static_cast<double>(correct) / static_cast<double>(d.size()));
    long total = 0;
    for (const auto& row : e.confusion) {
        for (long v : row) total += v;
    }
    EXPECT_EQ(total, static_cast<long>(d.size()));

    // Flipping the sign of the first label component and of the first
    // readout row permutes classes c -> c ^ 2 on both axes.
    auto flipped = d;
    for (auto& s : flipped.samples) s.labels[0] = -s.labels[0];
    auto outputs = e.outputs;
    for (auto& o : outputs) o[0] = -o[0];
    const auto f = evaluate_outputs(outputs, flipped);
    EXPECT_DOUBLE_EQ(f.accuracy, evaluate_outputs(e.outputs, d).accuracy);
    for (int c = 0; c < 4; ++c) {
        for (int p = 0; p < 4; ++p) {
            // A zero output stays a +1 prediction under the flip, which breaks
            // the symmetry only on exact ties.
            if (std::none_of(e.outputs.begin(), e.outputs.end(), [](const auto& o) { return o[0] == 0.0; })) {
                EXPECT_EQ(f.confusion[c ^ 2][p ^ 2], e.confusion[c][p]);
            }
        }
    }
}

TEST(TrainClassifier, ToySeparableDataset) {
    LabeledDataset train, test;
    train.samples.push_back({QuantumState::from_bits("000"), {-1}});
    train.samples.push_back({QuantumState::from_bits("111"), {1}});
    test = train;
    TrainConfig config;
    config.optimizer.max_epochs = 100;
    config.optimizer.learning_rate = 0.05;
    config.init_seed = 3;
    const auto result = train_classifier(train, test, config);
    EXPECT_EQ(result.test_accuracy, 1.0);
    ASSERT_FALSE(result.loss_history.empty());
    for (double l : result.loss_history) EXPECT_TRUE(std::isfinite(l));
    EXPECT_LE(result.final_loss, result.loss_history.front());
    EXPECT_LE(result.epochs, 100);
}

TEST(TrainClassifier, DeterministicForFixedSeed) {
    const auto train = build_phase_dataset({"Z2", "Z3"}, 4, 3, 0.3, 1);
    const auto test = build_phase_dataset({"Z2", "Z3"}, 4, 3, 0.3, 2);
    TrainConfig config;
    config.optimizer.max_epochs = 5;
    const auto a = train_classifier(train, test, config);
    const auto b = train_classifier(train, test, config);
    EXPECT_EQ(a.loss_history, b.loss_history);
    EXPECT_EQ(a.model.trainable(), b.model.trainable());
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(TrainClassifier, MemorizationBeatsZeroBaseline) {
    const auto train = build_phase_dataset({"Z2", "Z4"}, 4, 4, 0.2, 5);
    TrainConfig config;
    config.optimizer.max_epochs = 40;
    const auto trained = train_classifier(train, train, config);
    ClassifierModel zero = trained.model;
    std::vector<double> x(zero.num_trainable(), 0.0);
    zero.set_trainable(x);
    EXPECT_GE(trained.train_accuracy, evaluate(zero, train).accuracy);
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    c.taus.clear();
    EXPECT_THROW(c.validate(), Error);
    TrainConfig d;
    d.depth = 0;
    EXPECT_THROW(d.validate(), Error);
}
