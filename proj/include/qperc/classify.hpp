#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qperc/data.hpp"
#include "qperc/variational.hpp"

namespace qperc {

/// Readout weight matrix, num_outputs x num_features.
using ReadoutWeights = Eigen::MatrixXd;

/// 0.1, 0.2, ..., 1.0.
std::vector<double> default_tau_grid();

/// One forward run per circuit; records <Z> of each output qubit.
/// Layout is [circuit][output].
std::vector<double> feature_vector(const QuantumState& state, const std::vector<CircuitParams>& circuits);

/// tanh(w r), componentwise.
Eigen::VectorXd readout(const ReadoutWeights& w, const std::vector<double>& features);

/// sign per component with sign(0) = +1.
std::vector<int> predicted_labels(const Eigen::VectorXd& outputs);

/// Label vector in {-1, +1}^k to a class index in [0, 2^k): bit k is set for
/// label +1 and output 0 is the most significant bit.
int class_index(const std::vector<int>& labels);

/// Circuits probed over the tau grid plus the readout weights.
struct ClassifierModel {
    CircuitShape shape;
    std::vector<double> taus;
    /// true: one parameter set evaluated at every tau; false: one per tau.
    bool shared_parameters = true;
    std::vector<CircuitParams> circuits;
    ReadoutWeights weights;

    static ClassifierModel random(const CircuitShape& shape, const std::vector<double>& taus, bool shared,
                                  Rng& rng, double scale = 0.1);

    std::size_t num_features() const { return taus.size() * static_cast<std::size_t>(shape.num_outputs); }
    /// Circuit evaluated at taus[t].
    CircuitParams circuit(std::size_t t) const;
    std::vector<CircuitParams> circuits_over_grid() const;

    /// Circuit parameters (in circuit order) followed by the weights, row major.
    std::size_t num_trainable() const;
    std::vector<double> trainable() const;
    void set_trainable(std::span<const double> values);

    void validate() const;
    nlohmann::json to_json() const;
};

std::vector<double> features(const ClassifierModel& model, const QuantumState& input_state);

/// 0.5 * sum over samples and outputs of (label - tanh(w r))^2.
double classifier_loss(const ClassifierModel& model, const LabeledDataset& dataset, int threads = 1);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};

/// Loss and its gradient with respect to ClassifierModel::trainable(). The
/// readout part is differentiated in closed form and the circuit part by the
/// reverse-mode sweep. Requires zero input drives.
LossGradient classifier_loss_gradient(const ClassifierModel& model, const LabeledDataset& dataset,
                                      int threads = 1);

/// Central finite differences of classifier_loss.
std::vector<double> classifier_loss_gradient_fd(const ClassifierModel& model, const LabeledDataset& dataset,
                                                double h = kFiniteDifferenceStep, int threads = 1);

struct Evaluation {
    double accuracy = 0.0;
    /// confusion[true class][predicted class]
    std::vector<std::vector<long>> confusion;
    std::vector<std::vector<double>> outputs;
    std::vector<int> predicted;
    std::vector<int> actual;
};

/// Counts from stored readout outputs.
Evaluation evaluate_outputs(const std::vector<std::vector<double>>& outputs, const LabeledDataset& dataset);
Evaluation evaluate(const ClassifierModel& model, const LabeledDataset& dataset, int threads = 1);

struct TrainConfig {
    int depth = 2;
    std::vector<double> taus = default_tau_grid();
    HamiltonianModel model = HamiltonianModel::mapped_rydberg;
    bool shared_parameters = true;
    std::vector<double> input_drives;  // empty means all zero
    OptimizerConfig optimizer;
    std::uint64_t init_seed = 0;
    double init_scale = 0.1;
    int threads = 1;

    void validate() const;
    nlohmann::json to_json() const;
};

struct ExperimentResult {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::vector<std::vector<long>> train_confusion;
    std::vector<std::vector<long>> test_confusion;
    std::vector<double> loss_history;
    double final_loss = 0.0;
    bool converged = false;
    int epochs = 0;
    ClassifierModel model;
    Evaluation test_evaluation;
    std::uint64_t seed = 0;
    nlohmann::json config;

    nlohmann::json to_json() const;
};

/// Jointly trains circuit parameters and readout weights on `train`, then
/// scores both sets.
ExperimentResult train_classifier(const LabeledDataset& train, const LabeledDataset& test,
                                  const TrainConfig& config);

}  // namespace qperc
