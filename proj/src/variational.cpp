#include "qperc/variational.hpp"

#include <cmath>

#include "qperc/detail/kernels.hpp"
#include "qperc/error.hpp"
#include "qperc/hamiltonian.hpp"

namespace qperc {

namespace {

constexpr Complex kI{0.0, 1.0};

Gate2 rz(double theta) {
    Gate2 m;
    m << std::exp(-kI * theta), 0, 0, std::exp(kI * theta);
    return m;
}

Gate2 rx(double theta) {
    Gate2 m;
    const double c = std::cos(theta), s = std::sin(theta);
    m << c, Complex(0, -s), Complex(0, -s), c;
    return m;
}

std::size_t angle_index(const CircuitShape& s, int layer, int block, int qubit, int which) {
    return ((static_cast<std::size_t>(layer) * 2 + block) * s.num_qubits() + qubit) * 3 + which;
}

RydbergParams rydberg_from_raw(const CircuitShape& shape, std::span<const double> raw,
                               std::span<const double> drives) {
    const int n_in = shape.num_inputs;
    const int n_out = shape.num_outputs;
    const int stride = 2 + n_in;
    RydbergParams p = RydbergParams::zeros(n_in + n_out);
    for (int i = 0; i < n_in; ++i) p.omegas[i] = drives[i];
    for (int k = 0; k < n_out; ++k) {
        const int o = n_in + k;
        p.omegas[o] = raw[k * stride + 0];
        p.detunings[o] = raw[k * stride + 1];
        for (int i = 0; i < n_in; ++i) {
            const double v = raw[k * stride + 2 + i];
            p.interactions(i, o) = p.interactions(o, i) = v;
            p.detunings[i] += v;
        }
    }
    for (int i = 0; i < n_in; ++i) p.detunings[i] /= 2.0;
    return p;
}

LayerHamiltonian from_perceptron(const PerceptronParams& p) {
    LayerHamiltonian h;
    h.outputs.push_back({p.omega_o, p.delta_o, p.couplings});
    h.input_drives = p.input_drives;
    return h;
}

LayerHamiltonian from_two_output(const TwoOutputParams& p) {
    LayerHamiltonian h;
    for (int k = 0; k < 2; ++k) h.outputs.push_back({p.omega_o[k], p.delta_o[k], p.couplings[k]});
    h.input_drives = p.input_drives;
    return h;
}

LayerHamiltonian hamiltonian_from_raw(const CircuitShape& shape, std::span<const double> raw,
                                      std::span<const double> drives) {
    if (shape.model == HamiltonianModel::mapped_rydberg) {
        const RydbergParams ryd = rydberg_from_raw(shape, raw, drives);
        if (shape.num_outputs == 1) return from_perceptron(map_rydberg_to_perceptron(ryd).params);
        return from_two_output(map_two_output(ryd).params);
    }
    LayerHamiltonian h;
    const int stride = 2 + shape.num_inputs;
    for (int k = 0; k < shape.num_outputs; ++k) {
        const auto block = raw.subspan(k * stride, stride);
        h.outputs.push_back({block[0], block[1], std::vector<double>(block.begin() + 2, block.end())});
    }
    h.input_drives.assign(drives.begin(), drives.end());
    return h;
}

std::vector<double> flatten(const LayerHamiltonian& h) {
    std::vector<double> out;
    for (const auto& o : h.outputs) {
        out.push_back(o.omega);
        out.push_back(o.delta);
        out.insert(out.end(), o.couplings.begin(), o.couplings.end());
    }
    return out;
}

// d(perceptron-form coefficients) / d(raw layer coefficients). Both the
// identity and the Rydberg mapping are linear, so mapping unit vectors gives
// the exact Jacobian.
Eigen::MatrixXd coefficient_jacobian(const CircuitShape& shape) {
    const int c = shape.layer_coefficient_count();
    if (shape.model == HamiltonianModel::perceptron) return Eigen::MatrixXd::Identity(c, c);
    Eigen::MatrixXd jac(c, c);
    const std::vector<double> no_drives(shape.num_inputs, 0.0);
    std::vector<double> unit(c, 0.0);
    for (int j = 0; j < c; ++j) {
        unit[j] = 1.0;
        const auto col = flatten(hamiltonian_from_raw(shape, unit, no_drives));
        for (int r = 0; r < c; ++r) jac(r, j) = col[r];
        unit[j] = 0.0;
    }
    return jac;
}

double re_contract(const Gate2& m, const Gate2& k) { return 2.0 * (m.cwiseProduct(k)).sum().real(); }

}  // namespace

std::string to_string(HamiltonianModel model) {
    return model == HamiltonianModel::perceptron ? "perceptron" : "mapped-rydberg";
}

HamiltonianModel hamiltonian_model_from_string(const std::string& name) {
    if (name == "perceptron") return HamiltonianModel::perceptron;
    if (name == "mapped-rydberg") return HamiltonianModel::mapped_rydberg;
    throw InvalidArgument("unknown Hamiltonian model '" + name + "'");
}

void CircuitShape::validate() const {
    if (num_inputs < 1) throw InvalidArgument("circuit needs at least one input qubit");
    if (num_outputs != 1 && num_outputs != 2) throw InvalidArgument("circuit supports one or two outputs");
    if (depth < 1) throw InvalidArgument("circuit depth must be at least 1");
}

CircuitParams CircuitParams::zeros(const CircuitShape& shape, double tau) {
    shape.validate();
    CircuitParams p;
    p.shape = shape;
    p.tau = tau;
    p.angles.assign(shape.angle_count(), 0.0);
    p.hamiltonian.assign(shape.hamiltonian_count(), 0.0);
    p.input_drives.assign(shape.num_inputs, 0.0);
    return p;
}

CircuitParams CircuitParams::random(const CircuitShape& shape, double tau, Rng& rng, double scale) {
    CircuitParams p = zeros(shape, tau);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (auto& a : p.angles) a = dist(rng);
    for (auto& h : p.hamiltonian) h = dist(rng);
    return p;
}

double& CircuitParams::angle(int layer, int block, int qubit, Euler which) {
    return angles.at(angle_index(shape, layer, block, qubit, static_cast<int>(which)));
}

double CircuitParams::angle(int layer, int block, int qubit, Euler which) const {
    return angles.at(angle_index(shape, layer, block, qubit, static_cast<int>(which)));
}

std::span<double> CircuitParams::layer_coefficients(int layer) {
    const auto c = static_cast<std::size_t>(shape.layer_coefficient_count());
    return std::span<double>(hamiltonian).subspan(layer * c, c);
}

std::span<const double> CircuitParams::layer_coefficients(int layer) const {
    const auto c = static_cast<std::size_t>(shape.layer_coefficient_count());
    return std::span<const double>(hamiltonian).subspan(layer * c, c);
}

std::vector<double> CircuitParams::trainable() const {
    std::vector<double> out(angles);
    out.insert(out.end(), hamiltonian.begin(), hamiltonian.end());
    return out;
}

void CircuitParams::set_trainable(std::span<const double> values) {
    if (values.size() != num_trainable()) throw DimensionMismatch("trainable vector has the wrong length");
    std::copy(values.begin(), values.begin() + angles.size(), angles.begin());
    std::copy(values.begin() + angles.size(), values.end(), hamiltonian.begin());
}

bool CircuitParams::has_input_drives() const {
    return std::any_of(input_drives.begin(), input_drives.end(), [](double d) { return d != 0.0; });
}

void CircuitParams::validate() const {
    shape.validate();
    if (angles.size() != shape.angle_count()) throw InvalidArgument("angle array has the wrong size");
    if (hamiltonian.size() != shape.hamiltonian_count()) {
        throw InvalidArgument("Hamiltonian coefficient array has the wrong size");
    }
    if (static_cast<int>(input_drives.size()) != shape.num_inputs) {
        throw InvalidArgument("input_drives must have one entry per input");
    }
}

PerceptronParams LayerHamiltonian::single() const {
    if (outputs.size() != 1) throw InvalidArgument("layer does not have exactly one output");
    PerceptronParams p;
    p.num_inputs = static_cast<int>(input_drives.size());
    p.omega_o = outputs[0].omega;
    p.delta_o = outputs[0].delta;
    p.couplings = outputs[0].couplings;
    p.input_drives = input_drives;
    return p;
}

TwoOutputParams LayerHamiltonian::pair() const {
    if (outputs.size() != 2) throw InvalidArgument("layer does not have exactly two outputs");
    TwoOutputParams p;
    p.num_inputs = static_cast<int>(input_drives.size());
    for (int k = 0; k < 2; ++k) {
        p.omega_o[k] = outputs[k].omega;
        p.delta_o[k] = outputs[k].delta;
        p.couplings[k] = outputs[k].couplings;
    }
    p.input_drives = input_drives;
    return p;
}

RydbergParams layer_rydberg(const CircuitParams& params, int layer) {
    if (params.shape.model != HamiltonianModel::mapped_rydberg) {
        throw InvalidArgument("layer_rydberg needs a mapped-rydberg circuit");
    }
    return rydberg_from_raw(params.shape, params.layer_coefficients(layer), params.input_drives);
}

LayerHamiltonian layer_hamiltonian(const CircuitParams& params, int layer) {
    return hamiltonian_from_raw(params.shape, params.layer_coefficients(layer), params.input_drives);
}

DenseOperator build_layer(const CircuitParams& params, int layer) {
    const auto h = layer_hamiltonian(params, layer);
    return params.shape.num_outputs == 1 ? build_learning_perceptron(h.single()) : build_two_output(h.pair());
}

Gate2 euler_rotation(double gamma, double beta, double alpha) { return rz(gamma) * rx(beta) * rz(alpha); }

QuantumState with_outputs(const QuantumState& inputs, int num_outputs) {
    return inputs.tensor(QuantumState(num_outputs));
}

PreparedCircuit::PreparedCircuit(const CircuitParams& params) : params_(params) {
    params_.validate();
    const auto& s = params_.shape;
    const int n = s.num_qubits();
    dense_ = params_.has_input_drives();
    const Gate2 mz = -kI * pauli_z();
    const Gate2 mx = -kI * pauli_x();

    struct Euler3 {
        Gate2 g;
        std::array<std::pair<std::size_t, Gate2>, 3> d;
    };
    auto euler = [&](int l, int b, int q) {
        const double gm = params_.angle(l, b, q, Euler::gamma);
        const double be = params_.angle(l, b, q, Euler::beta);
        const double al = params_.angle(l, b, q, Euler::alpha);
        Euler3 e;
        e.g = euler_rotation(gm, be, al);
        e.d[0] = {angle_index(s, l, b, q, 0), mz * e.g};
        e.d[1] = {angle_index(s, l, b, q, 1), rz(gm) * mx * rx(be) * rz(al)};
        e.d[2] = {angle_index(s, l, b, q, 2), e.g * mz};
        return e;
    };

    segments_.assign(s.depth + 1, std::vector<Rotation>(n));
    for (int j = 0; j <= s.depth; ++j) {
        for (int q = 0; q < n; ++q) {
            Rotation& r = segments_[j][q];
            const Gate2 eye = Gate2::Identity();
            const bool has_after = j < s.depth;
            const bool has_before = j > 0;
            const Euler3 after = has_after ? euler(j, 0, q) : Euler3{eye, {}};
            const Euler3 before = has_before ? euler(j - 1, 1, q) : Euler3{eye, {}};
            r.gate = after.g * before.g;
            if (has_before) {
                for (const auto& [idx, d] : before.d) r.derivatives.emplace_back(idx, after.g * d);
            }
            if (has_after) {
                for (const auto& [idx, d] : after.d) r.derivatives.emplace_back(idx, d * before.g);
            }
        }
    }

    evolutions_.resize(s.depth);
    for (int l = 0; l < s.depth; ++l) {
        const auto h = layer_hamiltonian(params_, l);
        if (dense_) {
            dense_layers_.push_back(propagator(build_layer(params_, l), params_.tau));
            continue;
        }
        for (const auto& o : h.outputs) {
            Evolution e;
            e.fields = detail::configuration_fields(o.delta, o.couplings);
            const std::size_t m = e.fields.size();
            e.blocks.resize(m);
            e.undo.resize(m);
            e.d_field.resize(m);
            e.d_omega.resize(m);
            for (std::size_t z = 0; z < m; ++z) {
                e.blocks[z] = block_propagator(e.fields[z], o.omega, params_.tau);
                e.undo[z] = e.blocks[z].adjoint();
                detail::block_propagator_derivatives(e.fields[z], o.omega, params_.tau, e.d_field[z], e.d_omega[z]);
            }
            evolutions_[l].push_back(std::move(e));
        }
    }
    if (!dense_) jacobian_ = coefficient_jacobian(s);
}

void PreparedCircuit::apply_rotations(std::vector<Complex>& amps, std::size_t segment, bool skip_inputs) const {
    const int n = params_.shape.num_qubits();
    for (int q = skip_inputs ? params_.shape.num_inputs : 0; q < n; ++q) {
        detail::apply_gate(amps, n, q, segments_[segment][q].gate);
    }
}

QuantumState PreparedCircuit::forward(const QuantumState& input_state) const {
    const auto& s = params_.shape;
    const int n = s.num_qubits();
    if (input_state.num_qubits() != n) {
        throw DimensionMismatch("input state has " + std::to_string(input_state.num_qubits()) +
                                " qubits, circuit expects " + std::to_string(n));
    }
    std::vector<Complex> amps(input_state.amplitudes().begin(), input_state.amplitudes().end());
    for (int l = 0; l < s.depth; ++l) {
        apply_rotations(amps, l, false);
        if (dense_) {
            const Eigen::Map<Eigen::VectorXcd> v(amps.data(), static_cast<Eigen::Index>(amps.size()));
            const Eigen::VectorXcd next = dense_layers_[l] * v;
            std::copy(next.data(), next.data() + next.size(), amps.begin());
        } else {
            for (int k = 0; k < s.num_outputs; ++k) {
                detail::apply_conditioned(amps, n, s.num_inputs, s.num_inputs + k, evolutions_[l][k].blocks);
            }
        }
    }
    apply_rotations(amps, s.depth, false);
    return QuantumState(n, std::move(amps));
}

std::vector<double> PreparedCircuit::output_expectations(const QuantumState& input_state) const {
    if (dense_) {
        const QuantumState out = forward(input_state);
        std::vector<double> e;
        for (int k = 0; k < params_.shape.num_outputs; ++k) {
            e.push_back(detail::expectation_z(out.amplitudes(), out.num_qubits(), params_.shape.num_inputs + k));
        }
        return e;
    }
    return record(input_state).expectations;
}

PreparedCircuit::Tape PreparedCircuit::record(const QuantumState& input_state) const {
    if (dense_) throw InvalidArgument("reverse-mode sweep requires zero input drives");
    const auto& s = params_.shape;
    const int n = s.num_qubits();
    if (input_state.num_qubits() != n) throw DimensionMismatch("input state does not match circuit");
    Tape tape;
    tape.state.assign(input_state.amplitudes().begin(), input_state.amplitudes().end());
    for (int l = 0; l < s.depth; ++l) {
        apply_rotations(tape.state, l, false);
        for (int k = 0; k < s.num_outputs; ++k) {
            detail::apply_conditioned(tape.state, n, s.num_inputs, s.num_inputs + k, evolutions_[l][k].blocks);
        }
    }
    apply_rotations(tape.state, s.depth, true);
    for (int k = 0; k < s.num_outputs; ++k) {
        tape.expectations.push_back(detail::expectation_z(tape.state, n, s.num_inputs + k));
    }
    return tape;
}

std::vector<double> PreparedCircuit::reverse(const Tape& tape, std::span<const double> output_weights) const {
    if (dense_) throw InvalidArgument("reverse-mode sweep requires zero input drives");
    const auto& s = params_.shape;
    const int n = s.num_qubits();
    const int n_in = s.num_inputs;
    if (static_cast<int>(output_weights.size()) != s.num_outputs) {
        throw DimensionMismatch("need one weight per output qubit");
    }

    std::vector<Complex> psi(tape.state);
    std::vector<Complex> lambda(tape.state);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        double w = 0.0;
        for (int k = 0; k < s.num_outputs; ++k) {
            w += (i & detail::bit_stride(n, n_in + k)) ? -output_weights[k] : output_weights[k];
        }
        lambda[i] *= w;
    }

    std::vector<double> grad(params_.num_trainable(), 0.0);
    const int c = s.layer_coefficient_count();
    std::vector<double> grad_coeff(s.hamiltonian_count(), 0.0);
    std::vector<Gate2> overlaps(std::size_t{1} << n_in);
    std::vector<double> g_field(overlaps.size());

    for (int j = s.depth; j >= 0; --j) {
        for (int q = n - 1; q >= (j == s.depth ? n_in : 0); --q) {
            const Rotation& r = segments_[j][q];
            const Gate2 undo = r.gate.adjoint();
            detail::apply_gate(psi, n, q, undo);
            const Gate2 k = detail::pair_overlap(lambda, psi, n, q);
            for (const auto& [idx, d] : r.derivatives) grad[idx] += re_contract(d, k);
            detail::apply_gate(lambda, n, q, undo);
        }
        if (j == 0) break;
        const int l = j - 1;
        for (int k = s.num_outputs - 1; k >= 0; --k) {
            const Evolution& e = evolutions_[l][k];
            detail::apply_conditioned(psi, n, n_in, n_in + k, e.undo);
            detail::conditioned_overlaps(lambda, psi, n, n_in, n_in + k, overlaps);
            double g_omega = 0.0;
            for (std::size_t z = 0; z < overlaps.size(); ++z) {
                g_field[z] = re_contract(e.d_field[z], overlaps[z]);
                g_omega += re_contract(e.d_omega[z], overlaps[z]);
            }
            double* coeff = &grad_coeff[l * c + k * (2 + n_in)];
            coeff[0] += g_omega;
            for (std::size_t z = 0; z < g_field.size(); ++z) {
                coeff[1] -= g_field[z];
                for (int i = 0; i < n_in; ++i) {
                    const bool one = (z >> (n_in - 1 - i)) & 1U;
                    coeff[2 + i] += one ? -g_field[z] : g_field[z];
                }
            }
            detail::apply_conditioned(lambda, n, n_in, n_in + k, e.undo);
        }
    }

    const std::size_t offset = params_.angles.size();
    for (int l = 0; l < s.depth; ++l) {
        const Eigen::Map<const Eigen::VectorXd> g(&grad_coeff[l * c], c);
        const Eigen::VectorXd raw = jacobian_.transpose() * g;
        std::copy(raw.data(), raw.data() + c, grad.begin() + static_cast<std::ptrdiff_t>(offset + l * c));
    }
    return grad;
}

QuantumState forward(const CircuitParams& params, const QuantumState& input_state) {
    return PreparedCircuit(params).forward(input_state);
}

std::vector<double> output_expectations(const CircuitParams& params, const QuantumState& input_state) {
    return PreparedCircuit(params).output_expectations(input_state);
}

ExpectationGradient expectation_gradient(const CircuitParams& params, const QuantumState& input_state,
                                         std::span<const double> output_weights) {
    if (params.has_input_drives()) throw InvalidArgument("reverse-mode gradient requires zero input drives");
    const PreparedCircuit circuit(params);
    const auto tape = circuit.record(input_state);
    ExpectationGradient out;
    out.gradient = circuit.reverse(tape, output_weights);
    out.expectations = tape.expectations;
    return out;
}

double squared_error_loss(const std::vector<std::vector<double>>& predictions, const LabeledDataset& dataset) {
    if (dataset.samples.empty()) throw InvalidArgument("loss needs a nonempty dataset");
    if (predictions.size() != dataset.size()) throw DimensionMismatch("one prediction per sample required");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& labels = dataset.samples[i].labels;
        if (predictions[i].size() != labels.size()) throw DimensionMismatch("prediction width != label width");
        for (std::size_t k = 0; k < labels.size(); ++k) {
            const double r = labels[k] - predictions[i][k];
            acc += r * r;
        }
    }
    return 0.5 * acc;
}

double circuit_loss(const CircuitParams& params, const LabeledDataset& dataset, Observable observable) {
    if (dataset.samples.empty()) throw InvalidArgument("loss needs a nonempty dataset");
    std::vector<std::vector<double>> preds;
    preds.reserve(dataset.size());
    for (const auto& s : dataset.samples) {
        auto e = output_expectations(params, with_outputs(s.state, params.shape.num_outputs));
        for (auto& v : e) v = observable_value(observable, v);
        preds.push_back(std::move(e));
    }
    return squared_error_loss(preds, dataset);
}

std::vector<double> finite_difference_gradient(const Objective& f, std::span<const double> x, double h) {
    std::vector<double> probe(x.begin(), x.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down = f(probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

std::vector<double> circuit_loss_gradient(const CircuitParams& params, const LabeledDataset& dataset,
                                          Observable observable, double h) {
    CircuitParams work = params;
    const Objective f = [&](std::span<const double> x) {
        work.set_trainable(x);
        return circuit_loss(work, dataset, observable);
    };
    return finite_difference_gradient(f, params.trainable(), h);
}

std::string to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::gradient_descent:
            return "gradient_descent";
        case OptimizerKind::adam:
            return "adam";
        case OptimizerKind::adagrad:
            return "adagrad";
    }
    return "unknown";
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
    if (name == "gradient_descent") return OptimizerKind::gradient_descent;
    if (name == "adam") return OptimizerKind::adam;
    if (name == "adagrad") return OptimizerKind::adagrad;
    throw InvalidArgument("unknown optimizer '" + name + "'");
}

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
        throw InvalidArgument("Adam betas must lie in [0, 1)");
    }
    if (max_epochs < 0) throw InvalidArgument("max_epochs must be nonnegative");
    if (patience < 1) throw InvalidArgument("patience must be at least 1");
}

void optimizer_step(const OptimizerConfig& config, OptimizerState& state, std::span<double> params,
                    std::span<const double> gradient) {
    if (params.size() != gradient.size()) throw DimensionMismatch("parameter and gradient sizes differ");
    const std::size_t n = params.size();
    ++state.steps;
    switch (config.kind) {
        case OptimizerKind::gradient_descent:
            for (std::size_t i = 0; i < n; ++i) params[i] -= config.learning_rate * gradient[i];
            break;
        case OptimizerKind::adam: {
            state.first_moment.resize(n, 0.0);
            state.second_moment.resize(n, 0.0);
            const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.steps));
            const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.steps));
            for (std::size_t i = 0; i < n; ++i) {
                auto& m = state.first_moment[i];
                auto& v = state.second_moment[i];
                m = config.beta1 * m + (1.0 - config.beta1) * gradient[i];
                v = config.beta2 * v + (1.0 - config.beta2) * gradient[i] * gradient[i];
                params[i] -= config.learning_rate * (m / c1) / (std::sqrt(v / c2) + config.adam_epsilon);
            }
            break;
        }
        case OptimizerKind::adagrad:
            state.second_moment.resize(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                auto& g2 = state.second_moment[i];
                g2 += gradient[i] * gradient[i];
                params[i] -= config.learning_rate * gradient[i] / (std::sqrt(g2) + config.adagrad_epsilon);
            }
            break;
    }
}

bool converged(const OptimizerConfig& config, const std::vector<double>& loss_history) {
    const auto p = static_cast<std::size_t>(config.patience);
    if (loss_history.size() <= p) return false;
    return std::abs(loss_history.back() - loss_history[loss_history.size() - 1 - p]) < config.tolerance;
}

}  // namespace qperc
