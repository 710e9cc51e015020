#include "qperc/approx.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "qperc/detail/kernels.hpp"
#include "qperc/error.hpp"
#include "qperc/parallel.hpp"

namespace qperc {

namespace {

constexpr Complex kI{0.0, 1.0};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void check_point(const ApproxSpec& spec, std::span<const double> x) {
    if (static_cast<int>(x.size()) != spec.d) {
        throw DimensionMismatch("input has dimension " + std::to_string(x.size()) + ", spec expects " +
                                std::to_string(spec.d));
    }
}

Gate2 axis_rotation(double theta, RotationAxis axis) { return axis == RotationAxis::x ? rx_gate(theta) : ry_gate(theta); }

Eigen::Matrix4cd identity_tensor(const Gate2& g) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m.topLeftCorner<2, 2>() = g;
    m.bottomRightCorner<2, 2>() = g;
    return m;
}

Eigen::Matrix4cd kron2(const Gate2& hi, const Gate2& lo) {
    Eigen::Matrix4cd m;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) m.block<2, 2>(2 * r, 2 * c) = hi(r, c) * lo;
    }
    return m;
}

}  // namespace

Gate2 rx_gate(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    Gate2 m;
    m << c, Complex(0, -s), Complex(0, -s), c;
    return m;
}

Gate2 ry_gate(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    Gate2 m;
    m << c, -s, s, c;
    return m;
}

Gate2 rz_gate(double theta) {
    Gate2 m;
    m << std::exp(-kI * (theta / 2)), 0, 0, std::exp(kI * (theta / 2));
    return m;
}

ApproxSpec ApproxSpec::zeros(int n, int d) {
    ApproxSpec s;
    s.n = n;
    s.d = d;
    s.a.assign(n, std::vector<double>(d, 0.0));
    s.b.assign(n, 0.0);
    s.gamma.assign(n, 0.0);
    s.validate();
    return s;
}

ApproxSpec ApproxSpec::random(int n, int d, Rng& rng, double freq_scale) {
    ApproxSpec s = zeros(n, d);
    std::normal_distribution<double> normal(0.0, freq_scale);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> amplitude(0.5, 2.0);
    for (int i = 0; i < n; ++i) {
        for (auto& v : s.a[i]) v = normal(rng);
        s.b[i] = angle(rng);
        s.gamma[i] = angle(rng);
    }
    s.R = amplitude(rng);
    return s;
}

int ApproxSpec::num_qubits() const { return std::countr_zero(static_cast<unsigned>(4 * n)); }

double ApproxSpec::phase(int i, std::span<const double> x) const {
    double l = b[i];
    for (int k = 0; k < d; ++k) l += a[i][k] * x[k];
    return l;
}

void ApproxSpec::validate() const {
    if (n < 1) throw InvalidArgument("approximation needs at least one feature block");
    if (!std::has_single_bit(static_cast<unsigned>(4 * n))) {
        throw InvalidArgument("4n must be a power of two, got n = " + std::to_string(n));
    }
    if (d < 1) throw InvalidArgument("input dimension must be at least 1");
    if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n || static_cast<int>(gamma.size()) != n) {
        throw DimensionMismatch("a, b and gamma need one entry per feature block");
    }
    for (const auto& ai : a) {
        if (static_cast<int>(ai.size()) != d) throw DimensionMismatch("frequency vectors must have length d");
    }
    for (double g : gamma) {
        if (!(g >= 0.0 && g <= 2.0 * std::numbers::pi)) throw InvalidArgument("gamma must lie in [0, 2 pi]");
    }
    if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("R must be positive and finite");
}

nlohmann::json ApproxSpec::to_json() const {
    return {{"n", n}, {"d", d}, {"a", a}, {"b", b}, {"gamma", gamma}, {"R", R}};
}

Gate2 u1_gate(std::span<const double> a, double b, std::span<const double> x) {
    if (a.size() != x.size()) throw DimensionMismatch("frequency and input dimensions differ");
    Gate2 m = hadamard();
    for (std::size_t k = 0; k < a.size(); ++k) m = rz_gate(-a[k] * x[k]) * m;
    m = rz_gate(-b) * m;
    return hadamard() * m;
}

Gate2 u2_gate(double gamma) { return ry_gate(gamma); }

DenseOperator v_prep(int num_qubits) {
    if (num_qubits < 2) throw InvalidArgument("v_prep needs at least 2 qubits");
    // Entries of H^{(x)h} (x) I (x) I written directly so that they are
    // exactly +-2^{-h/2}.
    const int h = num_qubits - 2;
    const double scale = 1.0 / std::sqrt(static_cast<double>(std::uint64_t{1} << h));
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    DenseOperator v = DenseOperator::Zero(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            if ((r & 3) != (c & 3)) continue;
            const int parity = std::popcount(static_cast<std::uint64_t>((r >> 2) & (c >> 2))) & 1;
            v(r, c) = parity ? -scale : scale;
        }
    }
    return v;
}

DenseOperator block_unitary(const ApproxSpec& spec, std::span<const double> x) {
    spec.validate();
    check_point(spec, x);
    const Eigen::Index dim = 4 * spec.n;
    DenseOperator u = DenseOperator::Zero(dim, dim);
    for (int i = 0; i < spec.n; ++i) {
        u.block<4, 4>(4 * i, 4 * i) = kron2(u1_gate(spec.a[i], spec.b[i], x), u2_gate(spec.gamma[i]));
    }
    return u;
}

QuantumState circuit_state(const ApproxSpec& spec, std::span<const double> x) {
    spec.validate();
    check_point(spec, x);
    const int nq = spec.num_qubits();
    QuantumState state(nq);
    auto amps = state.data();
    for (int q = 0; q < nq - 2; ++q) detail::apply_gate(amps, nq, q, hadamard());
    for (int i = 0; i < spec.n; ++i) {
        const Eigen::Matrix4cd block = kron2(u1_gate(spec.a[i], spec.b[i], x), u2_gate(spec.gamma[i]));
        Eigen::Map<Eigen::Vector4cd> v(amps.data() + 4 * i);
        v = block * Eigen::Vector4cd(v);
    }
    return state;
}

std::array<double, 4> circuit_probabilities(const ApproxSpec& spec, std::span<const double> x) {
    const QuantumState state = circuit_state(spec, x);
    std::array<double, 4> p{};
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) p[i % 4] += std::norm(amps[i]);
    return p;
}

double f_circuit(const ApproxSpec& spec, std::span<const double> x) {
    const auto p = circuit_probabilities(spec, x);
    return spec.R - 2.0 * spec.R * (p[1] + p[2]);
}

double f_cosine(const ApproxSpec& spec, std::span<const double> x) {
    spec.validate();
    check_point(spec, x);
    double acc = 0.0;
    for (int i = 0; i < spec.n; ++i) acc += std::cos(spec.gamma[i]) * std::cos(spec.phase(i, x));
    return spec.R * acc / spec.n;
}

Eigen::Matrix4cd cz_gate() {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
    m(3, 3) = -1.0;
    return m;
}

Eigen::Matrix4cd controlled_rotation(double angle, RotationAxis axis) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
    m.bottomRightCorner<2, 2>() = axis_rotation(angle, axis);
    return m;
}

Eigen::Matrix4cd controlled_rotation_decomposition(double phi, RotationAxis axis) {
    const Eigen::Matrix4cd cz = cz_gate();
    return cz * identity_tensor(axis_rotation(-phi, axis)) * cz * identity_tensor(axis_rotation(phi, axis));
}

DenseOperator realization_circuit(const ApproxSpec& spec, std::span<const double> x) {
    spec.validate();
    check_point(spec, x);
    if (spec.n != 2) throw InvalidArgument("the gate realization is built for n = 2 (three qubits)");
    const double l0 = spec.phase(0, x);
    const double l1 = spec.phase(1, x);
    const Eigen::Matrix4cd cx = controlled_rotation_decomposition((l0 - l1) / 2.0, RotationAxis::x);
    const Eigen::Matrix4cd cy = controlled_rotation_decomposition((spec.gamma[1] - spec.gamma[0]) / 2.0,
                                                                  RotationAxis::y);
    DenseOperator out(8, 8);
    for (int col = 0; col < 8; ++col) {
        QuantumState s = QuantumState::basis(3, col);
        s = apply_single_qubit(std::move(s), 0, hadamard());
        s = apply_single_qubit(std::move(s), 1, rx_gate(-l0));
        s = apply_single_qubit(std::move(s), 2, ry_gate(spec.gamma[0]));
        s = apply_two_qubit(std::move(s), 0, 1, cx);
        s = apply_two_qubit(std::move(s), 0, 2, cy);
        out.col(col) = s.to_vector();
    }
    return out;
}

TargetFunction gaussian_target(int dim) {
    if (dim < 1) throw InvalidArgument("target dimension must be at least 1");
    TargetFunction t;
    t.name = "gaussian";
    t.dim = dim;
    t.fourier_l1 = 1.0;
    t.evaluate = [](std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return std::exp(-std::numbers::pi * r2);
    };
    t.sample_measure = [dim](Rng& rng) {
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> x(dim);
        for (auto& v : x) v = normal(rng);
        return x;
    };
    // |f^|/L1 = exp(-pi |xi|^2) is N(0, 1/(2 pi)) per coordinate; f^ > 0, so
    // the phase is zero. Angular frequency a = 2 pi xi.
    t.sample_feature = [dim](Rng& rng) {
        std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0 * std::numbers::pi));
        FourierFeature f;
        f.a.resize(dim);
        for (auto& v : f.a) v = 2.0 * std::numbers::pi * normal(rng);
        return f;
    };
    return t;
}

TargetFunction cosine_target(std::vector<CosineTerm> terms) {
    if (terms.empty()) throw InvalidArgument("cosine target needs at least one term");
    const int dim = static_cast<int>(terms.front().frequency.size());
    if (dim < 1) throw InvalidArgument("cosine frequencies must be nonempty");
    double l1 = 0.0;
    std::vector<double> weights;
    for (const auto& term : terms) {
        if (static_cast<int>(term.frequency.size()) != dim) throw DimensionMismatch("cosine frequencies differ in dimension");
        l1 += std::abs(term.amplitude);
        weights.push_back(std::abs(term.amplitude));
    }
    if (!(l1 > 0.0)) throw InvalidArgument("cosine target has zero Fourier L1 norm");
    TargetFunction t;
    t.name = terms.size() == 1 ? "cosine" : "multi_cosine";
    t.dim = dim;
    t.fourier_l1 = l1;
    t.evaluate = [terms](std::span<const double> x) {
        double acc = 0.0;
        for (const auto& term : terms) {
            double arg = term.phase;
            for (std::size_t k = 0; k < x.size(); ++k) arg += term.frequency[k] * x[k];
            acc += term.amplitude * std::cos(arg);
        }
        return acc;
    };
    t.sample_measure = [dim](Rng& rng) {
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> x(dim);
        for (auto& v : x) v = normal(rng);
        return x;
    };
    t.sample_feature = [terms, weights](Rng& rng) {
        std::size_t k = 0;
        if (terms.size() > 1) {
            std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
            k = pick(rng);
        }
        FourierFeature f;
        f.a = terms[k].frequency;
        f.b = terms[k].phase;
        f.gamma = terms[k].amplitude < 0.0 ? std::numbers::pi : 0.0;
        return f;
    };
    return t;
}

ApproxSpec sample_barron_features(const TargetFunction& target, int n, Rng& rng) {
    if (!target.sample_feature) throw InvalidArgument("target '" + target.name + "' has no frequency sampler");
    if (!(target.fourier_l1 > 0.0) || !std::isfinite(target.fourier_l1)) {
        throw InvalidArgument("target Fourier L1 norm must be positive and finite");
    }
    ApproxSpec spec = ApproxSpec::zeros(n, target.dim);
    for (int i = 0; i < n; ++i) {
        FourierFeature f = target.sample_feature(rng);
        if (static_cast<int>(f.a.size()) != target.dim) throw DimensionMismatch("sampled frequency has wrong dimension");
        spec.a[i] = std::move(f.a);
        spec.b[i] = f.b;
        spec.gamma[i] = f.gamma;
    }
    spec.R = target.fourier_l1;
    return spec;
}

double empirical_rmse(const ApproxSpec& spec, const TargetFunction& target,
                      const std::vector<std::vector<double>>& points) {
    if (points.empty()) throw InvalidArgument("rmse needs at least one point");
    double acc = 0.0;
    for (const auto& x : points) {
        const double e = f_circuit(spec, x) - target.evaluate(x);
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(points.size()));
}

ApproxSpec fit_refine(const ApproxSpec& spec, const TargetFunction& target, const FitConfig& config) {
    spec.validate();
    config.optimizer.validate();
    if (config.samples < 1) throw InvalidArgument("fit needs at least one sample");
    if (target.dim != spec.d) throw DimensionMismatch("target and spec dimensions differ");
    Rng rng(config.seed);
    std::vector<std::vector<double>> points;
    std::vector<double> values;
    for (int s = 0; s < config.samples; ++s) {
        points.push_back(target.sample_measure(rng));
        values.push_back(target.evaluate(points.back()));
    }

    const int n = spec.n, d = spec.d;
    // [a (n x d), b (n), gamma (n), R]
    std::vector<double> x;
    for (const auto& ai : spec.a) x.insert(x.end(), ai.begin(), ai.end());
    x.insert(x.end(), spec.b.begin(), spec.b.end());
    x.insert(x.end(), spec.gamma.begin(), spec.gamma.end());
    x.push_back(spec.R);
    const std::size_t ob = static_cast<std::size_t>(n) * d, og = ob + n, oR = og + n;

    ApproxSpec work = spec;
    auto unpack = [&] {
        for (int i = 0; i < n; ++i) {
            std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(i * d), d, work.a[i].begin());
            work.b[i] = x[ob + i];
            x[og + i] = std::fmod(x[og + i], 2.0 * std::numbers::pi);
            if (x[og + i] < 0.0) x[og + i] += 2.0 * std::numbers::pi;
            work.gamma[i] = x[og + i];
        }
        x[oR] = std::max(x[oR], 1e-12);
        work.R = x[oR];
    };

    OptimizerState state;
    std::vector<double> grad(x.size());
    for (int epoch = 0; epoch < config.optimizer.max_epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        const double scale = 2.0 / static_cast<double>(points.size());
        for (std::size_t s = 0; s < points.size(); ++s) {
            const auto& p = points[s];
            const double residual = f_cosine(work, p) - values[s];
            const double c = scale * residual * work.R / n;
            for (int i = 0; i < n; ++i) {
                const double l = work.phase(i, p);
                const double cg = std::cos(work.gamma[i]);
                const double dl = -c * cg * std::sin(l);
                for (int k = 0; k < d; ++k) grad[static_cast<std::size_t>(i) * d + k] += dl * p[k];
                grad[ob + i] += dl;
                grad[og + i] += -c * std::sin(work.gamma[i]) * std::cos(l);
                grad[oR] += scale * residual * cg * std::cos(l) / n;
            }
        }
        optimizer_step(config.optimizer, state, x, grad);
        unpack();
    }
    return work;
}

ErrorCurve error_curve(const TargetFunction& target, const std::vector<int>& n_list, int draws, int mu_samples,
                       Rng& rng, int threads) {
    if (n_list.empty()) throw InvalidArgument("n_list is empty");
    if (!std::is_sorted(n_list.begin(), n_list.end())) throw InvalidArgument("n_list must be ascending");
    if (draws < 1 || mu_samples < 1) throw InvalidArgument("draws and mu_samples must be positive");

    ErrorCurve curve;
    curve.target = target.name;
    for (int n : n_list) {
        for (int k = 0; k < draws; ++k) {
            ErrorDraw d;
            d.n = n;
            d.draw = k;
            d.seed = rng();
            d.bound = target.fourier_l1 / std::sqrt(static_cast<double>(n));
            curve.draws.push_back(d);
        }
    }
    parallel_for(curve.draws.size(), threads, [&](std::size_t i) {
        auto& d = curve.draws[i];
        Rng local(d.seed);
        const ApproxSpec spec = sample_barron_features(target, d.n, local);
        std::vector<std::vector<double>> points;
        points.reserve(mu_samples);
        for (int s = 0; s < mu_samples; ++s) points.push_back(target.sample_measure(local));
        d.rmse = empirical_rmse(spec, target, points);
    });

    std::vector<double> log_n, log_r;
    bool positive = true;
    for (std::size_t j = 0; j < n_list.size(); ++j) {
        std::vector<double> r;
        for (int k = 0; k < draws; ++k) r.push_back(curve.draws[j * draws + k].rmse);
        ErrorCurveRow row;
        row.n = n_list[j];
        row.median_rmse = median(r);
        row.bound = target.fourier_l1 / std::sqrt(static_cast<double>(row.n));
        positive = positive && row.median_rmse > 0.0;
        log_n.push_back(std::log(static_cast<double>(row.n)));
        log_r.push_back(positive ? std::log(row.median_rmse) : 0.0);
        curve.rows.push_back(row);
    }
    if (!positive || n_list.size() < 2) {
        curve.slope = std::numeric_limits<double>::quiet_NaN();
    } else {
        const Eigen::Map<const Eigen::VectorXd> xs(log_n.data(), static_cast<Eigen::Index>(log_n.size()));
        const Eigen::Map<const Eigen::VectorXd> ys(log_r.data(), static_cast<Eigen::Index>(log_r.size()));
        const double mx = xs.mean(), my = ys.mean();
        curve.slope = ((xs.array() - mx) * (ys.array() - my)).sum() / (xs.array() - mx).square().sum();
    }
    return curve;
}

}  // namespace qperc
