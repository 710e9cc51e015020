#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qperc/approx.hpp"
#include "qperc/error.hpp"

using namespace qperc;
using oracle::Mat;

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};

Mat rot_oracle(const Mat& pauli, double t) { return oracle::expm(-kI * (t / 2.0) * pauli); }

/// Global-phase-insensitive distance: min over phase of max |A - e^{i p} B|.
double phase_distance(const Mat& a, const Mat& b) {
    Eigen::Index r = 0, c = 0;
    b.cwiseAbs().maxCoeff(&r, &c);
    const Complex phase = a(r, c) / b(r, c);
    return (a - (phase / std::abs(phase)) * b).cwiseAbs().maxCoeff();
}

std::vector<double> random_x(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.5);
    std::vector<double> x(d);
    for (auto& v : x) v = g(rng);
    return x;
}

}  // namespace

TEST(RotationGates, HalfAngleConvention) {
    for (double t : {0.0, 0.4, -2.3}) {
        EXPECT_LT((rx_gate(t) - rot_oracle(oracle::X(), t)).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((ry_gate(t) - rot_oracle(oracle::Y(), t)).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((rz_gate(t) - rot_oracle(oracle::Z(), t)).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(U1Gate, IdentityAndFactorProduct) {
    const std::vector<double> zero{0.0, 0.0};
    EXPECT_LT((u1_gate(zero, 0.0, zero) - Gate2::Identity()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((u2_gate(0.0) - Gate2::Identity()).cwiseAbs().maxCoeff(), 1e-15);
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<double> a{u(rng), u(rng), u(rng)}, x{u(rng), u(rng), u(rng)};
        const double b = u(rng);
        Mat product = oracle::H();
        for (int k = 0; k < 3; ++k) product = product * rot_oracle(oracle::Z(), -a[k] * x[k]);
        product = oracle::H() * rot_oracle(oracle::Z(), -b) * [&] {
            Mat inner = Mat::Identity(2, 2);
            for (int k = 2; k >= 0; --k) inner = inner * rot_oracle(oracle::Z(), -a[k] * x[k]);
            return inner;
        }() * oracle::H();
        const Gate2 g = u1_gate(a, b, x);
        EXPECT_LT((g - product).cwiseAbs().maxCoeff(), 1e-12);
        const double l = b + a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
        EXPECT_LT((g - rot_oracle(oracle::X(), -l)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(VPrep, FourQubitSuperposition) {
    const DenseOperator v = v_prep(4);
    const Eigen::VectorXcd out = v.col(0);
    for (int k = 0; k < 16; ++k) {
        const bool on = k == 0b0000 || k == 0b0100 || k == 0b1000 || k == 0b1100;
        EXPECT_EQ(out[k], Complex(on ? 0.5 : 0.0)) << k;
    }
}

TEST(VPrep, SmallAndLargeRegisters) {
    EXPECT_LT((v_prep(2) - DenseOperator::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
    const Eigen::VectorXcd out = v_prep(5).col(0);
    for (int k = 0; k < 32; ++k) EXPECT_NEAR(std::abs(out[k]), k % 4 == 0 ? 1.0 / std::sqrt(8.0) : 0.0, 1e-15);
    EXPECT_TRUE(is_unitary(v_prep(5)));
    EXPECT_THROW(v_prep(1), InvalidArgument);
}

TEST(BlockUnitary, StructureAndSingleBlock) {
    const std::vector<double> x{0.3};
    EXPECT_LT((block_unitary(ApproxSpec::zeros(2, 1), x) - DenseOperator::Identity(8, 8)).cwiseAbs().maxCoeff(),
              1e-15);
    Rng rng(62);
    const auto one = ApproxSpec::random(1, 1, rng);
    const Mat expected = oracle::kron(u1_gate(one.a[0], one.b[0], x), u2_gate(one.gamma[0]));
    EXPECT_LT((block_unitary(one, x) - expected).cwiseAbs().maxCoeff(), 1e-15);
    const auto spec = ApproxSpec::random(4, 1, rng);
    const DenseOperator u = block_unitary(spec, x);
    EXPECT_TRUE(is_unitary(u, 1e-12));
    for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) {
            if (r / 4 != c / 4) {
                EXPECT_EQ(u(r, c), Complex(0.0));
            }
        }
    }
}

TEST(CircuitProbabilities, ZeroSpecAndEnumeration) {
    const std::vector<double> x{1.2};
    const auto p0 = circuit_probabilities(ApproxSpec::zeros(2, 1), x);
    EXPECT_NEAR(p0[0], 1.0, 1e-15);
    EXPECT_NEAR(p0[1] + p0[2] + p0[3], 0.0, 1e-15);

    Rng rng(63);
    std::mt19937_64 g(63);
    for (int n : {1, 2, 4, 8}) {
        const auto spec = ApproxSpec::random(n, 2, rng);
        const auto xv = random_x(2, g);
        const int nq = spec.num_qubits();
        Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(1 << nq);
        zero[0] = 1.0;
        const Eigen::VectorXcd psi = block_unitary(spec, xv) * v_prep(nq) * zero;
        std::array<double, 4> expected{};
        for (Eigen::Index k = 0; k < psi.size(); ++k) expected[k % 4] += std::norm(psi[k]);
        const auto p = circuit_probabilities(spec, xv);
        double total = 0.0;
        for (int m = 0; m < 4; ++m) {
            EXPECT_NEAR(p[m], expected[m], 1e-12);
            total += p[m];
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(FCircuit, ClosedFormExamples) {
    const std::vector<double> x{0.7, -0.2};
    auto spec = ApproxSpec::zeros(2, 2);
    spec.gamma = {kPi / 2, kPi / 2};
    EXPECT_NEAR(f_circuit(spec, x), 0.0, 1e-14);
    EXPECT_NEAR(f_cosine(spec, x), 0.0, 1e-14);
    auto one = ApproxSpec::zeros(1, 2);
    one.R = 2.5;
    EXPECT_NEAR(f_circuit(one, x), 2.5, 1e-14);
}

TEST(FCircuit, AgreesWithCosineFormAndIsBounded) {
    Rng rng(64);
    std::mt19937_64 g(64);
    for (int n : {1, 2, 4, 8}) {
        for (int d : {1, 3}) {
            auto spec = ApproxSpec::random(n, d, rng);
            spec.R = 1.7;
            for (int k = 0; k < 20; ++k) {
                const auto x = random_x(d, g);
                const double fc = f_circuit(spec, x);
                EXPECT_NEAR(fc, f_cosine(spec, x), 1e-9);
                EXPECT_LE(std::abs(fc), spec.R + 1e-12);
            }
        }
    }
}

TEST(ApproxSpec, Validation) {
    EXPECT_THROW(ApproxSpec::zeros(3, 1), InvalidArgument);
    auto bad_gamma = ApproxSpec::zeros(2, 1);
    bad_gamma.gamma[0] = 7.0;
    EXPECT_THROW(bad_gamma.validate(), InvalidArgument);
    auto bad_r = ApproxSpec::zeros(2, 1);
    bad_r.R = 0.0;
    EXPECT_THROW(bad_r.validate(), InvalidArgument);
}

TEST(ControlledRotation, DecompositionBranches) {
    std::mt19937_64 rng(65);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (auto axis : {RotationAxis::x, RotationAxis::y}) {
        const Mat pauli = axis == RotationAxis::x ? oracle::X() : oracle::Y();
        EXPECT_LT((controlled_rotation_decomposition(0.0, axis) - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff(),
                  1e-15);
        for (int trial = 0; trial < 20; ++trial) {
            const double phi = u(rng);
            const Eigen::Matrix4cd m = controlled_rotation_decomposition(phi, axis);
            EXPECT_LT((m.block(0, 0, 2, 2) - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_LT(phase_distance(m.block(2, 2, 2, 2), rot_oracle(pauli, 2.0 * phi)), 1e-12);
            EXPECT_LT(m.block(0, 2, 2, 2).cwiseAbs().maxCoeff(), 1e-15);
            EXPECT_LT(phase_distance(m, controlled_rotation(2.0 * phi, axis)), 1e-12);
        }
    }
}

TEST(RealizationCircuit, MatchesBlockComposite) {
    Rng rng(66);
    std::mt19937_64 g(66);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = ApproxSpec::random(2, 2, rng);
        const auto x = random_x(2, g);
        const Mat composite = block_unitary(spec, x) * v_prep(3);
        EXPECT_LT(phase_distance(realization_circuit(spec, x), composite), 1e-10);
    }
}

TEST(Targets, GaussianFourierNormByQuadrature) {
    const auto t = gaussian_target(1);
    EXPECT_DOUBLE_EQ(t.fourier_l1, 1.0);
    // The transform of exp(-pi x^2) is itself, so L1 = integral of f.
    double integral = 0.0;
    const double h = 1e-3;
    for (double x = -8.0; x <= 8.0; x += h) {
        const std::vector<double> v{x};
        integral += t.evaluate(v) * h;
    }
    EXPECT_NEAR(integral, 1.0, 1e-9);
}

TEST(Targets, SingleCosineIsRepresentedExactly) {
    const auto t = cosine_target({{1.0, {1.3}, 0.0}});
    EXPECT_DOUBLE_EQ(t.fourier_l1, 1.0);
    auto spec = ApproxSpec::zeros(1, 1);
    spec.a[0] = {1.3};
    Rng rng(67);
    std::vector<std::vector<double>> points;
    for (int k = 0; k < 50; ++k) points.push_back(t.sample_measure(rng));
    EXPECT_LT(empirical_rmse(spec, t, points), 1e-12);
    const auto sampled = sample_barron_features(t, 4, rng);
    EXPECT_LT(empirical_rmse(sampled, t, points), 1e-12);
}

TEST(Targets, NegativeAmplitudeUsesPiAmplitudeAngle) {
    const auto t = cosine_target({{-0.5, {2.0}, 0.3}});
    EXPECT_DOUBLE_EQ(t.fourier_l1, 0.5);
    Rng rng(68);
    const auto spec = sample_barron_features(t, 4, rng);
    std::vector<std::vector<double>> points;
    for (int k = 0; k < 50; ++k) points.push_back(t.sample_measure(rng));
    EXPECT_LT(empirical_rmse(spec, t, points), 1e-12);
}

TEST(FitRefine, DoesNotIncreaseError) {
    const auto t = gaussian_target(1);
    Rng rng(69);
    const auto spec = sample_barron_features(t, 8, rng);
    FitConfig config;
    config.samples = 256;
    config.optimizer.max_epochs = 50;
    config.optimizer.learning_rate = 0.01;
    const auto refined = fit_refine(spec, t, config);
    std::vector<std::vector<double>> points;
    Rng pr(config.seed);
    for (int k = 0; k < config.samples; ++k) points.push_back(t.sample_measure(pr));
    EXPECT_LE(empirical_rmse(refined, t, points), empirical_rmse(spec, t, points));
    EXPECT_NO_THROW(refined.validate());
}

TEST(ErrorCurve, ExactTargetAndBoundColumn) {
    const auto t = cosine_target({{1.0, {0.8}, 0.0}});
    Rng rng(70);
    const auto curve = error_curve(t, {4, 16}, 3, 100, rng);
    for (const auto& row : curve.rows) {
        EXPECT_LT(row.median_rmse, 1e-12);
        EXPECT_EQ(row.bound, t.fourier_l1 / std::sqrt(static_cast<double>(row.n)));
    }
    EXPECT_TRUE(std::isnan(curve.slope) || std::isfinite(curve.slope));
    EXPECT_EQ(curve.draws.size(), 6u);
}

TEST(ErrorCurve, ThreadCountDoesNotChangeResults) {
    const auto t = gaussian_target(1);
    Rng a(71), b(71);
    const auto one = error_curve(t, {4, 8}, 4, 200, a, 1);
    const auto two = error_curve(t, {4, 8}, 4, 200, b, 2);
    ASSERT_EQ(one.draws.size(), two.draws.size());
    for (std::size_t k = 0; k < one.draws.size(); ++k) EXPECT_EQ(one.draws[k].rmse, two.draws[k].rmse);
    EXPECT_EQ(one.slope, two.slope);
}
