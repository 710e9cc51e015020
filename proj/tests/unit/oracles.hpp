#pragma once

// Independent reference constructions used only by the tests: explicit
// Kronecker products, Eigen's matrix exponential and exhaustive sums.

#include <complex>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using C = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat I2() { return Mat::Identity(2, 2); }
inline Mat X() {
    Mat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline Mat Y() {
    Mat m(2, 2);
    m << 0, C(0, -1), C(0, 1), 0;
    return m;
}
inline Mat Z() {
    Mat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
inline Mat N() { return (I2() - Z()) / 2.0; }
inline Mat H() {
    Mat m(2, 2);
    m << 1, 1, 1, -1;
    return m / std::sqrt(2.0);
}

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
    return out;
}

/// Tensor product over n qubits with the given single-qubit factors placed
/// on their qubits (qubit 0 leftmost), identity elsewhere.
inline Mat embed(int n, const std::map<int, Mat>& factors) {
    Mat out = Mat::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
        const auto it = factors.find(q);
        out = kron(out, it == factors.end() ? I2() : it->second);
    }
    return out;
}

inline Mat expm(const Mat& a) { return a.exp(); }

inline Mat random_hermitian(int dim, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Mat m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) m(r, c) = C(g(rng), g(rng));
    }
    return (m + m.adjoint()) / 2.0;
}

inline Eigen::VectorXcd random_state(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = C(g(rng), g(rng));
    return v.normalized();
}

/// Richardson extrapolation of central differences at steps h and h/2.
template <class F>
double richardson_derivative(F&& f, std::vector<double> x, std::size_t i, double h) {
    auto central = [&](double step) {
        const double x0 = x[i];
        x[i] = x0 + step;
        const double up = f(x);
        x[i] = x0 - step;
        const double down = f(x);
        x[i] = x0;
        return (up - down) / (2.0 * step);
    };
    return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

}  // namespace oracle
