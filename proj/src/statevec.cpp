#include "qperc/statevec.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "qperc/detail/kernels.hpp"
#include "qperc/error.hpp"

namespace qperc {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_qubit(int num_qubits, int qubit) {
    if (qubit < 0 || qubit >= num_qubits) {
        std::ostringstream os;
        os << "qubit index " << qubit << " out of range for " << num_qubits << " qubits";
        throw InvalidArgument(os.str());
    }
}

void check_num_qubits(int num_qubits) {
    if (num_qubits < 1 || num_qubits > 30) {
        throw InvalidArgument("num_qubits must be in [1, 30], got " + std::to_string(num_qubits));
    }
}

double max_abs(const Eigen::Ref<const Eigen::MatrixXcd>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernels

namespace detail {

void apply_gate(std::span<Complex> amps, int num_qubits, int qubit, const Gate2& g) {
    const std::size_t stride = bit_stride(num_qubits, qubit);
    const std::size_t dim = amps.size();
    const Complex g00 = g(0, 0), g01 = g(0, 1), g10 = g(1, 0), g11 = g(1, 1);
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = amps[i];
            const Complex a1 = amps[i + stride];
            amps[i] = g00 * a0 + g01 * a1;
            amps[i + stride] = g10 * a0 + g11 * a1;
        }
    }
}

double expectation_z(std::span<const Complex> amps, int num_qubits, int qubit) {
    const std::size_t stride = bit_stride(num_qubits, qubit);
    double acc = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        acc += (i & stride) ? -p : p;
    }
    return acc;
}

Gate2 pair_overlap(std::span<const Complex> lambda, std::span<const Complex> psi, int num_qubits,
                   int qubit) {
    const std::size_t stride = bit_stride(num_qubits, qubit);
    Complex k00{}, k01{}, k10{}, k11{};
    for (std::size_t base = 0; base < psi.size(); base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex l0 = std::conj(lambda[i]);
            const Complex l1 = std::conj(lambda[i + stride]);
            const Complex p0 = psi[i];
            const Complex p1 = psi[i + stride];
            k00 += l0 * p0;
            k01 += l0 * p1;
            k10 += l1 * p0;
            k11 += l1 * p1;
        }
    }
    Gate2 k;
    k << k00, k01, k10, k11;
    return k;
}

std::vector<double> configuration_fields(double delta, std::span<const double> couplings) {
    const std::size_t n = couplings.size();
    std::vector<double> fields(std::size_t{1} << n);
    fields[0] = -delta;
    for (const double j : couplings) fields[0] += j;
    // Flipping input i from 0 to 1 changes s_i from +1 to -1. Input i is at
    // bit position n - 1 - i of the configuration index.
    for (std::size_t z = 1; z < fields.size(); ++z) {
        const int low = std::countr_zero(z);
        const std::size_t input = n - 1 - static_cast<std::size_t>(low);
        fields[z] = fields[z & (z - 1)] - 2.0 * couplings[input];
    }
    return fields;
}

void apply_conditioned(std::span<Complex> amps, int num_qubits, int num_inputs, int qubit,
                       std::span<const Gate2> gates) {
    const int shift = num_qubits - num_inputs;
    const std::size_t sector = std::size_t{1} << shift;
    const std::size_t stride = bit_stride(num_qubits, qubit);
    for (std::size_t z = 0; z < gates.size(); ++z) {
        const Gate2& g = gates[z];
        const std::size_t start = z << shift;
        for (std::size_t local = 0; local < sector; ++local) {
            if (local & stride) continue;
            const std::size_t i = start + local;
            const Complex a0 = amps[i];
            const Complex a1 = amps[i + stride];
            amps[i] = g(0, 0) * a0 + g(0, 1) * a1;
            amps[i + stride] = g(1, 0) * a0 + g(1, 1) * a1;
        }
    }
}

void conditioned_overlaps(std::span<const Complex> lambda, std::span<const Complex> psi,
                          int num_qubits, int num_inputs, int qubit, std::span<Gate2> out) {
    const int shift = num_qubits - num_inputs;
    const std::size_t sector = std::size_t{1} << shift;
    const std::size_t stride = bit_stride(num_qubits, qubit);
    for (std::size_t z = 0; z < out.size(); ++z) {
        Complex k00{}, k01{}, k10{}, k11{};
        const std::size_t start = z << shift;
        for (std::size_t local = 0; local < sector; ++local) {
            if (local & stride) continue;
            const std::size_t i = start + local;
            const Complex l0 = std::conj(lambda[i]);
            const Complex l1 = std::conj(lambda[i + stride]);
            k00 += l0 * psi[i];
            k01 += l0 * psi[i + stride];
            k10 += l1 * psi[i];
            k11 += l1 * psi[i + stride];
        }
        out[z] << k00, k01, k10, k11;
    }
}

namespace {

// sin(tau w) / w and (tau w cos(tau w) - sin(tau w)) / w^3, both smooth at w = 0.
void sinc_terms(double omega_eff, double tau, double& s_over_w, double& q) {
    const double x = tau * omega_eff;
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        s_over_w = tau * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
        q = tau * tau * tau * (-1.0 / 3.0 + x2 / 30.0);
    } else {
        const double s = std::sin(x);
        const double c = std::cos(x);
        s_over_w = s / omega_eff;
        q = (x * c - s) / (omega_eff * omega_eff * omega_eff);
    }
}

}  // namespace

void block_propagator_derivatives(double a, double omega, double tau, Gate2& d_a, Gate2& d_omega) {
    const double w = std::hypot(a, omega);
    double s_over_w = 0.0, q = 0.0;
    sinc_terms(w, tau, s_over_w, q);
    Gate2 gen;  // a Z + omega X
    gen << a, omega, omega, -a;
    const Gate2 id = Gate2::Identity();
    // U = cos(tau w) I - i (sin(tau w)/w) (a Z + omega X)
    d_a = (-tau * a * s_over_w) * id - kI * (q * a * gen + s_over_w * pauli_z());
    d_omega = (-tau * omega * s_over_w) * id - kI * (q * omega * gen + s_over_w * pauli_x());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// QuantumState

QuantumState::QuantumState(int num_qubits) : num_qubits_(num_qubits) {
    check_num_qubits(num_qubits);
    amps_.assign(std::size_t{1} << num_qubits, Complex{});
    amps_[0] = 1.0;
}

QuantumState::QuantumState(int num_qubits, std::vector<Complex> amplitudes)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
    check_num_qubits(num_qubits);
    if (amps_.size() != (std::size_t{1} << num_qubits)) {
        throw DimensionMismatch("amplitude vector length " + std::to_string(amps_.size()) +
                                " does not match 2^" + std::to_string(num_qubits));
    }
    const double n2 = norm_squared();
    if (std::abs(n2 - 1.0) > kNormTolerance) {
        throw InvalidArgument("state is not normalized: norm^2 = " + std::to_string(n2));
    }
}

QuantumState QuantumState::basis(int num_qubits, std::uint64_t index) {
    QuantumState s(num_qubits);
    if (index >= s.dim()) throw InvalidArgument("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
}

QuantumState QuantumState::from_bits(std::string_view bits) {
    std::uint64_t index = 0;
    for (const char c : bits) {
        if (c != '0' && c != '1') throw InvalidArgument("bit string may only contain 0 and 1");
        index = (index << 1) | static_cast<std::uint64_t>(c == '1');
    }
    return basis(static_cast<int>(bits.size()), index);
}

QuantumState QuantumState::product(std::span<const std::array<Complex, 2>> factors) {
    const int n = static_cast<int>(factors.size());
    check_num_qubits(n);
    std::vector<Complex> amps{1.0};
    amps.reserve(std::size_t{1} << n);
    for (const auto& f : factors) {
        std::vector<Complex> next(amps.size() * 2);
        for (std::size_t i = 0; i < amps.size(); ++i) {
            next[2 * i] = amps[i] * f[0];
            next[2 * i + 1] = amps[i] * f[1];
        }
        amps = std::move(next);
    }
    return QuantumState(n, std::move(amps));
}

QuantumState QuantumState::normalized(int num_qubits, std::vector<Complex> amplitudes) {
    double n2 = 0.0;
    for (const auto& a : amplitudes) n2 += std::norm(a);
    if (!(n2 > 0.0)) throw InvalidArgument("cannot normalize a zero vector");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : amplitudes) a *= inv;
    return QuantumState(num_qubits, std::move(amplitudes));
}

double QuantumState::norm_squared() const noexcept {
    double acc = 0.0;
    for (const auto& a : amps_) acc += std::norm(a);
    return acc;
}

QuantumState QuantumState::tensor(const QuantumState& other) const {
    std::vector<Complex> out(dim() * other.dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        for (std::size_t j = 0; j < other.dim(); ++j) out[i * other.dim() + j] = amps_[i] * other.amps_[j];
    }
    return QuantumState(Unchecked{}, num_qubits_ + other.num_qubits_, std::move(out));
}

Eigen::VectorXcd QuantumState::to_vector() const {
    return Eigen::Map<const Eigen::VectorXcd>(amps_.data(), static_cast<Eigen::Index>(amps_.size()));
}

QuantumState QuantumState::from_vector(int num_qubits, const Eigen::VectorXcd& v) {
    return QuantumState(num_qubits, std::vector<Complex>(v.data(), v.data() + v.size()));
}

// ---------------------------------------------------------------------------
// Operations

double observable_value(Observable obs, double expectation_z) {
    return obs == Observable::pauli_z ? expectation_z : 0.5 * (1.0 + expectation_z);
}

Gate2 pauli_x() {
    Gate2 m;
    m << 0, 1, 1, 0;
    return m;
}

Gate2 pauli_y() {
    Gate2 m;
    m << 0, -kI, kI, 0;
    return m;
}

Gate2 pauli_z() {
    Gate2 m;
    m << 1, 0, 0, -1;
    return m;
}

Gate2 hadamard() {
    Gate2 m;
    m << 1, 1, 1, -1;
    return m / std::sqrt(2.0);
}

bool is_unitary(const Eigen::Ref<const Eigen::MatrixXcd>& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const Eigen::MatrixXcd d = m.adjoint() * m - Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    return max_abs(d) <= tol;
}

bool is_hermitian(const Eigen::Ref<const Eigen::MatrixXcd>& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return max_abs(m - m.adjoint()) <= tol;
}

QuantumState apply_single_qubit(QuantumState state, int qubit, const Gate2& gate) {
    check_qubit(state.num_qubits(), qubit);
    if (!is_unitary(gate)) throw InvalidArgument("single-qubit gate is not unitary within 1e-10");
    detail::apply_gate(state.data(), state.num_qubits(), qubit, gate);
    return state;
}

QuantumState apply_two_qubit(QuantumState state, int q0, int q1, const Eigen::Matrix4cd& gate) {
    const int n = state.num_qubits();
    check_qubit(n, q0);
    check_qubit(n, q1);
    if (q0 == q1) throw InvalidArgument("two-qubit gate needs distinct qubits");
    if (!is_unitary(gate)) throw InvalidArgument("two-qubit gate is not unitary within 1e-10");
    const std::size_t s0 = detail::bit_stride(n, q0);
    const std::size_t s1 = detail::bit_stride(n, q1);
    auto amps = state.data();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & (s0 | s1)) continue;
        const std::array<std::size_t, 4> idx{i, i | s1, i | s0, i | s0 | s1};
        Eigen::Vector4cd v;
        for (int k = 0; k < 4; ++k) v[k] = amps[idx[k]];
        const Eigen::Vector4cd w = gate * v;
        for (int k = 0; k < 4; ++k) amps[idx[k]] = w[k];
    }
    return state;
}

QuantumState apply_operator(const DenseOperator& op, const QuantumState& state) {
    if (op.rows() != static_cast<Eigen::Index>(state.dim()) || op.cols() != op.rows()) {
        throw DimensionMismatch("operator dimension does not match state");
    }
    return QuantumState::from_vector(state.num_qubits(), op * state.to_vector());
}

double expectation_z(const QuantumState& state, int qubit) {
    check_qubit(state.num_qubits(), qubit);
    return detail::expectation_z(state.amplitudes(), state.num_qubits(), qubit);
}

double expectation(const QuantumState& state, const DenseOperator& op) {
    if (op.rows() != static_cast<Eigen::Index>(state.dim())) {
        throw DimensionMismatch("operator dimension does not match state");
    }
    const Eigen::VectorXcd v = state.to_vector();
    return v.dot(op * v).real();
}

Complex inner_product(const QuantumState& a, const QuantumState& b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw DimensionMismatch("states have different qubit counts");
    }
    Complex acc{};
    const auto x = a.amplitudes();
    const auto y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * y[i];
    return acc;
}

double fidelity(const QuantumState& a, const QuantumState& b) {
    return std::norm(inner_product(a, b));
}

DenseOperator propagator(const DenseOperator& hamiltonian, double tau) {
    if (!is_hermitian(hamiltonian, 1e-10)) throw InvalidArgument("Hamiltonian is not Hermitian");
    const Eigen::Index dim = hamiltonian.rows();
    const DenseOperator a = (-kI * tau) * hamiltonian;
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const DenseOperator scaled = a / std::ldexp(1.0, squarings);

    constexpr int kTaylorOrder = 20;
    // Horner: I + A(I + A/2(I + A/3(...)))
    DenseOperator result = DenseOperator::Identity(dim, dim);
    for (int k = kTaylorOrder; k >= 1; --k) {
        result = DenseOperator::Identity(dim, dim) + (scaled * result) / static_cast<double>(k);
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

DenseOperator propagator_eig(const DenseOperator& hamiltonian, double tau) {
    if (!is_hermitian(hamiltonian, 1e-10)) throw InvalidArgument("Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<DenseOperator> es(hamiltonian);
    const Eigen::VectorXcd phases =
        (es.eigenvalues().cast<Complex>() * (-kI * tau)).array().exp().matrix();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

QuantumState evolve_dense(const DenseOperator& hamiltonian, double tau, const QuantumState& state) {
    if (hamiltonian.rows() != static_cast<Eigen::Index>(state.dim())) {
        throw DimensionMismatch("Hamiltonian dimension does not match state");
    }
    if (tau == 0.0) return state;
    return QuantumState::from_vector(state.num_qubits(), propagator(hamiltonian, tau) * state.to_vector());
}

Gate2 block_propagator(double a, double omega, double tau) {
    const double w = std::hypot(a, omega);
    if (w == 0.0) return Gate2::Identity();
    const double c = std::cos(tau * w);
    const double s = std::sin(tau * w) / w;
    Gate2 u;
    u << Complex(c, -s * a), Complex(0.0, -s * omega), Complex(0.0, -s * omega), Complex(c, s * a);
    return u;
}

namespace {

void evolve_output(QuantumState& state, int num_inputs, int output_qubit, double delta, double omega,
                   std::span<const double> couplings, double tau) {
    const auto fields = detail::configuration_fields(delta, couplings);
    std::vector<Gate2> gates(fields.size());
    for (std::size_t z = 0; z < fields.size(); ++z) gates[z] = block_propagator(fields[z], omega, tau);
    detail::apply_conditioned(state.data(), state.num_qubits(), num_inputs, output_qubit, gates);
}

}  // namespace

QuantumState evolve_perceptron_blocks(const PerceptronParams& params, double tau, QuantumState state) {
    params.validate();
    if (params.has_input_drives()) {
        throw InvalidArgument("block evolution requires zero input drives; use evolve_dense");
    }
    if (state.num_qubits() != params.num_inputs + 1) {
        throw DimensionMismatch("state must hold num_inputs + 1 qubits");
    }
    evolve_output(state, params.num_inputs, params.num_inputs, params.delta_o, params.omega_o,
                  params.couplings, tau);
    return state;
}

QuantumState evolve_perceptron_blocks(const TwoOutputParams& params, double tau, QuantumState state) {
    params.validate();
    if (params.has_input_drives()) {
        throw InvalidArgument("block evolution requires zero input drives; use evolve_dense");
    }
    if (state.num_qubits() != params.num_inputs + 2) {
        throw DimensionMismatch("state must hold num_inputs + 2 qubits");
    }
    // The two output blocks act on different qubits and commute.
    for (int k = 0; k < 2; ++k) {
        evolve_output(state, params.num_inputs, params.num_inputs + k, params.delta_o[k], params.omega_o[k],
                      params.couplings[k], tau);
    }
    return state;
}

}  // namespace qperc
