#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "qperc/data.hpp"
#include "qperc/error.hpp"

using namespace qperc;

namespace {

/// Fidelity of a product state to a basis pattern as the product of the
/// per-qubit overlaps with the ideal bits.
double product_overlap(const QuantumState& s, const std::string& pattern) {
    return std::norm(s.amplitude(std::stoull(pattern, nullptr, 2)));
}

}  // namespace

TEST(NoisyQubit, ExamplesAndSymmetry) {
    const auto zero = noisy_qubit(0, 1.0);
    EXPECT_EQ(zero[0], Complex(1.0));
    EXPECT_EQ(zero[1], Complex(0.0));
    EXPECT_NEAR(std::norm(noisy_qubit(0, 0.7)[0]), 0.7, 1e-15);
    EXPECT_NEAR(std::norm(noisy_qubit(1, 0.9)[1]), 0.9, 1e-15);
    const auto a = noisy_qubit(0, 0.8), b = noisy_qubit(1, 0.8);
    EXPECT_EQ(a[0], b[1]);
    EXPECT_EQ(a[1], b[0]);
    EXPECT_THROW(noisy_qubit(0, 1.5), InvalidArgument);
    EXPECT_THROW(noisy_qubit(2, 0.5), InvalidArgument);
}

TEST(PhaseState, NoiselessIsBasisState) {
    Rng rng(1);
    EXPECT_EQ(phase_state("10101010", 0.0, rng), QuantumState::from_bits("10101010"));
    EXPECT_NO_THROW(phase_state("10001000", 0.3, rng));
    EXPECT_THROW(phase_state("", 0.3, rng), InvalidArgument);
    EXPECT_THROW(phase_state("102", 0.3, rng), InvalidArgument);
    EXPECT_THROW(phase_state("10", 1.0, rng), InvalidArgument);
}

TEST(PhaseState, FidelityIsProductOfPerQubitOverlaps) {
    const std::string pattern = "10010";
    Rng a(2), b(2);
    const auto s = phase_state(pattern, 0.3, a);
    std::uniform_real_distribution<double> dist(0.7, 1.0);
    double expected = 1.0;
    for (std::size_t q = 0; q < pattern.size(); ++q) {
        const double r = dist(b);
        EXPECT_GE(r, 0.7);
        expected *= r;
    }
    EXPECT_NEAR(fidelity(s, QuantumState::from_bits(pattern)), expected, 1e-13);
    EXPECT_NEAR(product_overlap(s, pattern), expected, 1e-13);
    for (const auto& amp : s.amplitudes()) {
        EXPECT_EQ(amp.imag(), 0.0);
        EXPECT_GE(amp.real(), 0.0);
    }
}

TEST(DisorderedState, NormalizedRealAndUnbiased) {
    Rng rng(3);
    double mean_z = 0.0;
    const int draws = 10000;
    for (int k = 0; k < draws; ++k) {
        const auto s = disordered_state(1, rng);
        EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
        EXPECT_GE(s.amplitude(0).real(), 0.0);
        EXPECT_GE(s.amplitude(1).real(), 0.0);
        mean_z += expectation_z(s, 0);
    }
    EXPECT_NEAR(mean_z / draws, 0.0, 0.05);
}

TEST(PhasePatterns, CyclicShifts) {
    EXPECT_EQ(phase_patterns("Z2", 8), (std::vector<std::string>{"10101010", "01010101"}));
    const auto z4 = phase_patterns("Z4", 8);
    EXPECT_EQ(z4.front(), "10001000");
    EXPECT_EQ(z4.size(), 4u);
    EXPECT_EQ(phase_patterns("Z3", 8).front(), "10010010");
    EXPECT_THROW(phase_patterns("Q2", 8), InvalidArgument);
    EXPECT_THROW(phase_patterns("Z9", 8), InvalidArgument);
}

TEST(PureState, EqualWeights) {
    const auto ghz = pure_state({"000", "111"});
    EXPECT_NEAR(std::abs(ghz.amplitude(0)), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::abs(ghz.amplitude(7)), 1.0 / std::sqrt(2.0), 1e-15);
    const auto w = entanglement_classes(8)[3].members[1];
    EXPECT_NEAR(fidelity(pure_state(w), pure_state(w)), 1.0, 1e-14);
}

TEST(EntangledState, AcceptedSamplesLieInWindow) {
    Rng rng(4);
    const FidelityWindow window{0.93, 0.97};
    const auto classes = entanglement_classes(4);
    for (const auto& cls : classes) {
        for (const auto& member : cls.members) {
            const auto s = entangled_state(member, window, 0.98, rng);
            const double f = fidelity(pure_state(member), s);
            EXPECT_GE(f, window.lo);
            EXPECT_LE(f, window.hi);
            EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
        }
    }
}

TEST(EntangledState, NearNoiselessIsRejectedWithDiagnostics) {
    Rng rng(5);
    const Superposition ghz{"00000000", "11111111"};
    try {
        entangled_state(ghz, {0.93, 0.97}, 0.999999, rng, 200);
        FAIL() << "expected RejectionBudgetExceeded";
    } catch (const RejectionBudgetExceeded& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("|11111111>"), std::string::npos);
        EXPECT_NE(what.find("0.93"), std::string::npos);
    }
}

TEST(EntanglementClasses, TablesAndLabels) {
    for (int n : {3, 4, 8}) {
        const auto classes = entanglement_classes(n);
        ASSERT_EQ(classes.size(), 4u);
        std::set<std::vector<int>> labels;
        for (const auto& c : classes) {
            labels.insert(c.labels);
            EXPECT_FALSE(c.members.empty());
            for (const auto& m : c.members) {
                for (const auto& b : m) EXPECT_EQ(static_cast<int>(b.size()), n);
            }
        }
        EXPECT_EQ(labels.size(), 4u);
    }
    const auto eight = entanglement_classes(8);
    EXPECT_EQ(eight[0].name, "separable");
    EXPECT_EQ(eight[0].labels, (std::vector<int>{-1, -1}));
    EXPECT_EQ(eight[1].name, "tri-separable");
    EXPECT_EQ(eight[2].name, "bi-separable");
    EXPECT_EQ(eight[3].name, "inseparable");
    EXPECT_EQ(eight[3].labels, (std::vector<int>{1, 1}));
    EXPECT_THROW(entanglement_classes(5), InvalidArgument);
}

TEST(BuildPhaseDataset, BalancedLabelledAndDeterministic) {
    const auto d = build_phase_dataset({"Z2", "Z3"}, 8, 36, 0.3, 11);
    ASSERT_EQ(d.size(), 72u);
    int minus = 0, plus = 0;
    for (const auto& s : d.samples) {
        ASSERT_EQ(s.labels.size(), 1u);
        (s.labels[0] == -1 ? minus : plus)++;
        EXPECT_NEAR(s.state.norm_squared(), 1.0, 1e-12);
    }
    EXPECT_EQ(minus, 36);
    EXPECT_EQ(plus, 36);
    EXPECT_EQ(d.metadata["classes"][0]["class"], "Z2");
    EXPECT_EQ(d.metadata["classes"][0]["label"][0], -1);
    const auto again = build_phase_dataset({"Z2", "Z3"}, 8, 36, 0.3, 11);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d.samples[i].state, again.samples[i].state);
    EXPECT_THROW(build_phase_dataset({"Z2", "Y3"}, 8, 2, 0.3, 1), InvalidArgument);
    EXPECT_THROW(build_phase_dataset({"Z2"}, 8, 2, 0.3, 1), InvalidArgument);
}

TEST(BuildPhaseDataset, NoiselessSamplesAreClassPatterns) {
    const auto d = build_phase_dataset({"Z2", "disordered"}, 6, 4, 0.0, 3);
    const auto z2 = phase_patterns("Z2", 6);
    for (const auto& s : d.samples) {
        if (s.labels[0] != -1) continue;
        const bool match = s.state == QuantumState::from_bits(z2[0]) || s.state == QuantumState::from_bits(z2[1]);
        EXPECT_TRUE(match);
    }
}

TEST(BuildEntanglementDataset, WindowAndLabels) {
    const auto classes = entanglement_classes(3);
    const auto d = build_entanglement_dataset(classes, 5, {0.93, 0.97}, 0.97, 6);
    ASSERT_EQ(d.size(), 20u);
    EXPECT_EQ(d.label_width(), 2);
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(d.samples[i].labels, classes[i / 5].labels);
    }
    EXPECT_NO_THROW(d.validate());
}

TEST(DatasetIo, BitExactRoundTrip) {
    const auto d = build_phase_dataset({"Z3", "Z4"}, 8, 3, 0.35, 17);
    std::stringstream ss;
    write_dataset(d, ss);
    const auto back = read_dataset(ss);
    ASSERT_EQ(back.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(back.samples[i].state, d.samples[i].state);
        EXPECT_EQ(back.samples[i].labels, d.samples[i].labels);
    }
    EXPECT_EQ(back.metadata, d.metadata);
}

TEST(DatasetIo, MalformedInputIsRejected) {
    std::stringstream bad("{\"record\": \"sample\"}\n");
    EXPECT_THROW(read_dataset(bad), ConfigError);
    std::stringstream broken("{\"record\": \"header\", \"count\": 1, \"metadata\": {}}\n{oops\n");
    EXPECT_THROW(read_dataset(broken), ConfigError);
}

TEST(LabeledDataset, ValidateCatchesInconsistency) {
    LabeledDataset d;
    d.samples.push_back({QuantumState(2), {1}});
    d.samples.push_back({QuantumState(3), {1}});
    EXPECT_THROW(d.validate(), DimensionMismatch);
    d.samples.back() = {QuantumState(2), {0}};
    EXPECT_THROW(d.validate(), InvalidArgument);
}
