#include <mixlit/exponents.hpp>
#include <mixlit/realfield.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace mixlit;

TEST(Tau, BadlyApproximableNumbersHaveTauOne) {
    for (const char* s : {"golden", "sqrt:2", "surd:1,1,7,3"}) {
        CertifiedReal x = parse_real(s);
        const ExponentEstimate e = estimate_tau(x);
        ASSERT_TRUE(e.has_witness()) << s;
        EXPECT_NEAR(e.best_observed, 1.0, 0.02) << s;
        EXPECT_FALSE(e.truncated) << s;
        for (const auto& w : e.witness_sequence) EXPECT_GT(mpz_sizeinbase(w.n.get_mpz_t(), 2), e.tail_bits);
    }
}

TEST(Tau, GapSeriesOrderMatchesGrowthRate) {
    // sum 2^-d_j with d_{j+1} = 3 d_j: ||2^{d_j} x|| ~ 2^{-2 d_j}, so tau = 2.
    CertifiedReal x = parse_real("gap:p=2,rho=3,d1=1");
    const ExponentEstimate e = estimate_tau(x);
    EXPECT_NEAR(e.best_observed, 2.0, 0.03);
}

TEST(Tau, RationalHasNoWitnessBeyondItsDenominator) {
    CertifiedReal x = parse_real("rat:355/113");
    const ExponentEstimate e = estimate_tau(x);
    EXPECT_FALSE(e.has_witness());
    EXPECT_THROW(estimate_tau(x, 1), std::invalid_argument);
}

TEST(TauP, SandwichOnRandomReals) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        for (std::uint64_t p : {2ull, 3ull}) {
            CertifiedReal a = make_random(seed), b = make_random(seed);
            const ExponentEstimate t = estimate_tau(a);
            const ExponentEstimate tp = estimate_tau_p(b, p, 20000);
            EXPECT_LE(t.best_observed, tp.best_observed + 1e-9) << seed << " p=" << p;
            EXPECT_LE(tp.best_observed, t.best_observed + 1 + 1e-9) << seed << " p=" << p;
        }
    }
}

TEST(TauP, ScanRecordsIncrease) {
    CertifiedReal x = parse_real("sqrt:3");
    const ExponentEstimate e = estimate_tau_p(x, 2, 100000);
    EXPECT_EQ(e.scan_limit, 100000u);
    ASSERT_FALSE(e.scan_records.empty());
    for (std::size_t i = 1; i < e.scan_records.size(); ++i) {
        EXPECT_GT(e.scan_records[i].n, e.scan_records[i - 1].n);
        EXPECT_GT(e.scan_records[i].quotient, e.scan_records[i - 1].quotient);
    }
    EXPECT_THROW(estimate_tau_p(x, 4, 100), std::invalid_argument);
    EXPECT_THROW(estimate_tau_p(x, 2, 1), std::invalid_argument);
}

TEST(TauP, WitnessQuotientsAreHonest) {
    // Recompute each witness quotient from a certified distance.
    CertifiedReal x = construct_with_gap(3, 1.5, 0.5);
    const ExponentEstimate e = estimate_tau_p(x, 3, 1000);
    ASSERT_TRUE(e.has_witness());
    for (const auto& w : e.witness_sequence) {
        CertifiedReal y = construct_with_gap(3, 1.5, 0.5);
        const DyadicInterval d = dist_nearest_int_relative(y, w.n, 30);
        const double log2n = std::log2(mpz_class(w.n).get_d());
        const double log2d = std::log2(d.upper().get_d());
        const double q = (-log2d + padic_valuation(w.n, 3) * std::log2(3.0)) / log2n;
        EXPECT_LE(w.quotient, q + 1e-6);
        EXPECT_GE(w.quotient, q - 1e-6);
    }
}

class ConstructionGrid : public testing::TestWithParam<std::tuple<std::uint64_t, double, double>> {};

TEST_P(ConstructionGrid, HitsTargets) {
    const auto [p, t, delta] = GetParam();
    CertifiedReal a = construct_with_gap(p, t, delta), b = construct_with_gap(p, t, delta);
    const ExponentEstimate te = estimate_tau(a);
    const ExponentEstimate tpe = estimate_tau_p(b, p, 10000);
    // Near 2^130 the finite-range quotients still carry O(log n / n-bits)
    // noise, about 0.06 for t = 1.
    EXPECT_NEAR(te.best_observed, t, 0.1);
    EXPECT_NEAR(tpe.best_observed, t + delta, 0.1);
    EXPECT_EQ(*a.annotation("target_tau_p"), t + delta);
}

INSTANTIATE_TEST_SUITE_P(Samples, ConstructionGrid,
                         testing::Values(std::make_tuple(2ull, 1.0, 0.0), std::make_tuple(2ull, 2.0, 0.5),
                                         std::make_tuple(3ull, 1.5, 1.0), std::make_tuple(5ull, 3.0, 0.25)));

TEST(Construction, RejectsOutOfRangeTargets) {
    EXPECT_THROW(construct_with_gap(4, 2, 0.5), std::invalid_argument);
    EXPECT_THROW(construct_with_gap(2, 0.9, 0.5), std::invalid_argument);
    EXPECT_THROW(construct_with_gap(2, 2, 1.5), std::invalid_argument);
}
