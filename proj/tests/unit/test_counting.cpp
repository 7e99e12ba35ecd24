#include "support/counting_fixture.hpp"

#include <mixlit/counting.hpp>
#include <mixlit/realfield.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace mixlit;

namespace {

std::vector<std::uint64_t> certified_solutions(const CountResult& r) {
    std::vector<std::uint64_t> out;
    for (const auto& rec : r.records)
        if (!rec.ambiguous) out.push_back(rec.n);
    return out;
}

} // namespace

class OracleAgreement : public testing::TestWithParam<std::size_t> {};

TEST_P(OracleAgreement, EveryRealMatchesBruteForce) {
    const auto c = fixture::counter_cases()[GetParam()];
    const auto reals = fixture::counting_reals();
    const std::uint64_t N = 2000;
    const oracle::Thresholds th(c.psi, N);
    for (std::size_t i = 0; i < reals.size(); ++i) {
        const CountResult lib = fixture::library_count(c, reals, i, N);
        const oracle::Outcome ref = oracle::count(fixture::oracle_inputs(c, reals, i), th, c.form, c.reduced);
        ASSERT_TRUE(ref.undecided.empty()) << reals[i].text;
        EXPECT_EQ(lib.ambiguous, 0u) << reals[i].text;
        EXPECT_EQ(lib.count, ref.solutions.size()) << to_string(c.kind) << " " << reals[i].text;
        EXPECT_EQ(certified_solutions(lib), ref.solutions) << to_string(c.kind) << " " << reals[i].text;
    }
}

INSTANTIATE_TEST_SUITE_P(Counters, OracleAgreement, testing::Range<std::size_t>(0, 5),
                         [](const testing::TestParamInfo<std::size_t>& info) {
                             return to_string(fixture::counter_cases()[info.param].kind);
                         });

TEST(Counters, RationalHitsAreExactSolutions) {
    // 3/8: every multiple of 8 is an exact hit, and psi = 1/n^2 admits nothing else
    // beyond n = 4 because ||3n/8|| >= 1/8.
    CertifiedReal r = parse_real("rat:3/8");
    const CountResult res = count_mixed(r, 1000, ApproxFunction::power_log(1, 2, 0), {}, PrimeSet{});
    std::uint64_t expected = 0;
    for (std::uint64_t n = 1; n <= 1000; ++n) {
        const std::uint64_t k = (3 * n) % 8;
        const double d = std::min(k, 8 - k) / 8.0;
        if (d <= 1.0 / (double(n) * double(n))) ++expected;
    }
    EXPECT_EQ(res.count, expected);
    EXPECT_EQ(res.ambiguous, 0u);
}

TEST(Counters, WorkerCountDoesNotChangeAnything) {
    CertifiedReal a = parse_real("rand:seed=42");
    const ApproxFunction psi = ApproxFunction::power_log(1, 1, 1);
    CountOptions one;
    one.checkpoints = {1000, 50000};
    CountOptions many = one;
    many.workers = 4;
    const CountResult r1 = count_mixed(a, 300000, psi, {}, PrimeSet{2, 3}, one);
    const CountResult r4 = count_mixed(a, 300000, psi, {}, PrimeSet{2, 3}, many);
    EXPECT_EQ(r1.count, r4.count);
    EXPECT_EQ(certified_solutions(r1), certified_solutions(r4));
    ASSERT_EQ(r1.checkpoints.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(r1.checkpoints[i].N, r4.checkpoints[i].N);
        EXPECT_EQ(r1.checkpoints[i].count, r4.checkpoints[i].count);
    }
    EXPECT_EQ(r1.checkpoints.back().N, 300000u);
    EXPECT_EQ(r1.checkpoints.back().count, r1.count);
}

TEST(Counters, CheckpointsAreCumulative) {
    CertifiedReal a = parse_real("sqrt:2");
    CountOptions opt;
    opt.checkpoints = {10, 100, 1000};
    opt.keep_records = false;
    const CountResult r = count_mixed(a, 10000, ApproxFunction::power_log(1, 1, 0), {}, PrimeSet{2}, opt);
    EXPECT_TRUE(r.records.empty());
    for (std::size_t i = 1; i < r.checkpoints.size(); ++i) EXPECT_GE(r.checkpoints[i].count, r.checkpoints[i - 1].count);
    for (std::uint64_t N : {10ull, 100ull, 1000ull}) {
        CertifiedReal b = parse_real("sqrt:2");
        const CountResult s = count_mixed(b, N, ApproxFunction::power_log(1, 1, 0), {}, PrimeSet{2});
        const auto it = std::find_if(r.checkpoints.begin(), r.checkpoints.end(), [&](auto& c) { return c.N == N; });
        ASSERT_NE(it, r.checkpoints.end());
        EXPECT_EQ(it->count, s.count) << N;
    }
}

TEST(Counters, PrecisionCapLeavesAmbiguousNotWrong) {
    // A Liouville-like gap number has n alpha extremely close to integers
    // at n = 2^k; with a tiny cap the counter cannot decide those.
    CertifiedReal a = parse_real("gap:p=2,rho=8,d1=1");
    a.set_precision_cap(80);
    CountResult r;
    try {
        r = count_mixed(a, 5000, ApproxFunction::power_log(0, 0, 0), {}, PrimeSet{});
    } catch (const RefinementBudgetExhausted&) {
        SUCCEED();
        return;
    }
    // psi = 0 admits only exact hits; alpha is irrational beyond the window
    // so no n may be reported as a certified solution.
    EXPECT_EQ(r.count, 0u);
}

TEST(Counters, ParseCounterKind) {
    for (CounterKind k : {CounterKind::Mixed, CounterKind::Reduced, CounterKind::Gallagher, CounterKind::Simultaneous,
                          CounterKind::Multiplicative})
        EXPECT_EQ(parse_counter_kind(to_string(k)), k);
    EXPECT_THROW(parse_counter_kind("bogus"), ParseError);
}

TEST(Liminf, GoldenRatioApproachesOneOverRootFive) {
    std::vector<CertifiedReal> xs{golden()};
    LiminfOptions opt;
    opt.start = 100;
    const LiminfResult r = liminf_track(xs, 100000, liminf_preset("mixed", PrimeSet{}), opt);
    ASSERT_FALSE(r.champions.empty());
    const double v = static_cast<double>(r.final_min_hi);
    EXPECT_NEAR(v, 1 / std::sqrt(5.0), 1e-4);
    // F_k ||F_k phi|| = (1 - (-1)^k phi^-2k) / sqrt 5 approaches from below at odd k.
    EXPECT_LT(static_cast<double>(r.final_min_lo), 1 / std::sqrt(5.0));
    for (std::size_t i = 1; i < r.champions.size(); ++i) {
        EXPECT_GT(r.champions[i].n, r.champions[i - 1].n);
        EXPECT_LE(r.champions[i].running_min_hi, r.champions[i - 1].running_min_hi);
    }
}

TEST(Liminf, RationalReachesZero) {
    std::vector<CertifiedReal> xs{parse_real("rat:3/7")};
    const LiminfResult r = liminf_track(xs, 100, liminf_preset("mixed", PrimeSet{}));
    EXPECT_EQ(r.final_min_hi, 0);
    EXPECT_EQ(r.champions.back().n, 7u);
}

TEST(Liminf, WorkerIndependence) {
    std::vector<CertifiedReal> a{parse_real("sqrt:3")};
    std::vector<CertifiedReal> b{parse_real("sqrt:3")};
    const LiminfWeight w = liminf_preset("quadratic", PrimeSet{2});
    LiminfOptions o1, o4;
    o4.workers = 4;
    const LiminfResult r1 = liminf_track(a, 400000, w, o1);
    const LiminfResult r4 = liminf_track(b, 400000, w, o4);
    ASSERT_EQ(r1.champions.size(), r4.champions.size());
    for (std::size_t i = 0; i < r1.champions.size(); ++i) EXPECT_EQ(r1.champions[i].n, r4.champions[i].n);
}

TEST(Liminf, PresetValidation) {
    EXPECT_THROW(liminf_preset("abstract", PrimeSet{}), ParseError);
    EXPECT_THROW(liminf_preset("littlewood", PrimeSet{2}), ParseError);
    EXPECT_THROW(liminf_preset("furstenberg", PrimeSet{2, 3}, 0), ParseError);
    EXPECT_THROW(liminf_preset("nope", PrimeSet{}), ParseError);
    const LiminfWeight c = liminf_preset("custom:log=1,loglog=2", PrimeSet{});
    EXPECT_EQ(c.log_power, 1);
    EXPECT_EQ(c.first_n(), 3u);
    std::vector<CertifiedReal> one{golden()};
    EXPECT_THROW(liminf_track(one, 100, liminf_preset("littlewood", PrimeSet{})), std::invalid_argument);
}
