#include <mixlit/experiments.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mixlit;

namespace {

ExperimentSpec small_spec() {
    ExperimentSpec s;
    s.kind = CounterKind::Mixed;
    s.psi = ApproxFunction::power_log(1, 1, 1);
    s.ps = PrimeSet{2};
    s.schedule = {1000, 10000, 100000};
    s.sample_count = 6;
    s.master_seed = 77;
    return s;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(Seeds, SplitMixReferenceVector) {
    // Published SplitMix64 outputs for the state 1234567.
    EXPECT_EQ(detail::random_block(1234567, 0), 6457827717110365317ULL);
    EXPECT_EQ(detail::random_block(1234567, 1), 3203168211198807973ULL);
    EXPECT_EQ(detail::random_block(0, 0), 0xe220a8397b1dcdafULL);
}

TEST(Seeds, TreeDerivationIsStableAndDistinct) {
    EXPECT_EQ(sample_seed(5, 3, 1), detail::random_block(detail::random_block(5, 3), 1));
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 50; ++s)
        for (std::uint64_t c = 0; c < 3; ++c) seen.insert(sample_seed(20240601, s, c));
    EXPECT_EQ(seen.size(), 150u);
    EXPECT_NE(sample_seed(1, 0, 0), sample_seed(2, 0, 0));
}

TEST(Experiment, PredictionIsTwiceMeasureSeries) {
    const ExperimentSpec spec = small_spec();
    const ExperimentResult r = run_experiment(spec, 1);
    const auto series = evaluate_series(prediction_series(spec), spec.schedule);
    ASSERT_EQ(r.summary.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(r.summary[i].series_sum, series.values[i].value);
        EXPECT_NEAR(static_cast<double>(r.summary[i].prediction), 2 * static_cast<double>(series.values[i].value),
                    1e-12 * static_cast<double>(r.summary[i].prediction));
    }
    ASSERT_TRUE(r.expected);
    EXPECT_EQ(*r.expected, Convergence::Diverges);
}

TEST(Experiment, ReproducibleAcrossWorkerCounts) {
    const ExperimentSpec spec = small_spec();
    const ExperimentResult a = run_experiment(spec, 1);
    const ExperimentResult b = run_experiment(spec, 3);
    EXPECT_EQ(trajectories_csv(a), trajectories_csv(b));
    EXPECT_EQ(experiment_manifest(a).dump(), experiment_manifest(b).dump());
    EXPECT_EQ(experiment_summary(a).dump(), experiment_summary(b).dump());
}

TEST(Experiment, SamplesUseTheirDerivedSeeds) {
    ExperimentSpec spec = small_spec();
    spec.schedule = {5000};
    spec.sample_count = 3;
    const ExperimentResult r = run_experiment(spec, 1);
    for (std::size_t i = 0; i < 3; ++i) {
        ASSERT_EQ(r.samples[i].seeds.size(), 1u);
        EXPECT_EQ(r.samples[i].seeds[0], sample_seed(77, i, 0));
        CertifiedReal x = make_random(r.samples[i].seeds[0]);
        EXPECT_EQ(r.samples[i].points.back().count, count_mixed(x, 5000, spec.psi, {}, spec.ps).count);
    }
}

TEST(Experiment, ManifestRoundTripAndTamperDetection) {
    const ExperimentSpec spec = small_spec();
    const ExperimentResult r = run_experiment(spec, 1);
    Json manifest = experiment_manifest(r);
    const ExperimentSpec back = spec_from_manifest(manifest);
    EXPECT_EQ(spec_to_json(back).dump(), spec_to_json(spec).dump());
    manifest["seeds"][0][0] = 1;
    EXPECT_THROW(spec_from_manifest(manifest), ParseError);
    Json wrong = experiment_manifest(r);
    wrong["format"] = "something-else";
    EXPECT_THROW(spec_from_manifest(wrong), ParseError);
    Json broken = experiment_manifest(r);
    broken["spec"].erase("psi");
    EXPECT_THROW(spec_from_manifest(broken), ParseError);
}

TEST(Experiment, RunDirectoryLayout) {
    const ExperimentResult r = run_experiment(small_spec(), 1);
    const auto dir = std::filesystem::path(testing::TempDir()) / "mixlit_run";
    std::filesystem::remove_all(dir);
    write_experiment(r, dir);
    for (const char* f : {"manifest.json", "trajectories.csv", "summary.json", "timing.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    EXPECT_EQ(slurp(dir / "trajectories.csv"), trajectories_csv(r));
    const Json m = read_json_file(dir / "manifest.json");
    EXPECT_EQ(m.at("seed_algorithm"), kSeedAlgorithm);
    EXPECT_FALSE(m.contains("wall_seconds"));
    const std::string csv = trajectories_csv(r);
    EXPECT_EQ(csv.rfind("sample_id,N,count,ambiguous\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6 * 3);
}

TEST(Experiment, RationalOverridePlateaus) {
    ExperimentSpec spec = small_spec();
    spec.alpha_override = {"rat:1/3"};
    spec.psi = ApproxFunction::power_log(1, 2, 0);
    spec.ps = PrimeSet{};
    spec.sample_count = 2;
    const ExperimentResult r = run_experiment(spec, 1);
    // ||n/3|| <= 1/n^2 holds exactly at multiples of 3, and for n = 1 (1/3 <= 1).
    for (const auto& tr : r.samples) {
        EXPECT_EQ(tr.points.back().count, 1 + 100000 / 3);
        EXPECT_TRUE(tr.seeds.empty() || tr.seeds.size() == 1);
    }
}

TEST(Experiment, PrecisionCapSurfacesAsBudgetError) {
    ExperimentSpec spec = small_spec();
    spec.precision_cap = 90;  // below what the fixed-point window needs
    spec.schedule = {100, 1000};
    spec.sample_count = 1;
    EXPECT_THROW(run_experiment(spec, 1), RefinementBudgetExhausted);
}

TEST(Experiment, ValidationErrors) {
    ExperimentSpec spec = small_spec();
    spec.schedule = {};
    EXPECT_THROW(run_experiment(spec), std::invalid_argument);
    spec = small_spec();
    spec.sample_count = 0;
    EXPECT_THROW(run_experiment(spec), std::invalid_argument);
    spec = small_spec();
    spec.schedule = {10, 5};
    EXPECT_THROW(run_experiment(spec), std::invalid_argument);
}

TEST(Measure, WilsonInterval) {
    const auto [lo, hi] = wilson_interval(50, 100, 1.959963984540054);
    EXPECT_NEAR(lo, 0.4038, 1e-4);
    EXPECT_NEAR(hi, 0.5962, 1e-4);
    const auto [l0, h0] = wilson_interval(0, 20, 1.959963984540054);
    EXPECT_EQ(l0, 0);
    EXPECT_NEAR(h0, 0.1611, 1e-4);
}

TEST(Measure, TrivialThresholds) {
    ExperimentSpec spec;
    spec.kind = CounterKind::Multiplicative;
    spec.m = 2;
    spec.sample_count = 40;
    spec.master_seed = 3;
    spec.schedule = {1};
    MeasureOptions opt;
    opt.N0 = 1;
    opt.N1 = 50;
    // psi = 1/4 bounds every product of two distances, so each sample hits at n = 1.
    spec.psi = ApproxFunction::power_log(0.25, 0, 0);
    MeasureEstimate all = estimate_measure(spec, opt);
    EXPECT_EQ(all.hits, 40u);
    EXPECT_EQ(all.estimate, 1.0);
    spec.psi = ApproxFunction::power_log(0, 0, 0);
    MeasureEstimate none = estimate_measure(spec, opt);
    EXPECT_EQ(none.hits, 0u);
    EXPECT_LT(none.ci_hi, 0.1);
    spec.kind = CounterKind::Mixed;
    EXPECT_THROW(estimate_measure(spec, opt), std::invalid_argument);
}

TEST(Measure, StratifiedGridIsDeterministic) {
    ExperimentSpec spec;
    spec.kind = CounterKind::Multiplicative;
    spec.m = 2;
    spec.sample_count = 64;
    spec.master_seed = 9;
    spec.schedule = {1};
    spec.psi = ApproxFunction::power_log(1, 1, 0);
    MeasureOptions opt;
    opt.N0 = 100;
    opt.N1 = 2000;
    opt.grid_bits = 3;
    const MeasureEstimate a = estimate_measure(spec, opt);
    opt.workers = 4;
    const MeasureEstimate b = estimate_measure(spec, opt);
    EXPECT_EQ(a.hits, b.hits);
    EXPECT_EQ(a.samples + a.undecided, 64u);
    EXPECT_LE(a.ci_lo, a.estimate);
    EXPECT_GE(a.ci_hi, a.estimate);
}
