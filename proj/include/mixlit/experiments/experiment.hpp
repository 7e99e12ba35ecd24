#pragma once

#include <mixlit/counting/counters.hpp>
#include <mixlit/detail/errors.hpp>
#include <mixlit/detail/parallel.hpp>
#include <mixlit/experiments/seeds.hpp>
#include <mixlit/realfield/parse.hpp>
#include <mixlit/series/classify.hpp>
#include <mixlit/series/partial_sums.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixlit {

/// A seeded Monte Carlo run: `sample_count` random reals (or vectors of
/// reals), each counted along the same checkpoint schedule.
struct ExperimentSpec {
    CounterKind kind = CounterKind::Mixed;
    ApproxFunction psi = ApproxFunction::power_log(1, 1, 1);
    std::vector<WeightFunction> fs;  // empty: identity on every prime
    PrimeSet ps;
    unsigned m = 1;  // reals per sample for simultaneous and multiplicative
    std::vector<std::uint64_t> schedule;
    std::size_t sample_count = 1;
    std::uint64_t master_seed = 0;
    std::uint32_t precision_cap = kDefaultPrecisionCap;
    /// Fixed reals (textual constructors) used for every sample instead of
    /// random ones; meant for smoke tests with degenerate inputs.
    std::vector<std::string> alpha_override;
    double max_ambiguous_fraction = 0.01;
};

/// Number of reals one sample of `spec` needs.
inline unsigned reals_per_sample(const ExperimentSpec& spec) {
    switch (spec.kind) {
        case CounterKind::Mixed:
        case CounterKind::Reduced: return 1;
        case CounterKind::Gallagher: return 2;
        case CounterKind::Simultaneous:
        case CounterKind::Multiplicative: return spec.m;
    }
    return 1;
}

inline void validate(const ExperimentSpec& spec) {
    if (spec.schedule.empty()) throw std::invalid_argument("experiment needs a checkpoint schedule");
    if (spec.schedule.front() < 1) throw std::invalid_argument("checkpoints must be >= 1");
    for (std::size_t i = 1; i < spec.schedule.size(); ++i)
        if (spec.schedule[i] <= spec.schedule[i - 1])
            throw std::invalid_argument("checkpoint schedule must be strictly increasing");
    if (spec.sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
    if (spec.m < 1) throw std::invalid_argument("m must be >= 1");
    if (!spec.alpha_override.empty() && spec.alpha_override.size() != reals_per_sample(spec))
        throw std::invalid_argument("alpha override needs " + std::to_string(reals_per_sample(spec)) + " reals");
    if (!(spec.max_ambiguous_fraction >= 0 && spec.max_ambiguous_fraction <= 1))
        throw std::invalid_argument("max_ambiguous_fraction must lie in [0,1]");
}

/// The series whose divergence decides the dichotomy for this counter.
inline SeriesSpec theory_series(const ExperimentSpec& spec) {
    SeriesSpec s;
    s.psi = spec.psi;
    s.fs = spec.fs;
    s.ps = spec.ps;
    switch (spec.kind) {
        case CounterKind::Mixed:
        case CounterKind::Reduced: s.kind = SumKind::Theorem2; break;
        case CounterKind::Gallagher:
            s.kind = SumKind::Multiplicative;
            s.m = 2;
            s.fs.clear();
            s.ps = PrimeSet{};
            break;
        case CounterKind::Simultaneous:
            s.kind = SumKind::Simultaneous;
            s.m = spec.m;
            break;
        case CounterKind::Multiplicative:
            s.kind = SumKind::Multiplicative;
            s.m = spec.m;
            break;
    }
    return s;
}

/// The measure series whose doubled partial sums are the predicted counts.
inline SeriesSpec prediction_series(const ExperimentSpec& spec) {
    SeriesSpec s = theory_series(spec);
    s.kind = SumKind::Measure;
    switch (spec.kind) {
        case CounterKind::Mixed: s.model = MeasureModel::Mixed; break;
        case CounterKind::Reduced: s.model = MeasureModel::Reduced; break;
        case CounterKind::Gallagher: s.model = MeasureModel::Multiplicative; break;
        case CounterKind::Simultaneous: s.model = MeasureModel::Simultaneous; break;
        case CounterKind::Multiplicative: s.model = MeasureModel::Multiplicative; break;
    }
    return s;
}

struct SampleTrajectory {
    std::size_t sample = 0;
    std::vector<std::uint64_t> seeds;  // one per real
    std::vector<CheckpointCount> points;
    bool plateau = false;   // no new solution over the last two checkpoint intervals
    bool tracking = false;  // count/prediction in [0.5, 2] at the last three checkpoints
};

struct CheckpointSummary {
    std::uint64_t N = 0;
    long double series_sum = 0;  // measure series partial sum
    long double prediction = 0;  // 2 * series_sum
    double ratio_q1 = 0, ratio_median = 0, ratio_q3 = 0;  // NaN when prediction is 0
    double count_median = 0;
    std::uint64_t ambiguous = 0;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<SampleTrajectory> samples;
    std::vector<CheckpointSummary> summary;
    std::optional<Convergence> expected;  // dichotomy class of the theory series
    std::size_t consistent_samples = 0;
    double consistent_fraction = 0;
    std::uint64_t solutions_total = 0;  // final counts summed over samples
    std::uint64_t ambiguous_total = 0;
    std::size_t workers = 1;
    double wall_seconds = 0;
};

/// Thrown when the undecided fraction exceeds the spec's limit, i.e. the
/// precision cap is too low for the requested N.
class ExperimentAborted : public RefinementBudgetExhausted {
public:
    using RefinementBudgetExhausted::RefinementBudgetExhausted;
};

inline constexpr double kTrackLow = 0.5, kTrackHigh = 2.0;

namespace detail {

/// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> xs, double q) {
    xs.erase(std::remove_if(xs.begin(), xs.end(), [](double x) { return std::isnan(x); }), xs.end());
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= xs.size()) return xs.back();
    return xs[i] + (pos - static_cast<double>(i)) * (xs[i + 1] - xs[i]);
}

inline std::vector<CertifiedReal> sample_reals(const ExperimentSpec& spec, const std::vector<std::uint64_t>& seeds,
                                               std::uint64_t prefix_cell = 0, unsigned prefix_bits = 0) {
    std::vector<CertifiedReal> reals;
    for (std::size_t j = 0; j < seeds.size(); ++j) {
        if (!spec.alpha_override.empty()) {
            reals.push_back(parse_real(spec.alpha_override[j]));
        } else {
            const std::uint64_t mask = prefix_bits ? (std::uint64_t(1) << prefix_bits) - 1 : 0;
            const std::uint64_t prefix = prefix_bits ? (prefix_cell >> (j * prefix_bits)) & mask : 0;
            reals.push_back(make_random(seeds[j], prefix, prefix_bits));
        }
        reals.back().set_precision_cap(spec.precision_cap);
    }
    return reals;
}

inline CountResult count_sample(const ExperimentSpec& spec, std::vector<CertifiedReal>& reals, std::uint64_t N,
                                const CountOptions& opt) {
    switch (spec.kind) {
        case CounterKind::Mixed: return count_mixed(reals[0], N, spec.psi, spec.fs, spec.ps, opt);
        case CounterKind::Reduced: return count_reduced(reals[0], N, spec.psi, spec.fs, spec.ps, opt);
        case CounterKind::Gallagher: return count_gallagher_pair(reals[0], reals[1], N, spec.psi, opt);
        case CounterKind::Simultaneous: return count_simultaneous(reals, N, spec.psi, spec.fs, spec.ps, false, opt);
        case CounterKind::Multiplicative: return count_multiplicative(reals, N, spec.psi, spec.fs, spec.ps, opt);
    }
    throw InvariantViolation("unknown counter kind");
}

inline std::vector<std::uint64_t> seeds_of(const ExperimentSpec& spec, std::size_t sample) {
    std::vector<std::uint64_t> seeds;
    for (unsigned j = 0; j < reals_per_sample(spec); ++j) seeds.push_back(sample_seed(spec.master_seed, sample, j));
    return seeds;
}

/// Splits `workers` between independent samples and each counter run.
inline std::pair<std::size_t, std::size_t> split_workers(std::size_t workers, std::size_t samples) {
    const std::size_t outer = std::max<std::size_t>(1, std::min(workers, samples));
    return {outer, std::max<std::size_t>(1, workers / outer)};
}

} // namespace detail

/// Runs every sample along the schedule and compares the counts with the
/// Borel-Cantelli prediction. Results depend only on the spec, never on
/// the worker count.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t workers = 1) {
    validate(spec);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.spec = spec;
    res.workers = workers;
    const std::size_t K = spec.schedule.size();
    const std::uint64_t N = spec.schedule.back();

    const PartialSumSeries pred = evaluate_series(prediction_series(spec), spec.schedule, workers);
    res.expected = classify_series(theory_series(spec));
    if (!res.expected && K >= 3) {
        const PartialSumSeries th = evaluate_series(theory_series(spec), spec.schedule, workers);
        res.expected = fit_growth(th.values).verdict;
    }

    const auto [outer, inner] = detail::split_workers(workers, spec.sample_count);
    res.samples.resize(spec.sample_count);
    detail::parallel_for(spec.sample_count, outer, [&, inner = inner](std::size_t i) {
        SampleTrajectory& tr = res.samples[i];
        tr.sample = i;
        tr.seeds = detail::seeds_of(spec, i);
        std::vector<CertifiedReal> reals = detail::sample_reals(spec, tr.seeds);
        CountOptions opt;
        opt.workers = inner;
        opt.checkpoints = spec.schedule;
        opt.keep_records = false;
        tr.points = detail::count_sample(spec, reals, N, opt).checkpoints;
    });

    for (auto& tr : res.samples) {
        if (tr.points.size() != K) throw InvariantViolation("counter returned a different checkpoint schedule");
        for (std::size_t k = 1; k < K; ++k)
            if (tr.points[k].count < tr.points[k - 1].count)
                throw InvariantViolation("count trajectory decreases for sample " + std::to_string(tr.sample));
        res.solutions_total += tr.points.back().count;
        res.ambiguous_total += tr.points.back().ambiguous;
    }
    const std::uint64_t decided = res.solutions_total + res.ambiguous_total;
    if (decided > 0 && static_cast<double>(res.ambiguous_total) > spec.max_ambiguous_fraction * static_cast<double>(decided))
        throw ExperimentAborted(std::to_string(res.ambiguous_total) + " of " + std::to_string(decided) +
                                " candidate solutions stayed ambiguous; raise the precision cap");

    for (std::size_t k = 0; k < K; ++k) {
        CheckpointSummary cs;
        cs.N = spec.schedule[k];
        cs.series_sum = pred.values[k].value;
        cs.prediction = 2 * cs.series_sum;
        std::vector<double> ratios, counts;
        for (const auto& tr : res.samples) {
            const double c = static_cast<double>(tr.points[k].count);
            counts.push_back(c);
            ratios.push_back(cs.prediction > 0 ? c / static_cast<double>(cs.prediction)
                                               : std::numeric_limits<double>::quiet_NaN());
            cs.ambiguous += tr.points[k].ambiguous;
        }
        cs.ratio_q1 = detail::quantile(ratios, 0.25);
        cs.ratio_median = detail::quantile(ratios, 0.5);
        cs.ratio_q3 = detail::quantile(ratios, 0.75);
        cs.count_median = detail::quantile(counts, 0.5);
        res.summary.push_back(cs);
    }

    if (K >= 3) {
        for (auto& tr : res.samples) {
            tr.plateau = tr.points[K - 1].count == tr.points[K - 3].count;
            tr.tracking = true;
            for (std::size_t k = K - 3; k < K; ++k) {
                const long double p = res.summary[k].prediction;
                const long double r = p > 0 ? tr.points[k].count / p : 0;
                if (!(r >= kTrackLow && r <= kTrackHigh)) tr.tracking = false;
            }
            if (res.expected && (*res.expected == Convergence::Converges ? tr.plateau : tr.tracking))
                ++res.consistent_samples;
        }
        res.consistent_fraction = static_cast<double>(res.consistent_samples) / static_cast<double>(spec.sample_count);
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

/// Fraction of sampled real vectors with at least one solution in a window.
struct MeasureOptions {
    std::uint64_t N0 = 1, N1 = 1000;
    /// Stratified sampling: 2^grid_bits cells per coordinate, sample i uses
    /// cell i mod 2^(grid_bits m). 0 samples uniformly.
    unsigned grid_bits = 0;
    double z = 1.959963984540054;  // 95% two-sided
    std::size_t workers = 1;
};

struct MeasureEstimate {
    double estimate = 0;
    double ci_lo = 0, ci_hi = 1;  // Wilson score interval
    std::size_t hits = 0;
    std::size_t samples = 0;    // decided samples
    std::size_t undecided = 0;  // no certified hit but some ambiguous n in the window
};

inline std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n), ph = static_cast<double>(hits) / nn, z2 = z * z;
    const double centre = (ph + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half = z / (1 + z2 / nn) * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn));
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline MeasureEstimate estimate_measure(const ExperimentSpec& spec, const MeasureOptions& opt) {
    if (spec.kind != CounterKind::Multiplicative) throw std::invalid_argument("estimate_measure needs the multiplicative counter");
    if (spec.m < 1) throw std::invalid_argument("m must be >= 1");
    if (spec.sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
    if (opt.N0 < 1 || opt.N1 < opt.N0) throw std::invalid_argument("measure window needs 1 <= N0 <= N1");
    if (opt.grid_bits * spec.m > 63) throw std::invalid_argument("grid too fine: grid_bits * m must be <= 63");
    if (!spec.alpha_override.empty() && spec.alpha_override.size() != spec.m)
        throw std::invalid_argument("alpha override needs m reals");

    struct Outcome {
        bool hit = false, undecided = false;
    };
    std::vector<Outcome> out(spec.sample_count);
    const auto [outer, inner] = detail::split_workers(opt.workers, spec.sample_count);
    detail::parallel_for(spec.sample_count, outer, [&, inner = inner](std::size_t i) {
        const std::uint64_t cell =
            opt.grid_bits ? static_cast<std::uint64_t>(i) & ((std::uint64_t(1) << (opt.grid_bits * spec.m)) - 1) : 0;
        std::vector<CertifiedReal> reals = detail::sample_reals(spec, detail::seeds_of(spec, i), cell, opt.grid_bits);
        CountOptions co;
        co.workers = inner;
        co.keep_records = false;
        if (opt.N0 > 1) co.checkpoints = {opt.N0 - 1, opt.N1};
        const CountResult r = detail::count_sample(spec, reals, opt.N1, co);
        const CheckpointCount before = opt.N0 > 1 ? r.checkpoints.front() : CheckpointCount{};
        out[i].hit = r.count > before.count;
        out[i].undecided = !out[i].hit && r.ambiguous > before.ambiguous;
    });

    MeasureEstimate est;
    for (const auto& o : out) {
        if (o.undecided) {
            ++est.undecided;
            continue;
        }
        ++est.samples;
        if (o.hit) ++est.hits;
    }
    if (static_cast<double>(est.undecided) > spec.max_ambiguous_fraction * static_cast<double>(spec.sample_count))
        throw ExperimentAborted(std::to_string(est.undecided) + " of " + std::to_string(spec.sample_count) +
                                " samples undecided; raise the precision cap");
    est.estimate = est.samples ? static_cast<double>(est.hits) / static_cast<double>(est.samples) : 0.0;
    std::tie(est.ci_lo, est.ci_hi) = wilson_interval(est.hits, est.samples, opt.z);
    return est;
}

} // namespace mixlit
