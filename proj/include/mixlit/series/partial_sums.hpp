#pragma once

#include <mixlit/core/prime_set.hpp>
#include <mixlit/core/sieve.hpp>
#include <mixlit/core/valuation_patterns.hpp>
#include <mixlit/detail/parallel.hpp>
#include <mixlit/functions/approx_function.hpp>
#include <mixlit/functions/weight_function.hpp>
#include <mixlit/series/exact_sum.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixlit {

enum class SumKind {
    Theorem1,        // sum_{n>=2} (log n)^k psi(n)
    Theorem2,        // sum Psi(n)
    Lemma1Lhs,       // sum n (psi(n) / (n |n|_{p_1}...|n|_{p_k}))^s
    Hausdorff,       // sum n^(1-s) psi(n)^s
    NonMonotone,     // sum phi(n) (Psi(n) / n)^(1+eps)
    Simultaneous,    // sum Psi(n)^m
    Multiplicative,  // sum (log n)^(m-1) Psi(n), from n = 2 when m >= 2
    Measure,         // sum of half the measure of the solution set A_n
};

/// Which solution set Measure sums over. Each term is mu(A_n) / 2, so the
/// expected solution count is twice the partial sum.
enum class MeasureModel {
    Mixed,           // ||n alpha|| <= Psi:            min(2 Psi, 1)
    Reduced,         // plus gcd(a, n) = 1:            min(2 Psi, 1) phi(n)/n
    Simultaneous,    // m independent coordinates:     min(2 Psi, 1)^m
    Multiplicative,  // prod_j ||n alpha_j|| <= Psi:   P(prod of m uniforms <= 2^m Psi)
};

struct SeriesSpec {
    SumKind kind = SumKind::Theorem2;
    ApproxFunction psi = ApproxFunction::power_log(1, 2, 0);
    std::vector<WeightFunction> fs;  // empty: identity for every prime
    PrimeSet ps;
    unsigned k = 0;        // Theorem1 log power
    double s = 1.0;        // Lemma1Lhs, Hausdorff
    unsigned m = 1;        // Simultaneous, Multiplicative, Measure
    double epsilon = 0.5;  // NonMonotone
    MeasureModel model = MeasureModel::Mixed;
};

struct CheckpointValue {
    std::uint64_t N = 0;
    long double value = 0;
    long double error_bound = 0;
};

/// Partial sums of one series at an increasing checkpoint schedule.
struct PartialSumSeries {
    SeriesSpec spec;
    std::vector<std::uint64_t> schedule;
    std::vector<CheckpointValue> values;
};

/// Relative error budget of a single long double term (psi evaluation,
/// weight powers and the kind's own pow/log).
inline constexpr long double kTermRelativeError = 0x1p-50L;

inline std::string to_string(SumKind kind) {
    switch (kind) {
        case SumKind::Theorem1: return "theorem1";
        case SumKind::Theorem2: return "theorem2";
        case SumKind::Lemma1Lhs: return "lemma1_lhs";
        case SumKind::Hausdorff: return "hausdorff";
        case SumKind::NonMonotone: return "nonmonotone";
        case SumKind::Simultaneous: return "simultaneous";
        case SumKind::Multiplicative: return "multiplicative";
        case SumKind::Measure: return "measure";
    }
    return "?";
}

inline std::string to_string(MeasureModel model) {
    switch (model) {
        case MeasureModel::Mixed: return "mixed";
        case MeasureModel::Reduced: return "reduced";
        case MeasureModel::Simultaneous: return "simultaneous";
        case MeasureModel::Multiplicative: return "multiplicative";
    }
    return "?";
}

inline SumKind parse_sum_kind(const std::string& s) {
    for (SumKind k : {SumKind::Theorem1, SumKind::Theorem2, SumKind::Lemma1Lhs, SumKind::Hausdorff,
                      SumKind::NonMonotone, SumKind::Simultaneous, SumKind::Multiplicative, SumKind::Measure})
        if (to_string(k) == s) return k;
    throw ParseError("unknown sum kind '" + s + "'");
}

inline MeasureModel parse_measure_model(const std::string& s) {
    for (MeasureModel m : {MeasureModel::Mixed, MeasureModel::Reduced, MeasureModel::Simultaneous,
                           MeasureModel::Multiplicative})
        if (to_string(m) == s) return m;
    throw ParseError("unknown measure model '" + s + "'");
}

/// P(u_1 ... u_m <= z) for independent uniforms on [0,1].
inline long double product_uniform_cdf(long double z, unsigned m) {
    if (z <= 0) return 0;
    if (z >= 1) return 1;
    const long double L = -std::log(z);
    long double term = 1, acc = 1;
    for (unsigned i = 1; i < m; ++i) {
        term *= L / i;
        acc += term;
    }
    return z * acc;
}

namespace detail {

inline void validate(const SeriesSpec& spec, const std::vector<std::uint64_t>& schedule) {
    if (schedule.empty()) throw std::invalid_argument("empty checkpoint schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] <= schedule[i - 1]) throw std::invalid_argument("checkpoint schedule must be strictly increasing");
    if (schedule.front() < 1) throw std::invalid_argument("checkpoints must be >= 1");
    switch (spec.kind) {
        case SumKind::Theorem1:
            if (schedule.front() < 2) throw std::invalid_argument("theorem1 sums need N >= 2");
            break;
        case SumKind::Lemma1Lhs:
            if (!(spec.s > 0 && spec.s <= 1)) throw std::invalid_argument("lemma1 sums need s in (0,1]");
            break;
        case SumKind::Hausdorff:
            if (!(spec.s > 0 && spec.s < 1))
                throw std::invalid_argument("hausdorff sums need s in (0,1); s = 1 is excluded");
            break;
        case SumKind::NonMonotone:
            if (!(spec.epsilon > 0)) throw std::invalid_argument("nonmonotone sums need epsilon > 0");
            break;
        case SumKind::Simultaneous:
        case SumKind::Multiplicative:
        case SumKind::Measure:
            if (spec.m < 1) throw std::invalid_argument("m must be >= 1");
            break;
        case SumKind::Theorem2: break;
    }
    if (spec.psi.is_table() && spec.psi.table_size() < schedule.back())
        throw std::out_of_range("psi table shorter than the largest checkpoint");
}

/// Kinds whose terms ignore the prime set are summed over plain n.
inline bool uses_primes(SumKind kind) {
    return kind != SumKind::Theorem1 && kind != SumKind::Hausdorff;
}

inline bool needs_phi(const SeriesSpec& spec) {
    return spec.kind == SumKind::NonMonotone ||
           (spec.kind == SumKind::Measure && spec.model == MeasureModel::Reduced);
}

inline std::uint64_t first_index(const SeriesSpec& spec) {
    if (spec.kind == SumKind::Theorem1) return 2;
    if (spec.kind == SumKind::Multiplicative && spec.m >= 2) return 2;
    return 1;
}

inline long double powi(long double x, unsigned e) {
    long double r = 1;
    for (unsigned i = 0; i < e; ++i) r *= x;
    return r;
}

/// Term of the series at n, given the exact prime part P = prod p^v and
/// the weight factor W = prod 1/f_i(|n|_{p_i}).
inline long double series_term(const SeriesSpec& spec, std::uint64_t n, long double P, long double W,
                               const SieveTable* sieve) {
    const long double x = static_cast<long double>(n);
    const long double psi = spec.psi(n);
    if (psi == 0) return 0;
    switch (spec.kind) {
        case SumKind::Theorem1: return powi(std::log(x), spec.k) * psi;
        case SumKind::Theorem2: return psi * W;
        case SumKind::Lemma1Lhs:
            if (spec.s == 1) return psi * P;
            return x * std::pow(psi * P / x, static_cast<long double>(spec.s));
        case SumKind::Hausdorff:
            return std::pow(x, 1.0L - spec.s) * std::pow(psi, static_cast<long double>(spec.s));
        case SumKind::NonMonotone:
            return static_cast<long double>(sieve->phi_values()[n]) *
                   std::pow(psi * W / x, 1.0L + spec.epsilon);
        case SumKind::Simultaneous: return powi(psi * W, spec.m);
        case SumKind::Multiplicative: return powi(std::log(x), spec.m - 1) * psi * W;
        case SumKind::Measure: {
            const long double Psi = psi * W;
            const long double capped = std::min(2 * Psi, 1.0L);
            switch (spec.model) {
                case MeasureModel::Mixed: return capped / 2;
                case MeasureModel::Reduced: return capped * sieve->phi_values()[n] / x / 2;
                case MeasureModel::Simultaneous: return powi(capped, spec.m) / 2;
                case MeasureModel::Multiplicative:
                    return product_uniform_cdf(std::ldexp(Psi, static_cast<int>(spec.m)), spec.m) / 2;
            }
        }
    }
    return 0;
}

/// One unit of parallel work: a valuation tuple and a range of cofactors m.
struct SeriesWorkItem {
    std::vector<unsigned> exponents;
    std::uint64_t prime_power;
    std::uint64_t m_first, m_last;
};

inline std::vector<SeriesWorkItem> plan_work(std::uint64_t N, const PrimeSet& ps, std::uint64_t chunk) {
    std::vector<SeriesWorkItem> items;
    for_each_exponent_tuple(N, ps, [&](std::span<const unsigned> e, std::uint64_t pp) {
        const std::uint64_t top = N / pp;
        for (std::uint64_t first = 1; first <= top; first += chunk)
            items.push_back({{e.begin(), e.end()}, pp, first, std::min(top, first + chunk - 1)});
    });
    return items;
}

} // namespace detail

/// Evaluates the series at every checkpoint. Terms are summed exactly, so
/// values are independent of the worker count and of the schedule (a
/// shared checkpoint of two schedules gets bit-identical values).
inline PartialSumSeries evaluate_series(const SeriesSpec& spec, std::vector<std::uint64_t> schedule,
                                        std::size_t workers = 1, const SieveTable* sieve = nullptr) {
    detail::validate(spec, schedule);
    const std::uint64_t N = schedule.back();
    std::unique_ptr<SieveTable> own_sieve;
    if (detail::needs_phi(spec) && (sieve == nullptr || sieve->limit() < N)) {
        own_sieve = std::make_unique<SieveTable>(SieveTable::cached(N));
        sieve = own_sieve.get();
    }
    const PrimeSet ps = detail::uses_primes(spec.kind) ? spec.ps : PrimeSet{};
    const std::vector<WeightFunction> fs = resolve_weights(spec.fs, ps);
    const std::uint64_t first_n = detail::first_index(spec);
    const CoprimeWheel wheel(ps);
    const std::vector<detail::SeriesWorkItem> items = detail::plan_work(N, ps, 1u << 18);
    const std::size_t buckets = schedule.size();
    std::vector<std::vector<ExactSum>> partial(items.size());

    detail::parallel_for(items.size(), workers, [&](std::size_t i) {
        const auto& item = items[i];
        std::vector<ExactSum> acc(buckets);
        const long double W = weight_factor(fs, ps, item.exponents);
        const long double P = static_cast<long double>(item.prime_power);
        std::size_t bucket = 0;
        wheel.for_each(item.m_first, item.m_last, [&](std::uint64_t m) {
            const std::uint64_t n = item.prime_power * m;
            if (n < first_n) return;
            while (schedule[bucket] < n) ++bucket;
            acc[bucket].add(detail::series_term(spec, n, P, W, sieve));
        });
        partial[i] = std::move(acc);
    });

    std::vector<ExactSum> totals(buckets);
    for (const auto& acc : partial)
        for (std::size_t b = 0; b < buckets; ++b) totals[b].add(acc[b]);

    PartialSumSeries out{spec, schedule, {}};
    ExactSum running;
    for (std::size_t b = 0; b < buckets; ++b) {
        running.add(totals[b]);
        const long double v = running.value();
        const long double err = v * kTermRelativeError + std::ldexp(std::fabs(v), -63) +
                                std::ldexp(static_cast<long double>(running.dropped_terms()), -1152);
        out.values.push_back({schedule[b], v, err});
    }
    return out;
}

inline long double evaluate_single(const SeriesSpec& spec, std::uint64_t N, std::size_t workers = 1) {
    return evaluate_series(spec, {N}, workers).values.back().value;
}

// Named entry points, one per series of the theory.

inline long double sum_theorem1(std::uint64_t N, const ApproxFunction& psi, unsigned k) {
    SeriesSpec s{SumKind::Theorem1, psi, {}, {}};
    s.k = k;
    return evaluate_single(s, N);
}

inline long double sum_theorem2(std::uint64_t N, const ApproxFunction& psi, std::vector<WeightFunction> fs,
                                const PrimeSet& ps) {
    SeriesSpec s{SumKind::Theorem2, psi, std::move(fs), ps};
    return evaluate_single(s, N);
}

inline long double sum_lemma1_lhs(std::uint64_t N, const ApproxFunction& psi, const PrimeSet& ps, double s_exp) {
    SeriesSpec s{SumKind::Lemma1Lhs, psi, {}, ps};
    s.s = s_exp;
    return evaluate_single(s, N);
}

inline long double sum_hausdorff(std::uint64_t N, const ApproxFunction& psi, double s_exp) {
    SeriesSpec s{SumKind::Hausdorff, psi, {}, {}};
    s.s = s_exp;
    return evaluate_single(s, N);
}

inline long double sum_nonmonotone(std::uint64_t N, const ApproxFunction& psi, std::vector<WeightFunction> fs,
                                   const PrimeSet& ps, double epsilon) {
    SeriesSpec s{SumKind::NonMonotone, psi, std::move(fs), ps};
    s.epsilon = epsilon;
    return evaluate_single(s, N);
}

inline long double sum_simultaneous(std::uint64_t N, const ApproxFunction& psi, std::vector<WeightFunction> fs,
                                    const PrimeSet& ps, unsigned m) {
    SeriesSpec s{SumKind::Simultaneous, psi, std::move(fs), ps};
    s.m = m;
    return evaluate_single(s, N);
}

inline long double sum_multiplicative(std::uint64_t N, const ApproxFunction& psi, std::vector<WeightFunction> fs,
                                      const PrimeSet& ps, unsigned m) {
    SeriesSpec s{SumKind::Multiplicative, psi, std::move(fs), ps};
    s.m = m;
    return evaluate_single(s, N);
}

/// Duffin-Schaeffer ratio trajectory: at each checkpoint the ratio
/// [sum phi(n) Psi(n)/n] / [sum Psi(n)] and its running maximum.
struct DsRatioPoint {
    std::uint64_t N = 0;
    long double ratio = 0;
    long double running_max = 0;
};

inline std::vector<DsRatioPoint> ds_ratio(const ApproxFunction& psi, std::vector<WeightFunction> fs,
                                          const PrimeSet& ps, std::vector<std::uint64_t> schedule,
                                          std::size_t workers = 1) {
    SeriesSpec den{SumKind::Theorem2, psi, std::move(fs), ps};
    const std::uint64_t N = schedule.back();
    const SieveTable sieve = SieveTable::cached(N);
    const PartialSumSeries d = evaluate_series(den, schedule, workers);
    const PrimeSet& p = den.ps;
    const std::vector<WeightFunction> w = resolve_weights(den.fs, p);
    std::vector<ExactSum> buckets(schedule.size());
    std::size_t b = 0;
    // Plain n-order loop: the numerator needs phi(n) and valuations per n.
    for (std::uint64_t n = 1; n <= N; ++n) {
        while (schedule[b] < n) ++b;
        const long double Psi = combined_weight(psi, w, p, n);
        buckets[b].add(Psi * static_cast<long double>(sieve.phi_values()[n]) / static_cast<long double>(n));
    }
    std::vector<DsRatioPoint> out;
    ExactSum running;
    long double best = 0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        running.add(buckets[i]);
        const long double dv = d.values[i].value;
        if (!(dv > 0)) throw std::domain_error("ds_ratio: denominator sum is zero up to N=" + std::to_string(schedule[i]));
        const long double r = running.value() / dv;
        best = std::max(best, r);
        out.push_back({schedule[i], r, best});
    }
    return out;
}

/// Geometric schedule start, start*ratio, ... (count entries, rounded).
inline std::vector<std::uint64_t> geometric_schedule(std::uint64_t start, double ratio, std::size_t count) {
    if (start < 1 || !(ratio > 1) || count < 1) throw std::invalid_argument("bad geometric schedule");
    std::vector<std::uint64_t> out;
    long double x = static_cast<long double>(start);
    for (std::size_t i = 0; i < count; ++i) {
        const auto v = static_cast<std::uint64_t>(std::llround(x));
        if (out.empty() || v > out.back()) out.push_back(v);
        x *= ratio;
    }
    return out;
}

} // namespace mixlit
