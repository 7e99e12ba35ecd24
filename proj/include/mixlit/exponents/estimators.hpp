#pragma once

#include <mixlit/core/prime_set.hpp>
#include <mixlit/core/valuation.hpp>
#include <mixlit/detail/errors.hpp>
#include <mixlit/detail/u128.hpp>
#include <mixlit/realfield/certified_real.hpp>
#include <mixlit/realfield/continued_fraction.hpp>
#include <mixlit/realfield/distance.hpp>
#include <mixlit/realfield/fixed_window.hpp>

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace mixlit {

struct ExponentWitness {
    mpz_class n;
    double quotient = 0;  // ||n xi|| (times |n|_p for tau_p) <= n^-quotient
};

/// Finite-range lower bound for a limsup-type exponent. Only n >= 2^tail_bits
/// count towards best_observed: small n can show an isolated large quotient
/// that says nothing about the limit.
struct ExponentEstimate {
    double best_observed = -std::numeric_limits<double>::infinity();
    std::vector<ExponentWitness> witness_sequence;  // record setters, increasing n
    std::vector<ExponentWitness> scan_records;      // record setters of the exhaustive scan (all n >= 2)
    std::size_t convergents_used = 0;
    std::size_t max_n_bits = 0;
    std::uint64_t scan_limit = 0;
    std::uint32_t tail_bits = 0;
    bool truncated = false;  // the precision cap stopped the convergent walk early

    bool has_witness() const { return !witness_sequence.empty(); }
};

struct EstimateOptions {
    std::size_t depth = 0;          // maximal number of convergents (0: no limit)
    std::size_t max_q_bits = 2048;  // stop at convergent denominators beyond this size
    std::uint32_t tail_bits = 128;
};

namespace detail {

struct ConvergentDistance {
    mpz_class q;
    DyadicInterval dist;
    bool zero = false;  // q xi is an integer
};

/// Convergents of xi with their certified distances ||q_k xi||, walking as
/// far as the options and the precision cap allow.
inline std::vector<ConvergentDistance> convergent_distances(CertifiedReal& xi, const EstimateOptions& opt,
                                                            bool& truncated) {
    std::vector<Convergent> cs;
    try {
        cs = opt.depth && opt.max_q_bits == 0 ? convergents(xi, opt.depth) : convergents_up_to_bits(xi, opt.max_q_bits);
    } catch (const RefinementBudgetExhausted&) {
        truncated = true;
    }
    if (opt.depth && cs.size() > opt.depth) cs.resize(opt.depth);
    std::vector<ConvergentDistance> out;
    for (const auto& c : cs) {
        if (c.q < 2) continue;
        ConvergentDistance cd;
        cd.q = c.q;
        try {
            cd.dist = dist_nearest_int_relative(xi, c.q, 24);
        } catch (const RefinementBudgetExhausted&) {
            truncated = true;
            break;
        }
        cd.zero = cd.dist.hi == 0;
        if (!cd.zero && cd.dist.lo == 0) {
            truncated = true;  // cannot separate from an exact hit within the cap
            break;
        }
        out.push_back(std::move(cd));
    }
    return out;
}

/// log2 of the upper end of a distance interval.
inline double log2_hi(const DyadicInterval& d) { return log2_of(d.hi) - static_cast<double>(d.scale); }

inline void push_record(ExponentEstimate& e, const mpz_class& n, double quotient) {
    if (bit_length(n) <= e.tail_bits) return;
    if (!e.witness_sequence.empty() && !(quotient > e.witness_sequence.back().quotient)) return;
    e.witness_sequence.push_back({n, quotient});
    e.best_observed = quotient;
}

} // namespace detail

/// Exact order estimate max_k log(1/||q_k xi||) / log q_k over convergent
/// denominators, which are the best approximations.
inline ExponentEstimate estimate_tau(CertifiedReal& xi, const EstimateOptions& opt = {}) {
    ExponentEstimate e;
    e.tail_bits = opt.tail_bits;
    const auto cds = detail::convergent_distances(xi, opt, e.truncated);
    e.convergents_used = cds.size();
    for (const auto& cd : cds) {
        e.max_n_bits = std::max(e.max_n_bits, detail::bit_length(cd.q));
        if (cd.zero) continue;
        const double q = -detail::log2_hi(cd.dist) / detail::log2_of(cd.q) - 1e-12;
        detail::push_record(e, cd.q, q);
    }
    return e;
}

inline ExponentEstimate estimate_tau(CertifiedReal& xi, std::size_t depth) {
    if (depth < 2) throw std::invalid_argument("depth must be >= 2");
    EstimateOptions opt;
    opt.depth = depth;
    return estimate_tau(xi, opt);
}

/// Mixed exponent estimate: the supremum-type quotient
/// log(1/(|n|_p ||n xi||)) / log n over an exhaustive scan of n <= N and
/// over the structured witnesses p^j q_k < q_{k+1}.
inline ExponentEstimate estimate_tau_p(CertifiedReal& xi, std::uint64_t p, std::uint64_t N,
                                       const EstimateOptions& opt = {}) {
    if (!is_prime_u64(p)) throw std::invalid_argument(std::to_string(p) + " is not prime");
    if (N < 2) throw std::invalid_argument("N must be >= 2");
    if (N >= (std::uint64_t(1) << 62)) throw std::invalid_argument("N must be below 2^62");
    ExponentEstimate e;
    e.tail_bits = opt.tail_bits;
    e.scan_limit = N;
    const double lp = std::log2(static_cast<double>(p));

    // Exhaustive scan with champion pruning on the fixed-point window.
    {
        const FractionalWindow win(xi);
        double best = -std::numeric_limits<double>::infinity();
        for (std::uint64_t n = 2; n <= N; ++n) {
            const detail::u128 lower = win.distance_lower_u128(n);
            unsigned v = 0;
            for (std::uint64_t m = n; m % p == 0; m /= p) ++v;
            const double ln = std::log2(static_cast<double>(n));
            // Fast bound: the quotient is at most (-log2(lower) + v lg p) / lg n.
            if (lower != 0) {
                const double ub = (-std::log2(static_cast<double>(detail::scaled(lower))) + v * lp) / ln + 1e-9;
                if (!(ub > best)) continue;
            }
            const FastDistance fd = win.distance(n);
            if (fd.hi == 0) continue;  // exact hit: n xi is an integer
            const double q = (-std::log2(static_cast<double>(fd.hi)) + v * lp) / ln - 1e-12;
            if (q > best) {
                best = q;
                e.scan_records.push_back({detail::from_u64(n), q});
                detail::push_record(e, detail::from_u64(n), q);
            }
        }
    }

    // Structured witnesses from the convergents.
    const auto cds = detail::convergent_distances(xi, opt, e.truncated);
    e.convergents_used = cds.size();
    std::vector<std::pair<mpz_class, double>> structured;
    for (std::size_t k = 0; k < cds.size(); ++k) {
        const auto& cd = cds[k];
        if (cd.zero) continue;
        const unsigned vq = padic_valuation(cd.q, p);
        const double lq = detail::log2_of(cd.q), ld = detail::log2_hi(cd.dist);
        mpz_class n = cd.q;
        for (unsigned j = 0; j < 256; ++j) {
            if (k + 1 < cds.size() && n >= cds[k + 1].q) break;
            // While p^j ||q xi|| < 1/2 the distance scales exactly by p^j.
            const double ldj = ld + j * lp;
            if (!(ldj < -1)) break;
            const double q = (-ldj + (vq + j) * lp) / (lq + j * lp) - 1e-12;
            structured.emplace_back(n, q);
            n *= static_cast<unsigned long>(p);
        }
    }
    // Pure prime powers: for gap series in base p these are the natural
    // witnesses even when they are not convergents.
    {
        mpz_class n = static_cast<unsigned long>(p);
        for (unsigned j = 1; detail::bit_length(n) <= std::max<std::size_t>(opt.max_q_bits, opt.tail_bits + 64); ++j, n *= static_cast<unsigned long>(p)) {
            if (n <= N) continue;
            DyadicInterval d;
            try {
                d = dist_nearest_int_relative(xi, n, 24);
            } catch (const RefinementBudgetExhausted&) {
                e.truncated = true;
                break;
            }
            if (d.hi == 0 || d.lo == 0) continue;
            structured.emplace_back(n, (-detail::log2_hi(d) + j * lp) / detail::log2_of(n) - 1e-12);
        }
    }
    std::sort(structured.begin(), structured.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [n, q] : structured) {
        e.max_n_bits = std::max(e.max_n_bits, detail::bit_length(n));
        if (n <= N) continue;  // already covered by the scan
        detail::push_record(e, n, q);
    }
    return e;
}

/// A number designed to have tau = t and tau_p = t + delta: the gap series
/// sum_j 1 / (p^{a_j} r^{b_j}) with log2 Q_{j+1} = (t + 1) log2 Q_j + 2 and
/// p^{a_j} ~ Q_j^delta, where r is a second prime. At n = Q_j the distance
/// is about Q_j^-t, and |n|_p = p^{-a_j} contributes the extra delta.
inline CertifiedReal construct_with_gap(std::uint64_t p, double t, double delta) {
    if (!is_prime_u64(p)) throw std::invalid_argument(std::to_string(p) + " is not prime");
    if (!(t >= 1.0) || !std::isfinite(t)) throw std::invalid_argument("construct_with_gap needs t >= 1");
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("construct_with_gap needs delta in [0,1]");
    const std::uint64_t r = p == 2 ? 3 : 2;
    CertifiedReal xi = make_mixed_gap_series(p, r, t + 1.0, 4.0, delta, 2.0);
    xi.annotate("p", static_cast<double>(p));
    xi.annotate("t", t);
    xi.annotate("delta", delta);
    xi.annotate("target_tau", t);
    xi.annotate("target_tau_p", t + delta);
    return xi;
}

} // namespace mixlit
