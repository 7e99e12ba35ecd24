#pragma once

#include <mixlit/core/prime_set.hpp>
#include <mixlit/core/valuation_patterns.hpp>
#include <mixlit/detail/errors.hpp>
#include <mixlit/detail/mpfr.hpp>
#include <mixlit/detail/parallel.hpp>
#include <mixlit/detail/u128.hpp>
#include <mixlit/functions/approx_function.hpp>
#include <mixlit/functions/weight_function.hpp>
#include <mixlit/realfield/certified_real.hpp>
#include <mixlit/realfield/distance.hpp>
#include <mixlit/realfield/fixed_window.hpp>

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixlit {

enum class CounterKind { Mixed, Reduced, Gallagher, Simultaneous, Multiplicative };

inline std::string to_string(CounterKind k) {
    switch (k) {
        case CounterKind::Mixed: return "mixed";
        case CounterKind::Reduced: return "reduced";
        case CounterKind::Gallagher: return "gallagher";
        case CounterKind::Simultaneous: return "simultaneous";
        case CounterKind::Multiplicative: return "multiplicative";
    }
    return "?";
}

inline CounterKind parse_counter_kind(std::string_view s) {
    for (auto k : {CounterKind::Mixed, CounterKind::Reduced, CounterKind::Gallagher, CounterKind::Simultaneous,
                   CounterKind::Multiplicative})
        if (s == to_string(k)) return k;
    throw ParseError("unknown inequality kind '" + std::string(s) + "'");
}

/// One solution (or undecidable n) of a counted inequality, written in the
/// distance form lhs <= threshold. For the mixed-type inequalities the
/// prime-power weights are moved to the right, so lhs is ||n alpha|| (or a
/// product / maximum of such distances) and threshold is
/// Psi(n) = psi(n) * prod_i p_i^(gamma_i v_i(n)).
struct SolutionRecord {
    std::uint64_t n = 0;
    long double lhs_lo = 0, lhs_hi = 0;
    long double threshold = 0;
    long double threshold_lo = 0, threshold_hi = 0;
    std::vector<mpz_class> nearest;  // a_i, one per real, when the form uses them
    bool ambiguous = false;
};

struct CheckpointCount {
    std::uint64_t N = 0;
    std::uint64_t count = 0;
    std::uint64_t ambiguous = 0;
};

struct CountResult {
    std::uint64_t count = 0;      // certified solutions n <= N
    std::uint64_t ambiguous = 0;  // n left undecided at the precision cap
    std::vector<SolutionRecord> records;
    std::vector<CheckpointCount> checkpoints;
};

struct CountOptions {
    std::size_t workers = 1;
    /// Counts are also reported at these N (strictly increasing, <= N);
    /// the final N is always included.
    std::vector<std::uint64_t> checkpoints;
    bool keep_records = true;
};

namespace detail {

enum class Combine { Product, All };
enum class Tri { Yes, No, Unknown };

struct CountProblem {
    std::vector<CertifiedReal*> alphas;
    ApproxFunction psi;
    std::vector<WeightFunction> fs;  // one per prime
    PrimeSet ps;
    Combine combine = Combine::Product;
    bool reduced = false;
};

inline constexpr std::uint64_t kCountChunk = 1u << 18;
inline constexpr long double kLdSlack = 0x1p-60L;

/// ceil(x * 2^128) + 1 for x in [0, 1/2), saturating at 2^128 - 1 otherwise.
inline u128 threshold_u128(long double x) {
    if (!(x < 0.5L)) return ~u128(0);
    if (!(x > 0)) return 1;
    const long double scaled_hi = std::ldexp(x, 64);
    const long double hi = std::floor(scaled_hi);
    long double lo = std::ceil(std::ldexp(scaled_hi - hi, 64));
    u128 h = static_cast<std::uint64_t>(hi);
    if (lo >= 0x1p64L) {
        h += 1;
        lo = 0;
    }
    return (h << 64) + static_cast<std::uint64_t>(lo) + 1;
}

inline Tri decide(Tri inequality, Tri coprime) {
    if (inequality == Tri::No || coprime == Tri::No) return Tri::No;
    if (inequality == Tri::Yes && coprime == Tri::Yes) return Tri::Yes;
    return Tri::Unknown;
}

inline std::uint64_t gcd_of(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }
inline mpz_class gcd_of(const mpz_class& a, const mpz_class& b) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

/// Coprimality of (a_1, ..., a_m, n) over candidate sets. When a set is
/// `certain` every listed value is a genuine nearest integer (an exact
/// tie lists both) and any coprime choice qualifies; otherwise only one of
/// the listed values is nearest and the answer is known only if all
/// choices agree.
template <class Int>
Tri coprime_status(const std::vector<std::vector<Int>>& candidates, bool certain, const Int& n) {
    bool any = false, all = true;
    std::vector<std::size_t> idx(candidates.size(), 0);
    for (;;) {
        Int g = n;
        for (std::size_t j = 0; j < candidates.size(); ++j) g = gcd_of(g, candidates[j][idx[j]]);
        const bool ok = g == Int(1);
        any = any || ok;
        all = all && ok;
        std::size_t j = 0;
        for (; j < candidates.size(); ++j) {
            if (++idx[j] < candidates[j].size()) break;
            idx[j] = 0;
        }
        if (j == candidates.size()) break;
    }
    if (certain) return any ? Tri::Yes : Tri::No;
    if (all) return Tri::Yes;
    if (!any) return Tri::No;
    return Tri::Unknown;
}

/// Interval [lo, hi] of the weight prod_i p_i^(gamma_i v_i) at `prec` bits.
inline BigInterval weight_interval(const std::vector<WeightFunction>& fs, const PrimeSet& ps,
                                   std::span<const unsigned> v, mpfr_prec_t prec) {
    BigInterval w(prec);
    if (auto exact = exact_weight_factor(fs, ps, v)) {
        mpfr_set_z(w.lo.get(), exact->get_mpz_t(), MPFR_RNDD);
        mpfr_set_z(w.hi.get(), exact->get_mpz_t(), MPFR_RNDU);
        return w;
    }
    mpfr_set_ui(w.lo.get(), 1, MPFR_RNDN);
    mpfr_set_ui(w.hi.get(), 1, MPFR_RNDN);
    BigFloat e(128), base(64), t(prec);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (v[i] == 0 || fs[i].gamma() == 0) continue;
        mpfr_set_d(e.get(), fs[i].gamma(), MPFR_RNDN);
        mpfr_mul_ui(e.get(), e.get(), v[i], MPFR_RNDN);  // exact: 53 + 32 bits fit in 128
        mpfr_set_ui(base.get(), static_cast<unsigned long>(ps[i]), MPFR_RNDN);
        mpfr_pow(t.get(), base.get(), e.get(), MPFR_RNDD);
        mpfr_mul(w.lo.get(), w.lo.get(), t.get(), MPFR_RNDD);
        mpfr_pow(t.get(), base.get(), e.get(), MPFR_RNDU);
        mpfr_mul(w.hi.get(), w.hi.get(), t.get(), MPFR_RNDU);
    }
    return w;
}

/// Per-work-item state: lazily cloned reals for escalation.
struct Escalator {
    const CountProblem* problem;
    const std::vector<FractionalWindow>* windows;
    std::vector<CertifiedReal> clones;

    CertifiedReal& real(std::size_t j) {
        if (clones.empty())
            for (auto* a : problem->alphas) clones.push_back(a->clone());
        return clones[j];
    }
};

struct Verdict {
    Tri state = Tri::Unknown;
    long double lhs_lo = 0, lhs_hi = 0, thr_lo = 0, thr_hi = 0;
    std::vector<mpz_class> nearest;
};

inline long double ld_down(const BigFloat& x) { return mpfr_get_ld(x.get(), MPFR_RNDD); }
inline long double ld_up(const BigFloat& x) { return mpfr_get_ld(x.get(), MPFR_RNDU); }

/// Certified decision for one n with valuation vector v and weight W.
inline Verdict certify(Escalator& esc, std::uint64_t n, std::span<const unsigned> v, long double weight,
                       long double weight_rel_error) {
    const CountProblem& pb = *esc.problem;
    const auto& windows = *esc.windows;
    const std::size_t m = pb.alphas.size();
    Verdict out;

    // Level 0: fixed-point distances and a long double threshold.
    {
        long double lo = pb.combine == Combine::Product ? 1.0L : 0.0L, hi = lo;
        std::vector<std::vector<std::uint64_t>> cand(m);
        bool certain = true;
        for (std::size_t j = 0; j < m; ++j) {
            const FastDistance fd = windows[j].distance(n);
            if (pb.combine == Combine::Product) {
                lo *= fd.lo;
                hi *= fd.hi;
            } else {
                lo = std::max(lo, fd.lo);
                hi = std::max(hi, fd.hi);
            }
            cand[j].push_back(fd.nearest);
            if (fd.tie) {
                cand[j].push_back(fd.nearest + 1);
                if (!windows[j].exact()) certain = false;
            }
        }
        lo *= 1 - 2 * m * kLdSlack;
        hi *= 1 + 2 * m * kLdSlack;
        const long double thr = pb.psi(n) * weight;
        const long double err = pb.psi.relative_error() + weight_rel_error + kLdSlack;
        out.thr_lo = thr * (1 - err);
        out.thr_hi = thr * (1 + err);
        out.lhs_lo = lo;
        out.lhs_hi = hi;
        const Tri ineq = hi <= out.thr_lo ? Tri::Yes : (lo > out.thr_hi ? Tri::No : Tri::Unknown);
        Tri cop = Tri::Yes;
        if (pb.reduced && ineq != Tri::No) cop = coprime_status<std::uint64_t>(cand, certain, n);
        out.state = decide(ineq, cop);
        if (out.state != Tri::Unknown) {
            if (out.state == Tri::Yes) {
                for (std::size_t j = 0; j < m; ++j) {
                    std::uint64_t pick = cand[j].front();
                    if (pb.reduced && cand[j].size() > 1 && std::gcd(pick, n) != 1) pick = cand[j].back();
                    out.nearest.push_back(windows[j].integer_part() * from_u64(n) + from_u64(pick));
                }
            }
            return out;
        }
    }

    const mpz_class nz = from_u64(n);
    const std::uint32_t nbits = static_cast<std::uint32_t>(bit_length(nz));

    // Exact level: every real and the threshold are rational.
    bool all_exact = true;
    std::vector<mpq_class> exact_alpha(m);
    for (std::size_t j = 0; j < m; ++j) {
        auto e = esc.real(j).exact_value();
        if (!e) {
            all_exact = false;
            break;
        }
        exact_alpha[j] = *e;
    }
    std::optional<mpq_class> exact_thr;
    if (auto pv = pb.psi.exact_value(n))
        if (auto wv = exact_weight_factor(pb.fs, pb.ps, v)) exact_thr = *pv * mpq_class(*wv);

    // Exact distance and nearest candidates of n * alpha for a rational alpha.
    auto exact_distance = [&](const mpq_class& a, std::vector<mpz_class>& cand) {
        const mpq_class x = a * nz;
        const mpz_class fl = fdiv(x.get_num(), x.get_den());
        const mpq_class frac = x - mpq_class(fl);
        if (frac * 2 < 1) {
            cand.push_back(fl);
        } else if (frac * 2 > 1) {
            cand.push_back(fl + 1);
        } else {
            cand.push_back(fl);
            cand.push_back(fl + 1);
        }
        return frac * 2 <= 1 ? frac : mpq_class(1 - frac);
    };

    if (all_exact && exact_thr) {
        mpq_class lhs = pb.combine == Combine::Product ? 1 : 0;
        std::vector<std::vector<mpz_class>> cand(m);
        for (std::size_t j = 0; j < m; ++j) {
            const mpq_class d = exact_distance(exact_alpha[j], cand[j]);
            lhs = pb.combine == Combine::Product ? mpq_class(lhs * d) : std::max(lhs, d);
        }
        const Tri ineq = lhs <= *exact_thr ? Tri::Yes : Tri::No;
        Tri cop = Tri::Yes;
        if (pb.reduced && ineq == Tri::Yes) cop = coprime_status<mpz_class>(cand, true, nz);
        out.state = decide(ineq, cop);
        out.lhs_lo = out.lhs_hi = static_cast<long double>(lhs.get_d());
        out.thr_lo = out.thr_hi = static_cast<long double>(exact_thr->get_d());
        if (out.state == Tri::Yes) {
            for (std::size_t j = 0; j < m; ++j) {
                mpz_class pick = cand[j].front();
                if (pb.reduced && cand[j].size() > 1 && gcd_of(pick, nz) != 1) pick = cand[j].back();
                out.nearest.push_back(pick);
            }
        }
        return out;
    }

    // Interval levels at doubling precision.
    std::uint32_t cap = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t j = 0; j < m; ++j)
        if (!esc.real(j).is_rational_rep() && !windows[j].exact()) cap = std::min(cap, esc.real(j).precision_cap());
    for (std::uint32_t bits = 128;; bits *= 2) {
        if (std::uint64_t(bits) + nbits + 8 > cap) break;
        const mpfr_prec_t prec = bits + 32;
        BigInterval lhs(prec);
        mpfr_set_ui(lhs.lo.get(), pb.combine == Combine::Product ? 1 : 0, MPFR_RNDN);
        mpfr_set_ui(lhs.hi.get(), pb.combine == Combine::Product ? 1 : 0, MPFR_RNDN);
        std::vector<std::vector<mpz_class>> cand(m);
        bool certain = true;
        BigFloat dlo(prec), dhi(prec);
        for (std::size_t j = 0; j < m; ++j) {
            if (windows[j].exact()) {
                const mpq_class d = exact_distance(*esc.real(j).exact_value(), cand[j]);
                mpfr_set_q(dlo.get(), d.get_mpq_t(), MPFR_RNDD);
                mpfr_set_q(dhi.get(), d.get_mpq_t(), MPFR_RNDU);
            } else {
                const DyadicInterval a = esc.real(j).enclosure(bits + nbits + 8);
                const mpz_class lo = a.lo * nz, hi = a.hi * nz;
                const DyadicInterval d = nearest_int_distance_bounds(lo, hi, a.scale);
                set_dyadic(dlo, d.lo, d.scale, MPFR_RNDD);
                set_dyadic(dhi, d.hi, d.scale, MPFR_RNDU);
                const mpz_class half = mpz_class(1) << (a.scale - 1);
                const mpz_class c_lo = fdiv_2exp(lo + half, a.scale), c_hi = fdiv_2exp(hi + half, a.scale);
                cand[j].push_back(c_lo);
                if (c_hi != c_lo) {
                    cand[j].push_back(c_hi);
                    certain = false;
                }
            }
            if (pb.combine == Combine::Product) {
                mpfr_mul(lhs.lo.get(), lhs.lo.get(), dlo.get(), MPFR_RNDD);
                mpfr_mul(lhs.hi.get(), lhs.hi.get(), dhi.get(), MPFR_RNDU);
            } else {
                mpfr_max(lhs.lo.get(), lhs.lo.get(), dlo.get(), MPFR_RNDD);
                mpfr_max(lhs.hi.get(), lhs.hi.get(), dhi.get(), MPFR_RNDU);
            }
        }
        BigInterval thr = pb.psi.enclose(n, prec);
        const BigInterval w = weight_interval(pb.fs, pb.ps, v, prec);
        mpfr_mul(thr.lo.get(), thr.lo.get(), w.lo.get(), MPFR_RNDD);
        mpfr_mul(thr.hi.get(), thr.hi.get(), w.hi.get(), MPFR_RNDU);
        const Tri ineq = mpfr_lessequal_p(lhs.hi.get(), thr.lo.get())
                             ? Tri::Yes
                             : (mpfr_greater_p(lhs.lo.get(), thr.hi.get()) ? Tri::No : Tri::Unknown);
        Tri cop = Tri::Yes;
        if (pb.reduced && ineq != Tri::No) cop = coprime_status<mpz_class>(cand, certain, nz);
        out.state = decide(ineq, cop);
        out.lhs_lo = ld_down(lhs.lo);
        out.lhs_hi = ld_up(lhs.hi);
        out.thr_lo = ld_down(thr.lo);
        out.thr_hi = ld_up(thr.hi);
        out.nearest.clear();
        for (std::size_t j = 0; j < m; ++j) {
            mpz_class pick = cand[j].front();
            if (pb.reduced && cand[j].size() > 1 && gcd_of(pick, nz) != 1) pick = cand[j].back();
            out.nearest.push_back(pick);
        }
        if (out.state != Tri::Unknown) return out;
        // A rational threshold against rational distances cannot improve
        // past exactness; stop once every input is exact.
        if (all_exact && cap == std::numeric_limits<std::uint32_t>::max() && bits >= (1u << 14)) break;
    }
    out.state = Tri::Unknown;
    return out;
}

inline CountResult run_count(CountProblem& pb, std::uint64_t N, const CountOptions& opt) {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    if (N >= (std::uint64_t(1) << 62)) throw std::invalid_argument("N must be below 2^62");
    if (pb.alphas.empty()) throw std::invalid_argument("at least one real is required");
    if (pb.psi.is_table() && pb.psi.table_size() < N)
        throw std::invalid_argument("psi table has " + std::to_string(pb.psi.table_size()) + " entries, N = " +
                                    std::to_string(N));
    std::vector<std::uint64_t> cps = opt.checkpoints;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] < 1 || cps[i] > N || (i > 0 && cps[i] <= cps[i - 1]))
            throw std::invalid_argument("checkpoints must be strictly increasing within [1, N]");
    }
    if (cps.empty() || cps.back() != N) cps.push_back(N);

    std::vector<FractionalWindow> windows;
    for (auto* a : pb.alphas) windows.emplace_back(*a);

    struct Item {
        std::vector<unsigned> exps;
        std::uint64_t pp, m_first, m_last;
    };
    std::vector<Item> items;
    for_each_exponent_tuple(N, pb.ps, [&](std::span<const unsigned> e, std::uint64_t pp) {
        const std::uint64_t M = N / pp;
        for (std::uint64_t first = 1; first <= M; first += kCountChunk)
            items.push_back({std::vector<unsigned>(e.begin(), e.end()), pp, first, std::min(M, first + kCountChunk - 1)});
    });

    struct ItemOut {
        std::vector<std::uint64_t> count, ambiguous;
        std::vector<SolutionRecord> records;
    };
    std::vector<ItemOut> outs(items.size());
    const CoprimeWheel wheel(pb.ps);
    const bool monotone = pb.psi.monotone();
    const std::size_t m = pb.alphas.size();
    const long double weight_err = (pb.ps.size() + 2) * kLdSlack;

    parallel_for(items.size(), opt.workers, [&](std::size_t i) {
        const Item& it = items[i];
        ItemOut& out = outs[i];
        out.count.assign(cps.size(), 0);
        out.ambiguous.assign(cps.size(), 0);
        Escalator esc{&pb, &windows, {}};
        const long double W = weight_factor(pb.fs, pb.ps, it.exps);
        const long double bound_err = pb.psi.relative_error() + weight_err + kLdSlack;
        std::uint64_t block_end = 0;
        long double bound = 0;
        u128 bound_u = 0;
        wheel.for_each(it.m_first, it.m_last, [&](std::uint64_t mm) {
            const std::uint64_t n = it.pp * mm;
            if (mm >= block_end) {
                bound = pb.psi(n) * W * (1 + bound_err);
                bound_u = threshold_u128(bound);
                block_end = monotone ? mm + 256 : mm + 1;
            }
            if (pb.combine == Combine::All || m == 1) {
                for (std::size_t j = 0; j < m; ++j)
                    if (windows[j].distance_lower_u128(n) > bound_u) return;
            } else {
                long double prod = 1;
                for (std::size_t j = 0; j < m; ++j) prod *= scaled(windows[j].distance_lower_u128(n));
                if (prod * (1 - 2 * m * kLdSlack) > bound) return;
            }
            Verdict vd = certify(esc, n, it.exps, W, weight_err);
            if (vd.state == Tri::No) return;
            const std::size_t bucket = std::lower_bound(cps.begin(), cps.end(), n) - cps.begin();
            (vd.state == Tri::Yes ? out.count : out.ambiguous)[bucket]++;
            if (opt.keep_records) {
                SolutionRecord r;
                r.n = n;
                r.lhs_lo = vd.lhs_lo;
                r.lhs_hi = vd.lhs_hi;
                r.threshold = pb.psi(n) * W;
                r.threshold_lo = vd.thr_lo;
                r.threshold_hi = vd.thr_hi;
                r.nearest = std::move(vd.nearest);
                r.ambiguous = vd.state == Tri::Unknown;
                out.records.push_back(std::move(r));
            }
        });
    });

    CountResult res;
    std::vector<std::uint64_t> cnt(cps.size(), 0), amb(cps.size(), 0);
    for (auto& o : outs) {
        for (std::size_t b = 0; b < cps.size(); ++b) {
            cnt[b] += o.count[b];
            amb[b] += o.ambiguous[b];
        }
        for (auto& r : o.records) res.records.push_back(std::move(r));
    }
    std::sort(res.records.begin(), res.records.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
    std::uint64_t c = 0, a = 0;
    for (std::size_t b = 0; b < cps.size(); ++b) {
        c += cnt[b];
        a += amb[b];
        res.checkpoints.push_back({cps[b], c, a});
    }
    res.count = c;
    res.ambiguous = a;
    return res;
}

} // namespace detail

/// n <= N with prod_i f_i(|n|_{p_i}) ||n alpha|| <= psi(n).
inline CountResult count_mixed(CertifiedReal& alpha, std::uint64_t N, const ApproxFunction& psi,
                               std::span<const WeightFunction> fs, const PrimeSet& ps, const CountOptions& opt = {}) {
    detail::CountProblem pb{{&alpha}, psi, resolve_weights(fs, ps), ps, detail::Combine::Product, false};
    return detail::run_count(pb, N, opt);
}

/// n <= N with |n alpha - a| <= Psi(n) for a nearest integer a coprime to n
/// (both nearest integers are tried when n alpha is a half-integer).
inline CountResult count_reduced(CertifiedReal& alpha, std::uint64_t N, const ApproxFunction& psi,
                                 std::span<const WeightFunction> fs, const PrimeSet& ps,
                                 const CountOptions& opt = {}) {
    detail::CountProblem pb{{&alpha}, psi, resolve_weights(fs, ps), ps, detail::Combine::All, true};
    return detail::run_count(pb, N, opt);
}

/// n <= N with ||n alpha|| ||n beta|| <= psi(n).
inline CountResult count_gallagher_pair(CertifiedReal& alpha, CertifiedReal& beta, std::uint64_t N,
                                        const ApproxFunction& psi, const CountOptions& opt = {}) {
    detail::CountProblem pb{{&alpha, &beta}, psi, {}, PrimeSet{}, detail::Combine::Product, false};
    return detail::run_count(pb, N, opt);
}

/// n <= N with prod_i f_i(|n|_{p_i}) |n alpha_j - a_j| <= psi(n) for every j,
/// a_j nearest; `reduced` also asks gcd(a_1, ..., a_m, n) = 1.
inline CountResult count_simultaneous(std::span<CertifiedReal> alphas, std::uint64_t N, const ApproxFunction& psi,
                                      std::span<const WeightFunction> fs, const PrimeSet& ps, bool reduced,
                                      const CountOptions& opt = {}) {
    detail::CountProblem pb{{}, psi, resolve_weights(fs, ps), ps, detail::Combine::All, reduced};
    for (auto& a : alphas) pb.alphas.push_back(&a);
    return detail::run_count(pb, N, opt);
}

/// n <= N with prod_i f_i(|n|_{p_i}) prod_j ||n alpha_j|| <= psi(n).
inline CountResult count_multiplicative(std::span<CertifiedReal> alphas, std::uint64_t N, const ApproxFunction& psi,
                                        std::span<const WeightFunction> fs, const PrimeSet& ps,
                                        const CountOptions& opt = {}) {
    detail::CountProblem pb{{}, psi, resolve_weights(fs, ps), ps, detail::Combine::Product, false};
    for (auto& a : alphas) pb.alphas.push_back(&a);
    return detail::run_count(pb, N, opt);
}

} // namespace mixlit
