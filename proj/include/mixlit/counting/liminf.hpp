#pragma once

#include <mixlit/core/prime_set.hpp>
#include <mixlit/core/valuation.hpp>
#include <mixlit/detail/errors.hpp>
#include <mixlit/detail/mpfr.hpp>
#include <mixlit/detail/parallel.hpp>
#include <mixlit/detail/text.hpp>
#include <mixlit/realfield/certified_real.hpp>
#include <mixlit/realfield/distance.hpp>
#include <mixlit/realfield/fixed_window.hpp>

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace mixlit {

/// The tracked quantity
///   n (log n)^A (log log n)^B (log log log n)^C |n|_{p_1}...|n|_{p_k} ||n alpha_1||...||n alpha_m||.
struct LiminfWeight {
    std::string name = "custom";
    double log_power = 0;
    double loglog_power = 0;
    double logloglog_power = 0;
    PrimeSet ps;
    unsigned reals = 0;  // required number of reals; 0 accepts any positive count

    /// First n at which every logarithmic factor is positive.
    std::uint64_t first_n() const {
        if (logloglog_power > 0) return 16;
        if (loglog_power > 0) return 3;
        if (log_power > 0) return 2;
        return 1;
    }

    std::string to_string() const {
        std::ostringstream out;
        out.precision(17);
        out << name << "(log=" << log_power << ",loglog=" << loglog_power << ",logloglog=" << logloglog_power
            << ",primes=" << ps.to_string() << ")";
        return out.str();
    }
};

/// Named weights:
///   littlewood   n ||n a|| ||n b||
///   gallagher    n (log n)^2 ||n a|| ||n b||
///   mixed        n |n|_{p_1}...|n|_{p_k} ||n a_1||...||n a_m||
///   mixed-log    n (log n)^(k+1) |n|_{p_1}...|n|_{p_k} ||n a||
///   abstract     n (log n)^2 |n|_p ||n a||
///   furstenberg  n (log log log n)^kappa |n|_{p_1} |n|_{p_2} ||n a||
///   quadratic    n (log n) |n|_p ||n a||
/// and "custom:log=A,loglog=B,logloglog=C".
inline LiminfWeight liminf_preset(std::string_view name, const PrimeSet& ps, double kappa = 0.1) {
    LiminfWeight w;
    w.name = std::string(name);
    w.ps = ps;
    auto need_primes = [&](std::size_t lo, std::size_t hi) {
        if (ps.size() < lo || ps.size() > hi)
            throw ParseError("weight '" + std::string(name) + "' takes " + std::to_string(lo) +
                             (hi == lo ? "" : (hi > 100 ? " or more" : "-" + std::to_string(hi))) + " primes, got " +
                             std::to_string(ps.size()));
    };
    constexpr std::size_t any = std::numeric_limits<std::size_t>::max();
    if (name == "littlewood") {
        need_primes(0, 0);
        w.reals = 2;
    } else if (name == "gallagher") {
        need_primes(0, 0);
        w.reals = 2;
        w.log_power = 2;
    } else if (name == "mixed") {
        need_primes(0, any);
    } else if (name == "mixed-log") {
        need_primes(1, any);
        w.reals = 1;
        w.log_power = static_cast<double>(ps.size()) + 1;
    } else if (name == "abstract") {
        need_primes(1, 1);
        w.reals = 1;
        w.log_power = 2;
    } else if (name == "furstenberg") {
        need_primes(2, 2);
        if (!(kappa > 0)) throw ParseError("kappa must be positive");
        w.reals = 1;
        w.logloglog_power = kappa;
    } else if (name == "quadratic") {
        need_primes(1, 1);
        w.reals = 1;
        w.log_power = 1;
    } else if (name.rfind("custom:", 0) == 0) {
        const std::string ctx = "weight '" + std::string(name) + "'";
        auto kv = detail::parse_kv(name.substr(7), ctx);
        detail::require_keys(kv, {"log", "loglog", "logloglog"}, ctx);
        auto get = [&](const char* k) { return kv.count(k) ? detail::parse_double(kv[k], ctx) : 0.0; };
        w.name = "custom";
        w.log_power = get("log");
        w.loglog_power = get("loglog");
        w.logloglog_power = get("logloglog");
        if (w.log_power < 0 || w.loglog_power < 0 || w.logloglog_power < 0)
            throw ParseError(ctx + ": powers must be >= 0");
    } else {
        throw ParseError("unknown liminf weight '" + std::string(name) + "'");
    }
    return w;
}

/// A new running minimum of the tracked quantity. `value` encloses the
/// quantity at n; `running_min` encloses the minimum over all m <= n. A
/// record is ambiguous when the enclosures could not separate value(n)
/// from the earlier minimum at the precision cap.
struct ChampionRecord {
    std::uint64_t n = 0;
    long double value_lo = 0, value_hi = 0;
    long double running_min_lo = 0, running_min_hi = 0;
    bool ambiguous = false;
};

struct LiminfResult {
    LiminfWeight weight;
    std::uint64_t N = 0;
    std::vector<ChampionRecord> champions;
    long double final_min_lo = 0, final_min_hi = 0;
};

struct LiminfOptions {
    std::size_t workers = 1;
    /// Track only n >= start (raised to the weight's first positive n).
    /// Small n can pin the running minimum below the liminf for good.
    std::uint64_t start = 1;
};

namespace detail {

inline void log_interval(BigInterval& x) {
    mpfr_log(x.lo.get(), x.lo.get(), MPFR_RNDD);
    mpfr_log(x.hi.get(), x.hi.get(), MPFR_RNDU);
}

inline void mul_pow(BigInterval& acc, const BigInterval& base, double power) {
    if (power == 0) return;
    const mpfr_prec_t prec = acc.lo.precision();
    BigFloat e(64), t(prec);
    mpfr_set_d(e.get(), power, MPFR_RNDN);
    mpfr_pow(t.get(), base.lo.get(), e.get(), MPFR_RNDD);
    mpfr_mul(acc.lo.get(), acc.lo.get(), t.get(), MPFR_RNDD);
    mpfr_pow(t.get(), base.hi.get(), e.get(), MPFR_RNDU);
    mpfr_mul(acc.hi.get(), acc.hi.get(), t.get(), MPFR_RNDU);
}

} // namespace detail

/// Enclosure of the tracked quantity at n with roughly `bits` bits of
/// working precision. Rational reals contribute their exact distances, so
/// the value is exactly 0 when some n alpha_j is an integer.
inline detail::BigInterval liminf_value(std::span<CertifiedReal> alphas, std::uint64_t n, const LiminfWeight& w,
                                        std::uint32_t bits) {
    using namespace detail;
    if (n < w.first_n()) throw std::invalid_argument("weight is not positive at n = " + std::to_string(n));
    const mpfr_prec_t prec = bits + 32;
    const mpz_class nz = from_u64(n);
    const std::uint32_t nbits = static_cast<std::uint32_t>(bit_length(nz));
    BigInterval acc(prec);
    // n * prod |n|_p is the part of n coprime to the primes.
    const mpz_class coprime_part = nz / prime_part(n, w.ps);
    mpfr_set_z(acc.lo.get(), coprime_part.get_mpz_t(), MPFR_RNDD);
    mpfr_set_z(acc.hi.get(), coprime_part.get_mpz_t(), MPFR_RNDU);
    if (w.log_power > 0 || w.loglog_power > 0 || w.logloglog_power > 0) {
        BigInterval L(prec);
        mpfr_set_z(L.lo.get(), nz.get_mpz_t(), MPFR_RNDD);
        mpfr_set_z(L.hi.get(), nz.get_mpz_t(), MPFR_RNDU);
        log_interval(L);
        mul_pow(acc, L, w.log_power);
        if (w.loglog_power > 0 || w.logloglog_power > 0) {
            log_interval(L);
            mul_pow(acc, L, w.loglog_power);
            if (w.logloglog_power > 0) {
                log_interval(L);
                mul_pow(acc, L, w.logloglog_power);
            }
        }
    }
    BigFloat dlo(prec), dhi(prec);
    for (auto& a : alphas) {
        if (auto q = a.exact_value()) {
            const mpq_class x = *q * nz;
            mpq_class frac = x - mpq_class(fdiv(x.get_num(), x.get_den()));
            if (frac * 2 > 1) frac = 1 - frac;
            mpfr_set_q(dlo.get(), frac.get_mpq_t(), MPFR_RNDD);
            mpfr_set_q(dhi.get(), frac.get_mpq_t(), MPFR_RNDU);
        } else {
            const std::uint64_t want = std::uint64_t(bits) + nbits + 8;
            if (want > a.precision_cap())
                throw RefinementBudgetExhausted("liminf value at n = " + std::to_string(n) + " needs " +
                                                std::to_string(want) + " bits of " + a.description());
            const DyadicInterval e = a.enclosure(static_cast<std::uint32_t>(want));
            const DyadicInterval d = nearest_int_distance_bounds(e.lo * nz, e.hi * nz, e.scale);
            set_dyadic(dlo, d.lo, d.scale, MPFR_RNDD);
            set_dyadic(dhi, d.hi, d.scale, MPFR_RNDU);
        }
        mpfr_mul(acc.lo.get(), acc.lo.get(), dlo.get(), MPFR_RNDD);
        mpfr_mul(acc.hi.get(), acc.hi.get(), dhi.get(), MPFR_RNDU);
    }
    return acc;
}

/// Records every n in [first_n, N] at which the tracked quantity reaches a
/// new minimum. Chunks of n are scanned independently for local records;
/// global records are a subset of those and are picked out by one ordered
/// pass, so the output does not depend on the worker count.
inline LiminfResult liminf_track(std::span<CertifiedReal> alphas, std::uint64_t N, const LiminfWeight& w,
                                 const LiminfOptions& opt = {}) {
    using namespace detail;
    if (alphas.empty()) throw std::invalid_argument("liminf_track needs at least one real");
    if (w.reals != 0 && alphas.size() != w.reals)
        throw std::invalid_argument("weight '" + w.name + "' takes " + std::to_string(w.reals) + " reals, got " +
                                    std::to_string(alphas.size()));
    if (N >= (std::uint64_t(1) << 62)) throw std::invalid_argument("N must be below 2^62");
    const std::uint64_t first = std::max(w.first_n(), opt.start);
    if (N < first) throw std::invalid_argument("N must be at least " + std::to_string(first));

    std::vector<FractionalWindow> windows;
    for (auto& a : alphas) windows.emplace_back(a);

    struct Candidate {
        std::uint64_t n;
        BigInterval value;
    };
    constexpr std::uint64_t kChunk = 1u << 20;
    constexpr std::uint32_t kBits = 128;
    const std::size_t chunks = (N - first) / kChunk + 1;
    std::vector<std::vector<Candidate>> local(chunks);

    parallel_for(chunks, opt.workers, [&](std::size_t c) {
        const std::uint64_t lo = first + c * kChunk, hi = std::min(N, lo + kChunk - 1);
        std::vector<CertifiedReal> clones;
        BigFloat best(kBits + 32);
        mpfr_set_inf(best.get(), 1);
        long double best_ld = std::numeric_limits<long double>::infinity();
        long double log_factor = 0;
        std::uint64_t block_end = 0;
        for (std::uint64_t n = lo; n <= hi; ++n) {
            if (n >= block_end) {
                // The logarithmic factor only grows, so its value at the block
                // start bounds it from below for the whole block.
                const long double L = std::log(static_cast<long double>(n));
                log_factor = 1;
                if (w.log_power > 0) log_factor *= std::pow(L, static_cast<long double>(w.log_power));
                if (w.loglog_power > 0) log_factor *= std::pow(std::log(L), static_cast<long double>(w.loglog_power));
                if (w.logloglog_power > 0)
                    log_factor *= std::pow(std::log(std::log(L)), static_cast<long double>(w.logloglog_power));
                log_factor *= 1 - 0x1p-40L;
                block_end = n + 4096;
            }
            std::uint64_t coprime = n;
            for (auto p : w.ps.primes())
                while (coprime % p == 0) coprime /= p;
            long double v = static_cast<long double>(coprime) * log_factor;
            for (const auto& win : windows) v *= scaled(win.distance_lower_u128(n));
            if (v * (1 - 0x1p-50L) >= best_ld) continue;
            if (clones.empty())
                for (auto& a : alphas) clones.push_back(a.clone());
            BigInterval val = liminf_value(clones, n, w, kBits);
            if (!mpfr_less_p(val.lo.get(), best.get())) continue;
            if (mpfr_less_p(val.hi.get(), best.get())) {
                mpfr_set(best.get(), val.hi.get(), MPFR_RNDU);
                best_ld = mpfr_get_ld(best.get(), MPFR_RNDU);
            }
            local[c].push_back({n, std::move(val)});
        }
    });

    LiminfResult res;
    res.weight = w;
    res.N = N;
    std::vector<CertifiedReal> clones;
    std::uint32_t cap = 0;
    for (auto& a : alphas) {
        clones.push_back(a.clone());
        cap = std::max(cap, a.precision_cap());
    }
    BigFloat min_lo(64), min_hi(64);
    mpfr_set_inf(min_lo.get(), 1);
    mpfr_set_inf(min_hi.get(), 1);
    for (auto& chunk : local) {
        for (auto& cand : chunk) {
            if (!mpfr_less_p(cand.value.lo.get(), min_hi.get())) continue;
            // Separate the candidate from the earlier minimum if possible.
            for (std::uint32_t bits = 2 * kBits; bits <= cap && !mpfr_less_p(cand.value.hi.get(), min_lo.get());
                 bits *= 2) {
                try {
                    cand.value = liminf_value(clones, cand.n, w, bits);
                } catch (const RefinementBudgetExhausted&) {
                    break;
                }
                if (!mpfr_less_p(cand.value.lo.get(), min_hi.get())) break;
            }
            if (!mpfr_less_p(cand.value.lo.get(), min_hi.get())) continue;
            ChampionRecord r;
            r.n = cand.n;
            r.ambiguous = !mpfr_less_p(cand.value.hi.get(), min_lo.get());
            const mpfr_prec_t prec = std::max(mpfr_get_prec(min_lo.get()), cand.value.lo.precision());
            BigFloat nlo(prec), nhi(prec);
            mpfr_min(nlo.get(), min_lo.get(), cand.value.lo.get(), MPFR_RNDD);
            mpfr_min(nhi.get(), min_hi.get(), cand.value.hi.get(), MPFR_RNDU);
            min_lo = std::move(nlo);
            min_hi = std::move(nhi);
            r.value_lo = mpfr_get_ld(cand.value.lo.get(), MPFR_RNDD);
            r.value_hi = mpfr_get_ld(cand.value.hi.get(), MPFR_RNDU);
            r.running_min_lo = mpfr_get_ld(min_lo.get(), MPFR_RNDD);
            r.running_min_hi = mpfr_get_ld(min_hi.get(), MPFR_RNDU);
            res.champions.push_back(r);
        }
    }
    res.final_min_lo = mpfr_get_ld(min_lo.get(), MPFR_RNDD);
    res.final_min_hi = mpfr_get_ld(min_hi.get(), MPFR_RNDU);
    return res;
}

} // namespace mixlit
