#pragma once

// Reference counters for the test suite. They share no code with the
// library: every real is rebuilt here from its defining formula as a
// 512-bit fixed-point number (or an exact rational), psi is evaluated
// with MPFR at 768 bits, and every n up to N is tested one by one.

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

constexpr unsigned kBits = 512;

/// floor(alpha * 2^512) together with the guarantee
/// alpha * 2^512 in [fixed, fixed + err]; rationals are kept exactly.
struct Real {
    std::optional<mpq_class> exact;
    mpz_class fixed;
    unsigned long err = 1;
};

inline Real rational(long num, long den) {
    Real r;
    r.exact = mpq_class(num, den);
    r.exact->canonicalize();
    return r;
}

/// (a + b sqrt(d)) / c with b >= 0, c > 0.
inline Real surd(long a, long b, long d, long c) {
    mpz_class s;
    const mpz_class rad = mpz_class(b) * b * d * (mpz_class(1) << (2 * kBits));
    mpz_sqrt(s.get_mpz_t(), rad.get_mpz_t());  // floor(b sqrt(d) 2^512)
    Real r;
    mpz_class num = mpz_class(a) * (mpz_class(1) << kBits) + s;
    mpz_fdiv_q_ui(r.fixed.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(c));
    r.err = 2;
    return r;
}

/// sum_j p^-d_j over a finite table.
inline Real gap_table(unsigned long p, const std::vector<unsigned long>& ds) {
    Real r;
    r.fixed = 0;
    for (unsigned long d : ds) {
        mpz_class pd;
        mpz_ui_pow_ui(pd.get_mpz_t(), p, d);
        mpz_class term;
        const mpz_class one = mpz_class(1) << kBits;
        mpz_fdiv_q(term.get_mpz_t(), one.get_mpz_t(), pd.get_mpz_t());
        r.fixed += term;
    }
    r.err = static_cast<unsigned long>(ds.size());
    return r;
}

/// Binary digits from the SplitMix64 stream: block i holds bits
/// 64 i + 1 .. 64 i + 64 after the binary point.
inline Real random_digits(std::uint64_t seed) {
    auto block = [seed](std::uint64_t i) {
        std::uint64_t z = seed + (i + 1) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    Real r;
    r.fixed = 0;
    for (std::uint64_t i = 0; i < kBits / 64; ++i) {
        r.fixed <<= 64;
        r.fixed += mpz_class(std::to_string(block(i)));
    }
    r.err = 1;
    return r;
}

/// ||n alpha|| enclosed as [lo, hi] in units of 2^-512 (rationals exactly
/// via `exact_dist`), plus the nearest integers to n alpha.
struct Dist {
    bool exact = false;
    mpq_class exact_dist;
    mpz_class lo, hi;
    std::vector<mpz_class> nearest;
    bool near_half = false;  // fixed point cannot tell which integer is nearest
};

inline Dist distance(const Real& a, std::uint64_t n) {
    Dist out;
    const mpz_class nz(std::to_string(n));
    if (a.exact) {
        out.exact = true;
        const mpq_class x = *a.exact * nz;
        mpz_class fl;
        mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
        const mpq_class frac = x - fl;
        const mpq_class half(1, 2);
        if (frac < half) {
            out.exact_dist = frac;
            out.nearest = {fl};
        } else if (frac > half) {
            out.exact_dist = 1 - frac;
            out.nearest = {fl + 1};
        } else {
            out.exact_dist = half;
            out.nearest = {fl, fl + 1};
        }
        return out;
    }
    const mpz_class one = mpz_class(1) << kBits, half = mpz_class(1) << (kBits - 1);
    const mpz_class x = a.fixed * nz, slack = mpz_class(a.err) * nz;  // n alpha 2^512 in [x, x + slack]
    mpz_class fl, f;
    mpz_fdiv_qr(fl.get_mpz_t(), f.get_mpz_t(), x.get_mpz_t(), one.get_mpz_t());
    // The enclosure [f, f + slack] of the fractional part (possibly past 1).
    const mpz_class e = f + slack;
    if (e < half) {
        out.lo = f;
        out.hi = e;
        out.nearest = {fl};
    } else if (f > half && e < one) {
        out.lo = one - e;
        out.hi = one - f;
        out.nearest = {fl + 1};
    } else if (f > half) {
        // [f, e] straddles the integer above: distance at most max(one - f, e - one).
        out.lo = 0;
        out.hi = std::max(mpz_class(one - f), mpz_class(e - one));
        out.nearest = {fl + 1};
    } else {
        // [f, e] contains 1/2: the distance is at least min(f, 1 - e).
        out.lo = std::min(f, mpz_class(one - e));
        if (out.lo < 0) out.lo = 0;
        out.hi = half;
        out.nearest = {fl, fl + 1};
        out.near_half = true;
    }
    return out;
}

/// psi(n) * prod p_i^(gamma_i v_i(n)), times 2^512, as an MPFR enclosure
/// [lo, hi] rounded outward to integers.
struct Psi {
    double c = 1, a = 1, b = 0;
    std::vector<unsigned long> primes;
    std::vector<double> gammas;  // parallel to primes; empty: all 1
};

inline std::pair<mpz_class, mpz_class> threshold(const Psi& psi, std::uint64_t n) {
    const mpfr_prec_t prec = 768;
    mpfr_t v, t, e;
    mpfr_inits2(prec, v, t, e, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_d(v, psi.c, MPFR_RNDN);
    if (psi.a != 0) {
        mpfr_set_ui(t, static_cast<unsigned long>(n), MPFR_RNDN);
        mpfr_set_d(e, -psi.a, MPFR_RNDN);
        mpfr_pow(t, t, e, MPFR_RNDN);
        mpfr_mul(v, v, t, MPFR_RNDN);
    }
    if (psi.b != 0) {
        mpfr_set_ui(t, 1, MPFR_RNDN);
        mpfr_exp(t, t, MPFR_RNDN);
        mpfr_add_ui(t, t, static_cast<unsigned long>(n), MPFR_RNDN);
        mpfr_log(t, t, MPFR_RNDN);
        mpfr_set_d(e, -psi.b, MPFR_RNDN);
        mpfr_pow(t, t, e, MPFR_RNDN);
        mpfr_mul(v, v, t, MPFR_RNDN);
    }
    for (std::size_t i = 0; i < psi.primes.size(); ++i) {
        unsigned long v_p = 0;
        for (std::uint64_t m = n; m % psi.primes[i] == 0; m /= psi.primes[i]) ++v_p;
        if (v_p == 0) continue;
        const double g = psi.gammas.empty() ? 1.0 : psi.gammas[i];
        mpfr_set_ui(t, psi.primes[i], MPFR_RNDN);
        mpfr_set_d(e, g * static_cast<double>(v_p), MPFR_RNDN);
        mpfr_pow(t, t, e, MPFR_RNDN);
        mpfr_mul(v, v, t, MPFR_RNDN);
    }
    mpfr_mul_2ui(v, v, kBits, MPFR_RNDN);
    // A handful of correctly rounded operations at 768 bits: 2^-700
    // relative slack is far beyond what they can lose.
    mpfr_set(t, v, MPFR_RNDN);
    mpfr_div_2ui(t, t, 700, MPFR_RNDN);
    mpfr_abs(t, t, MPFR_RNDN);
    mpfr_sub(e, v, t, MPFR_RNDD);
    mpz_class lo, hi;
    mpfr_get_z(lo.get_mpz_t(), e, MPFR_RNDD);
    mpfr_add(e, v, t, MPFR_RNDU);
    mpfr_get_z(hi.get_mpz_t(), e, MPFR_RNDU);
    mpfr_clears(v, t, e, static_cast<mpfr_ptr>(nullptr));
    return {lo, hi};
}

/// Psi(n) as an exact rational when psi has b = 0 and integer exponents.
inline std::optional<mpq_class> exact_threshold(const Psi& psi, std::uint64_t n) {
    if (psi.b != 0 || psi.a != static_cast<long>(psi.a)) return std::nullopt;
    for (double g : psi.gammas)
        if (g != static_cast<long>(g) || g < 0) return std::nullopt;
    mpq_class v(psi.c);
    mpz_class d;
    mpz_ui_pow_ui(d.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(psi.a));
    v /= d;
    for (std::size_t i = 0; i < psi.primes.size(); ++i) {
        unsigned long v_p = 0;
        for (std::uint64_t m = n; m % psi.primes[i] == 0; m /= psi.primes[i]) ++v_p;
        const unsigned long g = psi.gammas.empty() ? 1 : static_cast<unsigned long>(psi.gammas[i]);
        mpz_class pp;
        mpz_ui_pow_ui(pp.get_mpz_t(), psi.primes[i], g * v_p);
        v *= pp;
    }
    v.canonicalize();
    return v;
}

enum class Form { Product, Max };

/// Thresholds for n = 1..N, shared by every real counted against one psi.
struct Thresholds {
    std::vector<std::pair<mpz_class, mpz_class>> enclosure;
    std::vector<std::optional<mpq_class>> exact;

    Thresholds(const Psi& psi, std::uint64_t N) {
        enclosure.reserve(N);
        exact.reserve(N);
        for (std::uint64_t n = 1; n <= N; ++n) {
            enclosure.push_back(threshold(psi, n));
            exact.push_back(exact_threshold(psi, n));
        }
    }
};

struct Outcome {
    std::vector<std::uint64_t> solutions;
    std::vector<std::uint64_t> undecided;
};

inline mpz_class gcd(const mpz_class& a, const mpz_class& b) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

/// Every n in [1, N] with combine_j ||n alpha_j|| <= Psi(n); with `reduced`
/// also gcd(a_1, ..., a_m, n) = 1 for some choice of nearest integers a_j.
inline Outcome count(const std::vector<Real>& alphas, const Thresholds& th, Form form, bool reduced) {
    Outcome out;
    const std::uint64_t N = th.enclosure.size();
    const mpz_class scale = mpz_class(1) << kBits;
    for (std::uint64_t n = 1; n <= N; ++n) {
        const auto& [tlo, thi] = th.enclosure[n - 1];
        // lhs in units of 2^-512 per factor; the product of m factors is
        // compared at scale 2^(512 m).
        mpz_class lo = form == Form::Product ? mpz_class(1) : mpz_class(0), hi = lo;
        mpz_class unit = 1;
        bool ambiguous_nearest = false;
        std::vector<std::vector<mpz_class>> cands;
        for (const auto& a : alphas) {
            const Dist d = distance(a, n);
            mpz_class dlo, dhi;
            if (d.exact) {
                // Exact distances scaled with floor and ceil.
                const mpq_class s = d.exact_dist * scale;
                mpz_fdiv_q(dlo.get_mpz_t(), s.get_num_mpz_t(), s.get_den_mpz_t());
                mpz_cdiv_q(dhi.get_mpz_t(), s.get_num_mpz_t(), s.get_den_mpz_t());
            } else {
                dlo = d.lo;
                dhi = d.hi;
                ambiguous_nearest = ambiguous_nearest || d.near_half;
            }
            if (form == Form::Product) {
                lo *= dlo;
                hi *= dhi;
                unit *= scale;
            } else {
                lo = std::max(lo, dlo);
                hi = std::max(hi, dhi);
                unit = scale;
            }
            cands.push_back(d.nearest);
        }
        bool yes = false, no = false;
        const bool all_exact = std::all_of(alphas.begin(), alphas.end(), [](const Real& a) { return a.exact.has_value(); });
        if (const auto& te = th.exact[n - 1]; te && all_exact) {
            mpq_class lhs = form == Form::Product ? 1 : 0;
            for (const auto& a : alphas) {
                const mpq_class d = distance(a, n).exact_dist;
                lhs = form == Form::Product ? mpq_class(lhs * d) : std::max(lhs, d);
            }
            yes = lhs <= *te;
            no = !yes;
        } else {
            // Compare lhs/unit with [tlo, thi]/2^512.
            const mpz_class t_lo = tlo * (unit / scale), t_hi = thi * (unit / scale);
            yes = hi <= t_lo;
            no = lo > t_hi;
        }
        if (!yes && !no) {
            out.undecided.push_back(n);
            continue;
        }
        if (no) continue;
        if (reduced) {
            if (ambiguous_nearest) {
                out.undecided.push_back(n);
                continue;
            }
            // Any combination of nearest integers coprime (jointly) with n.
            bool any = false;
            std::vector<std::size_t> idx(cands.size(), 0);
            for (;;) {
                mpz_class g(std::to_string(n));
                for (std::size_t j = 0; j < cands.size(); ++j) g = gcd(g, cands[j][idx[j]]);
                if (g == 1) any = true;
                std::size_t j = 0;
                for (; j < cands.size(); ++j) {
                    if (++idx[j] < cands[j].size()) break;
                    idx[j] = 0;
                }
                if (j == cands.size()) break;
            }
            if (!any) continue;
        }
        out.solutions.push_back(n);
    }
    return out;
}

} // namespace oracle
