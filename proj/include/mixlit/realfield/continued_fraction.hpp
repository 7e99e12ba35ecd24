#pragma once

#include <mixlit/detail/errors.hpp>
#include <mixlit/realfield/certified_real.hpp>

#include <gmpxx.h>

#include <cstddef>
#include <vector>

namespace mixlit {

struct Convergent {
    std::size_t index = 0;
    mpz_class partial_quotient;  // a_k
    mpz_class p;                 // numerator p_k
    mpz_class q;                 // denominator q_k
};

namespace detail {

/// Exact periodic algorithm for x = (P + sqrt(D)) / Q.
inline std::vector<mpz_class> surd_partial_quotients(const repr::QuadraticSurd& s, std::size_t count) {
    // Rewrite (a + b sqrt d) / c as (P + sqrt D) / Q with Q | D - P^2.
    mpz_class P = s.a, D = s.b * s.b * s.d, Q = s.c;
    if (s.b < 0) {
        P = -P;
        Q = -Q;
    }
    mpz_class rem = D - P * P;
    if (rem % Q != 0) {
        const mpz_class g = abs(Q);
        P *= g;
        D *= g * g;
        Q *= g;
    }
    const mpz_class root = isqrt(D);
    std::vector<mpz_class> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        // floor((P + sqrt D) / Q) from the integer square root; for Q < 0
        // the irrational part pushes the quotient up by one step.
        const mpz_class top = Q > 0 ? mpz_class(P + root) : mpz_class(P + root + 1);
        const mpz_class a = fdiv(top, Q);
        out.push_back(a);
        P = a * Q - P;
        Q = (D - P * P) / Q;
    }
    return out;
}

/// Partial quotients certified by a single enclosure [lo, hi] * 2^-scale:
/// emitted while both endpoints share the same floor at every Euclid step.
inline std::vector<mpz_class> interval_partial_quotients(const DyadicInterval& iv, std::size_t count, bool exact) {
    mpz_class n1 = iv.lo, d1 = mpz_class(1) << iv.scale;
    mpz_class n2 = iv.hi, d2 = d1;
    std::vector<mpz_class> out;
    while (out.size() < count) {
        const mpz_class a1 = fdiv(n1, d1), a2 = fdiv(n2, d2);
        if (a1 != a2) break;
        const mpz_class r1 = n1 - a1 * d1, r2 = n2 - a2 * d2;
        if (exact) {
            out.push_back(a1);
            if (r1 == 0) break;
        } else {
            // An endpoint landing on an integer leaves the next quotient
            // unbounded on that side; stop without emitting.
            if (r1 == 0 || r2 == 0) break;
            out.push_back(a1);
        }
        n1 = d1;
        d1 = r1;
        n2 = d2;
        d2 = r2;
    }
    return out;
}

} // namespace detail

/// First `count` partial quotients a_0, a_1, ... (fewer for rationals,
/// whose expansion is finite and reported as such).
inline std::vector<mpz_class> partial_quotients(CertifiedReal& alpha, std::size_t count) {
    Representation& rep = alpha.representation();
    if (auto* s = std::get_if<repr::QuadraticSurd>(&rep)) return detail::surd_partial_quotients(*s, count);
    if (auto* cf = std::get_if<repr::ContinuedFraction>(&rep)) {
        while (cf->quotients.size() < count && cf->extend()) {
        }
        const std::size_t n = std::min(count, cf->quotients.size());
        return {cf->quotients.begin(), cf->quotients.begin() + static_cast<std::ptrdiff_t>(n)};
    }
    auto exact_quotients = [count](const mpq_class& v) {
        mpz_class num = v.get_num(), den = v.get_den();
        std::vector<mpz_class> out;
        while (out.size() < count && den != 0) {
            mpz_class a = detail::fdiv(num, den);
            out.push_back(a);
            mpz_class r = num - a * den;
            num = den;
            den = r;
        }
        return out;
    };
    if (auto v = alpha.exact_value()) return exact_quotients(*v);
    // Generic path: each bit of precision certifies roughly half a bit of
    // convergent denominator, so double until enough quotients agree.
    for (std::uint32_t bits = std::max<std::uint32_t>(128, static_cast<std::uint32_t>(count) * 4);; bits *= 2) {
        const std::uint32_t b = std::min(bits, alpha.precision_cap());
        const DyadicInterval iv = alpha.enclosure(b);
        // A finite series may reveal itself while being summed.
        if (auto v = alpha.exact_value()) return exact_quotients(*v);
        std::vector<mpz_class> out = detail::interval_partial_quotients(iv, count, false);
        if (out.size() >= count) return out;
        if (b == alpha.precision_cap())
            throw RefinementBudgetExhausted("only " + std::to_string(out.size()) + " of " + std::to_string(count) +
                                            " partial quotients certifiable for " + alpha.description());
    }
}

inline std::vector<Convergent> convergents_from_quotients(const std::vector<mpz_class>& a) {
    std::vector<Convergent> out;
    out.reserve(a.size());
    mpz_class pm2 = 0, pm1 = 1, qm2 = 1, qm1 = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        mpz_class p = a[k] * pm1 + pm2;
        mpz_class q = a[k] * qm1 + qm2;
        out.push_back(Convergent{k, a[k], p, q});
        pm2 = pm1;
        pm1 = p;
        qm2 = qm1;
        qm1 = q;
    }
    return out;
}

/// First `count` convergents p_k / q_k, k = 0, 1, ...
inline std::vector<Convergent> convergents(CertifiedReal& alpha, std::size_t count) {
    return convergents_from_quotients(partial_quotients(alpha, count));
}

/// Convergents with q_k < 2^max_q_bits, plus the first one beyond so the
/// caller sees the next denominator. For representations without an exact
/// expansion the list stops early if the precision cap cannot certify
/// further quotients.
inline std::vector<Convergent> convergents_up_to_bits(CertifiedReal& alpha, std::size_t max_q_bits) {
    auto cut = [&](std::vector<Convergent> cs) {
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (detail::bit_length(cs[i].q) > max_q_bits) {
                cs.resize(i + 1);
                break;
            }
        }
        return cs;
    };
    const Representation& rep = alpha.representation();
    const bool exact_stream = std::holds_alternative<repr::QuadraticSurd>(rep) ||
                              std::holds_alternative<repr::ContinuedFraction>(rep) || alpha.exact_value();
    if (exact_stream) {
        for (std::size_t count = 16;; count *= 2) {
            std::vector<Convergent> cs = convergents(alpha, count);
            if (cs.size() < count || detail::bit_length(cs.back().q) > max_q_bits) return cut(std::move(cs));
        }
    }
    // An enclosure of width 2^-B certifies convergents up to about 2^(B/2).
    const std::uint64_t want = 2 * std::uint64_t(max_q_bits) + 64;
    const std::uint32_t bits = static_cast<std::uint32_t>(std::min<std::uint64_t>(want, alpha.precision_cap()));
    const DyadicInterval iv = alpha.enclosure(bits);
    if (alpha.exact_value()) return convergents_up_to_bits(alpha, max_q_bits);
    return cut(convergents_from_quotients(
        detail::interval_partial_quotients(iv, static_cast<std::size_t>(-1), false)));
}

} // namespace mixlit
