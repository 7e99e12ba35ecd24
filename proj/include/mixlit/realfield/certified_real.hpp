#pragma once

#include <mixlit/core/prime_set.hpp>
#include <mixlit/detail/errors.hpp>
#include <mixlit/detail/u128.hpp>
#include <mixlit/realfield/dyadic_interval.hpp>

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mixlit {

inline constexpr std::uint32_t kDefaultPrecisionCap = 16384;

namespace detail {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Output number `index` of a SplitMix64 generator started at `seed`.
/// Random access, so any digit of a random-bits real is computable
/// without generating its predecessors.
inline std::uint64_t random_block(std::uint64_t seed, std::uint64_t index) {
    return splitmix64_mix(seed + (index + 1) * kGoldenGamma);
}

inline mpz_class fdiv_2exp(const mpz_class& z, std::uint64_t k) {
    mpz_class r;
    mpz_fdiv_q_2exp(r.get_mpz_t(), z.get_mpz_t(), k);
    return r;
}

inline mpz_class cdiv_2exp(const mpz_class& z, std::uint64_t k) {
    mpz_class r;
    mpz_cdiv_q_2exp(r.get_mpz_t(), z.get_mpz_t(), k);
    return r;
}

inline mpz_class fdiv(const mpz_class& a, const mpz_class& b) {
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline mpz_class cdiv(const mpz_class& a, const mpz_class& b) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline mpz_class isqrt(const mpz_class& z) {
    mpz_class r;
    mpz_sqrt(r.get_mpz_t(), z.get_mpz_t());
    return r;
}

} // namespace detail

/// Generator for partial quotients a_k (k >= 1) given the two previous
/// convergent denominators q_{k-1}, q_{k-2}. Returning nullopt ends the
/// expansion, which makes the number rational.
using PartialQuotientRule = std::function<std::optional<mpz_class>(
    std::size_t k, const mpz_class& q_km1, const mpz_class& q_km2)>;

/// One term 1/(p^a r^b) of a gap series.
struct GapTerm {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
};

/// Produces term j (0-based) of a gap series from the terms before it.
using GapRule = std::function<std::optional<GapTerm>(std::size_t j, const std::vector<GapTerm>& previous)>;

namespace repr {

struct Rational {
    mpq_class value;
};

/// (a + b*sqrt(d)) / c with d >= 2 not a square and b, c nonzero.
struct QuadraticSurd {
    mpz_class a, b, d, c;
};

struct ContinuedFraction {
    mpz_class a0;
    PartialQuotientRule rule;

    std::vector<mpz_class> quotients;  // a_0, a_1, ...
    std::vector<mpz_class> p, q;       // convergents p_k / q_k
    bool ended = false;

    /// Generates the next partial quotient. Returns false once the
    /// expansion is known to be finite and fully generated.
    bool extend() {
        if (ended) return false;
        if (quotients.empty()) {
            quotients.push_back(a0);
            p.push_back(a0);
            q.push_back(1);
            return true;
        }
        const std::size_t k = quotients.size();
        const mpz_class q_km1 = q[k - 1];
        const mpz_class q_km2 = k >= 2 ? q[k - 2] : mpz_class(0);
        std::optional<mpz_class> a = rule(k, q_km1, q_km2);
        if (!a) {
            ended = true;
            // Canonical form never ends in 1: [.., x, 1] == [.., x + 1].
            if (k >= 2 && quotients.back() == 1) {
                quotients.pop_back();
                p.pop_back();
                q.pop_back();
                quotients.back() += 1;
                const std::size_t j = quotients.size() - 1;
                const mpz_class pm2 = j >= 2 ? p[j - 2] : (j == 1 ? mpz_class(1) : mpz_class(0));
                const mpz_class qm2 = j >= 2 ? q[j - 2] : (j == 1 ? mpz_class(0) : mpz_class(1));
                p[j] = quotients[j] * p[j - 1] + pm2;
                q[j] = quotients[j] * q[j - 1] + qm2;
            }
            return false;
        }
        if (*a < 1) throw InvariantViolation("continued-fraction rule produced a partial quotient < 1");
        const mpz_class pm2 = k >= 2 ? p[k - 2] : mpz_class(1);
        const mpz_class qm2 = k >= 2 ? q[k - 2] : mpz_class(0);
        p.push_back(*a * p[k - 1] + pm2);
        q.push_back(*a * q[k - 1] + qm2);
        quotients.push_back(std::move(*a));
        return true;
    }
};

/// Sum over j of 1 / (p^{a_j} r^{b_j}). Consecutive denominators must at
/// least double so the tail after term J is below 2 / Q_{J+1}.
struct GapSeries {
    std::uint64_t p = 2;
    std::uint64_t r = 0;  // 0 when the series uses a single base
    GapRule rule;

    std::vector<GapTerm> terms;
    std::vector<mpz_class> denominators;
    bool ended = false;

    bool extend() {
        if (ended) return false;
        std::optional<GapTerm> t = rule(terms.size(), terms);
        if (!t) {
            ended = true;
            return false;
        }
        if (r == 0 && t->b != 0) throw InvariantViolation("gap rule used a second base that is not configured");
        mpz_class Q = detail::pow_ui(p, t->a);
        if (t->b) Q *= detail::pow_ui(r, t->b);
        if (!terms.empty()) {
            if (t->a < terms.back().a || t->b < terms.back().b)
                throw InvariantViolation("gap exponents must be nondecreasing");
            if (Q < 2 * denominators.back())
                throw InvariantViolation("gap denominators must at least double");
        } else if (Q < 2) {
            throw InvariantViolation("first gap denominator must be at least 2");
        }
        terms.push_back(*t);
        denominators.push_back(std::move(Q));
        return true;
    }
};

/// Binary digits of a number in (0,1): `prefix_bits` fixed leading digits
/// followed by SplitMix64 output words taken most significant bit first.
struct RandomBits {
    std::uint64_t seed = 0;
    std::uint64_t prefix = 0;
    std::uint32_t prefix_bits = 0;
};

} // namespace repr

using Representation = std::variant<repr::Rational, repr::QuadraticSurd, repr::ContinuedFraction,
                                    repr::GapSeries, repr::RandomBits>;

/// A real number with an on-demand refinable dyadic enclosure.
///
/// Mutable (the enclosure cache grows), so an instance belongs to one
/// worker at a time. Copies are independent.
class CertifiedReal {
public:
    CertifiedReal(Representation rep, std::string description)
        : rep_(std::move(rep)), description_(std::move(description)) {}

    /// Enclosure of width at most 2^-bits, returned at scale bits + 2.
    DyadicInterval enclosure(std::uint32_t bits) {
        if (bits > precision_cap_ && !std::holds_alternative<repr::Rational>(rep_))
            throw RefinementBudgetExhausted(description_ + " at " + std::to_string(bits) + " bits (cap " +
                                            std::to_string(precision_cap_) + ")");
        const std::uint32_t scale = bits + 2;
        if (cache_ && cache_->scale >= scale) {
            const std::uint32_t k = cache_->scale - scale;
            return DyadicInterval{detail::fdiv_2exp(cache_->lo, k), detail::cdiv_2exp(cache_->hi, k), scale};
        }
        DyadicInterval iv = std::visit([&](auto& r) { return compute(r, scale); }, rep_);
        if (iv.lo > iv.hi || !iv.width_at_most(bits))
            throw InvariantViolation("enclosure of " + description_ + " too wide");
        cache_ = iv;
        return iv;
    }

    /// Same as enclosure(); named for the mutating intent.
    void refine(std::uint32_t bits) { (void)enclosure(bits); }

    std::uint32_t precision() const { return cache_ ? cache_->scale - 2 : 0; }
    std::uint32_t precision_cap() const { return precision_cap_; }
    void set_precision_cap(std::uint32_t cap) { precision_cap_ = cap; }

    CertifiedReal clone() const { return *this; }

    const std::string& description() const { return description_; }
    Representation& representation() { return rep_; }
    const Representation& representation() const { return rep_; }

    bool is_rational_rep() const { return std::holds_alternative<repr::Rational>(rep_); }

    /// The exact value when it is known to be rational: rational
    /// representations, and finite streams whose end has been reached or
    /// is reachable within `max_terms` further terms. Gap exponents can
    /// grow geometrically, so callers should keep `max_terms` small.
    std::optional<mpq_class> exact_value(std::size_t max_terms = 0) {
        if (auto* r = std::get_if<repr::Rational>(&rep_)) return r->value;
        if (auto* cf = std::get_if<repr::ContinuedFraction>(&rep_)) {
            for (std::size_t i = 0; i < max_terms && !cf->ended; ++i) cf->extend();
            if (!cf->ended) return std::nullopt;
            mpq_class v(cf->p.back(), cf->q.back());
            v.canonicalize();
            return v;
        }
        if (auto* g = std::get_if<repr::GapSeries>(&rep_)) {
            for (std::size_t i = 0; i < max_terms && !g->ended; ++i) g->extend();
            if (!g->ended) return std::nullopt;
            mpq_class v(0);
            for (const auto& Q : g->denominators) v += mpq_class(1, Q);
            v.canonicalize();
            return v;
        }
        return std::nullopt;
    }

    /// floor of the number.
    mpz_class integer_part() {
        for (std::uint32_t bits = 64;; bits *= 2) {
            const std::uint32_t b = std::min(bits, precision_cap_);
            DyadicInterval iv = enclosure(b);
            mpz_class lo = detail::fdiv_2exp(iv.lo, iv.scale);
            mpz_class hi = detail::fdiv_2exp(iv.hi, iv.scale);
            if (lo == hi) return lo;
            if (b == precision_cap_) {
                // An exact integer enclosed as [k - eps, k].
                if (auto v = exact_value(); v && v->get_den() == 1) return v->get_num();
                throw RefinementBudgetExhausted("integer part of " + description_);
            }
        }
    }

    /// Rough double value for display and heuristics.
    double approx() {
        return enclosure(60).midpoint().get_d();
    }

    /// Free-form numeric annotations, e.g. design targets of constructions.
    void annotate(const std::string& key, double value) { annotations_[key] = value; }
    std::optional<double> annotation(const std::string& key) const {
        auto it = annotations_.find(key);
        if (it == annotations_.end()) return std::nullopt;
        return it->second;
    }
    const std::map<std::string, double>& annotations() const { return annotations_; }

private:
    static DyadicInterval compute(repr::Rational& r, std::uint32_t scale) {
        mpz_class num = r.value.get_num() << scale;
        return {detail::fdiv(num, r.value.get_den()), detail::cdiv(num, r.value.get_den()), scale};
    }

    static DyadicInterval compute(repr::QuadraticSurd& s, std::uint32_t scale) {
        // b*sqrt(d)*2^scale lies in [root, root + 1] scaled by the sign of b.
        const mpz_class babs = abs(s.b);
        const mpz_class root = detail::isqrt(babs * babs * s.d << (2 * scale));
        mpz_class rlo = root, rhi = root + 1;
        if (s.b < 0) {
            rlo = -(root + 1);
            rhi = -root;
        }
        const mpz_class base = s.a << scale;
        mpz_class nlo = base + rlo, nhi = base + rhi;
        if (s.c > 0) return {detail::fdiv(nlo, s.c), detail::cdiv(nhi, s.c), scale};
        return {detail::fdiv(nhi, s.c), detail::cdiv(nlo, s.c), scale};
    }

    static DyadicInterval compute(repr::ContinuedFraction& cf, std::uint32_t scale) {
        // Consecutive convergents bracket the value and differ by
        // 1 / (q_k q_{k+1}); stop once that is below 2^-scale.
        while (cf.quotients.size() < 2 && cf.extend()) {
        }
        while (!cf.ended) {
            const std::size_t k = cf.quotients.size();
            if (k >= 2 && detail::bit_length(cf.q[k - 1] * cf.q[k - 2]) > scale) break;
            cf.extend();
        }
        const std::size_t k = cf.quotients.size();
        if (cf.ended || k < 2) {
            mpz_class num = cf.p[k - 1] << scale;
            return {detail::fdiv(num, cf.q[k - 1]), detail::cdiv(num, cf.q[k - 1]), scale};
        }
        const mpz_class n1 = cf.p[k - 1] << scale, n2 = cf.p[k - 2] << scale;
        const mpz_class a1 = detail::fdiv(n1, cf.q[k - 1]), a2 = detail::fdiv(n2, cf.q[k - 2]);
        const mpz_class b1 = detail::cdiv(n1, cf.q[k - 1]), b2 = detail::cdiv(n2, cf.q[k - 2]);
        return {a1 < a2 ? a1 : a2, b1 > b2 ? b1 : b2, scale};
    }

    static DyadicInterval compute(repr::GapSeries& g, std::uint32_t scale) {
        // Sum terms until the next denominator exceeds 2^scale; the tail
        // then contributes less than 2 units of 2^-scale.
        std::size_t J = 0;
        for (;;) {
            while (g.terms.size() <= J && g.extend()) {
            }
            if (g.terms.size() <= J) break;
            if (detail::bit_length(g.denominators[J]) > scale + 1) break;
            ++J;
        }
        if (J == 0) {
            if (g.ended) return {0, 0, scale};
            // First term alone is already below 2^-scale.
            return {0, mpz_class(2), scale};
        }
        const mpz_class& D = g.denominators[J - 1];
        mpz_class num = 0;
        for (std::size_t j = 0; j < J; ++j) num += D / g.denominators[j];
        num <<= scale;
        mpz_class lo = detail::fdiv(num, D);
        mpz_class hi = detail::cdiv(num, D);
        if (J < g.terms.size()) {
            mpz_class tail = detail::cdiv(mpz_class(2) << scale, g.denominators[J]);
            hi += tail;
        }
        return {lo, hi, scale};
    }

    static DyadicInterval compute(repr::RandomBits& r, std::uint32_t scale) {
        mpz_class digits;
        if (scale <= r.prefix_bits) {
            digits = detail::from_u64(r.prefix >> (r.prefix_bits - scale));
        } else {
            const std::uint64_t need = scale - r.prefix_bits;
            const std::uint64_t blocks = (need + 63) / 64;
            mpz_class stream = 0;
            for (std::uint64_t i = 0; i < blocks; ++i) {
                stream <<= 64;
                stream += detail::from_u64(detail::random_block(r.seed, i));
            }
            stream >>= (blocks * 64 - need);
            digits = (detail::from_u64(r.prefix) << need) + stream;
        }
        return {digits, digits + 1, scale};
    }

    Representation rep_;
    std::string description_;
    std::optional<DyadicInterval> cache_;
    std::uint32_t precision_cap_ = kDefaultPrecisionCap;
    std::map<std::string, double> annotations_;
};

// ---------------------------------------------------------------------------
// Constructors

inline CertifiedReal make_rational(const mpq_class& value) {
    mpq_class v = value;
    v.canonicalize();
    return CertifiedReal(repr::Rational{v}, "rat:" + v.get_str());
}

/// (a + b*sqrt(d)) / c.
inline CertifiedReal make_surd(const mpz_class& a, const mpz_class& b, const mpz_class& d, const mpz_class& c) {
    if (d < 2) throw std::invalid_argument("surd radicand must be >= 2");
    if (mpz_perfect_square_p(d.get_mpz_t())) throw std::invalid_argument("surd radicand " + d.get_str() + " is a perfect square");
    if (b == 0 || c == 0) throw std::invalid_argument("surd needs b != 0 and c != 0");
    return CertifiedReal(repr::QuadraticSurd{a, b, d, c},
                         "surd:" + a.get_str() + "," + b.get_str() + "," + d.get_str() + "," + c.get_str());
}

/// sqrt(d) for a non-square d >= 2.
inline CertifiedReal make_quadratic(const mpz_class& d) {
    CertifiedReal x = make_surd(0, 1, d, 1);
    return CertifiedReal(std::move(x.representation()), "sqrt:" + d.get_str());
}

inline CertifiedReal golden() {
    CertifiedReal x = make_surd(1, 1, 5, 2);
    return CertifiedReal(std::move(x.representation()), "golden");
}

inline CertifiedReal make_continued_fraction(const mpz_class& a0, PartialQuotientRule rule, std::string description) {
    repr::ContinuedFraction cf;
    cf.a0 = a0;
    cf.rule = std::move(rule);
    return CertifiedReal(std::move(cf), std::move(description));
}

/// [a0; pre..., period, period, ...]; an empty period gives a finite expansion.
inline CertifiedReal make_periodic_cf(const mpz_class& a0, std::vector<mpz_class> pre, std::vector<mpz_class> period) {
    std::ostringstream desc;
    desc << "cf:a0=" << a0.get_str();
    auto join = [&](const char* key, const std::vector<mpz_class>& v) {
        if (v.empty()) return;
        desc << "," << key << "=";
        for (std::size_t i = 0; i < v.size(); ++i) desc << (i ? ";" : "") << v[i].get_str();
    };
    join("pre", pre);
    join("period", period);
    for (const auto& a : pre)
        if (a < 1) throw std::invalid_argument("partial quotients must be >= 1");
    for (const auto& a : period)
        if (a < 1) throw std::invalid_argument("partial quotients must be >= 1");
    PartialQuotientRule rule = [pre = std::move(pre), period = std::move(period)](
                                   std::size_t k, const mpz_class&, const mpz_class&) -> std::optional<mpz_class> {
        const std::size_t i = k - 1;
        if (i < pre.size()) return pre[i];
        if (period.empty()) return std::nullopt;
        return period[(i - pre.size()) % period.size()];
    };
    return make_continued_fraction(a0, std::move(rule), desc.str());
}

inline CertifiedReal make_gap_series(std::uint64_t p, std::uint64_t r, GapRule rule, std::string description) {
    if (!is_prime_u64(p)) throw std::invalid_argument("gap base " + std::to_string(p) + " is not prime");
    if (r != 0 && (!is_prime_u64(r) || r == p))
        throw std::invalid_argument("second gap base must be a prime different from the first");
    repr::GapSeries g;
    g.p = p;
    g.r = r;
    g.rule = std::move(rule);
    return CertifiedReal(std::move(g), std::move(description));
}

/// Sum of p^-d_j with d_1 = d1 and d_{j+1} = ceil(rho * d_j).
inline CertifiedReal make_gap_series(std::uint64_t p, double rho, std::uint64_t d1) {
    if (d1 < 1) throw std::invalid_argument("first gap must be >= 1");
    if (!(rho > 1.0)) throw std::invalid_argument("gap growth rho must exceed 1");
    // ceil(rho*d) > d must hold at every step for the rule to be strictly
    // increasing; with rho > 1 and integer d this is automatic.
    GapRule rule = [rho, d1](std::size_t j, const std::vector<GapTerm>& prev) -> std::optional<GapTerm> {
        if (j == 0) return GapTerm{d1, 0};
        const double next = std::ceil(rho * static_cast<double>(prev.back().a) - 1e-9);
        std::uint64_t d = static_cast<std::uint64_t>(next);
        if (d <= prev.back().a) d = prev.back().a + 1;
        return GapTerm{d, 0};
    };
    std::ostringstream desc;
    desc << "gap:p=" << p << ",rho=" << rho << ",d1=" << d1;
    return make_gap_series(p, 0, std::move(rule), desc.str());
}

/// Finite sum of p^-d_j over an explicit strictly increasing table.
inline CertifiedReal make_gap_series(std::uint64_t p, std::vector<std::uint64_t> gaps) {
    if (gaps.empty() || gaps.front() < 1) throw std::invalid_argument("gap table needs entries >= 1");
    for (std::size_t i = 1; i < gaps.size(); ++i)
        if (gaps[i] <= gaps[i - 1]) throw std::invalid_argument("gap table must be strictly increasing");
    std::ostringstream desc;
    desc << "gap:p=" << p << ",table=";
    for (std::size_t i = 0; i < gaps.size(); ++i) desc << (i ? ";" : "") << gaps[i];
    GapRule rule = [gaps = std::move(gaps)](std::size_t j, const std::vector<GapTerm>&) -> std::optional<GapTerm> {
        if (j >= gaps.size()) return std::nullopt;
        return GapTerm{gaps[j], 0};
    };
    return make_gap_series(p, 0, std::move(rule), desc.str());
}

/// Two-base gap series with log2 Q_1 = first_bits, log2 Q_{j+1} = rho *
/// log2 Q_j + lift, and a share `delta` of each Q_j's size carried by
/// powers of p (the rest by powers of r). delta = 1 is a pure base-p series
/// and delta = 0 a pure base-r one. With lift >= 2 every Q_j satisfies
/// Q_{j+1} > 2 Q_j^2, so the partial sums are convergents.
inline CertifiedReal make_mixed_gap_series(std::uint64_t p, std::uint64_t r, double rho, double first_bits,
                                           double delta, double lift = 0) {
    if (!(rho >= 2.0)) throw std::invalid_argument("mixed gap growth rho must be >= 2");
    if (!(first_bits >= 1.0)) throw std::invalid_argument("mixed gap first_bits must be >= 1");
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("mixed gap delta must lie in [0,1]");
    if (!(lift >= 0.0) || !std::isfinite(lift)) throw std::invalid_argument("mixed gap lift must be >= 0");
    const double lp = std::log2(static_cast<double>(p)), lr = std::log2(static_cast<double>(r));
    GapRule rule = [=](std::size_t j, const std::vector<GapTerm>& prev) -> std::optional<GapTerm> {
        // L_j = rho^j (first_bits + lift / (rho - 1)) - lift / (rho - 1) solves
        // L_{j+1} = rho L_j + lift.
        const double shift = lift / (rho - 1.0);
        const double L = (first_bits + shift) * std::pow(rho, static_cast<double>(j)) - shift;
        if (!(L < 1e9)) throw RefinementBudgetExhausted("mixed gap series term too large");
        GapTerm t{static_cast<std::uint64_t>(std::llround(delta * L / lp)),
                  static_cast<std::uint64_t>(std::llround((1.0 - delta) * L / lr))};
        if (t.a == 0 && t.b == 0) (delta > 0 ? t.a : t.b) = 1;
        if (!prev.empty()) {
            // Keep exponents strictly increasing on every base in use so
            // consecutive partial sums stay in lowest terms.
            if (delta > 0) t.a = std::max(t.a, prev.back().a + 1);
            if (delta < 1) t.b = std::max(t.b, prev.back().b + 1);
        }
        return t;
    };
    std::ostringstream desc;
    desc << "gap:p=" << p << ",r=" << r << ",rho=" << rho << ",bits=" << first_bits << ",delta=" << delta;
    if (lift != 0) desc << ",lift=" << lift;
    return make_gap_series(p, r, std::move(rule), desc.str());
}

/// Uniform random digits; `prefix` pins the first `prefix_bits` digits,
/// which places the number in a chosen dyadic cell.
inline CertifiedReal make_random(std::uint64_t seed, std::uint64_t prefix = 0, std::uint32_t prefix_bits = 0) {
    if (prefix_bits > 63) throw std::invalid_argument("random prefix limited to 63 bits");
    if ((prefix >> prefix_bits) != 0) throw std::invalid_argument("random prefix wider than prefix_bits");
    std::ostringstream desc;
    desc << "rand:seed=0x" << std::hex << seed;
    if (prefix_bits) desc << std::dec << ",prefix=" << prefix << ",prefix_bits=" << prefix_bits;
    return CertifiedReal(repr::RandomBits{seed, prefix, prefix_bits}, desc.str());
}

} // namespace mixlit
