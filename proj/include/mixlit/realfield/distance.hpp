#pragma once

#include <mixlit/detail/errors.hpp>
#include <mixlit/detail/u128.hpp>
#include <mixlit/realfield/certified_real.hpp>

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <optional>

namespace mixlit {

inline constexpr std::uint32_t kDistanceGuardBits = 64;

namespace detail {

/// Bounds of ||y|| over y in [lo, hi] * 2^-scale (integers, lo <= hi,
/// hi - lo < 2^(scale-1)). Returns the bounds at the same scale.
inline DyadicInterval nearest_int_distance_bounds(const mpz_class& lo, const mpz_class& hi, std::uint32_t scale) {
    const mpz_class one = mpz_class(1) << scale;
    const mpz_class half = one >> 1;
    const mpz_class k = fdiv_2exp(lo, scale);
    const mpz_class s = lo - (k << scale);  // in [0, one)
    const mpz_class e = s + (hi - lo);      // may reach past one
    auto dist = [&](const mpz_class& x) {   // x in [0, 2*one)
        mpz_class r = x >= one ? x - one : x;
        return r <= half ? r : one - r;
    };
    const bool contains_int = e >= one || s == 0;
    const bool contains_half = (s <= half && half <= e) || (s <= one + half && one + half <= e);
    const mpz_class ds = dist(s), de = dist(e);
    DyadicInterval out;
    out.scale = scale;
    out.lo = contains_int ? mpz_class(0) : std::min(ds, de);
    out.hi = contains_half ? half : std::max(ds, de);
    return out;
}

} // namespace detail

/// Enclosure of ||n alpha|| of width at most 2^-target_bits, inside [0, 1/2].
inline DyadicInterval dist_nearest_int(CertifiedReal& alpha, const mpz_class& n, std::uint32_t target_bits) {
    if (n < 1) throw std::invalid_argument("dist_nearest_int needs n >= 1");
    if (target_bits < 1) throw std::invalid_argument("dist_nearest_int needs target_bits >= 1");
    const std::uint32_t nbits = static_cast<std::uint32_t>(detail::bit_length(n));
    // Width of n * enclosure is 4n units of 2^-(bits+2), i.e. <= 2^(nbits - bits).
    std::uint64_t bits = std::uint64_t(nbits) + target_bits + kDistanceGuardBits;
    const std::uint64_t minimal = std::uint64_t(nbits) + target_bits + 1;
    if (bits > alpha.precision_cap() && !alpha.is_rational_rep()) {
        if (minimal > alpha.precision_cap())
            throw RefinementBudgetExhausted("||n alpha|| for n of " + std::to_string(nbits) + " bits at " +
                                            std::to_string(target_bits) + " target bits");
        bits = alpha.precision_cap();
    }
    DyadicInterval a = alpha.enclosure(static_cast<std::uint32_t>(bits));
    DyadicInterval d = detail::nearest_int_distance_bounds(a.lo * n, a.hi * n, a.scale);
    if (!d.width_at_most(target_bits)) throw InvariantViolation("distance enclosure wider than requested");
    return d;
}

inline DyadicInterval dist_nearest_int(CertifiedReal& alpha, std::uint64_t n, std::uint32_t target_bits) {
    return dist_nearest_int(alpha, detail::from_u64(n), target_bits);
}

/// Enclosure of ||n alpha|| with relative width at most 2^-rel_bits,
/// doubling the absolute target until the lower bound is large enough.
/// Returns an interval with lo == 0 only when ||n alpha|| is exactly 0 as
/// far as the precision cap can tell.
inline DyadicInterval dist_nearest_int_relative(CertifiedReal& alpha, const mpz_class& n, std::uint32_t rel_bits) {
    if (alpha.is_rational_rep()) {
        const mpq_class v = *alpha.exact_value() * n;
        if (v.get_den() == 1) return DyadicInterval{0, 0, rel_bits + 2};
    }
    std::optional<DyadicInterval> best;
    for (std::uint32_t target = rel_bits + 64;; target *= 2) {
        try {
            best = dist_nearest_int(alpha, n, target);
        } catch (const RefinementBudgetExhausted&) {
            if (!best) throw;
            return *best;
        }
        if (best->lo > 0 && ((best->hi - best->lo) << rel_bits) <= best->lo) return *best;
        if (target > (1u << 24)) throw RefinementBudgetExhausted("relative distance for " + alpha.description());
    }
}

} // namespace mixlit
