#pragma once

#include <mixlit/detail/u128.hpp>
#include <mixlit/realfield/certified_real.hpp>

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <optional>

namespace mixlit {

/// Bounds on ||n alpha|| from the fast path, already widened outward.
struct FastDistance {
    long double lo = 0;
    long double hi = 0;
    /// round(n * frac(alpha)); when `tie` is set both this value and
    /// this value + 1 are nearest-integer candidates (n alpha may be a
    /// half-integer).
    std::uint64_t nearest = 0;
    bool tie = false;
};

/// frac(alpha) held as a 128-bit fixed-point interval [lo, lo + width]
/// ulps, or exactly as num/den when alpha is a rational with a small
/// denominator. Serves n < 2^62 with absolute error about n * 2^-126.
class FractionalWindow {
public:
    static constexpr long double kSlack = 0x1p-60L;

    explicit FractionalWindow(CertifiedReal& alpha) {
        if (auto v = alpha.exact_value(); v && v->get_den() < (mpz_class(1) << 62)) {
            mpz_class fl = detail::fdiv(v->get_num(), v->get_den());
            integer_part_ = fl;
            den_ = detail::to_u64(v->get_den());
            num_ = detail::to_u64(v->get_num() - fl * v->get_den());
            exact_ = true;
            return;
        }
        DyadicInterval iv = alpha.enclosure(126);  // scale 128
        integer_part_ = detail::fdiv_2exp(iv.lo, 128);
        lo_ = detail::low_u128(iv.lo - (integer_part_ << 128));
        width_ = detail::to_u64(iv.hi - iv.lo);
    }

    bool exact() const { return exact_; }
    const mpz_class& integer_part() const { return integer_part_; }

    FastDistance distance(std::uint64_t n) const {
        return exact_ ? exact_distance(n) : window_distance(n);
    }

    /// A lower bound for ||n alpha|| * 2^128, cheap enough for inner loops.
    detail::u128 distance_lower_u128(std::uint64_t n) const {
        using detail::u128;
        if (exact_) {
            const std::uint64_t r = static_cast<std::uint64_t>((u128(num_) * n) % den_);
            const std::uint64_t d = std::min(r, den_ - r);
            const u128 top = u128(d) << 64;
            const u128 q1 = top / den_;
            const u128 q2 = ((top % den_) << 64) / den_;
            return (q1 << 64) | q2;
        }
        const u128 s = lo_ * n;
        const u128 d = s <= detail::kHalf128 ? s : u128(0) - s;
        const u128 span = u128(width_) * n;
        return d > span ? d - span : 0;
    }

    /// ||n frac(alpha)|| as an exact fraction r/den (rational inputs only).
    std::pair<std::uint64_t, std::uint64_t> exact_distance_fraction(std::uint64_t n) const {
        const std::uint64_t r = static_cast<std::uint64_t>((detail::u128(num_) * n) % den_);
        return {std::min(r, den_ - r), den_};
    }

private:
    FastDistance exact_distance(std::uint64_t n) const {
        const detail::u128 prod = detail::u128(num_) * n;
        const std::uint64_t fl = static_cast<std::uint64_t>(prod / den_);
        const std::uint64_t r = static_cast<std::uint64_t>(prod % den_);
        const std::uint64_t d = std::min(r, den_ - r);
        FastDistance out;
        const long double v = static_cast<long double>(d) / static_cast<long double>(den_);
        out.lo = v * (1 - kSlack);
        out.hi = v * (1 + kSlack);
        const detail::u128 twice = detail::u128(r) * 2;
        out.nearest = fl + (twice > den_ ? 1 : 0);
        out.tie = twice == den_;
        return out;
    }

    FastDistance window_distance(std::uint64_t n) const {
        using detail::u128;
        constexpr u128 half = detail::kHalf128;
        const u128 s = lo_ * n;  // wraps mod 2^128
        const u128 span = u128(width_) * n;
        const u128 e = s + span;
        const bool wraps = e < s;
        auto dist = [](u128 x) { return x <= half ? x : u128(0) - x; };
        const bool contains_half = wraps ? (s <= half || e >= half) : (s <= half && half <= e);
        const u128 ds = dist(s), de = dist(e);
        const u128 lo = (wraps || s == 0) ? u128(0) : (ds < de ? ds : de);
        const u128 hi = contains_half ? half : (ds > de ? ds : de);
        FastDistance out;
        out.lo = detail::scaled(lo) * (1 - kSlack);
        out.hi = detail::scaled(hi) * (1 + kSlack);
        const std::uint64_t fl = detail::mul_high(lo_, n);
        out.nearest = fl + ((s >= half || wraps) ? 1 : 0);
        out.tie = contains_half;
        if (contains_half && s >= half) out.nearest = fl;  // candidates fl and fl + 1
        return out;
    }

    mpz_class integer_part_;
    detail::u128 lo_ = 0;
    std::uint64_t width_ = 0;
    std::uint64_t num_ = 0, den_ = 1;
    bool exact_ = false;
};

} // namespace mixlit
