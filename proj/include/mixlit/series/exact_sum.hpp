#pragma once

#include <mixlit/detail/mpfr.hpp>

#include <gmpxx.h>
#include <mpfr.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mixlit {

/// Exact accumulator for long double terms: every addition is exact, so
/// the sum does not depend on the order or grouping of the terms. Terms
/// below 2^-1152 in magnitude are not representable; they are skipped and
/// counted in dropped_terms() so callers can bound their contribution.
class ExactSum {
public:
    static constexpr int kBias = 1216;  // bit position of 2^0
    static constexpr int kLimbs = 80;   // 32-bit chunks covering 2^-1216 .. 2^1344

    void add(long double x) {
        if (x == 0) return;
        if (!std::isfinite(x)) throw std::domain_error("ExactSum: non-finite term");
        int e = 0;
        const long double frac = std::frexp(x, &e);  // |frac| in [0.5, 1)
        const bool negative = frac < 0;
        const std::uint64_t mant = static_cast<std::uint64_t>(std::ldexp(std::fabs(frac), 64));
        const int pos = e - 64 + kBias;  // bit position of mant's lowest bit
        if (pos < 0) {
            ++dropped_;
            return;
        }
        if (pos + 96 > kLimbs * 32) throw std::overflow_error("ExactSum: term too large");
        const int limb = pos / 32, shift = pos % 32;
        const unsigned __int128 wide = static_cast<unsigned __int128>(mant) << shift;
        const std::int64_t c0 = static_cast<std::int64_t>(static_cast<std::uint32_t>(wide));
        const std::int64_t c1 = static_cast<std::int64_t>(static_cast<std::uint32_t>(wide >> 32));
        const std::int64_t c2 = static_cast<std::int64_t>(static_cast<std::uint32_t>(wide >> 64));
        if (negative) {
            limbs_[limb] -= c0;
            limbs_[limb + 1] -= c1;
            limbs_[limb + 2] -= c2;
        } else {
            limbs_[limb] += c0;
            limbs_[limb + 1] += c1;
            limbs_[limb + 2] += c2;
        }
        if (++pending_ >= kNormalizeEvery) normalize();
    }

    void add(const ExactSum& other) {
        for (int i = 0; i < kLimbs; ++i) limbs_[i] += other.limbs_[i];
        dropped_ += other.dropped_;
        pending_ += other.pending_ + 1;
        normalize();
    }

    /// Exact value as a big integer times 2^-kBias.
    mpz_class scaled_value() const {
        mpz_class v = 0;
        for (int i = kLimbs - 1; i >= 0; --i) {
            v <<= 32;
            v += static_cast<long>(limbs_[i]);
        }
        return v;
    }

    /// Correctly rounded value.
    long double value() const {
        detail::BigFloat f(64);
        mpfr_set_z_2exp(f.get(), scaled_value().get_mpz_t(), -kBias, MPFR_RNDN);
        return mpfr_get_ld(f.get(), MPFR_RNDN);
    }

    std::uint64_t dropped_terms() const { return dropped_; }

    bool operator==(const ExactSum& other) const { return scaled_value() == other.scaled_value(); }

private:
    static constexpr std::uint32_t kNormalizeEvery = 1u << 29;

    void normalize() {
        // Carry so each limb is back in [0, 2^32) except the top one.
        for (int i = 0; i + 1 < kLimbs; ++i) {
            const std::int64_t carry = limbs_[i] >> 32;  // arithmetic shift: floor division
            limbs_[i] -= carry * (std::int64_t(1) << 32);
            limbs_[i + 1] += carry;
        }
        pending_ = 0;
    }

    std::array<std::int64_t, kLimbs> limbs_{};
    std::uint64_t dropped_ = 0;
    std::uint32_t pending_ = 0;
};

} // namespace mixlit
