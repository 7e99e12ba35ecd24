#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <string>
#include <utility>

namespace mixlit::detail {

/// Owning wrapper around mpfr_t with value semantics. Operations are done
/// through the raw C API on get(); this only manages lifetime.
class BigFloat {
public:
    explicit BigFloat(mpfr_prec_t precision) { mpfr_init2(value_, precision); mpfr_set_zero(value_, 1); }
    BigFloat(const BigFloat& other) {
        mpfr_init2(value_, mpfr_get_prec(other.value_));
        mpfr_set(value_, other.value_, MPFR_RNDN);
    }
    BigFloat(BigFloat&& other) noexcept {
        mpfr_init2(value_, mpfr_get_prec(other.value_));
        mpfr_swap(value_, other.value_);
    }
    BigFloat& operator=(BigFloat other) noexcept {
        mpfr_swap(value_, other.value_);
        return *this;
    }
    ~BigFloat() { mpfr_clear(value_); }

    mpfr_ptr get() { return value_; }
    mpfr_srcptr get() const { return value_; }
    mpfr_prec_t precision() const { return mpfr_get_prec(value_); }

    double to_double(mpfr_rnd_t rnd = MPFR_RNDN) const { return mpfr_get_d(value_, rnd); }
    long double to_long_double(mpfr_rnd_t rnd = MPFR_RNDN) const { return mpfr_get_ld(value_, rnd); }

private:
    mpfr_t value_;
};

/// Closed interval with MPFR endpoints.
struct BigInterval {
    BigFloat lo;
    BigFloat hi;

    explicit BigInterval(mpfr_prec_t precision) : lo(precision), hi(precision) {}
};

/// Sets out to z * 2^-scale with the requested rounding.
inline void set_dyadic(BigFloat& out, const mpz_class& z, long scale, mpfr_rnd_t rnd) {
    mpfr_set_z_2exp(out.get(), z.get_mpz_t(), -scale, rnd);
}

/// Relative widening applied to values computed by a short chain of
/// correctly-rounded MPFR operations at the given precision.
inline void widen_relative(BigInterval& iv, mpfr_prec_t precision, int slack_bits = 16) {
    BigFloat eps(64);
    mpfr_set_ui_2exp(eps.get(), 1, -(precision - slack_bits), MPFR_RNDU);
    BigFloat factor(precision + 8);
    mpfr_ui_sub(factor.get(), 1, eps.get(), MPFR_RNDD);
    mpfr_mul(iv.lo.get(), iv.lo.get(), factor.get(), MPFR_RNDD);
    mpfr_add_ui(factor.get(), eps.get(), 1, MPFR_RNDU);
    mpfr_mul(iv.hi.get(), iv.hi.get(), factor.get(), MPFR_RNDU);
}

} // namespace mixlit::detail
