#pragma once

#include <mixlit/detail/mpfr.hpp>

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <string>

namespace mixlit {

/// Closed interval [lo / 2^scale, hi / 2^scale] with integer endpoints.
struct DyadicInterval {
    mpz_class lo;
    mpz_class hi;
    std::uint32_t scale = 0;

    /// Width as an integer count of 2^-scale units.
    mpz_class width_units() const { return hi - lo; }

    bool width_at_most(std::uint32_t bits) const {
        // (hi - lo) / 2^scale <= 2^-bits  <=>  (hi - lo) << bits <= 2^scale
        if (bits > scale) return hi == lo;
        mpz_class w = hi - lo;
        return w <= (mpz_class(1) << (scale - bits));
    }

    bool contains(const mpq_class& x) const {
        mpq_class l(lo, mpz_class(1) << scale);
        mpq_class h(hi, mpz_class(1) << scale);
        l.canonicalize();
        h.canonicalize();
        return l <= x && x <= h;
    }

    bool contains(const DyadicInterval& other) const {
        return lower() <= other.lower() && other.upper() <= upper();
    }

    mpq_class lower() const {
        mpq_class q(lo, mpz_class(1) << scale);
        q.canonicalize();
        return q;
    }
    mpq_class upper() const {
        mpq_class q(hi, mpz_class(1) << scale);
        q.canonicalize();
        return q;
    }
    mpq_class midpoint() const { return (lower() + upper()) / 2; }

    double lo_double() const { return to_double(lo, MPFR_RNDD); }
    double hi_double() const { return to_double(hi, MPFR_RNDU); }
    long double lo_long_double() const { return to_long_double(lo, MPFR_RNDD); }
    long double hi_long_double() const { return to_long_double(hi, MPFR_RNDU); }

    bool operator==(const DyadicInterval&) const = default;

private:
    double to_double(const mpz_class& z, mpfr_rnd_t rnd) const {
        detail::BigFloat f(64);
        mpfr_set_z_2exp(f.get(), z.get_mpz_t(), -static_cast<long>(scale), rnd);
        return mpfr_get_d(f.get(), rnd);
    }
    long double to_long_double(const mpz_class& z, mpfr_rnd_t rnd) const {
        detail::BigFloat f(80);
        mpfr_set_z_2exp(f.get(), z.get_mpz_t(), -static_cast<long>(scale), rnd);
        return mpfr_get_ld(f.get(), rnd);
    }
};

} // namespace mixlit
