#pragma once

#include <cmath>
#include <cstdint>
#include <gmpxx.h>

namespace mixlit::detail {

using u128 = unsigned __int128;

inline constexpr u128 kHalf128 = u128(1) << 127;

inline mpz_class to_mpz(u128 x) {
    mpz_class hi(static_cast<unsigned long>(static_cast<std::uint64_t>(x >> 64)));
    mpz_class lo(static_cast<unsigned long>(static_cast<std::uint64_t>(x)));
    return (hi << 64) + lo;
}

/// Low 128 bits of a nonnegative integer.
inline u128 low_u128(const mpz_class& z) {
    mpz_class lo_part = z & ((mpz_class(1) << 128) - 1);
    mpz_class hi = lo_part >> 64;
    mpz_class lo = lo_part - (hi << 64);
    return (u128(hi.get_ui()) << 64) | u128(lo.get_ui());
}

inline std::uint64_t to_u64(const mpz_class& z) {
    static_assert(sizeof(unsigned long) == 8);
    return z.get_ui();
}

inline mpz_class from_u64(std::uint64_t v) {
    return mpz_class(static_cast<unsigned long>(v));
}

/// floor(a * n / 2^128) for a 128-bit a and 64-bit n.
inline std::uint64_t mul_high(u128 a, std::uint64_t n) {
    const u128 lo = u128(static_cast<std::uint64_t>(a)) * n;
    const u128 hi = u128(static_cast<std::uint64_t>(a >> 64)) * n;
    return static_cast<std::uint64_t>((hi + (lo >> 64)) >> 64);
}

/// x / 2^128 as long double, round to nearest.
inline long double scaled(u128 x) {
    const long double hi = static_cast<long double>(static_cast<std::uint64_t>(x >> 64));
    const long double lo = static_cast<long double>(static_cast<std::uint64_t>(x));
    return std::ldexp(hi, -64) + std::ldexp(lo, -128);
}

inline std::size_t bit_length(const mpz_class& z) {
    return z == 0 ? 0 : mpz_sizeinbase(z.get_mpz_t(), 2);
}

/// log2 of a positive integer, accurate to double precision.
inline double log2_of(const mpz_class& z) {
    long exp = 0;
    const double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return std::log2(mant) + static_cast<double>(exp);
}

inline mpz_class pow_ui(std::uint64_t base, std::uint64_t exp) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), base, exp);
    return r;
}

} // namespace mixlit::detail
