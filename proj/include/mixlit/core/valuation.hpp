#pragma once

#include <mixlit/core/prime_set.hpp>

#include <gmpxx.h>

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mixlit {

/// Largest v with p^v | n. n = 0 is rejected since its valuation is infinite.
inline unsigned padic_valuation(std::uint64_t n, std::uint64_t p) {
    if (n == 0) throw std::domain_error("padic_valuation: n must be positive");
    if (p < 2) throw std::domain_error("padic_valuation: p must be prime");
    if (p == 2) return static_cast<unsigned>(std::countr_zero(n));
    unsigned v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

inline unsigned padic_valuation(const mpz_class& n, std::uint64_t p) {
    if (n <= 0) throw std::domain_error("padic_valuation: n must be positive");
    if (p < 2) throw std::domain_error("padic_valuation: p must be prime");
    mpz_class f(static_cast<unsigned long>(p));
    mpz_class rest;
    return static_cast<unsigned>(mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), f.get_mpz_t()));
}

/// v_{p_i}(n) for every prime of the set, in set order.
inline std::vector<unsigned> valuations(std::uint64_t n, const PrimeSet& ps) {
    std::vector<unsigned> v;
    v.reserve(ps.size());
    for (auto p : ps.primes()) v.push_back(padic_valuation(n, p));
    return v;
}

/// |n|_{p_1} ... |n|_{p_k} = prod p_i^(-v_{p_i}(n)), exact and in lowest terms.
inline mpq_class mixed_norm(std::uint64_t n, const PrimeSet& ps) {
    mpz_class den = 1;
    for (auto p : ps.primes()) {
        const unsigned v = padic_valuation(n, p);
        mpz_class pv;
        mpz_ui_pow_ui(pv.get_mpz_t(), p, v);
        den *= pv;
    }
    return mpq_class(mpz_class(1), den);
}

/// The p-part prod p_i^{v_{p_i}(n)}; mixed_norm(n) times this is exactly 1.
inline mpz_class prime_part(std::uint64_t n, const PrimeSet& ps) {
    mpz_class r = 1;
    for (auto p : ps.primes()) {
        for (unsigned v = padic_valuation(n, p); v > 0; --v) r *= static_cast<unsigned long>(p);
    }
    return r;
}

} // namespace mixlit
