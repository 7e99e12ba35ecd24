#pragma once

#include <mixlit/core/prime_set.hpp>
#include <mixlit/core/sieve.hpp>

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mixlit {

/// 6/pi^2 to long double precision.
inline constexpr long double kSixOverPiSquared = 0.607927101854026628663276779258365833L;

/// (6N/pi^2) * prod p_i/(p_i+1): the main term of the coprime phi-ratio sum.
inline long double lemma2_main_term(std::uint64_t N, const PrimeSet& ps) {
    if (N < 1) throw std::invalid_argument("lemma2_main_term: N must be >= 1");
    long double r = kSixOverPiSquared * static_cast<long double>(N);
    for (auto p : ps.primes()) {
        r *= static_cast<long double>(p) / static_cast<long double>(p + 1);
    }
    return r;
}

namespace detail {

struct Fraction {
    mpz_class num;
    mpz_class den;
};

inline Fraction split_sum(const std::vector<std::uint32_t>& nums, const std::vector<std::uint32_t>& dens,
                          std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) {
        return {mpz_class(static_cast<unsigned long>(nums[lo])), mpz_class(static_cast<unsigned long>(dens[lo]))};
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    Fraction a = split_sum(nums, dens, lo, mid);
    Fraction b = split_sum(nums, dens, mid, hi);
    Fraction r;
    r.num = a.num * b.den + b.num * a.den;
    r.den = a.den * b.den;
    return r;
}

} // namespace detail

/// Exact sum of phi(n)/n over n <= N with no p_i dividing n.
///
/// Terms are summed by binary splitting with unreduced denominators. Every
/// reduced term denominator divides the product R of primes <= N outside the
/// set, so the total times R is an integer; one exact division and one gcd
/// against R recover the reduced fraction without a gcd on the full product.
inline mpq_class phi_ratio_sum_coprime(std::uint64_t N, const PrimeSet& ps, const SieveTable& sieve) {
    if (N < 1) throw std::invalid_argument("phi_ratio_sum_coprime: N must be >= 1");
    if (N > sieve.limit()) {
        throw std::out_of_range("phi_ratio_sum_coprime: N exceeds the sieve limit " + std::to_string(sieve.limit()));
    }
    std::vector<std::uint32_t> nums;
    std::vector<std::uint32_t> dens;
    const auto& phi = sieve.phi_values();
    for (std::uint64_t n = 1; n <= N; ++n) {
        if (!ps.coprime_to(n)) continue;
        const std::uint32_t g = std::gcd(phi[n], static_cast<std::uint32_t>(n));
        nums.push_back(phi[n] / g);
        dens.push_back(static_cast<std::uint32_t>(n / g));
    }
    detail::Fraction total = detail::split_sum(nums, dens, 0, nums.size());

    mpz_class radical = 1;
    {
        std::vector<mpz_class> factors;
        for (std::uint64_t q = 2; q <= N; ++q) {
            if (sieve.smallest_prime_factor(q) == q && ps.coprime_to(q)) {
                factors.emplace_back(static_cast<unsigned long>(q));
            }
        }
        // balanced product
        while (factors.size() > 1) {
            std::vector<mpz_class> next;
            next.reserve((factors.size() + 1) / 2);
            for (std::size_t i = 0; i + 1 < factors.size(); i += 2) next.push_back(factors[i] * factors[i + 1]);
            if (factors.size() % 2) next.push_back(std::move(factors.back()));
            factors = std::move(next);
        }
        if (!factors.empty()) radical = std::move(factors.front());
    }
    mpz_class scaled = total.num * radical;
    mpz_divexact(scaled.get_mpz_t(), scaled.get_mpz_t(), total.den.get_mpz_t());
    mpq_class result(scaled, radical);
    result.canonicalize();
    return result;
}

inline mpq_class phi_ratio_sum_coprime(std::uint64_t N, const PrimeSet& ps) {
    return phi_ratio_sum_coprime(N, ps, SieveTable(N));
}

} // namespace mixlit
