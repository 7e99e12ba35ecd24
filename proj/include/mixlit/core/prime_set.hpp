#pragma once

#include <mixlit/detail/errors.hpp>

#include <gmpxx.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixlit {

namespace detail {

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t result = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

} // namespace detail

/// Deterministic Miller-Rabin; the first twelve prime bases are a proven
/// witness set for every n < 2^64.
inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    constexpr std::uint64_t small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (auto p : small) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (auto a : small) {
        std::uint64_t x = detail::pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned r = 1; r < s; ++r) {
            x = detail::mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

/// Ordered set of distinct primes p_1 < ... < p_k defining a mixed norm.
class PrimeSet {
public:
    PrimeSet() = default;

    explicit PrimeSet(std::vector<std::uint64_t> primes) : primes_(std::move(primes)) {
        std::sort(primes_.begin(), primes_.end());
        for (std::size_t i = 0; i < primes_.size(); ++i) {
            if (!is_prime_u64(primes_[i])) {
                throw std::invalid_argument("PrimeSet: " + std::to_string(primes_[i]) + " is not prime");
            }
            if (i > 0 && primes_[i] == primes_[i - 1]) {
                throw std::invalid_argument("PrimeSet: duplicate prime " + std::to_string(primes_[i]));
            }
        }
        radical_ = 1;
        for (auto p : primes_) radical_ *= static_cast<unsigned long>(p);
    }

    PrimeSet(std::initializer_list<std::uint64_t> primes) : PrimeSet(std::vector<std::uint64_t>(primes)) {}

    /// Parses "2,3,5"; the empty string is the empty set.
    static PrimeSet parse(std::string_view text) {
        std::vector<std::uint64_t> out;
        while (!text.empty()) {
            const auto comma = text.find(',');
            const auto token = text.substr(0, comma);
            std::uint64_t value = 0;
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
            if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
                throw ParseError("bad prime list entry '" + std::string(token) + "'");
            }
            out.push_back(value);
            if (comma == std::string_view::npos) break;
            text.remove_prefix(comma + 1);
        }
        return PrimeSet(std::move(out));
    }

    std::span<const std::uint64_t> primes() const { return primes_; }
    std::size_t size() const { return primes_.size(); }
    bool empty() const { return primes_.empty(); }
    std::uint64_t operator[](std::size_t i) const { return primes_[i]; }

    const mpz_class& radical() const { return radical_; }

    bool coprime_to(std::uint64_t n) const {
        for (auto p : primes_) {
            if (n % p == 0) return false;
        }
        return true;
    }

    std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < primes_.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(primes_[i]);
        }
        return s;
    }

    friend bool operator==(const PrimeSet& a, const PrimeSet& b) { return a.primes_ == b.primes_; }

private:
    std::vector<std::uint64_t> primes_;
    mpz_class radical_ = 1;
};

} // namespace mixlit
