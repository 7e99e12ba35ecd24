#pragma once

#include <mixlit/core/prime_set.hpp>

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace mixlit {

/// Integers m >= 1 coprime to a radical, enumerated by a wheel of residues
/// modulo the radical when the wheel is small, else by trial division.
class CoprimeWheel {
public:
    static constexpr std::uint64_t kMaxWheel = 1u << 20;

    explicit CoprimeWheel(const PrimeSet& ps) : primes_(ps.primes().begin(), ps.primes().end()) {
        std::uint64_t r = 1;
        for (auto p : primes_) {
            if (r > kMaxWheel / p) {
                r = 0;
                break;
            }
            r *= p;
        }
        modulus_ = r;
        if (modulus_ != 0) {
            for (std::uint64_t x = 1; x <= modulus_; ++x) {
                if (std::gcd(x, modulus_) == 1) residues_.push_back(x);
            }
        }
    }

    bool coprime(std::uint64_t m) const {
        for (auto p : primes_) {
            if (m % p == 0) return false;
        }
        return true;
    }

    /// Calls f(m) for every coprime m in [first, last], increasing.
    template <class F>
    void for_each(std::uint64_t first, std::uint64_t last, F&& f) const {
        if (first < 1) first = 1;
        if (first > last) return;
        if (modulus_ == 0) {
            for (std::uint64_t m = first; m <= last; ++m) {
                if (coprime(m)) f(m);
            }
            return;
        }
        std::uint64_t block = (first - 1) / modulus_ * modulus_;
        std::size_t idx = 0;
        const std::uint64_t offset = first - block;
        while (idx < residues_.size() && residues_[idx] < offset) ++idx;
        for (;;) {
            for (; idx < residues_.size(); ++idx) {
                const std::uint64_t m = block + residues_[idx];
                if (m > last) return;
                f(m);
            }
            idx = 0;
            block += modulus_;
            if (block >= last) return;
        }
    }

    std::uint64_t modulus() const { return modulus_; }

private:
    std::vector<std::uint64_t> primes_;
    std::uint64_t modulus_ = 1;
    std::vector<std::uint64_t> residues_;
};

/// One element (a_1,...,a_k, m) of the decomposition n = p_1^a_1...p_k^a_k * m
/// with m coprime to the radical.
struct ValuationPattern {
    std::span<const unsigned> exponents;
    std::uint64_t prime_power = 1;
    std::uint64_t m = 1;

    std::uint64_t n() const { return prime_power * m; }
};

/// Calls f(exponents, prime_power) for every tuple with prod p_i^a_i <= limit,
/// in odometer order (last prime fastest), pruning as soon as the product
/// exceeds the limit.
template <class F>
void for_each_exponent_tuple(std::uint64_t limit, const PrimeSet& ps, F&& f) {
    const std::size_t k = ps.size();
    std::vector<unsigned> exps(k, 0);
    std::vector<std::uint64_t> partial(k + 1, 1);  // partial[i] = prod_{j<i} p_j^a_j
    if (limit < 1) return;
    if (k == 0) {
        f(std::span<const unsigned>(exps), std::uint64_t{1});
        return;
    }
    // Depth-first odometer.
    std::size_t i = k - 1;
    for (std::size_t j = 0; j < k; ++j) partial[j + 1] = partial[j];
    for (;;) {
        f(std::span<const unsigned>(exps), partial[k]);
        // advance the odometer from the last digit
        i = k - 1;
        for (;;) {
            const std::uint64_t p = ps[i];
            if (partial[i + 1] <= limit / p) {
                ++exps[i];
                partial[i + 1] *= p;
                for (std::size_t j = i + 1; j < k; ++j) {
                    exps[j] = 0;
                    partial[j + 1] = partial[j];
                }
                break;
            }
            if (i == 0) return;
            --i;
        }
    }
}

/// Calls f(const ValuationPattern&) for every pattern with n <= limit. The
/// induced map to n is a bijection onto {1, ..., limit}.
template <class F>
void for_each_valuation_pattern(std::uint64_t limit, const PrimeSet& ps, F&& f) {
    const CoprimeWheel wheel(ps);
    for_each_exponent_tuple(limit, ps, [&](std::span<const unsigned> exps, std::uint64_t pp) {
        ValuationPattern pat{exps, pp, 1};
        wheel.for_each(1, limit / pp, [&](std::uint64_t m) {
            pat.m = m;
            f(static_cast<const ValuationPattern&>(pat));
        });
    });
}

/// Pull-style stream over the same patterns, for callers that want an
/// explicit iterator. Each yielded value owns its exponent vector.
class ValuationPatternStream {
public:
    struct Item {
        std::vector<unsigned> exponents;
        std::uint64_t prime_power;
        std::uint64_t m;
        std::uint64_t n() const { return prime_power * m; }
    };

    ValuationPatternStream(std::uint64_t limit, const PrimeSet& ps) : limit_(limit), wheel_(ps) {
        for_each_exponent_tuple(limit, ps, [&](std::span<const unsigned> e, std::uint64_t pp) {
            tuples_.push_back({std::vector<unsigned>(e.begin(), e.end()), pp});
        });
        load_tuple();
    }

    std::optional<Item> next() {
        while (tuple_ < tuples_.size()) {
            if (pos_ < current_m_.size()) {
                const auto& t = tuples_[tuple_];
                return Item{t.first, t.second, current_m_[pos_++]};
            }
            ++tuple_;
            load_tuple();
        }
        return std::nullopt;
    }

private:
    void load_tuple() {
        current_m_.clear();
        pos_ = 0;
        if (tuple_ >= tuples_.size()) return;
        wheel_.for_each(1, limit_ / tuples_[tuple_].second, [&](std::uint64_t m) { current_m_.push_back(m); });
    }

    std::uint64_t limit_;
    CoprimeWheel wheel_;
    std::vector<std::pair<std::vector<unsigned>, std::uint64_t>> tuples_;
    std::size_t tuple_ = 0;
    std::vector<std::uint64_t> current_m_;
    std::size_t pos_ = 0;
};

} // namespace mixlit
