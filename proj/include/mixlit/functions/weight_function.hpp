#pragma once

#include <mixlit/core/prime_set.hpp>
#include <mixlit/core/valuation.hpp>
#include <mixlit/detail/errors.hpp>
#include <mixlit/detail/mpfr.hpp>
#include <mixlit/detail/text.hpp>
#include <mixlit/functions/approx_function.hpp>

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace mixlit {

/// f(x) = x^gamma on x > 0; gamma = 1 is the identity, gamma = 0 constant 1.
class WeightFunction {
public:
    explicit WeightFunction(double gamma = 1.0) : gamma_(gamma) {
        if (!(gamma >= 0) || !std::isfinite(gamma)) throw std::invalid_argument("weight exponent gamma must be >= 0");
    }

    static WeightFunction identity() { return WeightFunction(1.0); }
    static WeightFunction constant() { return WeightFunction(0.0); }

    double gamma() const { return gamma_; }

    long double operator()(long double x) const {
        if (!(x > 0)) throw std::domain_error("weight functions are defined on x > 0");
        return gamma_ == 0 ? 1.0L : std::pow(x, static_cast<long double>(gamma_));
    }

    /// 1 / f(p^-v) = p^(gamma v): the factor a valuation contributes to Psi.
    long double inverse_at_prime_power(std::uint64_t p, unsigned v) const {
        if (gamma_ == 0 || v == 0) return 1.0L;
        return std::pow(static_cast<long double>(p), static_cast<long double>(gamma_) * v);
    }

    /// Exact integer value of p^(gamma v) when gamma is a small integer.
    std::optional<mpz_class> exact_inverse_at_prime_power(std::uint64_t p, unsigned v) const {
        if (gamma_ != std::floor(gamma_) || gamma_ > 16) return std::nullopt;
        mpz_class r;
        mpz_ui_pow_ui(r.get_mpz_t(), p, static_cast<unsigned long>(gamma_) * v);
        return r;
    }

    std::string to_string() const {
        if (gamma_ == 1) return "id";
        if (gamma_ == 0) return "const";
        std::ostringstream out;
        out.precision(17);
        out << "pow:gamma=" << gamma_;
        return out.str();
    }

    bool operator==(const WeightFunction&) const = default;

private:
    double gamma_;
};

/// "id", "const" or "pow:gamma=g".
inline WeightFunction parse_weight(std::string_view text) {
    const std::string ctx = "f '" + std::string(text) + "'";
    if (text == "id") return WeightFunction::identity();
    if (text == "const") return WeightFunction::constant();
    if (text.rfind("pow:", 0) == 0) {
        auto kv = detail::parse_kv(text.substr(4), ctx);
        detail::require_keys(kv, {"gamma"}, ctx);
        if (!kv.count("gamma")) throw ParseError(ctx + ": needs gamma");
        try {
            return WeightFunction(detail::parse_double(kv["gamma"], ctx));
        } catch (const std::invalid_argument& e) {
            throw ParseError(ctx + ": " + e.what());
        }
    }
    throw ParseError(ctx + ": expected id, const or pow:gamma=g");
}

/// The weights paired with a prime set; an empty list means identity on
/// every prime, a single entry is broadcast.
inline std::vector<WeightFunction> resolve_weights(std::span<const WeightFunction> fs, const PrimeSet& ps) {
    if (fs.empty()) return std::vector<WeightFunction>(ps.size(), WeightFunction::identity());
    if (fs.size() == 1) return std::vector<WeightFunction>(ps.size(), fs.front());
    if (fs.size() != ps.size())
        throw std::invalid_argument("got " + std::to_string(fs.size()) + " weight functions for " +
                                    std::to_string(ps.size()) + " primes");
    return {fs.begin(), fs.end()};
}

/// prod_i 1 / f_i(p_i^-v_i) for a valuation tuple.
inline long double weight_factor(std::span<const WeightFunction> fs, const PrimeSet& ps, std::span<const unsigned> v) {
    long double w = 1.0L;
    for (std::size_t i = 0; i < ps.size(); ++i) w *= fs[i].inverse_at_prime_power(ps[i], v[i]);
    return w;
}

/// Exact version of weight_factor when every gamma is a small integer.
inline std::optional<mpz_class> exact_weight_factor(std::span<const WeightFunction> fs, const PrimeSet& ps,
                                                    std::span<const unsigned> v) {
    mpz_class w = 1;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        auto f = fs[i].exact_inverse_at_prime_power(ps[i], v[i]);
        if (!f) return std::nullopt;
        w *= *f;
    }
    return w;
}

/// Psi(n) = psi(n) / (f_1(|n|_{p_1}) ... f_k(|n|_{p_k})). The mixed norms
/// are exact; only the final power and product are rounded.
inline long double combined_weight(const ApproxFunction& psi, std::span<const WeightFunction> fs, const PrimeSet& ps,
                                   std::uint64_t n) {
    if (fs.size() != ps.size()) throw std::invalid_argument("combined_weight needs one weight function per prime");
    const std::vector<unsigned> v = valuations(n, ps);
    return psi(n) * weight_factor(fs, ps, v);
}

} // namespace mixlit
