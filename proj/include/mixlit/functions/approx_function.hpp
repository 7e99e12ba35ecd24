#pragma once

#include <mixlit/detail/errors.hpp>
#include <mixlit/detail/mpfr.hpp>
#include <mixlit/detail/text.hpp>

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixlit {

/// psi(n) = c * n^-a * log(n + e)^-b, or an explicit table psi(1..K).
class ApproxFunction {
public:
    static ApproxFunction power_log(double c, double a, double b) {
        if (!(c >= 0) || !std::isfinite(c)) throw std::invalid_argument("psi scale c must be >= 0");
        if (!(a >= 0) || !std::isfinite(a)) throw std::invalid_argument("psi power a must be >= 0");
        if (!std::isfinite(b)) throw std::invalid_argument("psi log power b must be finite");
        ApproxFunction f;
        f.c_ = c;
        f.a_ = a;
        f.b_ = b;
        f.monotone_ = b >= 0;
        return f;
    }

    /// values[i] is psi(i + 1).
    static ApproxFunction table(std::vector<double> values, std::string label = "table") {
        for (double v : values)
            if (!(v >= 0) || !std::isfinite(v)) throw std::invalid_argument("psi table values must be finite and >= 0");
        ApproxFunction f;
        f.table_ = std::make_shared<const std::vector<double>>(std::move(values));
        f.label_ = std::move(label);
        f.monotone_ = true;
        for (std::size_t i = 1; i < f.table_->size(); ++i)
            if ((*f.table_)[i] > (*f.table_)[i - 1]) f.monotone_ = false;
        return f;
    }

    /// A monotone envelope restricted to a sparse support: psi(n) =
    /// envelope(n) when `in_support(n)`, else 0, for n <= limit.
    template <class Support>
    static ApproxFunction sparse(const ApproxFunction& envelope, Support in_support, std::uint64_t limit,
                                 std::string label) {
        std::vector<double> values(limit, 0.0);
        for (std::uint64_t n = 1; n <= limit; ++n)
            if (in_support(n)) values[n - 1] = static_cast<double>(envelope(n));
        return table(std::move(values), std::move(label));
    }

    bool is_table() const { return table_ != nullptr; }
    double c() const { return c_; }
    double a() const { return a_; }
    double b() const { return b_; }
    std::uint64_t table_size() const { return table_ ? table_->size() : 0; }

    /// Nonincreasing in n on its whole domain (tables: checked at
    /// construction; power-log: a >= 0 and b >= 0).
    bool monotone() const { return monotone_; }

    /// psi(n) in long double.
    long double operator()(std::uint64_t n) const {
        if (n == 0) throw std::domain_error("psi is defined for n >= 1");
        if (table_) {
            if (n > table_->size())
                throw std::out_of_range("psi table has " + std::to_string(table_->size()) + " entries, asked for n=" +
                                        std::to_string(n));
            return (*table_)[n - 1];
        }
        const long double x = static_cast<long double>(n);
        long double v = c_;
        if (a_ != 0) v *= int_power(a_) ? 1.0L / ipow(x, static_cast<int>(a_)) : std::pow(x, -static_cast<long double>(a_));
        if (b_ != 0) {
            const long double L = std::log(x + kE);
            v *= int_power(b_) ? 1.0L / ipow(L, static_cast<int>(b_)) : std::pow(L, -static_cast<long double>(b_));
        }
        return v;
    }

    /// Relative error bound of operator() for the power-log form.
    long double relative_error() const {
        if (table_) return 0;
        return (8 + 2 * (std::fabs(a_) + std::fabs(b_))) * 0x1p-63L;
    }

    /// psi(n) exactly, when it is rational: tables (entries are binary
    /// doubles), c = 0, and c * n^-a with integer a and b = 0.
    std::optional<mpq_class> exact_value(std::uint64_t n) const {
        if (table_) return mpq_class(static_cast<double>((*this)(n)));
        if (c_ == 0) return mpq_class(0);
        if (b_ != 0 || a_ != std::floor(a_) || a_ > 64) return std::nullopt;
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), n, static_cast<unsigned long>(a_));
        mpq_class v(c_);
        v /= den;
        return v;
    }

    /// Interval enclosing psi(n), computed with MPFR at `prec` bits.
    detail::BigInterval enclose(std::uint64_t n, mpfr_prec_t prec) const {
        detail::BigInterval iv(prec);
        if (auto q = exact_value(n)) {
            mpfr_set_q(iv.lo.get(), q->get_mpq_t(), MPFR_RNDD);
            mpfr_set_q(iv.hi.get(), q->get_mpq_t(), MPFR_RNDU);
            return iv;
        }
        detail::BigFloat x(prec), t(prec), v(prec);
        mpfr_set_d(v.get(), c_, MPFR_RNDN);
        if (a_ != 0) {
            mpfr_set_ui(x.get(), static_cast<unsigned long>(n), MPFR_RNDN);
            mpfr_set_d(t.get(), -a_, MPFR_RNDN);
            mpfr_pow(x.get(), x.get(), t.get(), MPFR_RNDN);
            mpfr_mul(v.get(), v.get(), x.get(), MPFR_RNDN);
        }
        if (b_ != 0) {
            mpfr_set_ui(x.get(), 1, MPFR_RNDN);
            mpfr_exp(x.get(), x.get(), MPFR_RNDN);
            mpfr_add_ui(x.get(), x.get(), static_cast<unsigned long>(n), MPFR_RNDN);
            mpfr_log(x.get(), x.get(), MPFR_RNDN);
            mpfr_set_d(t.get(), -b_, MPFR_RNDN);
            mpfr_pow(x.get(), x.get(), t.get(), MPFR_RNDN);
            mpfr_mul(v.get(), v.get(), x.get(), MPFR_RNDN);
        }
        mpfr_set(iv.lo.get(), v.get(), MPFR_RNDD);
        mpfr_set(iv.hi.get(), v.get(), MPFR_RNDU);
        const int slack = 16 + static_cast<int>(std::ceil(std::log2(1 + std::fabs(a_) + std::fabs(b_))));
        detail::widen_relative(iv, prec, slack);
        return iv;
    }

    /// Throws if psi(n+1) > psi(n) for some n in [first, last).
    void check_monotone(std::uint64_t first, std::uint64_t last) const {
        long double prev = (*this)(first);
        for (std::uint64_t n = first + 1; n <= last; ++n) {
            const long double cur = (*this)(n);
            if (cur > prev * (1 + 2 * relative_error()))
                throw InvariantViolation("psi increases at n=" + std::to_string(n - 1));
            prev = cur;
        }
    }

    std::string to_string() const {
        if (table_) return label_;
        std::ostringstream out;
        out.precision(17);
        out << "pow:c=" << c_ << ",a=" << a_ << ",b=" << b_;
        return out.str();
    }

    static constexpr long double kE = 2.718281828459045235360287471352662498L;

private:
    ApproxFunction() = default;

    // Small positive integer exponents are evaluated by repeated
    // multiplication, which is both faster and more accurate than powl.
    static bool int_power(double e) { return e > 0 && e <= 8 && e == std::floor(e); }
    static long double ipow(long double x, int e) {
        long double r = x;
        for (int i = 1; i < e; ++i) r *= x;
        return r;
    }

    double c_ = 1, a_ = 0, b_ = 0;
    std::shared_ptr<const std::vector<double>> table_;
    std::string label_;
    bool monotone_ = true;
};

/// Parses "pow:c=1,a=1,b=2" (missing keys default to c=1, a=0, b=0) or
/// "table:@file.csv" with rows "n,value"; absent n inside the range are 0.
inline ApproxFunction parse_psi(std::string_view text) {
    using namespace detail;
    const std::string ctx = "psi '" + std::string(text) + "'";
    if (text.rfind("pow:", 0) == 0) {
        auto kv = parse_kv(text.substr(4), ctx);
        require_keys(kv, {"c", "a", "b"}, ctx);
        auto get = [&](const char* k, double dflt) { return kv.count(k) ? parse_double(kv[k], ctx) : dflt; };
        try {
            return ApproxFunction::power_log(get("c", 1.0), get("a", 0.0), get("b", 0.0));
        } catch (const std::invalid_argument& e) {
            throw ParseError(ctx + ": " + e.what());
        }
    }
    if (text.rfind("table:@", 0) == 0) {
        const std::string path(text.substr(7));
        std::ifstream in(path);
        if (!in) throw ParseError(ctx + ": cannot open " + path);
        std::vector<double> values;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            auto cells = split(line, ',');
            if (cells.size() != 2) throw ParseError(ctx + ": line " + std::to_string(lineno) + " needs n,value");
            if (lineno == 1 && cells[0] == "n") continue;  // header
            const std::uint64_t n = parse_u64(cells[0], ctx);
            const double v = parse_double(cells[1], ctx);
            if (n == 0) throw ParseError(ctx + ": n must be >= 1");
            if (values.size() < n) values.resize(n, 0.0);
            values[n - 1] = v;
        }
        try {
            return ApproxFunction::table(std::move(values), std::string(text));
        } catch (const std::invalid_argument& e) {
            throw ParseError(ctx + ": " + e.what());
        }
    }
    throw ParseError(ctx + ": expected pow:... or table:@file");
}

} // namespace mixlit
