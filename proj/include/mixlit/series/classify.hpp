#pragma once

#include <mixlit/functions/approx_function.hpp>
#include <mixlit/functions/weight_function.hpp>
#include <mixlit/series/partial_sums.hpp>

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixlit {

enum class Convergence { Converges, Diverges };

inline std::string to_string(Convergence c) { return c == Convergence::Converges ? "converges" : "diverges"; }

/// Sum of n^a (log n)^b: converges iff a < -1, or a = -1 and b < -1.
inline Convergence classify_convergence(double a, double b) {
    if (a < -1) return Convergence::Converges;
    if (a == -1 && b < -1) return Convergence::Converges;
    return Convergence::Diverges;
}

/// Sum over n of n^-a (log n)^-b * prod_i p_i^(gamma_i v_{p_i}(n)).
///
/// The prime-power direction matters: any gamma_i > a makes the terms at
/// n = p_i^j grow, and each gamma_i = a adds one logarithmic degree of
/// freedom (j of them give (log N)^j tuples of comparable size). With
/// a > 1 the cofactor sum converges and only the tuple count remains; at
/// a = 1 the two combine into (log n)^j.
inline Convergence classify_weighted(double a, double b, std::span<const double> gammas) {
    if (a < 1) return Convergence::Diverges;
    unsigned equal = 0;
    for (double g : gammas) {
        if (g > a) return Convergence::Diverges;
        if (g == a) ++equal;
    }
    if (a > 1) return (equal == 0 || b > equal) ? Convergence::Converges : Convergence::Diverges;
    return classify_convergence(-1, static_cast<double>(equal) - b);
}

/// Symbolic class of a series kind for the power-log family (tables have
/// no symbolic class).
inline std::optional<Convergence> classify_series(const SeriesSpec& spec) {
    if (spec.psi.is_table()) return std::nullopt;
    const double a = spec.psi.a(), b = spec.psi.b();
    const PrimeSet& ps = spec.ps;
    const std::vector<WeightFunction> fs = resolve_weights(spec.fs, ps);
    std::vector<double> gammas;
    for (const auto& f : fs) gammas.push_back(f.gamma());
    auto scaled = [&](double factor) {
        std::vector<double> g;
        for (double x : gammas) g.push_back(x * factor);
        return g;
    };
    switch (spec.kind) {
        case SumKind::Theorem1: return classify_convergence(-a, spec.k - b);
        case SumKind::Theorem2: return classify_weighted(a, b, gammas);
        case SumKind::Lemma1Lhs: {
            // n^(1-s) (psi P)^s: exponent s(1+a) - 1, weights s on every prime.
            std::vector<double> g(ps.size(), spec.s);
            return classify_weighted(spec.s * (1 + a) - 1, b * spec.s, g);
        }
        case SumKind::Hausdorff: return classify_convergence(1 - spec.s * (1 + a), -b * spec.s);
        case SumKind::NonMonotone: {
            // phi(n) is n up to factors that average out, so the term is
            // n^(1 - (1+eps)(1+a)) with weights scaled by 1+eps.
            const double e = 1 + spec.epsilon;
            return classify_weighted(e * (1 + a) - 1, b * e, scaled(e));
        }
        case SumKind::Simultaneous: return classify_weighted(a * spec.m, b * spec.m, scaled(spec.m));
        case SumKind::Multiplicative: return classify_weighted(a, b - (spec.m - 1.0), gammas);
        case SumKind::Measure: return std::nullopt;
    }
    return std::nullopt;
}

/// Dimension 2/(tau+1) of the set of tau-approximable points, together
/// with the grid point where a classifier sweep of sum n^(1-s) n^(-tau s)
/// first converges.
struct DimensionResult {
    double tau = 1;
    double dimension = 1;
    double sweep_flip = 1;  // smallest grid s classified convergent (1 if none)
    double grid_step = 0.01;
};

inline DimensionResult critical_exponent_and_dimension(double tau, double grid_step = 0.01) {
    if (!(tau >= 1)) throw std::invalid_argument("tau must be >= 1");
    DimensionResult r;
    r.tau = tau;
    r.dimension = 2.0 / (tau + 1.0);
    r.grid_step = grid_step;
    r.sweep_flip = 1.0;
    const int steps = static_cast<int>(std::lround(1.0 / grid_step));
    for (int i = 1; i < steps; ++i) {
        const double s = i * grid_step;
        // sum n^(1-s) psi^s with psi = n^-tau
        if (classify_convergence(1 - s * (1 + tau), 0) == Convergence::Converges) {
            r.sweep_flip = s;
            break;
        }
    }
    if (std::fabs(r.sweep_flip - r.dimension) > grid_step + 1e-12)
        throw InvariantViolation("classifier sweep disagrees with 2/(tau+1)");
    return r;
}

/// Empirical growth of a partial-sum trajectory from its last three
/// checkpoints on a geometric schedule. The increments are matched to
/// S(N) = A + B G_c(log N) with G_c(x) = x^(c+1)/(c+1) (log x at c = -1),
/// i.e. terms of size n^-1 (log n)^c. Divergence is declared when the
/// fitted c exceeds -1.5, the midpoint between the nearest convergent and
/// divergent members of the integer-exponent family.
struct GrowthFit {
    double log_exponent = 0;    // fitted c
    double power_exponent = 0;  // beta with increments ~ N^beta
    Convergence verdict = Convergence::Converges;
};

inline GrowthFit fit_growth(std::span<const CheckpointValue> values) {
    if (values.size() < 3) throw std::invalid_argument("growth fit needs at least three checkpoints");
    const auto& v1 = values[values.size() - 3];
    const auto& v2 = values[values.size() - 2];
    const auto& v3 = values[values.size() - 1];
    const double x1 = std::log(static_cast<double>(v1.N)), x2 = std::log(static_cast<double>(v2.N)),
                 x3 = std::log(static_cast<double>(v3.N));
    const double d1 = static_cast<double>(v2.value - v1.value), d2 = static_cast<double>(v3.value - v2.value);
    GrowthFit fit;
    if (!(d1 > 0)) {
        // A flat trajectory is the strongest convergence evidence.
        fit.log_exponent = -INFINITY;
        fit.power_exponent = -INFINITY;
        fit.verdict = d2 > 0 ? Convergence::Diverges : Convergence::Converges;
        return fit;
    }
    const double ratio = d2 / d1;
    fit.power_exponent = std::log(std::max(ratio, 1e-300)) / (x3 - x2);
    auto G = [](double c, double x) { return std::fabs(c + 1) < 1e-12 ? std::log(x) : std::pow(x, c + 1) / (c + 1); };
    auto model = [&](double c) { return (G(c, x3) - G(c, x2)) / (G(c, x2) - G(c, x1)); };
    // model(c) increases with c; bisection on a wide bracket.
    double lo = -60, hi = 60;
    if (ratio <= model(lo)) {
        fit.log_exponent = lo;
    } else if (ratio >= model(hi)) {
        fit.log_exponent = hi;
    } else {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (model(mid) < ratio ? lo : hi) = mid;
        }
        fit.log_exponent = 0.5 * (lo + hi);
    }
    fit.verdict = fit.log_exponent > -1.5 ? Convergence::Diverges : Convergence::Converges;
    return fit;
}

} // namespace mixlit
