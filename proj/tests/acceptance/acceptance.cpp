// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit if
// any criterion fails. Usage: acceptance [--workers W] [--only K]...

#include "support/counting_fixture.hpp"

#include <mixlit/core.hpp>
#include <mixlit/counting.hpp>
#include <mixlit/experiments.hpp>
#include <mixlit/exponents.hpp>
#include <mixlit/realfield.hpp>
#include <mixlit/series.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

using namespace mixlit;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Integer part exactly, fraction in double: about 1e-16 absolute error.
long double to_long_double(const mpq_class& q) {
    mpz_class ip;
    mpz_fdiv_q(ip.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    const mpq_class frac = q - ip;
    return static_cast<long double>(ip.get_si()) + frac.get_d();
}

// 1. Coprime phi-ratio sums against (6N/pi^2) prod p/(p+1), error c log N.
Verdict lemma2(std::size_t) {
    const std::vector<PrimeSet> sets{PrimeSet{2}, PrimeSet{3}, PrimeSet{2, 3}, PrimeSet{2, 3, 5}};
    const SieveTable sieve(1000000);
    std::ostringstream notes;
    bool ok = true;
    double slowest = 0;
    for (const auto& ps : sets) {
        const auto t0 = Clock::now();
        // c is the supremum of |deviation| / log N over 2 <= N <= 1000.
        double c = 0;
        mpq_class running = 0;
        for (std::uint64_t n = 1; n <= 1000; ++n) {
            if (ps.coprime_to(n)) running += mpq_class(sieve.phi(n), static_cast<unsigned long>(n));
            if (n < 2) continue;
            mpq_class r = running;
            r.canonicalize();
            const double dev = std::fabs(static_cast<double>(to_long_double(r) - lemma2_main_term(n, ps)));
            c = std::max(c, dev / std::log(static_cast<double>(n)));
        }
        if (!(c <= 10)) ok = false;
        double worst = 0;
        for (std::uint64_t N : {10000ull, 100000ull, 1000000ull}) {
            const long double dev = to_long_double(phi_ratio_sum_coprime(N, ps, sieve)) - lemma2_main_term(N, ps);
            const double ratio = std::fabs(static_cast<double>(dev)) / std::log(static_cast<double>(N));
            worst = std::max(worst, ratio);
            if (ratio > c) ok = false;
        }
        const double secs = since(t0);
        slowest = std::max(slowest, secs);
        if (secs >= 30) ok = false;
        notes << ps.to_string() << ": c=" << fmt("%.3f", c) << " worst=" << fmt("%.3f", worst) << "; ";
    }
    return {ok, notes.str() + fmt("slowest case %.1fs", slowest)};
}

// 2. Dimension formula and classifier sweep.
Verdict dimension(std::size_t) {
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream notes;
    for (double tau : {1.0, 1.5, 2.0, 3.0, 10.0}) {
        DimensionResult d;
        try {
            d = critical_exponent_and_dimension(tau, 0.01);
        } catch (const InvariantViolation&) {
            ok = false;
            continue;
        }
        if (d.dimension != 2.0 / (tau + 1.0)) ok = false;
        if (std::fabs(d.sweep_flip - d.dimension) > 0.01 + 1e-12) ok = false;
        notes << "tau=" << tau << "->" << d.dimension << " (flip " << d.sweep_flip << ") ";
    }
    const double secs = since(t0);
    if (secs >= 1) ok = false;
    return {ok, notes.str() + fmt("%.3fs", secs)};
}

// 3. Lemma 1: one band for the ratio of both sides, and agreeing classes.
Verdict lemma1(std::size_t workers) {
    const auto t0 = Clock::now();
    const std::vector<std::uint64_t> sched = geometric_schedule(1000, 10, 5);
    struct Case {
        std::vector<long double> ratios;
        bool classes_agree;
    };
    std::vector<Case> cases;
    for (double b : {1.0, 2.0, 3.0})
        for (const PrimeSet& ps : {PrimeSet{}, PrimeSet{2}, PrimeSet{3}, PrimeSet{2, 3}})
            for (double s : {0.5, 1.0}) {
                const ApproxFunction psi = ApproxFunction::power_log(1, 1, b);
                SeriesSpec L{SumKind::Lemma1Lhs, psi, {}, ps};
                L.s = s;
                SeriesSpec R = s == 1 ? SeriesSpec{SumKind::Theorem1, psi, {}, {}} : SeriesSpec{SumKind::Hausdorff, psi, {}, {}};
                R.k = static_cast<unsigned>(ps.size());
                R.s = s;
                const auto l = evaluate_series(L, sched, workers), r = evaluate_series(R, sched, workers);
                Case c;
                for (std::size_t i = 0; i < sched.size(); ++i) c.ratios.push_back(l.values[i].value / r.values[i].value);
                const auto lc = classify_series(L), rc = classify_series(R);
                c.classes_agree = lc && rc && *lc == *rc && fit_growth(l.values).verdict == *lc &&
                                  fit_growth(r.values).verdict == *rc;
                cases.push_back(std::move(c));
            }
    // Band fitted once from the first two checkpoints of every case.
    long double lo = INFINITY, hi = 0;
    for (const auto& c : cases)
        for (std::size_t i = 0; i < 2; ++i) {
            lo = std::min(lo, c.ratios[i]);
            hi = std::max(hi, c.ratios[i]);
        }
    const long double c1 = lo / 2, c2 = 2 * hi;
    bool ok = c1 > 0 && std::isfinite(static_cast<double>(c2));
    long double seen_lo = INFINITY, seen_hi = 0;
    std::size_t disagree = 0;
    for (const auto& c : cases) {
        for (long double r : c.ratios) {
            seen_lo = std::min(seen_lo, r);
            seen_hi = std::max(seen_hi, r);
            if (r < c1 || r > c2) ok = false;
        }
        if (!c.classes_agree) ++disagree;
    }
    if (disagree) ok = false;
    const double secs = since(t0);
    if (secs >= 300) ok = false;
    return {ok, fmt("%zu cases, band [%.3f, %.3f], observed [%.3f, %.3f], class disagreements %zu, %.1fs", cases.size(),
                    static_cast<double>(c1), static_cast<double>(c2), static_cast<double>(seen_lo),
                    static_cast<double>(seen_hi), disagree, secs)};
}

// 4. Five counters against the independent 512-bit brute force at N = 10^4.
Verdict oracle_equivalence(std::size_t) {
    const auto t0 = Clock::now();
    const auto reals = fixture::counting_reals();
    const std::uint64_t N = 10000;
    std::size_t comparisons = 0, mismatches = 0;
    std::uint64_t ambiguous = 0, undecided = 0;
    for (const auto& c : fixture::counter_cases()) {
        const oracle::Thresholds th(c.psi, N);
        for (std::size_t i = 0; i < reals.size(); ++i) {
            const CountResult lib = fixture::library_count(c, reals, i, N);
            const oracle::Outcome ref = oracle::count(fixture::oracle_inputs(c, reals, i), th, c.form, c.reduced);
            std::vector<std::uint64_t> ns;
            for (const auto& r : lib.records)
                if (!r.ambiguous) ns.push_back(r.n);
            ++comparisons;
            ambiguous += lib.ambiguous;
            undecided += ref.undecided.size();
            if (ns != ref.solutions || lib.count != ref.solutions.size()) {
                ++mismatches;
                std::cout << "    mismatch: " << to_string(c.kind) << " starting at " << reals[i].text << "\n";
            }
        }
    }
    const double secs = since(t0);
    const bool ok = mismatches == 0 && ambiguous == 0 && undecided == 0 && secs < 120;
    return {ok, fmt("%zu comparisons, %zu mismatches, %llu ambiguous, %llu oracle-undecided, %.1fs", comparisons, mismatches,
                    static_cast<unsigned long long>(ambiguous), static_cast<unsigned long long>(undecided), secs)};
}

// 5. The 8-spec dichotomy fixture.
Verdict dichotomy(std::size_t workers) {
    const auto t0 = Clock::now();
    struct Fx {
        const char* primes;
        double a, b;
        Convergence expected;
    };
    const Fx fx[] = {
        {"2", 1, 3, Convergence::Converges},   {"2,3", 1, 4, Convergence::Converges},
        {"2,5", 2, 0, Convergence::Converges}, {"3", 2, 0, Convergence::Converges},
        {"2", 1, 1, Convergence::Diverges},    {"3", 1, 0, Convergence::Diverges},
        {"2,3", 1, 1, Convergence::Diverges},  {"2,5", 1, 0.5, Convergence::Diverges},
    };
    bool ok = true;
    std::ostringstream notes;
    for (const auto& f : fx) {
        ExperimentSpec spec;
        spec.kind = CounterKind::Mixed;
        spec.psi = ApproxFunction::power_log(1, f.a, f.b);
        spec.ps = PrimeSet::parse(f.primes);
        spec.schedule = geometric_schedule(1000, 10, 5);
        spec.sample_count = 50;
        spec.master_seed = 20240601;
        try {
            const ExperimentResult r = run_experiment(spec, workers);
            const bool good = r.expected && *r.expected == f.expected && r.consistent_fraction >= 0.9;
            ok = ok && good;
            notes << "{" << f.primes << "} a=" << f.a << " b=" << f.b << " " << to_string(f.expected).substr(0, 4) << " "
                  << r.consistent_samples << "/50; ";
        } catch (const ExperimentAborted& e) {
            ok = false;
            notes << "{" << f.primes << "} aborted: " << e.what() << "; ";
        }
    }
    const double secs = since(t0);
    if (secs >= 1800) ok = false;
    return {ok, notes.str() + fmt("%.1fs", secs)};
}

// 6. Exponent sandwich on 100 numbers, construction grid.
Verdict exponents(std::size_t) {
    const auto t0 = Clock::now();
    const double tol = 0.05;
    std::size_t violations = 0, checked = 0;
    double worst_low = -INFINITY, worst_high = -INFINITY;
    auto check = [&](const std::function<CertifiedReal()>& make, std::uint64_t p) {
        CertifiedReal a = make(), b = make();
        const ExponentEstimate t = estimate_tau(a);
        const ExponentEstimate tp = estimate_tau_p(b, p, 10000);
        ++checked;
        worst_low = std::max(worst_low, t.best_observed - tp.best_observed);
        worst_high = std::max(worst_high, tp.best_observed - t.best_observed - 1);
        if (t.best_observed > tp.best_observed + tol || tp.best_observed > t.best_observed + 1 + tol) ++violations;
    };
    const std::uint64_t primes[] = {2, 3, 5};
    for (int i = 0; i < 50; ++i) {
        const std::uint64_t p = primes[i % 3];
        const double t = 1.0 + 0.25 * (i % 9);
        const double delta = 0.125 * ((i / 3) % 9);
        check([=] { return construct_with_gap(p, t, delta); }, p);
    }
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
        check([=] { return make_random(sample_seed(6, seed, 0)); }, seed % 2 ? 2 : 3);

    double worst_grid = 0;
    bool grid_ok = true;
    for (double t : {1.0, 1.5, 2.0, 3.0})
        for (double delta : {0.0, 0.5, 1.0}) {
            CertifiedReal a = construct_with_gap(2, t, delta), b = construct_with_gap(2, t, delta);
            const double e1 = std::fabs(estimate_tau(a).best_observed - t);
            const double e2 = std::fabs(estimate_tau_p(b, 2, 10000).best_observed - (t + delta));
            worst_grid = std::max({worst_grid, e1, e2});
            if (e1 > 0.1 || e2 > 0.1) grid_ok = false;
        }
    const double secs = since(t0);
    const bool ok = violations == 0 && grid_ok && secs < 600;
    return {ok, fmt("sandwich %zu/%zu within 0.05 (worst tau-tau_p %.3f, tau_p-tau-1 %.3f); grid worst error %.3f; %.1fs",
                    checked - violations, checked, worst_low, worst_high, worst_grid, secs)};
}

// 7. Quadratic liminf stays away from zero.
Verdict quadratic_liminf(std::size_t workers) {
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream notes;
    for (const char* alpha : {"sqrt:2", "sqrt:3", "golden"})
        for (std::uint64_t p : {2ull, 3ull}) {
            std::vector<CertifiedReal> xs{parse_real(alpha)};
            LiminfOptions opt;
            opt.workers = workers;
            const LiminfResult r = liminf_track(xs, 10000000, liminf_preset("quadratic", PrimeSet{p}), opt);
            long double late_min = INFINITY;
            for (const auto& c : r.champions)
                if (c.n > 100000) late_min = std::min(late_min, c.value_lo);
            const bool good = r.final_min_lo > 0 && !(late_min < 1e-4L);
            ok = ok && good;
            notes << alpha << "/p=" << p << " min " << fmt("%.4g", static_cast<double>(r.final_min_lo)) << "; ";
        }
    const double secs = since(t0);
    if (secs >= 600) ok = false;
    return {ok, notes.str() + fmt("%.1fs", secs)};
}

// 8. Byte-identical trajectories from one manifest at 1, 4 and 8 workers.
Verdict reproducibility(std::size_t) {
    const auto t0 = Clock::now();
    const auto root = std::filesystem::temp_directory_path() / "mixlit_acceptance_repro";
    std::filesystem::remove_all(root);
    ExperimentSpec spec;
    spec.kind = CounterKind::Mixed;
    spec.psi = ApproxFunction::power_log(1, 1, 1);
    spec.ps = PrimeSet{2, 3};
    spec.schedule = geometric_schedule(1000, 10, 4);
    spec.sample_count = 12;
    spec.master_seed = 424242;
    write_experiment(run_experiment(spec, 1), root / "origin");
    const ExperimentSpec again = spec_from_manifest(read_json_file(root / "origin" / "manifest.json"));
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string reference = slurp(root / "origin" / "trajectories.csv");
    bool ok = !reference.empty();
    for (std::size_t w : {1u, 4u, 8u}) {
        const auto dir = root / ("w" + std::to_string(w));
        write_experiment(run_experiment(again, w), dir);
        ok = ok && slurp(dir / "trajectories.csv") == reference && slurp(dir / "manifest.json") == slurp(root / "origin" / "manifest.json");
    }
    std::filesystem::remove_all(root);
    return {ok, fmt("%zu-byte trajectories.csv compared at 1, 4, 8 workers; %.1fs", reference.size(), since(t0))};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::size_t workers = 8;
    std::vector<int> only;
    app.add_option("--workers", workers, "Worker threads for the parallel criteria")->check(CLI::Range(1, 4096));
    app.add_option("--only", only, "Run only these criteria (1-8)")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, Verdict (*)(std::size_t)>> criteria{
        {"1 coprime phi-ratio sum within c log N", lemma2},
        {"2 dimension 2/(tau+1) and classifier flip", dimension},
        {"3 star-sum equivalence band and classes", lemma1},
        {"4 counters match brute-force oracle", oracle_equivalence},
        {"5 metric dichotomy, 8 specs x 50 samples", dichotomy},
        {"6 exponent sandwich and construction grid", exponents},
        {"7 quadratic liminf bounded away from 0", quadratic_liminf},
        {"8 reproducible trajectories across workers", reproducibility},
    };
    const std::set<int> selected(only.begin(), only.end());
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && !selected.count(static_cast<int>(i + 1))) continue;
        Verdict v;
        try {
            v = criteria[i].second(workers);
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failures;
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << "C" << criteria[i].first << " :: " << v.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
