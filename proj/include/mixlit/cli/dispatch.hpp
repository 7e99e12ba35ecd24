#pragma once

#include <mixlit/core.hpp>
#include <mixlit/counting.hpp>
#include <mixlit/experiments.hpp>
#include <mixlit/exponents.hpp>
#include <mixlit/functions.hpp>
#include <mixlit/realfield.hpp>
#include <mixlit/series.hpp>
#include <mixlit/version.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mixlit::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kBudget = 2, kInternal = 3 };

/// Settings shared by every subcommand.
struct CliConfig {
    std::string subcommand;
    std::string format;  // text | csv | json; empty means the subcommand default
    std::string out;     // empty: stdout
    std::uint32_t precision_cap = kDefaultPrecisionCap;
    std::size_t workers = 1;
    std::uint64_t seed = 0;
};

/// Real constructors of the library grammar plus
/// "construct:p=P,t=T,delta=D" for construct_with_gap.
inline CertifiedReal parse_cli_real(const std::string& text) {
    if (text.rfind("construct:", 0) == 0) {
        const std::string ctx = "alpha '" + text + "'";
        auto kv = detail::parse_kv(std::string_view(text).substr(10), ctx);
        detail::require_keys(kv, {"p", "t", "delta"}, ctx);
        for (const char* k : {"p", "t", "delta"})
            if (!kv.count(k)) throw ParseError(ctx + ": construct needs " + k);
        return construct_with_gap(detail::parse_u64(kv["p"], ctx), detail::parse_double(kv["t"], ctx),
                                  detail::parse_double(kv["delta"], ctx));
    }
    return parse_real(text);
}

/// "geometric:start,ratio,count" or "list:a,b,c".
inline std::vector<std::uint64_t> parse_schedule(const std::string& text) {
    const std::string ctx = "schedule '" + text + "'";
    if (text.rfind("geometric:", 0) == 0) {
        auto parts = detail::split(std::string_view(text).substr(10), ',');
        if (parts.size() != 3) throw ParseError(ctx + ": expected geometric:start,ratio,count");
        try {
            return geometric_schedule(detail::parse_u64(parts[0], ctx), detail::parse_double(parts[1], ctx),
                                      detail::parse_u64(parts[2], ctx));
        } catch (const ParseError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ParseError(ctx + ": " + e.what());
        }
    }
    if (text.rfind("list:", 0) == 0) {
        std::vector<std::uint64_t> out;
        for (const auto& item : detail::split(std::string_view(text).substr(5), ','))
            out.push_back(detail::parse_u64(item, ctx));
        for (std::size_t i = 1; i < out.size(); ++i)
            if (out[i] <= out[i - 1]) throw ParseError(ctx + ": list must be strictly increasing");
        if (out.empty()) throw ParseError(ctx + ": empty list");
        return out;
    }
    throw ParseError(ctx + ": expected geometric:start,ratio,count or list:a,b,...");
}

namespace detail {

inline std::string fmt(long double x) {
    if (std::isnan(x)) return "nan";
    std::ostringstream o;
    o << std::setprecision(std::numeric_limits<long double>::digits10 + 2) << x;
    return o.str();
}

inline std::string fmt_d(double x) {
    if (std::isnan(x)) return "nan";
    std::ostringstream o;
    o << std::setprecision(17) << x;
    return o.str();
}

/// Decimal expansion of an exact rational with `digits` significant digits.
inline std::string decimal(const mpq_class& q, int digits = 30) {
    mpf_class f(q, static_cast<mp_bitcnt_t>(digits * 4 + 64));
    mp_exp_t exp = 0;
    std::string s = f.get_str(exp, 10, static_cast<std::size_t>(digits));
    if (s.empty()) return "0";
    const bool neg = s[0] == '-';
    if (neg) s.erase(0, 1);
    std::string out;
    if (exp <= 0) {
        out = "0." + std::string(static_cast<std::size_t>(-exp), '0') + s;
    } else if (static_cast<std::size_t>(exp) >= s.size()) {
        out = s + std::string(static_cast<std::size_t>(exp) - s.size(), '0');
    } else {
        out = s.substr(0, static_cast<std::size_t>(exp)) + "." + s.substr(static_cast<std::size_t>(exp));
    }
    return neg ? "-" + out : out;
}

/// Where a subcommand's output goes, plus its echoed configuration.
class Output {
public:
    Output(const CliConfig& cfg, std::ostream& stdout_stream, std::string default_format)
        : cfg_(cfg), stdout_(stdout_stream), format_(cfg.format.empty() ? std::move(default_format) : cfg.format) {}

    const std::string& format() const { return format_; }
    void require_format(std::initializer_list<const char*> allowed) const {
        for (const char* f : allowed)
            if (format_ == f) return;
        std::string list;
        for (const char* f : allowed) list += std::string(list.empty() ? "" : ", ") + f;
        throw ParseError("--format " + format_ + " is not available for " + cfg_.subcommand + " (use " + list + ")");
    }

    /// Writes `body`. JSON bodies carry the configuration under "config";
    /// CSV and text written to a file get a sidecar <out>.manifest.json.
    void emit(const std::string& text, const Json& config, const Json& extra = Json()) {
        if (cfg_.out.empty()) {
            stdout_ << text;
            return;
        }
        mixlit::detail::write_text(cfg_.out, text);
        if (format_ != "json") {
            Json m;
            m["config"] = config;
            if (!extra.is_null()) m["summary"] = extra;
            mixlit::detail::write_text(cfg_.out + ".manifest.json", m.dump(2) + "\n");
        }
    }

    void emit_json(Json body, const Json& config) {
        Json j;
        j["config"] = config;
        for (auto& [k, v] : body.items()) j[k] = v;
        emit(j.dump(2) + "\n", config);
    }

private:
    const CliConfig& cfg_;
    std::ostream& stdout_;
    std::string format_;
};

/// Fully resolved configuration of a subcommand: every option with its
/// given or default value.
inline Json echo_config(const CLI::App& sub) {
    Json j;
    j["subcommand"] = sub.get_name();
    j["tool_version"] = kVersion;
    j["real_grammar"] = kRealGrammarVersion;
    for (const CLI::Option* o : sub.get_options()) {
        if (o->get_lnames().empty() || o->get_lnames().front() == "help") continue;
        const std::string key = o->get_lnames().front();
        if (o->count() > 0) {
            const auto& r = o->results();
            if (o->get_expected_max() > 1 || o->get_items_expected_max() > 1)
                j[key] = r;
            else if (o->get_type_size() == 0)
                j[key] = true;
            else
                j[key] = r.back();
        } else if (o->get_type_size() == 0) {
            j[key] = false;
        } else if (o->get_expected_max() > 1 || o->get_items_expected_max() > 1) {
            j[key] = Json::array();
        } else {
            j[key] = o->get_default_str();
        }
    }
    return j;
}

inline std::vector<WeightFunction> parse_weights(const std::vector<std::string>& texts) {
    std::vector<WeightFunction> out;
    for (const auto& t : texts) out.push_back(parse_weight(t));
    return out;
}

inline std::vector<std::uint64_t> checkpoints(const std::string& schedule, std::uint64_t N) {
    if (!schedule.empty()) return parse_schedule(schedule);
    if (N == 0) throw ParseError("give --N or --schedule");
    return {N};
}

} // namespace detail

/// Parses argv and runs one subcommand. Returns the process exit code:
/// 0 success, 1 usage error, 2 refinement budget exhausted, 3 internal
/// invariant failure.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using detail::fmt;
    using detail::fmt_d;
    CLI::App app{"Computational laboratory for mixed Diophantine approximation", "mixlit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    CliConfig cfg;
    // Options shared by all subcommands.
    std::string primes_text, psi_text = "pow:c=1,a=1,b=1", schedule_text, kind_text;
    std::vector<std::string> f_texts, alpha_texts;
    std::uint64_t N = 0;
    double s_exp = 1.0, epsilon = 0.5;
    unsigned m = 1;
    std::size_t samples = 1;

    auto common = [&](CLI::App* sub, const std::string& default_format) {
        sub->add_option("--format", cfg.format, "Output format (text, csv or json; default " + default_format + ")")
            ->check(CLI::IsMember({"text", "csv", "json"}));
        sub->add_option("--out", cfg.out, "Output path (default stdout)");
        sub->add_option("--precision-cap", cfg.precision_cap, "Precision cap in bits for certified reals")
            ->check(CLI::Range(64u, 1u << 24));
        sub->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::Range(std::size_t(1), std::size_t(4096)));
    };
    auto add_primes = [&](CLI::App* sub) { sub->add_option("--primes", primes_text, "Prime set, e.g. 2,3"); };
    auto add_psi = [&](CLI::App* sub) {
        sub->add_option("--psi", psi_text, "Approximation function: pow:c=,a=,b= or table:@file.csv");
    };
    auto add_f = [&](CLI::App* sub) {
        sub->add_option("--f", f_texts, "Weight per prime (id, const, pow:gamma=g); one entry is broadcast");
    };
    auto add_alpha = [&](CLI::App* sub) {
        sub->add_option("--alpha", alpha_texts, "Real constructor, repeatable for vectors");
    };
    auto add_N = [&](CLI::App* sub, const char* what) { return sub->add_option("--N", N, what); };
    auto add_schedule = [&](CLI::App* sub) {
        sub->add_option("--schedule", schedule_text, "Checkpoints: geometric:start,ratio,count or list:a,b,...");
    };

    // norm
    std::vector<std::uint64_t> norm_ns;
    CLI::App* norm = app.add_subcommand("norm", "Mixed norms |n|_{p_1}...|n|_{p_k}");
    norm->add_option("--n", norm_ns, "Integers to evaluate (repeatable)");
    add_N(norm, "Tabulate n = 1..N");
    add_primes(norm);
    common(norm, "text");

    // sum
    std::string model_text = "mixed";
    unsigned k_power = 0;
    CLI::App* sum = app.add_subcommand("sum", "Partial sums of any series kind");
    sum->add_option("--kind", kind_text, "theorem1, theorem2, lemma1, hausdorff, nonmonotone, simultaneous, "
                                         "multiplicative or measure")
        ->required();
    add_psi(sum);
    add_f(sum);
    add_primes(sum);
    sum->add_option("--k", k_power, "Log power of the theorem1 sum");
    sum->add_option("--s", s_exp, "Exponent s of lemma1 and hausdorff sums");
    sum->add_option("--m", m, "Dimension of simultaneous, multiplicative and measure sums");
    sum->add_option("--epsilon", epsilon, "Epsilon of the nonmonotone sum");
    sum->add_option("--model", model_text, "Measure model: mixed, reduced, simultaneous, multiplicative");
    add_N(sum, "Single checkpoint");
    add_schedule(sum);
    common(sum, "csv");

    // lemma1-check
    CLI::App* lemma1 = app.add_subcommand("lemma1-check", "Both sides of the star-sum equivalence");
    add_psi(lemma1);
    add_primes(lemma1);
    lemma1->add_option("--s", s_exp, "Exponent s in (0,1]");
    add_N(lemma1, "Single checkpoint");
    add_schedule(lemma1);
    common(lemma1, "csv");

    // lemma2-check
    bool exact_fraction = false;
    CLI::App* lemma2 = app.add_subcommand("lemma2-check", "Exact coprime phi-ratio sum against its main term");
    add_primes(lemma2);
    add_N(lemma2, "Single checkpoint");
    add_schedule(lemma2);
    lemma2->add_flag("--exact", exact_fraction, "Also print the sum as a reduced fraction");
    common(lemma2, "text");

    // ds-ratio
    CLI::App* ds = app.add_subcommand("ds-ratio", "Duffin-Schaeffer ratio trajectory");
    add_psi(ds);
    add_f(ds);
    add_primes(ds);
    add_N(ds, "Single checkpoint");
    add_schedule(ds);
    common(ds, "csv");

    // count
    CLI::App* count = app.add_subcommand("count", "Certified solution counts");
    count->add_option("--kind", kind_text, "mixed, reduced, gallagher, simultaneous or multiplicative")
        ->default_str("mixed");
    add_alpha(count);
    add_psi(count);
    add_f(count);
    add_primes(count);
    count->add_option("--m", m, "Number of random reals when --alpha is absent (simultaneous, multiplicative)");
    count->add_option("--seed", cfg.seed, "Seed of the random reals used when --alpha is absent");
    add_N(count, "Count n <= N")->required();
    add_schedule(count);
    common(count, "csv");

    // liminf
    std::string weight_text = "quadratic";
    double kappa = 0.1;
    std::uint64_t start = 1;
    CLI::App* liminf = app.add_subcommand("liminf", "Champion records of a liminf quantity");
    add_alpha(liminf);
    liminf->add_option("--weight", weight_text,
                       "littlewood, gallagher, mixed, mixed-log, abstract, furstenberg, quadratic or "
                       "custom:log=,loglog=,logloglog=");
    liminf->add_option("--kappa", kappa, "Exponent of the furstenberg weight");
    liminf->add_option("--start", start, "Track only n >= start");
    liminf->add_option("--seed", cfg.seed, "Seed of the random real used when --alpha is absent");
    add_primes(liminf);
    add_N(liminf, "Track n <= N")->required();
    common(liminf, "csv");

    // exponent
    std::uint64_t prime = 0;
    EstimateOptions est_opt;
    CLI::App* exponent = app.add_subcommand("exponent", "Exact order and mixed exponent estimates");
    add_alpha(exponent);
    exponent->add_option("--prime", prime, "Prime p for the mixed exponent (omit for tau only)");
    std::uint64_t scan_N = 1000000;
    exponent->add_option("--N", scan_N, "Exhaustive scan limit for the mixed exponent");
    exponent->add_option("--depth", est_opt.depth, "Maximal number of convergents (0: no limit)");
    exponent->add_option("--max-q-bits", est_opt.max_q_bits, "Largest convergent denominator size in bits");
    exponent->add_option("--tail-bits", est_opt.tail_bits, "Witnesses need n >= 2^tail-bits");
    common(exponent, "json");

    // construct
    double t_target = 2.0, delta = 0.5;
    bool verify = false;
    CLI::App* construct = app.add_subcommand("construct", "A real with prescribed tau and tau_p");
    construct->add_option("--prime", prime, "Prime p")->required();
    construct->add_option("--t", t_target, "Target tau >= 1");
    construct->add_option("--delta", delta, "Target tau_p - tau in [0,1]");
    std::uint32_t digit_count = 64;
    construct->add_option("--digits", digit_count, "Binary digits of the expansion to print")->check(CLI::Range(8u, 1u << 16));
    construct->add_flag("--verify", verify, "Run both estimators on the construction");
    common(construct, "json");

    // dimension
    double tau = 1.0;
    double grid = 0.01;
    CLI::App* dimension = app.add_subcommand("dimension", "Hausdorff dimension 2/(tau+1)");
    dimension->add_option("--tau", tau, "Exponent tau >= 1")->required();
    dimension->add_option("--grid", grid, "Grid step of the classifier sweep");
    common(dimension, "text");

    // experiment
    std::string manifest_path;
    double max_ambiguous = 0.01;
    CLI::App* experiment = app.add_subcommand("experiment", "Seeded Monte Carlo dichotomy run");
    experiment->add_option("--kind", kind_text, "mixed, reduced, gallagher, simultaneous or multiplicative")
        ->default_str("mixed");
    add_psi(experiment);
    add_f(experiment);
    add_primes(experiment);
    experiment->add_option("--m", m, "Reals per sample (simultaneous, multiplicative)");
    add_schedule(experiment);
    add_N(experiment, "Single checkpoint (prefer --schedule)");
    experiment->add_option("--samples", samples, "Number of samples");
    experiment->add_option("--seed", cfg.seed, "Master seed");
    add_alpha(experiment);
    experiment->add_option("--max-ambiguous", max_ambiguous, "Abort above this ambiguous fraction");
    experiment->add_option("--from-manifest", manifest_path, "Rerun the spec stored in a manifest.json");
    common(experiment, "json");

    // measure
    std::uint64_t N0 = 1000, N1 = 1000000;
    unsigned grid_bits = 0;
    CLI::App* measure = app.add_subcommand("measure", "Monte Carlo estimate of a multiplicative solution-set measure");
    add_psi(measure);
    add_f(measure);
    add_primes(measure);
    unsigned measure_m = 2;
    std::size_t measure_samples = 200;
    measure->add_option("--m", measure_m, "Number of reals");
    measure->add_option("--samples", measure_samples, "Number of samples");
    measure->add_option("--seed", cfg.seed, "Master seed");
    measure->add_option("--N0", N0, "Window start");
    measure->add_option("--N1", N1, "Window end");
    measure->add_option("--grid-bits", grid_bits, "Stratify with 2^bits cells per coordinate");
    common(measure, "json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "mixlit: " << e.what() << "\n";
        return kUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    cfg.subcommand = sub->get_name();
    try {
        const Json config = detail::echo_config(*sub);
        auto reals = [&](std::size_t random_count) {
            std::vector<CertifiedReal> xs;
            if (alpha_texts.empty()) {
                for (std::size_t j = 0; j < random_count; ++j) xs.push_back(make_random(sample_seed(cfg.seed, 0, j)));
            } else {
                for (const auto& t : alpha_texts) xs.push_back(parse_cli_real(t));
            }
            for (auto& x : xs) x.set_precision_cap(cfg.precision_cap);
            return xs;
        };
        const PrimeSet ps = PrimeSet::parse(primes_text);

        if (sub == norm) {
            detail::Output o(cfg, out, "text");
            std::vector<std::uint64_t> ns = norm_ns;
            for (std::uint64_t n = 1; n <= N; ++n) ns.push_back(n);
            if (ns.empty()) throw ParseError("give --n or --N");
            for (auto n : ns)
                if (n == 0) throw ParseError("n must be >= 1");
            std::ostringstream s;
            if (o.format() == "json") {
                Json rows = Json::array();
                for (auto n : ns)
                    rows.push_back({{"n", n}, {"norm", mixed_norm(n, ps).get_str()}, {"prime_part", prime_part(n, ps).get_str()}});
                o.emit_json({{"rows", rows}}, config);
                return kOk;
            }
            if (o.format() == "csv") s << "n,norm,prime_part\n";
            for (auto n : ns) {
                if (o.format() == "csv")
                    s << n << ',' << mixed_norm(n, ps).get_str() << ',' << prime_part(n, ps).get_str() << '\n';
                else if (ns.size() == 1)
                    s << mixed_norm(n, ps).get_str() << '\n';
                else
                    s << n << ' ' << mixed_norm(n, ps).get_str() << '\n';
            }
            o.emit(s.str(), config);
            return kOk;
        }

        if (sub == sum) {
            detail::Output o(cfg, out, "csv");
            o.require_format({"csv", "json"});
            SeriesSpec spec;
            const std::map<std::string, SumKind> kinds = {
                {"theorem1", SumKind::Theorem1},         {"theorem2", SumKind::Theorem2},
                {"lemma1", SumKind::Lemma1Lhs},          {"hausdorff", SumKind::Hausdorff},
                {"nonmonotone", SumKind::NonMonotone},   {"simultaneous", SumKind::Simultaneous},
                {"multiplicative", SumKind::Multiplicative}, {"measure", SumKind::Measure}};
            auto it = kinds.find(kind_text);
            if (it == kinds.end()) throw ParseError("unknown series kind '" + kind_text + "'");
            spec.kind = it->second;
            spec.psi = parse_psi(psi_text);
            spec.fs = detail::parse_weights(f_texts);
            spec.ps = ps;
            spec.k = k_power;
            spec.s = s_exp;
            spec.m = m;
            spec.epsilon = epsilon;
            spec.model = parse_measure_model(model_text);
            const PartialSumSeries r = evaluate_series(spec, detail::checkpoints(schedule_text, N), cfg.workers);
            const auto cls = classify_series(spec);
            if (o.format() == "json") {
                Json rows = Json::array();
                for (const auto& v : r.values)
                    rows.push_back({{"N", v.N}, {"value", static_cast<double>(v.value)},
                                    {"error_bound", static_cast<double>(v.error_bound)}});
                o.emit_json({{"kind", kind_text}, {"classification", cls ? Json(to_string(*cls)) : Json(nullptr)},
                             {"rows", rows}},
                            config);
                return kOk;
            }
            std::ostringstream s;
            s << "kind,N,value,error_bound\n";
            for (const auto& v : r.values) s << kind_text << ',' << v.N << ',' << fmt(v.value) << ',' << fmt(v.error_bound) << '\n';
            o.emit(s.str(), config, Json{{"classification", cls ? Json(to_string(*cls)) : Json(nullptr)}});
            return kOk;
        }

        if (sub == lemma1) {
            detail::Output o(cfg, out, "csv");
            o.require_format({"csv", "json"});
            const ApproxFunction psi = parse_psi(psi_text);
            SeriesSpec L{SumKind::Lemma1Lhs, psi, {}, ps};
            L.s = s_exp;
            SeriesSpec R = s_exp == 1 ? SeriesSpec{SumKind::Theorem1, psi, {}, {}} : SeriesSpec{SumKind::Hausdorff, psi, {}, {}};
            R.k = static_cast<unsigned>(ps.size());
            R.s = s_exp;
            std::vector<std::uint64_t> sched = detail::checkpoints(schedule_text, N);
            if (sched.front() < 2) throw ParseError("lemma1-check needs checkpoints >= 2");
            const auto l = evaluate_series(L, sched, cfg.workers), r = evaluate_series(R, sched, cfg.workers);
            Json summary;
            const auto lc = classify_series(L), rc = classify_series(R);
            summary["lhs_class"] = lc ? Json(to_string(*lc)) : Json(nullptr);
            summary["rhs_class"] = rc ? Json(to_string(*rc)) : Json(nullptr);
            if (sched.size() >= 3) {
                summary["lhs_growth"] = to_string(fit_growth(l.values).verdict);
                summary["rhs_growth"] = to_string(fit_growth(r.values).verdict);
            }
            summary["rhs_kind"] = s_exp == 1 ? "theorem1" : "hausdorff";
            if (o.format() == "json") {
                Json rows = Json::array();
                for (std::size_t i = 0; i < sched.size(); ++i)
                    rows.push_back({{"N", sched[i]}, {"lhs", static_cast<double>(l.values[i].value)},
                                    {"rhs", static_cast<double>(r.values[i].value)},
                                    {"ratio", static_cast<double>(l.values[i].value / r.values[i].value)}});
                summary["rows"] = rows;
                o.emit_json(summary, config);
                return kOk;
            }
            std::ostringstream s;
            s << "N,lhs,rhs,ratio\n";
            for (std::size_t i = 0; i < sched.size(); ++i)
                s << sched[i] << ',' << fmt(l.values[i].value) << ',' << fmt(r.values[i].value) << ','
                  << fmt(l.values[i].value / r.values[i].value) << '\n';
            o.emit(s.str(), config, summary);
            return kOk;
        }

        if (sub == lemma2) {
            detail::Output o(cfg, out, "text");
            const std::vector<std::uint64_t> sched = detail::checkpoints(schedule_text, N);
            const SieveTable sieve = SieveTable::cached(sched.back());
            Json rows = Json::array();
            std::ostringstream s;
            if (o.format() == "csv") s << "N,exact_sum,main_term,deviation,deviation_over_log_N\n";
            for (auto n : sched) {
                const mpq_class exact = phi_ratio_sum_coprime(n, ps, sieve);
                const long double main = lemma2_main_term(n, ps);
                const std::string exact_dec = detail::decimal(exact);
                const long double dev = std::strtold(exact_dec.c_str(), nullptr) - main;
                const long double over = n > 1 ? dev / std::log(static_cast<long double>(n)) : NAN;
                if (o.format() == "json") {
                    Json r{{"N", n}, {"exact_sum", exact_dec}, {"main_term", fmt(main)},
                           {"deviation", fmt(dev)}, {"deviation_over_log_N", fmt(over)}};
                    if (exact_fraction) r["exact_fraction"] = exact.get_str();
                    rows.push_back(r);
                } else if (o.format() == "csv") {
                    s << n << ',' << exact_dec << ',' << fmt(main) << ',' << fmt(dev) << ','
                      << fmt(over) << '\n';
                } else {
                    s << "N = " << n << "\n  exact sum          " << exact_dec << "\n  main term          " << fmt(main)
                      << "\n  deviation          " << fmt(dev) << "\n  deviation / log N  "
                      << fmt(over) << '\n';
                    if (exact_fraction) s << "  exact fraction     " << exact.get_str() << '\n';
                }
            }
            if (o.format() == "json") {
                o.emit_json({{"rows", rows}}, config);
                return kOk;
            }
            o.emit(s.str(), config);
            return kOk;
        }

        if (sub == ds) {
            detail::Output o(cfg, out, "csv");
            o.require_format({"csv", "json"});
            const auto pts = ds_ratio(parse_psi(psi_text), detail::parse_weights(f_texts), ps,
                                      detail::checkpoints(schedule_text, N), cfg.workers);
            if (o.format() == "json") {
                Json rows = Json::array();
                for (const auto& p : pts)
                    rows.push_back({{"N", p.N}, {"ratio", static_cast<double>(p.ratio)},
                                    {"running_max", static_cast<double>(p.running_max)}});
                o.emit_json({{"rows", rows}}, config);
                return kOk;
            }
            std::ostringstream s;
            s << "N,ratio,running_max\n";
            for (const auto& p : pts) s << p.N << ',' << fmt(p.ratio) << ',' << fmt(p.running_max) << '\n';
            o.emit(s.str(), config);
            return kOk;
        }

        if (sub == count) {
            detail::Output o(cfg, out, "csv");
            o.require_format({"csv", "json"});
            const CounterKind kind = parse_counter_kind(kind_text.empty() ? "mixed" : kind_text);
            ExperimentSpec shape;
            shape.kind = kind;
            shape.m = m;
            std::vector<CertifiedReal> xs = reals(reals_per_sample(shape));
            if (!alpha_texts.empty() && (kind == CounterKind::Mixed || kind == CounterKind::Reduced) && xs.size() != 1)
                throw ParseError(kind_text + " counting takes one --alpha");
            if (!alpha_texts.empty() && kind == CounterKind::Gallagher && xs.size() != 2)
                throw ParseError("gallagher counting takes two --alpha");
            const ApproxFunction psi = parse_psi(psi_text);
            const std::vector<WeightFunction> fs = detail::parse_weights(f_texts);
            CountOptions opt;
            opt.workers = cfg.workers;
            if (!schedule_text.empty()) {
                for (auto c : parse_schedule(schedule_text))
                    if (c < N) opt.checkpoints.push_back(c);
            }
            CountResult r;
            switch (kind) {
                case CounterKind::Mixed: r = count_mixed(xs[0], N, psi, fs, ps, opt); break;
                case CounterKind::Reduced: r = count_reduced(xs[0], N, psi, fs, ps, opt); break;
                case CounterKind::Gallagher: r = count_gallagher_pair(xs[0], xs[1], N, psi, opt); break;
                case CounterKind::Simultaneous: r = count_simultaneous(xs, N, psi, fs, ps, false, opt); break;
                case CounterKind::Multiplicative: r = count_multiplicative(xs, N, psi, fs, ps, opt); break;
            }
            Json summary;
            summary["count"] = r.count;
            summary["ambiguous_count"] = r.ambiguous;
            Json params{{"kind", to_string(kind)}, {"psi", psi.to_string()}, {"primes", ps.to_string()}, {"N", N}};
            Json alphas = Json::array();
            for (const auto& x : xs) alphas.push_back(x.description());
            params["alpha"] = alphas;
            summary["parameters"] = params;
            summary["seed"] = cfg.seed;
            Json cps = Json::array();
            for (const auto& c : r.checkpoints) cps.push_back({{"N", c.N}, {"count", c.count}, {"ambiguous", c.ambiguous}});
            summary["checkpoints"] = cps;
            if (o.format() == "json") {
                o.emit_json(summary, config);
                return kOk;
            }
            std::ostringstream s;
            s << "n,lhs_lo,lhs_hi,threshold,ambiguous\n";
            for (const auto& rec : r.records)
                s << rec.n << ',' << fmt(rec.lhs_lo) << ',' << fmt(rec.lhs_hi) << ',' << fmt(rec.threshold) << ','
                  << (rec.ambiguous ? 1 : 0) << '\n';
            o.emit(s.str(), config, summary);
            return kOk;
        }

        if (sub == liminf) {
            detail::Output o(cfg, out, "csv");
            o.require_format({"csv", "json"});
            const LiminfWeight w = liminf_preset(weight_text, ps, kappa);
            std::vector<CertifiedReal> xs = reals(w.reals ? w.reals : 1);
            LiminfOptions opt;
            opt.workers = cfg.workers;
            opt.start = start;
            const LiminfResult r = liminf_track(xs, N, w, opt);
            Json summary{{"weight", w.to_string()},
                         {"N", N},
                         {"champions", r.champions.size()},
                         {"final_min_lo", static_cast<double>(r.final_min_lo)},
                         {"final_min_hi", static_cast<double>(r.final_min_hi)}};
            if (o.format() == "json") {
                Json rows = Json::array();
                for (const auto& c : r.champions)
                    rows.push_back({{"n", c.n}, {"value_lo", static_cast<double>(c.value_lo)},
                                    {"value_hi", static_cast<double>(c.value_hi)},
                                    {"running_min_lo", static_cast<double>(c.running_min_lo)},
                                    {"running_min_hi", static_cast<double>(c.running_min_hi)}, {"ambiguous", c.ambiguous}});
                summary["records"] = rows;
                o.emit_json(summary, config);
                return kOk;
            }
            std::ostringstream s;
            s << "n,value_lo,value_hi,running_min_lo,running_min_hi,ambiguous\n";
            for (const auto& c : r.champions)
                s << c.n << ',' << fmt(c.value_lo) << ',' << fmt(c.value_hi) << ',' << fmt(c.running_min_lo) << ','
                  << fmt(c.running_min_hi) << ',' << (c.ambiguous ? 1 : 0) << '\n';
            o.emit(s.str(), config, summary);
            return kOk;
        }

        auto estimate_json = [&](const ExponentEstimate& e) {
            Json j;
            j["best_observed"] = e.has_witness() ? Json(e.best_observed) : Json(nullptr);
            j["convergents_used"] = e.convergents_used;
            j["max_n_bits"] = e.max_n_bits;
            j["tail_bits"] = e.tail_bits;
            j["truncated"] = e.truncated;
            Json ws = Json::array();
            for (const auto& w : e.witness_sequence)
                ws.push_back({{"n", w.n.get_str()}, {"bits", mpz_sizeinbase(w.n.get_mpz_t(), 2)}, {"quotient", w.quotient}});
            j["witnesses"] = ws;
            if (e.scan_limit) {
                j["scan_limit"] = e.scan_limit;
                Json sr = Json::array();
                for (const auto& w : e.scan_records) sr.push_back({{"n", w.n.get_str()}, {"quotient", w.quotient}});
                j["scan_records"] = sr;
            }
            return j;
        };

        if (sub == exponent) {
            detail::Output o(cfg, out, "json");
            o.require_format({"json", "text"});
            if (alpha_texts.size() != 1) throw ParseError("exponent takes exactly one --alpha");
            CertifiedReal xi = reals(1)[0];
            const ExponentEstimate tau_e = estimate_tau(xi, est_opt);
            std::optional<ExponentEstimate> taup_e;
            if (prime) taup_e = estimate_tau_p(xi, prime, scan_N, est_opt);
            if (o.format() == "json") {
                Json body{{"alpha", xi.description()}, {"tau", estimate_json(tau_e)}};
                if (taup_e) {
                    body["prime"] = prime;
                    body["tau_p"] = estimate_json(*taup_e);
                }
                o.emit_json(body, config);
                return kOk;
            }
            std::ostringstream s;
            s << "tau " << fmt_d(tau_e.best_observed) << '\n';
            if (taup_e) s << "tau_" << prime << ' ' << fmt_d(taup_e->best_observed) << '\n';
            o.emit(s.str(), config);
            return kOk;
        }

        if (sub == construct) {
            detail::Output o(cfg, out, "json");
            o.require_format({"json", "text"});
            CertifiedReal xi = construct_with_gap(prime, t_target, delta);
            xi.set_precision_cap(cfg.precision_cap);
            const DyadicInterval iv = xi.enclosure(digit_count);
            const mpz_class digits = mixlit::detail::fdiv_2exp(iv.lo, iv.scale - digit_count);
            Json body{{"alpha", xi.description()}, {"binary_prefix", digits.get_str(2)}, {"prefix_bits", digit_count}};
            Json ann;
            for (const auto& [k, v] : xi.annotations()) ann[k] = v;
            body["annotations"] = ann;
            std::optional<ExponentEstimate> te, tpe;
            if (verify) {
                te = estimate_tau(xi, est_opt);
                tpe = estimate_tau_p(xi, prime, 1u << 16, est_opt);
                body["tau"] = estimate_json(*te);
                body["tau_p"] = estimate_json(*tpe);
            }
            if (o.format() == "json") {
                o.emit_json(body, config);
                return kOk;
            }
            std::ostringstream s;
            s << xi.description() << '\n';
            if (verify) s << "tau " << fmt_d(te->best_observed) << "\ntau_p " << fmt_d(tpe->best_observed) << '\n';
            o.emit(s.str(), config);
            return kOk;
        }

        if (sub == dimension) {
            detail::Output o(cfg, out, "text");
            const DimensionResult d = critical_exponent_and_dimension(tau, grid);
            if (o.format() == "json") {
                o.emit_json({{"tau", d.tau}, {"dimension", d.dimension}, {"sweep_flip", d.sweep_flip}, {"grid_step", d.grid_step}},
                            config);
                return kOk;
            }
            if (o.format() == "csv") {
                o.emit("tau,dimension,sweep_flip\n" + fmt_d(d.tau) + "," + fmt_d(d.dimension) + "," + fmt_d(d.sweep_flip) + "\n",
                       config);
                return kOk;
            }
            o.emit(fmt_d(d.dimension) + "\n", config);
            return kOk;
        }

        if (sub == experiment) {
            if (cfg.out.empty()) throw ParseError("experiment needs --out <run directory>");
            ExperimentSpec spec;
            if (!manifest_path.empty()) {
                spec = spec_from_manifest(read_json_file(manifest_path));
            } else {
                spec.kind = parse_counter_kind(kind_text.empty() ? "mixed" : kind_text);
                spec.psi = parse_psi(psi_text);
                spec.fs = detail::parse_weights(f_texts);
                spec.ps = ps;
                spec.m = m;
                spec.schedule = detail::checkpoints(schedule_text, N);
                spec.sample_count = samples;
                spec.master_seed = cfg.seed;
                spec.precision_cap = cfg.precision_cap;
                spec.alpha_override = alpha_texts;
                spec.max_ambiguous_fraction = max_ambiguous;
            }
            const ExperimentResult r = run_experiment(spec, cfg.workers);
            write_experiment(r, cfg.out);
            Json cli_echo;
            cli_echo["config"] = config;
            mixlit::detail::write_text(std::filesystem::path(cfg.out) / "cli_config.json", cli_echo.dump(2) + "\n");
            out << experiment_summary(r).dump() << "\n";
            return kOk;
        }

        if (sub == measure) {
            detail::Output o(cfg, out, "json");
            o.require_format({"json", "text"});
            ExperimentSpec spec;
            spec.kind = CounterKind::Multiplicative;
            spec.psi = parse_psi(psi_text);
            spec.fs = detail::parse_weights(f_texts);
            spec.ps = ps;
            spec.m = measure_m;
            spec.sample_count = measure_samples;
            spec.master_seed = cfg.seed;
            spec.precision_cap = cfg.precision_cap;
            spec.alpha_override = alpha_texts;
            MeasureOptions mo;
            mo.N0 = N0;
            mo.N1 = N1;
            mo.grid_bits = grid_bits;
            mo.workers = cfg.workers;
            const MeasureEstimate e = estimate_measure(spec, mo);
            if (o.format() == "json") {
                o.emit_json({{"estimate", e.estimate}, {"ci_lo", e.ci_lo}, {"ci_hi", e.ci_hi}, {"hits", e.hits},
                             {"samples", e.samples}, {"undecided", e.undecided}, {"confidence", 0.95}},
                            config);
                return kOk;
            }
            o.emit(fmt_d(e.estimate) + " [" + fmt_d(e.ci_lo) + ", " + fmt_d(e.ci_hi) + "]\n", config);
            return kOk;
        }
        throw InvariantViolation("subcommand without a handler");
    } catch (const RefinementBudgetExhausted& e) {
        err << "mixlit: " << e.what() << "\n";
        return kBudget;
    } catch (const InvariantViolation& e) {
        err << "mixlit: invariant violation: " << e.what() << "\n";
        return kInternal;
    } catch (const std::invalid_argument& e) {
        err << "mixlit: " << e.what() << "\n";
        return kUsage;
    } catch (const std::out_of_range& e) {
        err << "mixlit: " << e.what() << "\n";
        return kUsage;
    } catch (const std::domain_error& e) {
        err << "mixlit: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "mixlit: internal error: " << e.what() << "\n";
        return kInternal;
    }
}

} // namespace mixlit::cli
