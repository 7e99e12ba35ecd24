#pragma once

#include <mixlit/detail/text.hpp>
#include <mixlit/realfield/certified_real.hpp>

#include <string>
#include <string_view>

namespace mixlit {

/// Version of the textual constructor grammar, recorded in run manifests.
inline constexpr const char* kRealGrammarVersion = "mixlit-real-1";

/// Builds a CertifiedReal from its textual form:
///
///   sqrt:D                         square root of a non-square D >= 2
///   golden                         (1 + sqrt 5) / 2
///   surd:a,b,d,c                   (a + b sqrt d) / c
///   rat:P/Q  or  rat:P             exact rational
///   cf:a0=A[,pre=x;y][,period=u;v] continued fraction, periodic tail
///   gap:p=P,rho=R,d1=D             sum of P^-d_j, d_{j+1} = ceil(R d_j)
///   gap:p=P,table=d1;d2;...        finite gap table
///   gap:p=P,r=S,rho=R,bits=B,delta=X[,lift=L]   two-base gap series
///   rand:seed=S[,prefix=V,prefix_bits=K]   seeded random digits
inline CertifiedReal parse_real(std::string_view text) {
    using namespace detail;
    const std::string ctx = "alpha '" + std::string(text) + "'";
    const std::size_t colon = text.find(':');
    const std::string head(text.substr(0, colon));
    const std::string_view body = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    try {
        if (head == "golden" && colon == std::string_view::npos) return golden();
        if (head == "sqrt") return make_quadratic(parse_mpz(std::string(body), ctx));
        if (head == "surd") {
            auto parts = split(body, ',');
            if (parts.size() != 4) throw ParseError(ctx + ": surd needs a,b,d,c");
            return make_surd(parse_mpz(parts[0], ctx), parse_mpz(parts[1], ctx), parse_mpz(parts[2], ctx),
                             parse_mpz(parts[3], ctx));
        }
        if (head == "rat") {
            mpq_class q;
            const std::string s(body);
            if (s.empty() || q.set_str(s, 10) != 0 || q.get_den() == 0) throw ParseError(ctx + ": bad rational");
            return make_rational(q);
        }
        if (head == "cf") {
            auto kv = parse_kv(body, ctx);
            require_keys(kv, {"a0", "pre", "period"}, ctx);
            if (!kv.count("a0")) throw ParseError(ctx + ": cf needs a0");
            auto list = [&](const char* key) {
                std::vector<mpz_class> out;
                if (auto it = kv.find(key); it != kv.end() && !it->second.empty())
                    for (const auto& item : split(it->second, ';')) out.push_back(parse_mpz(item, ctx));
                return out;
            };
            return make_periodic_cf(parse_mpz(kv["a0"], ctx), list("pre"), list("period"));
        }
        if (head == "gap") {
            auto kv = parse_kv(body, ctx);
            require_keys(kv, {"p", "r", "rho", "d1", "table", "bits", "delta", "lift"}, ctx);
            if (!kv.count("p")) throw ParseError(ctx + ": gap needs p");
            const std::uint64_t p = parse_u64(kv["p"], ctx);
            if (kv.count("table")) {
                if (kv.size() != 2) throw ParseError(ctx + ": gap table takes only p and table");
                std::vector<std::uint64_t> gaps;
                for (const auto& item : split(kv["table"], ';')) gaps.push_back(parse_u64(item, ctx));
                return make_gap_series(p, std::move(gaps));
            }
            if (kv.count("r")) {
                for (const char* k : {"rho", "bits", "delta"})
                    if (!kv.count(k)) throw ParseError(ctx + ": two-base gap needs " + k);
                return make_mixed_gap_series(p, parse_u64(kv["r"], ctx), parse_double(kv["rho"], ctx),
                                             parse_double(kv["bits"], ctx), parse_double(kv["delta"], ctx),
                                             kv.count("lift") ? parse_double(kv["lift"], ctx) : 0.0);
            }
            if (!kv.count("rho") || !kv.count("d1")) throw ParseError(ctx + ": gap needs rho and d1 (or table)");
            return make_gap_series(p, parse_double(kv["rho"], ctx), parse_u64(kv["d1"], ctx));
        }
        if (head == "rand") {
            auto kv = parse_kv(body, ctx);
            require_keys(kv, {"seed", "prefix", "prefix_bits"}, ctx);
            if (!kv.count("seed")) throw ParseError(ctx + ": rand needs seed");
            const std::uint64_t prefix = kv.count("prefix") ? parse_u64(kv["prefix"], ctx) : 0;
            const std::uint64_t bits = kv.count("prefix_bits") ? parse_u64(kv["prefix_bits"], ctx) : 0;
            return make_random(parse_u64(kv["seed"], ctx), prefix, static_cast<std::uint32_t>(bits));
        }
    } catch (const ParseError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ParseError(ctx + ": " + e.what());
    }
    throw ParseError(ctx + ": unknown real constructor '" + head + "'");
}

} // namespace mixlit
