#pragma once

#include <mixlit/experiments/experiment.hpp>
#include <mixlit/version.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace mixlit {

using Json = nlohmann::ordered_json;

inline constexpr const char* kManifestFormat = "mixlit-experiment-manifest-1";

inline Json spec_to_json(const ExperimentSpec& spec) {
    Json j;
    j["kind"] = to_string(spec.kind);
    j["psi"] = spec.psi.to_string();
    Json fs = Json::array();
    for (const auto& f : spec.fs) fs.push_back(f.to_string());
    j["f"] = fs;
    Json ps = Json::array();
    for (auto p : spec.ps.primes()) ps.push_back(p);
    j["primes"] = ps;
    j["m"] = spec.m;
    j["schedule"] = spec.schedule;
    j["samples"] = spec.sample_count;
    j["master_seed"] = spec.master_seed;
    j["precision_cap"] = spec.precision_cap;
    j["alpha_override"] = spec.alpha_override;
    j["max_ambiguous_fraction"] = spec.max_ambiguous_fraction;
    return j;
}

inline ExperimentSpec spec_from_json(const Json& j) {
    ExperimentSpec spec;
    try {
        spec.kind = parse_counter_kind(j.at("kind").get<std::string>());
        spec.psi = parse_psi(j.at("psi").get<std::string>());
        for (const auto& f : j.at("f")) spec.fs.push_back(parse_weight(f.get<std::string>()));
        spec.ps = PrimeSet(j.at("primes").get<std::vector<std::uint64_t>>());
        spec.m = j.at("m").get<unsigned>();
        spec.schedule = j.at("schedule").get<std::vector<std::uint64_t>>();
        spec.sample_count = j.at("samples").get<std::size_t>();
        spec.master_seed = j.at("master_seed").get<std::uint64_t>();
        spec.precision_cap = j.at("precision_cap").get<std::uint32_t>();
        spec.alpha_override = j.at("alpha_override").get<std::vector<std::string>>();
        spec.max_ambiguous_fraction = j.at("max_ambiguous_fraction").get<double>();
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed experiment spec: ") + e.what());
    }
    validate(spec);
    return spec;
}

/// Everything needed to rerun: the spec, the derived seeds and the
/// versions of the tool and of the constructor grammar. Wall time lives in
/// timing.json so that the manifest itself is reproducible.
inline Json experiment_manifest(const ExperimentResult& res) {
    Json j;
    j["format"] = kManifestFormat;
    j["tool_version"] = kVersion;
    j["real_grammar"] = kRealGrammarVersion;
    j["seed_algorithm"] = kSeedAlgorithm;
    j["spec"] = spec_to_json(res.spec);
    Json seeds = Json::array();
    for (const auto& tr : res.samples) seeds.push_back(tr.seeds);
    j["seeds"] = seeds;
    return j;
}

inline ExperimentSpec spec_from_manifest(const Json& manifest) {
    if (manifest.value("format", "") != kManifestFormat) throw ParseError("not an experiment manifest");
    if (manifest.value("seed_algorithm", "") != kSeedAlgorithm)
        throw ParseError("manifest uses seed algorithm '" + manifest.value("seed_algorithm", "") + "'");
    ExperimentSpec spec = spec_from_json(manifest.at("spec"));
    // The seeds are derived, so a mismatch means the manifest was edited.
    if (manifest.contains("seeds")) {
        const auto& seeds = manifest.at("seeds");
        for (std::size_t i = 0; i < seeds.size() && i < spec.sample_count; ++i)
            if (seeds[i].get<std::vector<std::uint64_t>>() != detail::seeds_of(spec, i))
                throw ParseError("manifest seeds do not match master_seed for sample " + std::to_string(i));
    }
    return spec;
}

/// sample_id,N,count,ambiguous with a header row, samples in index order.
inline std::string trajectories_csv(const ExperimentResult& res) {
    std::ostringstream out;
    out << "sample_id,N,count,ambiguous\n";
    for (const auto& tr : res.samples)
        for (const auto& p : tr.points) out << tr.sample << ',' << p.N << ',' << p.count << ',' << p.ambiguous << '\n';
    return out.str();
}

inline Json experiment_summary(const ExperimentResult& res) {
    Json j;
    j["expected"] = res.expected ? Json(to_string(*res.expected)) : Json(nullptr);
    j["consistent_samples"] = res.consistent_samples;
    j["consistent_fraction"] = res.consistent_fraction;
    j["solutions_total"] = res.solutions_total;
    j["ambiguous_total"] = res.ambiguous_total;
    Json cps = Json::array();
    for (const auto& cs : res.summary) {
        Json c;
        c["N"] = cs.N;
        c["series_sum"] = static_cast<double>(cs.series_sum);
        c["prediction"] = static_cast<double>(cs.prediction);
        c["count_median"] = cs.count_median;
        c["ratio_q1"] = cs.ratio_q1;
        c["ratio_median"] = cs.ratio_median;
        c["ratio_q3"] = cs.ratio_q3;
        c["ambiguous"] = cs.ambiguous;
        cps.push_back(c);
    }
    j["checkpoints"] = cps;
    Json flags = Json::array();
    for (const auto& tr : res.samples) flags.push_back({{"sample_id", tr.sample}, {"plateau", tr.plateau}, {"tracking", tr.tracking}});
    j["samples"] = flags;
    return j;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace detail

/// Writes manifest.json, trajectories.csv, summary.json and timing.json.
inline void write_experiment(const ExperimentResult& res, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    detail::write_text(dir / "manifest.json", experiment_manifest(res).dump(2) + "\n");
    detail::write_text(dir / "trajectories.csv", trajectories_csv(res));
    detail::write_text(dir / "summary.json", experiment_summary(res).dump(2) + "\n");
    Json timing;
    timing["wall_seconds"] = res.wall_seconds;
    timing["workers"] = res.workers;
    detail::write_text(dir / "timing.json", timing.dump(2) + "\n");
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace mixlit
