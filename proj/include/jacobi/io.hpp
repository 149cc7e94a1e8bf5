#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "jacobi/eigensolve.hpp"
#include "jacobi/errors.hpp"
#include "jacobi/experiments.hpp"
#include "jacobi/measures.hpp"
#include "jacobi/operator.hpp"
#include "jacobi/randomness.hpp"

// File formats:
//   operator      {"lo": int, "hi": int, "a": [...], "omega": [...]}
//   eigen dump    {"eigenvalues": [...], "vectors": [[...], ...]}
//   measure CSV   location,weight
//   matrix CSV    location,m11,m12,m22
//   config/report JSON, see to_json/config_from_json below.
// Doubles are written in shortest round-trip form.

namespace jacobi::io {

using json = nlohmann::json;

inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

namespace detail {

template <typename T>
T get(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return get<T>(j, key);
}

} // namespace detail

// ---------------------------------------------------------------------------
// operator

inline JacobiOperator operator_from_json(const json& j) {
    using detail::get;
    const auto lo = get<index_t>(j, "lo");
    const auto hi = get<index_t>(j, "hi");
    return JacobiOperator(IndexInterval(lo, hi), get<std::vector<double>>(j, "a"),
                          get<std::vector<double>>(j, "omega"));
}

inline json to_json(const JacobiOperator& H) {
    return {{"lo", H.lo()}, {"hi", H.hi()}, {"a", H.a().values()}, {"omega", H.omega().values()}};
}

inline JacobiOperator read_operator(const std::string& path) {
    return operator_from_json(parse_json(read_text(path), path));
}

inline json to_json(const EigenDecomposition& ed) {
    json vectors = json::array();
    for (std::size_t j = 0; j < ed.size(); ++j) {
        auto v = ed.eigenvector(j);
        vectors.push_back(std::vector<double>(v.begin(), v.end()));
    }
    return {{"eigenvalues", ed.eigenvalues()}, {"vectors", std::move(vectors)}};
}

inline std::string measure_csv(const AtomicMeasure& mu) {
    std::string out = "location,weight\n";
    for (const auto& at : mu.atoms()) {
        out += format_double(at.location) + "," + format_double(at.weight) + "\n";
    }
    return out;
}

inline std::string matrix_measure_csv(const MatrixMeasure& mm) {
    std::string out = "location,m11,m12,m22\n";
    for (const auto& at : mm.atoms) {
        out += format_double(at.location) + "," + format_double(at.m11) + "," +
               format_double(at.m12) + "," + format_double(at.m22) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// distributions

inline DistributionSpec distribution_from_json(const json& j) {
    using detail::get;
    const auto kind = get<std::string>(j, "kind");
    if (kind == "uniform") return DistributionSpec(Uniform{get<double>(j, "low"), get<double>(j, "high")});
    if (kind == "gaussian") return DistributionSpec(Gaussian{get<double>(j, "mean"), get<double>(j, "sd")});
    if (kind == "cantor") return DistributionSpec(Cantor{get<double>(j, "scale"), get<double>(j, "shift")});
    throw InvalidSpec("unknown distribution kind '" + kind +
                      "' (expected uniform, gaussian or cantor)");
}

inline json to_json(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& p) -> json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, Uniform>) {
                return {{"kind", "uniform"}, {"low", p.low}, {"high", p.high}};
            } else if constexpr (std::is_same_v<P, Gaussian>) {
                return {{"kind", "gaussian"}, {"mean", p.mean}, {"sd", p.sd}};
            } else {
                return {{"kind", "cantor"}, {"scale", p.scale}, {"shift", p.shift}};
            }
        },
        spec.params());
}

inline PotentialModel potential_from_json(const json& j) {
    if (j.is_array()) {
        std::vector<DistributionSpec> specs;
        for (const auto& e : j) specs.push_back(distribution_from_json(e));
        return PotentialModel(std::move(specs));
    }
    return PotentialModel(distribution_from_json(j));
}

inline json to_json(const PotentialModel& model) {
    if (model.shared()) return to_json(model.specs().front());
    json arr = json::array();
    for (const auto& s : model.specs()) arr.push_back(to_json(s));
    return arr;
}

// ---------------------------------------------------------------------------
// experiment config

inline TargetSelector target_from_json(const json& j) {
    using detail::get;
    TargetSelector sel;
    const auto rule = get<std::string>(j, "rule");
    if (rule == "fixed") {
        sel.rule = TargetSelector::Rule::Fixed;
        sel.values = get<std::vector<double>>(j, "values");
    } else if (rule == "s_zeros") {
        sel.rule = TargetSelector::Rule::SZeros;
        sel.n = get<index_t>(j, "n");
    } else if (rule == "submatrix") {
        sel.rule = TargetSelector::Rule::Submatrix;
        sel.sub = IndexInterval(get<index_t>(j, "sub_lo"), get<index_t>(j, "sub_hi"));
    } else {
        throw ConfigError("unknown target rule '" + rule + "'");
    }
    return sel;
}

inline json to_json(const TargetSelector& sel) {
    switch (sel.rule) {
    case TargetSelector::Rule::Fixed: return {{"rule", "fixed"}, {"values", sel.values}};
    case TargetSelector::Rule::SZeros: return {{"rule", "s_zeros"}, {"n", sel.n}};
    case TargetSelector::Rule::Submatrix:
        return {{"rule", "submatrix"}, {"sub_lo", sel.sub->lo}, {"sub_hi", sel.sub->hi}};
    }
    return {};
}

inline CarlemanRule carleman_rule_from_json(const json& j) {
    using detail::get;
    CarlemanRule r;
    const auto kind = get<std::string>(j, "rule");
    if (kind == "constant") {
        r.kind = CarlemanRule::Kind::Constant;
        r.param = get<double>(j, "c");
    } else if (kind == "power") {
        r.kind = CarlemanRule::Kind::Power;
        r.param = get<double>(j, "p");
    } else if (kind == "geometric") {
        r.kind = CarlemanRule::Kind::Geometric;
        r.param = get<double>(j, "r");
    } else if (kind == "explicit") {
        r.kind = CarlemanRule::Kind::Explicit;
        r.first = get<index_t>(j, "lo");
        r.values = get<std::vector<double>>(j, "values");
    } else {
        throw ConfigError("unknown a_rule '" + kind + "'");
    }
    return r;
}

inline json to_json(const CarlemanRule& r) {
    switch (r.kind) {
    case CarlemanRule::Kind::Constant: return {{"rule", "constant"}, {"c", r.param}};
    case CarlemanRule::Kind::Power: return {{"rule", "power"}, {"p", r.param}};
    case CarlemanRule::Kind::Geometric: return {{"rule", "geometric"}, {"r", r.param}};
    case CarlemanRule::Kind::Explicit: return {{"rule", "explicit"}, {"lo", r.first}, {"values", r.values}};
    }
    return {};
}

inline ExperimentConfig config_from_json(const json& j) {
    using detail::get;
    using detail::get_opt;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig cfg;
    cfg.kind = parse_kind(get<std::string>(j, "kind"));
    cfg.N = get_opt<index_t>(j, "N").value_or(cfg.kind == ExperimentKind::Counterexample ? 3 : -1);
    if (cfg.N < 0) throw ConfigError("missing field 'N'");
    cfg.lo = get_opt<index_t>(j, "lo");
    cfg.hopping = get_opt<double>(j, "a").value_or(1.0);

    const auto sub_lo = get_opt<index_t>(j, "sub_lo");
    const auto sub_hi = get_opt<index_t>(j, "sub_hi");
    if (sub_lo.has_value() != sub_hi.has_value()) throw ConfigError("sub_lo and sub_hi go together");
    if (sub_lo) cfg.sub = IndexInterval(*sub_lo, *sub_hi);
    cfg.exclude = get_opt<std::vector<index_t>>(j, "exclude").value_or(std::vector<index_t>{});
    cfg.sites = get_opt<std::vector<index_t>>(j, "sites").value_or(std::vector<index_t>{});
    if (auto pairs = get_opt<std::vector<std::array<index_t, 2>>>(j, "pairs")) {
        for (auto [n, m] : *pairs) cfg.pairs.emplace_back(n, m);
    }
    cfg.quads = get_opt<std::vector<std::array<index_t, 4>>>(j, "quads")
                    .value_or(std::vector<std::array<index_t, 4>>{});
    if (j.contains("target")) cfg.target = target_from_json(j.at("target"));
    if (j.contains("a_rule")) cfg.a_rule = carleman_rule_from_json(j.at("a_rule"));

    const bool sampled = cfg.kind != ExperimentKind::Counterexample &&
                         cfg.kind != ExperimentKind::Carleman;
    if (sampled && !j.contains("distribution")) throw ConfigError("missing field 'distribution'");
    if (j.contains("distribution")) cfg.distribution = potential_from_json(j.at("distribution"));
    cfg.trials = get_opt<std::uint64_t>(j, "trials").value_or(sampled ? 0 : 1);
    if (sampled && !j.contains("trials")) throw ConfigError("missing field 'trials'");
    cfg.seed = get_opt<std::uint64_t>(j, "seed").value_or(0);
    if (sampled && !j.contains("seed")) throw ConfigError("missing field 'seed'");
    cfg.eps_collision = get_opt<double>(j, "eps_collision").value_or(1e-9);
    cfg.tol_atom = get_opt<double>(j, "tol_atom");
    cfg.tol_match = get_opt<double>(j, "tol_match");
    return cfg;
}

inline ExperimentConfig read_config(const std::string& path) {
    return config_from_json(parse_json(read_text(path), path));
}

inline json to_json(const ExperimentConfig& cfg) {
    json j;
    j["kind"] = to_string(cfg.kind);
    j["N"] = cfg.N;
    const auto I = cfg.interval();
    j["lo"] = I.lo;
    j["hi"] = I.hi;
    j["a"] = cfg.hopping;
    switch (cfg.kind) {
    case ExperimentKind::Collision:
        if (cfg.sub) {
            j["sub_lo"] = cfg.sub->lo;
            j["sub_hi"] = cfg.sub->hi;
        }
        if (!cfg.exclude.empty()) j["exclude"] = cfg.exclude;
        j["eps_collision"] = cfg.eps_collision;
        break;
    case ExperimentKind::Equivalence: {
        json pairs = json::array();
        for (auto [n, m] : cfg.pairs) pairs.push_back({n, m});
        j["pairs"] = pairs;
        break;
    }
    case ExperimentKind::SumEquivalence: j["quads"] = cfg.quads; break;
    case ExperimentKind::AtomProbability:
        j["sites"] = cfg.sites;
        j["target"] = to_json(cfg.target);
        break;
    case ExperimentKind::Carleman: j["a_rule"] = to_json(cfg.a_rule); break;
    case ExperimentKind::Counterexample: break;
    }
    if (cfg.kind != ExperimentKind::Counterexample && cfg.kind != ExperimentKind::Carleman) {
        j["distribution"] = to_json(cfg.distribution);
    }
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["tol_atom"] = cfg.tol_atom ? json(*cfg.tol_atom) : json(nullptr);
    j["tol_match"] = cfg.tol_match ? json(*cfg.tol_match) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// report

inline json to_json(const ExperimentReport& rep) {
    json j;
    j["config"] = to_json(rep.config);
    j["seed"] = rep.config.seed;
    j["checks"] = rep.checks;
    j["collisions"] = rep.collisions;
    if (rep.min_gap_quantiles) {
        j["min_gap_quantiles"] = {{"q0", rep.min_gap_quantiles->q0},
                                  {"q50", rep.min_gap_quantiles->q50},
                                  {"q100", rep.min_gap_quantiles->q100}};
        json hist = json::object();
        for (auto [decade, count] : rep.min_gap_histogram) hist[std::to_string(decade)] = count;
        j["min_gap_histogram"] = hist;
    } else {
        j["min_gap_quantiles"] = nullptr;
    }
    j["success_fraction"] = rep.success_fraction;
    j["max_residual"] = rep.max_residual;
    if (rep.positive_fraction) j["positive_fraction"] = *rep.positive_fraction;
    if (rep.max_measure) j["max_measure"] = *rep.max_measure;
    json failures = json::array();
    for (const auto& f : rep.failures) {
        failures.push_back({{"trial", f.trial},
                            {"trial_seed", f.trial_seed},
                            {"what", f.what},
                            {"location", f.location},
                            {"value", f.value}});
    }
    j["failures"] = failures;
    if (!rep.assertions.empty()) {
        json arr = json::array();
        for (const auto& a : rep.assertions) {
            arr.push_back({{"name", a.name},
                           {"expected", a.expected},
                           {"observed", a.observed},
                           {"pass", a.pass}});
        }
        j["assertions"] = arr;
    }
    if (rep.config.kind == ExperimentKind::Carleman) j["partial_sums"] = rep.partial_sums;
    j["elapsed_ms"] = rep.elapsed_ms;
    return j;
}

/// Report text without the wall-clock field, for reproducibility checks.
inline std::string stable_dump(const ExperimentReport& rep) {
    auto j = to_json(rep);
    j.erase("elapsed_ms");
    return j.dump(2);
}

} // namespace jacobi::io
