#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "environment.hpp"
#include "errors.hpp"
#include "harness.hpp"

#ifndef SPARSE_BANDIT_VERSION
#define SPARSE_BANDIT_VERSION "0.1.0"
#endif

namespace sparse_bandit {

inline constexpr const char* kVersion = SPARSE_BANDIT_VERSION;

/// Environment variable holding the default output directory.
inline constexpr const char* kOutputEnv = "SPARSE_BANDIT_OUT";

namespace config_detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ConfigError((path.empty() ? "" : path + ".") + it.key() + ": unknown key");
    }
}

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) throw ConfigError(join(path, key) + ": required key is missing");
    return obj.at(key);
}

inline std::uint64_t as_uint(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path + ": expected a nonnegative integer");
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const auto x = v.get<std::int64_t>();
    if (x < 0) throw ConfigError(path + ": expected a nonnegative integer");
    return static_cast<std::uint64_t>(x);
}

inline double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<double>();
}

inline bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
    return v.get<bool>();
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path + ": expected a string");
    return v.get<std::string>();
}

inline json require_object(const json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(path + ": expected an object");
    return v;
}

inline std::string default_label(const PolicySpec& p) {
    using K = PolicySpec::Kind;
    using D = PolicySpec::Distribution;
    switch (p.kind) {
        case K::Oful: return "OFUL";
        case K::Greedy: return "Greedy";
        case K::FixedLevel: return p.level ? "Fixed_" + std::to_string(*p.level) : "Fixed_auto";
        case K::SparseLinUcb:
            return p.distribution == D::Uniform ? "SL_Unif" : p.distribution == D::Theory ? "SL_Theory" : "SL_Known";
        case K::AdaLinUcb: return p.distribution == D::Theory ? "AL_Theory" : "AL_Unif";
    }
    return "policy";
}

inline PolicySpec parse_policy(const json& j, const std::string& path) {
    require_object(j, path);
    PolicySpec p;
    const std::string kind = as_string(require(j, path, "kind"), join(path, "kind"));
    using K = PolicySpec::Kind;
    using D = PolicySpec::Distribution;
    if (kind == "oful") {
        p.kind = K::Oful;
        reject_unknown(j, path, {"kind", "label"});
    } else if (kind == "greedy") {
        p.kind = K::Greedy;
        reject_unknown(j, path, {"kind", "label"});
    } else if (kind == "fixed_level") {
        p.kind = K::FixedLevel;
        reject_unknown(j, path, {"kind", "label", "level"});
    } else if (kind == "sparse_linucb") {
        p.kind = K::SparseLinUcb;
        reject_unknown(j, path, {"kind", "label", "distribution", "c", "level"});
    } else if (kind == "ada_linucb") {
        p.kind = K::AdaLinUcb;
        reject_unknown(j, path, {"kind", "label", "prior", "c", "eta", "explore_q", "softmax"});
    } else {
        throw ConfigError(join(path, "kind") + ": unknown policy '" + kind + "'");
    }

    auto parse_dist = [&](const char* key, bool allow_known) {
        if (!j.contains(key)) return;
        const std::string k = join(path, key);
        const std::string v = as_string(j.at(key), k);
        if (v == "uniform") p.distribution = D::Uniform;
        else if (v == "theory") p.distribution = D::Theory;
        else if (v == "known" && allow_known) p.distribution = D::Known;
        else throw ConfigError(k + ": unknown value '" + v + "'");
    };
    if (p.kind == K::SparseLinUcb) parse_dist("distribution", true);
    if (p.kind == K::AdaLinUcb) parse_dist("prior", false);

    if (j.contains("c")) {
        p.c_param = as_double(j.at("c"), join(path, "c"));
        if (!(p.c_param >= 1.0)) throw ConfigError(join(path, "c") + ": must be >= 1");
    }
    if (j.contains("level")) {
        const auto& lv = j.at("level");
        if (lv.is_string() && lv.get<std::string>() == "auto") p.level.reset();
        else p.level = static_cast<std::size_t>(as_uint(lv, join(path, "level")));
    }
    if (j.contains("eta")) {
        const auto& e = j.at("eta");
        const std::string k = join(path, "eta");
        if (e.is_string()) {
            const std::string v = e.get<std::string>();
            if (v == "time_varying") p.eta_mode = Exp3State::EtaMode::TimeVarying;
            else if (v == "theory") p.eta_mode = Exp3State::EtaMode::Fixed, p.eta.reset();
            else throw ConfigError(k + ": unknown value '" + v + "'");
        } else {
            p.eta_mode = Exp3State::EtaMode::Fixed;
            p.eta = as_double(e, k);
            if (!(*p.eta > 0.0)) throw ConfigError(k + ": must be positive");
        }
    }
    if (j.contains("explore_q")) {
        p.explore_q = as_double(j.at("explore_q"), join(path, "explore_q"));
        if (!(p.explore_q >= 0.0 && p.explore_q <= 1.0)) throw ConfigError(join(path, "explore_q") + ": must lie in [0, 1]");
    }
    if (j.contains("softmax")) {
        const std::string k = join(path, "softmax");
        const std::string v = as_string(j.at("softmax"), k);
        if (v == "prior_weighted") p.prior_weighted = true;
        else if (v == "plain") p.prior_weighted = false;
        else throw ConfigError(k + ": unknown value '" + v + "'");
    }
    p.label = j.contains("label") ? as_string(j.at("label"), join(path, "label")) : default_label(p);
    return p;
}

inline json policy_to_json(const PolicySpec& p) {
    using K = PolicySpec::Kind;
    using D = PolicySpec::Distribution;
    json j;
    j["label"] = p.label;
    auto dist_name = [](D d) { return d == D::Uniform ? "uniform" : d == D::Theory ? "theory" : "known"; };
    auto level_json = [&]() -> json { return p.level ? json(*p.level) : json("auto"); };
    switch (p.kind) {
        case K::Oful: j["kind"] = "oful"; break;
        case K::Greedy: j["kind"] = "greedy"; break;
        case K::FixedLevel:
            j["kind"] = "fixed_level";
            j["level"] = level_json();
            break;
        case K::SparseLinUcb:
            j["kind"] = "sparse_linucb";
            j["distribution"] = dist_name(p.distribution);
            j["c"] = p.c_param;
            j["level"] = level_json();
            break;
        case K::AdaLinUcb:
            j["kind"] = "ada_linucb";
            j["prior"] = dist_name(p.distribution);
            j["c"] = p.c_param;
            if (p.eta_mode == Exp3State::EtaMode::TimeVarying) j["eta"] = "time_varying";
            else if (p.eta) j["eta"] = *p.eta;
            else j["eta"] = "theory";
            j["explore_q"] = p.explore_q;
            j["softmax"] = p.prior_weighted ? "prior_weighted" : "plain";
            break;
    }
    return j;
}

}  // namespace config_detail

inline std::string default_output_dir() {
    const char* env = std::getenv(kOutputEnv);
    return env && *env ? std::string(env) : std::string("results");
}

/// Builds a fully resolved config from a JSON document. Unknown keys and
/// invalid values raise ConfigError prefixed with the key path.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    using namespace config_detail;
    if (!j.is_object()) throw ConfigError("<root>: expected an object");
    reject_unknown(j, "", {"d", "k_actions", "sparsity", "horizon", "repetitions", "policies", "ladder", "noise",
                           "seed", "output", "refresh_period", "shared_noise", "regressor", "c_universal", "threads",
                           "artifact_version"});
    ExperimentConfig c;
    c.d = static_cast<std::size_t>(as_uint(require(j, "", "d"), "d"));
    if (c.d == 0) throw ConfigError("d: must be positive");
    c.horizon = as_uint(require(j, "", "horizon"), "horizon");
    if (c.horizon == 0) throw ConfigError("horizon: must be positive");
    if (j.contains("k_actions")) c.k_actions = static_cast<std::size_t>(as_uint(j.at("k_actions"), "k_actions"));
    if (j.contains("repetitions")) c.repetitions = static_cast<std::size_t>(as_uint(j.at("repetitions"), "repetitions"));
    if (j.contains("seed")) c.seed = as_uint(j.at("seed"), "seed");
    if (j.contains("refresh_period"))
        c.refresh_period = static_cast<std::size_t>(as_uint(j.at("refresh_period"), "refresh_period"));
    if (j.contains("shared_noise")) c.shared_noise = as_bool(j.at("shared_noise"), "shared_noise");
    if (j.contains("c_universal")) c.c_universal = as_double(j.at("c_universal"), "c_universal");
    if (j.contains("threads")) c.threads = static_cast<std::size_t>(as_uint(j.at("threads"), "threads"));
    c.output = j.contains("output") ? as_string(j.at("output"), "output") : default_output_dir();

    if (j.contains("sparsity")) {
        const auto& s = j.at("sparsity");
        if (s.is_array()) {
            for (std::size_t i = 0; i < s.size(); ++i)
                c.sparsity.push_back(static_cast<std::size_t>(as_uint(s[i], "sparsity[" + std::to_string(i) + "]")));
        } else {
            c.sparsity.push_back(static_cast<std::size_t>(as_uint(s, "sparsity")));
        }
    } else {
        c.sparsity = {c.d};
    }

    if (j.contains("ladder")) {
        const auto& l = require_object(j.at("ladder"), "ladder");
        reject_unknown(l, "ladder", {"mode", "n_levels", "greedy_level"});
        if (l.contains("mode")) {
            const std::string m = as_string(l.at("mode"), "ladder.mode");
            if (m == "time_dependent") c.ladder_mode = LadderMode::TimeDependent;
            else if (m == "fixed_horizon") c.ladder_mode = LadderMode::FixedHorizon;
            else throw ConfigError("ladder.mode: unknown value '" + m + "'");
        }
        c.include_greedy_level = c.ladder_mode == LadderMode::TimeDependent;
        if (l.contains("n_levels")) {
            const auto& n = l.at("n_levels");
            if (n.is_string() && n.get<std::string>() == "auto") c.n_levels = 0;
            else {
                c.n_levels = static_cast<std::size_t>(as_uint(n, "ladder.n_levels"));
                if (c.n_levels == 0) throw ConfigError("ladder.n_levels: must be positive or \"auto\"");
            }
        }
        if (l.contains("greedy_level")) c.include_greedy_level = as_bool(l.at("greedy_level"), "ladder.greedy_level");
    }

    if (j.contains("noise")) {
        const auto& n = require_object(j.at("noise"), "noise");
        reject_unknown(n, "noise", {"kind", "sigma"});
        const std::string k = n.contains("kind") ? as_string(n.at("kind"), "noise.kind") : "uniform";
        if (k == "uniform") c.noise = NoiseModel::uniform();
        else if (k == "none") c.noise = NoiseModel::none();
        else if (k == "gaussian") {
            const double sigma = n.contains("sigma") ? as_double(n.at("sigma"), "noise.sigma") : 1.0;
            if (!(sigma >= 0.0)) throw ConfigError("noise.sigma: must be nonnegative");
            c.noise = NoiseModel::gaussian(sigma);
        } else throw ConfigError("noise.kind: unknown value '" + k + "'");
        if (k != "gaussian" && n.contains("sigma")) throw ConfigError("noise.sigma: only valid for gaussian noise");
    }

    if (j.contains("regressor")) {
        const auto& r = require_object(j.at("regressor"), "regressor");
        reject_unknown(r, "regressor", {"kind", "noise_bound"});
        const std::string k = r.contains("kind") ? as_string(r.at("kind"), "regressor.kind") : "passthrough";
        if (k == "passthrough") c.regressor.kind = RegressorSpec::Kind::Passthrough;
        else if (k == "ridge") c.regressor.kind = RegressorSpec::Kind::Ridge;
        else throw ConfigError("regressor.kind: unknown value '" + k + "'");
        if (r.contains("noise_bound")) {
            c.regressor.noise_bound = as_double(r.at("noise_bound"), "regressor.noise_bound");
            if (!(c.regressor.noise_bound >= 0.0)) throw ConfigError("regressor.noise_bound: must be nonnegative");
        }
    }

    const auto& pol = require(j, "", "policies");
    if (!pol.is_array()) throw ConfigError("policies: expected an array");
    for (std::size_t i = 0; i < pol.size(); ++i)
        c.policies.push_back(parse_policy(pol[i], "policies[" + std::to_string(i) + "]"));

    c.validate();
    return c;
}

/// Resolved config as JSON. Re-parsing the result reproduces `c` exactly.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    using nlohmann::json;
    json j;
    j["artifact_version"] = kVersion;
    j["d"] = c.d;
    j["k_actions"] = c.k_actions;
    j["sparsity"] = c.sparsity;
    j["horizon"] = c.horizon;
    j["repetitions"] = c.repetitions;
    j["seed"] = c.seed;
    j["output"] = c.output;
    j["refresh_period"] = c.refresh_period;
    j["shared_noise"] = c.shared_noise;
    j["c_universal"] = c.c_universal;
    j["threads"] = c.threads;
    j["ladder"] = {{"mode", c.ladder_mode == LadderMode::TimeDependent ? "time_dependent" : "fixed_horizon"},
                   {"n_levels", c.n_levels == 0 ? json("auto") : json(c.n_levels)},
                   {"greedy_level", c.include_greedy_level}};
    switch (c.noise.kind) {
        case NoiseModel::Kind::UniformPm1: j["noise"] = {{"kind", "uniform"}}; break;
        case NoiseModel::Kind::None: j["noise"] = {{"kind", "none"}}; break;
        case NoiseModel::Kind::Gaussian: j["noise"] = {{"kind", "gaussian"}, {"sigma", c.noise.sigma}}; break;
    }
    j["regressor"] = {{"kind", c.regressor.kind == RegressorSpec::Kind::Ridge ? "ridge" : "passthrough"},
                      {"noise_bound", c.regressor.noise_bound}};
    j["policies"] = json::array();
    for (const auto& p : c.policies) j["policies"].push_back(config_detail::policy_to_json(p));
    return j;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("<root>: malformed config: ") + e.what());
    }
    return config_from_json(j);
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace sparse_bandit
