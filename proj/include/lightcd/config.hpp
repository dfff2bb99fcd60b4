#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "lightcd/detector.hpp"
#include "lightcd/errors.hpp"

namespace lightcd {

using ConfigMap = std::map<std::string, std::string>;

inline const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "m",
        "seed",
        "ph_lambda",
        "ph_delta",
        "normalize_scores",
        "normalize_input",
        "variant",
        "bounds.lower",
        "bounds.upper",
        "pca.c",
        "pca.variance_fraction",
        "pca.deterministic",
        "pca.seed",
        "factor.s1",
        "factor.s2",
        "factor.exact",
        "factor.seed",
        "div.subsample_threshold",
        "div.seed",
    };
    return keys;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

inline double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + value +
                          "'");
    }
}

/// LIGHTCD_PCA_C overrides pca.c, and so on: uppercase, dots to underscores.
inline std::string env_name_for(const std::string& key) {
    std::string name = "LIGHTCD_";
    for (const char c : key)
        name += c == '.' ? '_' : static_cast<char>(std::toupper(
                                     static_cast<unsigned char>(c)));
    return name;
}

}  // namespace detail

/// Flat key=value file; '#' starts a comment, blank lines are skipped.
inline ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ConfigMap map;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_number) +
                              ": expected key=value");
        map[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    }
    return map;
}

inline void apply_env_overrides(ConfigMap& map) {
    for (const auto& key : known_config_keys()) {
        const char* value = std::getenv(detail::env_name_for(key).c_str());
        if (value != nullptr) map[key] = value;
    }
}

/// Builds the detector configuration from a flat map; unknown keys are
/// rejected so typos fail fast.
inline DetectorConfig detector_config_from(const ConfigMap& map) {
    const auto& known = known_config_keys();
    for (const auto& [key, value] : map) {
        (void)value;
        bool ok = false;
        for (const auto& k : known) ok = ok || k == key;
        if (!ok) throw ConfigError("unknown config key '" + key + "'");
    }

    DetectorConfig cfg;
    const auto get = [&](const char* key) -> const std::string* {
        const auto it = map.find(key);
        return it == map.end() ? nullptr : &it->second;
    };
    if (const auto* v = get("m")) cfg.m = detail::parse_int("m", *v);
    if (const auto* v = get("seed"))
        cfg.seed = static_cast<std::uint64_t>(detail::parse_int("seed", *v));
    if (const auto* v = get("ph_lambda")) cfg.ph_lambda = detail::parse_real("ph_lambda", *v);
    if (const auto* v = get("ph_delta")) cfg.ph_delta = detail::parse_real("ph_delta", *v);
    if (const auto* v = get("normalize_scores"))
        cfg.normalize_scores = detail::parse_bool("normalize_scores", *v);
    if (const auto* v = get("normalize_input"))
        cfg.normalize_input = detail::parse_bool("normalize_input", *v);
    if (const auto* v = get("variant")) cfg.variant = variant_from_name(*v);
    if (const auto* v = get("bounds.lower")) {
        cfg.lower_bounds.resize(1);
        cfg.lower_bounds[0] = detail::parse_real("bounds.lower", *v);
    }
    if (const auto* v = get("bounds.upper")) {
        cfg.upper_bounds.resize(1);
        cfg.upper_bounds[0] = detail::parse_real("bounds.upper", *v);
    }
    if (const auto* v = get("pca.c")) cfg.pca.c = detail::parse_int("pca.c", *v);
    if (const auto* v = get("pca.variance_fraction"))
        cfg.pca.variance_fraction = detail::parse_real("pca.variance_fraction", *v);
    if (const auto* v = get("pca.deterministic"))
        cfg.pca.deterministic = detail::parse_bool("pca.deterministic", *v);
    if (const auto* v = get("pca.seed"))
        cfg.pca.seed = static_cast<std::uint64_t>(detail::parse_int("pca.seed", *v));
    if (const auto* v = get("factor.s1"))
        cfg.factor.s1 = static_cast<int>(detail::parse_int("factor.s1", *v));
    if (const auto* v = get("factor.s2"))
        cfg.factor.s2 = static_cast<int>(detail::parse_int("factor.s2", *v));
    if (const auto* v = get("factor.exact"))
        cfg.factor.exact = detail::parse_bool("factor.exact", *v);
    if (const auto* v = get("factor.seed"))
        cfg.factor.seed =
            static_cast<std::uint64_t>(detail::parse_int("factor.seed", *v));
    if (const auto* v = get("div.subsample_threshold"))
        cfg.div.subsample_threshold = detail::parse_int("div.subsample_threshold", *v);
    if (const auto* v = get("div.seed"))
        cfg.div.seed = static_cast<std::uint64_t>(detail::parse_int("div.seed", *v));
    cfg.validate();
    return cfg;
}

/// Flat snapshot of an effective configuration, for manifests.
inline ConfigMap config_to_map(const DetectorConfig& cfg) {
    ConfigMap map;
    map["m"] = std::to_string(cfg.m);
    map["seed"] = std::to_string(cfg.seed);
    map["ph_lambda"] = std::to_string(cfg.ph_lambda);
    map["ph_delta"] = std::to_string(cfg.ph_delta);
    map["normalize_scores"] = cfg.normalize_scores ? "true" : "false";
    map["normalize_input"] = cfg.normalize_input ? "true" : "false";
    map["variant"] = variant_name(cfg.variant);
    if (cfg.lower_bounds.size() > 0)
        map["bounds.lower"] = std::to_string(cfg.lower_bounds[0]);
    if (cfg.upper_bounds.size() > 0)
        map["bounds.upper"] = std::to_string(cfg.upper_bounds[0]);
    map["pca.c"] = std::to_string(cfg.pca.c);
    map["pca.variance_fraction"] = std::to_string(cfg.pca.variance_fraction);
    map["pca.deterministic"] = cfg.pca.deterministic ? "true" : "false";
    map["pca.seed"] = std::to_string(cfg.pca.seed);
    map["factor.s1"] = std::to_string(cfg.factor.s1);
    map["factor.s2"] = std::to_string(cfg.factor.s2);
    map["factor.exact"] = cfg.factor.exact ? "true" : "false";
    map["factor.seed"] = std::to_string(cfg.factor.seed);
    map["div.subsample_threshold"] = std::to_string(cfg.div.subsample_threshold);
    map["div.seed"] = std::to_string(cfg.div.seed);
    return map;
}

}  // namespace lightcd
