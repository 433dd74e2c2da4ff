#pragma once

// Flat key=value configuration. Defaults reproduce the reference run
// (M=1000, W=0.5, sigma=0.25, beta=tau=250, omega=0); N has no default.

#include "bilayer/error.hpp"
#include "bilayer/scan.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace bilayer {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, std::string_view text) {
    // Accepts plain numbers and simple fractions such as 1/6.
    auto one = [&](std::string_view t) {
        double v = 0.0;
        t = trim(t);
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
            throw ConfigError(key, "malformed number '" + std::string(text) + "'");
        return v;
    };
    const auto slash = text.find('/');
    const double v = slash == std::string_view::npos ? one(text) : one(text.substr(0, slash)) / one(text.substr(slash + 1));
    if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
    return v;
}

inline long parse_integer(const std::string& key, std::string_view text) {
    long v = 0;
    text = trim(text);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError(key, "malformed integer '" + std::string(text) + "'");
    return v;
}

inline bool parse_bool(const std::string& key, std::string_view text) {
    text = trim(text);
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    throw ConfigError(key, "malformed boolean '" + std::string(text) + "'");
}

inline Quantities parse_quantities(const std::string& key, std::string_view text) {
    Quantities q{false, false, false};
    std::string item;
    std::istringstream is{std::string(text)};
    while (std::getline(is, item, ',')) {
        const auto t = trim(item);
        if (t == "dos") q.dos = true;
        else if (t == "conductivity") q.conductivity = true;
        else if (t == "integrated_dos") q.integrated_dos = true;
        else throw ConfigError(key, "unknown quantity '" + std::string(t) + "'");
    }
    return q;
}

} // namespace detail

inline const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "N",        "M",         "W",      "sigma",  "cutoff_sigmas", "beta",       "tau",   "omega",    "epsilon",
        "alpha_min", "alpha_max", "mu_min", "mu_max", "mu_steps",      "quantities", "workers", "cache", "cache_dir"};
    return keys;
}

/// Applies one key=value assignment to `cfg`.
inline void apply_setting(ScanConfig& cfg, const std::string& key, std::string_view value) {
    using namespace detail;
    if (key == "N") cfg.N = parse_integer(key, value);
    else if (key == "M") cfg.M = static_cast<int>(parse_integer(key, value));
    else if (key == "W") cfg.model.W = parse_real(key, value);
    else if (key == "sigma") cfg.model.sigma = parse_real(key, value);
    else if (key == "cutoff_sigmas") cfg.model.cutoff_sigmas = parse_real(key, value);
    else if (key == "beta") cfg.transport.beta = parse_real(key, value);
    else if (key == "tau") cfg.transport.tau_rel = parse_real(key, value);
    else if (key == "omega") cfg.transport.omega_hat = parse_real(key, value);
    else if (key == "epsilon") cfg.epsilon_rescale = parse_real(key, value);
    else if (key == "alpha_min") cfg.alpha_min = parse_real(key, value);
    else if (key == "alpha_max") cfg.alpha_max = parse_real(key, value);
    else if (key == "mu_min") cfg.mu_min = parse_real(key, value);
    else if (key == "mu_max") cfg.mu_max = parse_real(key, value);
    else if (key == "mu_steps") cfg.mu_steps = static_cast<int>(parse_integer(key, value));
    else if (key == "quantities") cfg.quantities = parse_quantities(key, value);
    else if (key == "workers") cfg.workers = static_cast<int>(parse_integer(key, value));
    else if (key == "cache") cfg.cache = parse_bool(key, value);
    else if (key == "cache_dir") cfg.cache_dir = std::string(trim(value));
    else throw ConfigError(key, "unknown key");
}

inline std::pair<std::string, std::string> split_assignment(std::string_view line) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(std::string(detail::trim(line)), "expected key=value");
    return {std::string(detail::trim(line.substr(0, eq))), std::string(detail::trim(line.substr(eq + 1)))};
}

/// Parses config text plus overrides without checking that N is present.
inline ScanConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
    ScanConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto view = std::string_view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = detail::trim(view);
        if (view.empty()) continue;
        const auto [k, v] = split_assignment(view);
        apply_setting(cfg, k, v);
    }
    for (const auto& o : overrides) {
        const auto [k, v] = split_assignment(o);
        apply_setting(cfg, k, v);
    }
    return cfg;
}

inline void validate_config(const ScanConfig& cfg, bool require_N = true) {
    if (require_N && cfg.N == 0) throw ConfigError("N", "required");
    ScanConfig probe = cfg;
    if (!require_N && probe.N == 0) probe.N = 6;
    validate(probe);
}

/// Reads a flat key=value file (empty path: no file) and applies overrides last.
inline ScanConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                               bool require_N = true) {
    std::string text;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config", "cannot read " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    ScanConfig cfg = parse_config_text(text, overrides);
    validate_config(cfg, require_N);
    return cfg;
}

} // namespace bilayer
