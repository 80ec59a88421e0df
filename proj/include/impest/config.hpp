#pragma once

// Flat key = value experiment configs. '#' starts a comment, '[section]'
// lines are accepted as grouping sugar and otherwise ignored, later keys win.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "impest/errors.hpp"
#include "impest/montecarlo.hpp"

namespace impest {

struct KvConfig {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    const std::string& required(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) throw ConfigError("missing required key: " + key);
        return it->second;
    }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": cannot parse '" + text + "' as number");
    }
    if (pos != text.size()) throw ConfigError("key " + key + ": trailing junk in '" + text + "'");
    return v;
}

inline long long parse_int(const std::string& key, const std::string& text) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": cannot parse '" + text + "' as integer");
    }
    if (pos != text.size()) throw ConfigError("key " + key + ": trailing junk in '" + text + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("key " + key + ": expected true/false, got '" + text + "'");
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline KvConfig parse_kv_text(const std::string& text) {
    KvConfig kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        kv.values[key] = value;
    }
    return kv;
}

inline KvConfig parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kv_text(buf.str());
}

// Apply a command-line "key=value" override; later calls win.
inline void apply_override(KvConfig& kv, const std::string& pair) {
    const std::size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must be key=value, got '" + pair + "'");
    kv.values[detail::trim(pair.substr(0, eq))] = detail::trim(pair.substr(eq + 1));
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        out.push_back(detail::parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("key " + key + ": empty list");
    return out;
}

// Build a validated ExperimentConfig. Keys: L, snr_db, F_true_re, F_true_im
// are required; everything else has the documented default.
inline ExperimentConfig experiment_from_kv(const KvConfig& kv) {
    ExperimentConfig cfg;
    cfg.N = static_cast<std::size_t>(detail::parse_int("N", kv.get("N", "4")));
    cfg.K = static_cast<std::size_t>(detail::parse_int("K", kv.get("K", "16")));
    cfg.L = static_cast<std::size_t>(detail::parse_int("L", kv.required("L")));
    cfg.snr_db = parse_double_list("snr_db", kv.required("snr_db"));
    cfg.sigma_h2_true = detail::parse_double("sigma_h2", kv.get("sigma_h2", "1"));
    cfg.F_true = cplx{detail::parse_double("F_true_re", kv.required("F_true_re")),
                      detail::parse_double("F_true_im", kv.required("F_true_im"))};
    const std::string fading = kv.get("fading", "iid");
    if (fading == "iid") {
        cfg.fading = FadingModel::Iid;
    } else if (fading == "clarke") {
        cfg.fading = FadingModel::Clarke;
        cfg.v_kmh = detail::parse_double("v_kmh", kv.required("v_kmh"));
    } else {
        throw ConfigError("key fading: expected iid or clarke, got '" + fading + "'");
    }
    cfg.f_c_hz = detail::parse_double("f_c_hz", kv.get("f_c_hz", "9e8"));
    cfg.T_s_s = detail::parse_double("T_s_s", kv.get("T_s_s", "1e-3"));
    cfg.c_mps = detail::parse_double("c_mps", kv.get("c_mps", "2.998e8"));
    cfg.trials = static_cast<std::size_t>(detail::parse_int("trials", kv.get("trials", "2000")));
    cfg.master_seed =
        static_cast<std::uint64_t>(detail::parse_int("seed", kv.get("seed", "1")));
    cfg.zero_noise = detail::parse_bool("zero_noise", kv.get("zero_noise", "false"));
    try {
        validate_config(cfg);
    } catch (const InvalidArg& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

// Canonical dump of the effective configuration; re-parsing it reproduces the
// same ExperimentConfig.
inline std::string dump_experiment(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "F_true_im = " << detail::format_double(cfg.F_true ? cfg.F_true->imag() : 0.0) << "\n";
    out << "F_true_re = " << detail::format_double(cfg.F_true ? cfg.F_true->real() : 0.0) << "\n";
    out << "K = " << cfg.K << "\n";
    out << "L = " << cfg.L << "\n";
    out << "N = " << cfg.N << "\n";
    out << "T_s_s = " << detail::format_double(cfg.T_s_s) << "\n";
    out << "c_mps = " << detail::format_double(cfg.c_mps) << "\n";
    out << "f_c_hz = " << detail::format_double(cfg.f_c_hz) << "\n";
    out << "fading = " << (cfg.fading == FadingModel::Iid ? "iid" : "clarke") << "\n";
    out << "seed = " << cfg.master_seed << "\n";
    out << "sigma_h2 = " << detail::format_double(cfg.sigma_h2_true) << "\n";
    std::string snr;
    for (double s : cfg.snr_db) {
        if (!snr.empty()) snr += ",";
        snr += detail::format_double(s);
    }
    out << "snr_db = " << snr << "\n";
    out << "trials = " << cfg.trials << "\n";
    if (cfg.fading == FadingModel::Clarke)
        out << "v_kmh = " << detail::format_double(cfg.v_kmh) << "\n";
    out << "zero_noise = " << (cfg.zero_noise ? "true" : "false") << "\n";
    return out.str();
}

}  // namespace impest
