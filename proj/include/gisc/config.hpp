#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gisc/params.hpp"

namespace gisc {

/// One system description. Defaults are the study parameters of the bundled
/// experiments; c_f_pu = 0.05 is the committed filter-capacitor calibration
/// used by the line-step instability study (see README).
struct Config {
    // base quantities
    double f0_hz = 50.0;
    double s_base_va = 500e3;
    double u_base_v = 690.0;
    // converter
    double lf_pu = 0.2;
    double kp_i = 0.6;
    double ki_i = 15.0;
    double kp_pll = 2.5;
    double ki_pll = 3020.0;
    double id_ref = 1.0;
    double iq_ref = 0.0;
    // grid
    double l_line_pu = 0.20;
    double c_f_pu = 0.05;
    double u_grid_pu = 1.0;

    [[nodiscard]] VscParams vsc() const {
        return {lf_pu, kp_i, ki_i, kp_pll, ki_pll, id_ref, iq_ref, f0_hz};
    }

    [[nodiscard]] GridParams grid() const { return {l_line_pu, c_f_pu, u_grid_pu, f0_hz}; }

    void validate() const {
        vsc().validate();
        grid().validate();
        if (!(s_base_va > 0.0)) throw std::invalid_argument("s_base_va must be > 0");
        if (!(u_base_v > 0.0)) throw std::invalid_argument("u_base_v must be > 0");
    }

    double* field(const std::string& key) {
        static constexpr const char* names[] = {"f0_hz",  "s_base_va", "u_base_v", "lf_pu",
                                                "kp_i",   "ki_i",      "kp_pll",   "ki_pll",
                                                "id_ref", "iq_ref",    "l_line_pu", "c_f_pu",
                                                "u_grid_pu"};
        double* fields[] = {&f0_hz,  &s_base_va, &u_base_v, &lf_pu,     &kp_i,   &ki_i, &kp_pll,
                            &ki_pll, &id_ref,    &iq_ref,   &l_line_pu, &c_f_pu, &u_grid_pu};
        for (std::size_t i = 0; i < std::size(names); ++i)
            if (key == names[i]) return fields[i];
        return nullptr;
    }

    /// Fixed-order serialization used for hashing and the manifest.
    [[nodiscard]] std::string canonical_text() const {
        char buf[64];
        std::string out;
        const auto emit = [&](const char* k, double v) {
            std::snprintf(buf, sizeof buf, "%s=%.17g\n", k, v);
            out += buf;
        };
        emit("f0_hz", f0_hz);
        emit("s_base_va", s_base_va);
        emit("u_base_v", u_base_v);
        emit("lf_pu", lf_pu);
        emit("kp_i", kp_i);
        emit("ki_i", ki_i);
        emit("kp_pll", kp_pll);
        emit("ki_pll", ki_pll);
        emit("id_ref", id_ref);
        emit("iq_ref", iq_ref);
        emit("l_line_pu", l_line_pu);
        emit("c_f_pu", c_f_pu);
        emit("u_grid_pu", u_grid_pu);
        return out;
    }
};

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash(const Config& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.canonical_text())));
    return buf;
}

/// Parses `key = value` lines ('#' starts a comment, blank lines ignored).
/// Unknown keys, malformed values, and invariant violations raise errors
/// naming the key and line.
inline Config parse_config(std::istream& in, const std::string& origin) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto notspace = [](unsigned char c) { return !std::isspace(c); };
        const auto b = std::find_if(line.begin(), line.end(), notspace);
        if (b == line.end()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const auto strip = [&](std::string s) {
            const auto i = std::find_if(s.begin(), s.end(), notspace);
            const auto j = std::find_if(s.rbegin(), s.rend(), notspace).base();
            return i < j ? std::string(i, j) : std::string();
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        double* slot = cfg.field(key);
        if (slot == nullptr)
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument("trailing characters");
            *slot = v;
        } catch (const std::exception&) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": key '" + key +
                                        "' has a malformed numeric value '" + value + "'");
        }
    }
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw std::invalid_argument(origin + ": " + e.what());
    }
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config file not found: " + path);
    return parse_config(in, path);
}

}  // namespace gisc
