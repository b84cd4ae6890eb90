#include "cobig/config.hpp"

#include "cobig/cloud_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cobig {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

KeyValues read_key_values(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path, line_no, "expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ParseError(path, line_no, "empty key");
        }
        if (!kv.emplace(key, value).second) {
            throw ParseError(path, line_no, "duplicate key '" + key + "'");
        }
    }
    return kv;
}

double parse_double(const std::string& key, const std::string& value)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size() && std::isfinite(v)) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(key + ": expected a number, got '" + value + "'");
}

long long parse_integer(const std::string& key, const std::string& value)
{
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used == value.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(key + ": expected an integer, got '" + value + "'");
}

bool apply_solver_key(SolverConfig& cfg, const std::string& key, const std::string& value)
{
    if (key == "sigma0") {
        if (value == "auto") {
            cfg.sigma0.reset();
        } else {
            cfg.sigma0 = parse_double(key, value);
        }
    } else if (key == "sigma_decay") {
        cfg.sigma_decay = parse_double(key, value);
    } else if (key == "max_iterations") {
        cfg.max_iterations = static_cast<int>(parse_integer(key, value));
    } else if (key == "translation_tol") {
        cfg.translation_tol = parse_double(key, value);
    } else if (key == "rotation_tol") {
        cfg.rotation_tol = parse_double(key, value);
    } else if (key == "k_neighbors") {
        cfg.k_neighbors = static_cast<int>(parse_integer(key, value));
    } else if (key == "eps_plane") {
        cfg.eps_plane = parse_double(key, value);
    } else if (key == "gate") {
        if (value == "adaptive") {
            cfg.fixed_gate.reset();
        } else {
            cfg.fixed_gate = parse_double(key, value);
        }
    } else if (key == "pinv_tolerance") {
        cfg.pinv_tolerance = parse_double(key, value);
    } else {
        return false;
    }
    return true;
}

SolverConfig solver_config_from(const KeyValues& kv)
{
    SolverConfig cfg;
    for (const auto& [key, value] : kv) {
        if (!apply_solver_key(cfg, key, value)) {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

SolverConfig read_solver_config(const std::string& path)
{
    return solver_config_from(read_key_values(path));
}

std::string format_solver_config(const SolverConfig& cfg)
{
    std::string out;
    auto line = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    line("sigma0", cfg.sigma0 ? number(*cfg.sigma0) : "auto");
    line("sigma_decay", number(cfg.sigma_decay));
    line("max_iterations", std::to_string(cfg.max_iterations));
    line("translation_tol", number(cfg.translation_tol));
    line("rotation_tol", number(cfg.rotation_tol));
    line("k_neighbors", std::to_string(cfg.k_neighbors));
    line("eps_plane", number(cfg.eps_plane));
    line("gate", cfg.fixed_gate ? number(*cfg.fixed_gate) : "adaptive");
    line("pinv_tolerance", number(cfg.pinv_tolerance));
    return out;
}

} // namespace cobig
