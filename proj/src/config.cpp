#include "vfc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

namespace vfc {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& value) {
    size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("not a number");
    return parsed;
}

long parse_long(const std::string& value) {
    size_t used = 0;
    const long parsed = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument("not an integer");
    return parsed;
}

std::vector<std::string> split(const std::string& value, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        const size_t pos = value.find(sep, start);
        parts.push_back(trim(value.substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::vector<int> parse_int_list(const std::string& value) {
    std::vector<int> out;
    for (const std::string& part : split(value, ',')) {
        const size_t dash = part.find('-', 1);  // allow a leading minus sign
        if (dash != std::string::npos) {
            const long lo = parse_long(part.substr(0, dash));
            const long hi = parse_long(part.substr(dash + 1));
            if (hi < lo) throw std::invalid_argument("descending range");
            for (long v = lo; v <= hi; ++v) out.push_back(static_cast<int>(v));
        } else {
            out.push_back(static_cast<int>(parse_long(part)));
        }
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& value) {
    std::vector<double> out;
    for (const std::string& part : split(value, ',')) out.push_back(parse_double(part));
    return out;
}

}  // namespace

void apply_config_file(const std::string& file_path, SystemConfig& config,
                       ExperimentSpec& spec) {
    std::ifstream in(file_path);
    if (!in) throw std::runtime_error("cannot open config file " + file_path);

    const std::map<std::string, std::function<void(const std::string&)>> setters = {
        {"k_max", [&](const std::string& v) { config.k_max = (int)parse_long(v); }},
        {"n_max", [&](const std::string& v) { config.n_max = (int)parse_long(v); }},
        {"lambda_f", [&](const std::string& v) { config.lambda_f = parse_double(v); }},
        {"mu_f", [&](const std::string& v) { config.mu_f = parse_double(v); }},
        {"mu_t", [&](const std::string& v) { config.mu_t = parse_double(v); }},
        {"beta", [&](const std::string& v) { config.beta = parse_double(v); }},
        {"t_local", [&](const std::string& v) { config.t_local = parse_double(v); }},
        {"xi", [&](const std::string& v) { config.xi = parse_double(v); }},
        {"eta", [&](const std::string& v) { config.eta = parse_double(v); }},
        {"alpha", [&](const std::string& v) { config.alpha = parse_double(v); }},
        {"epsilon_user",
         [&](const std::string& v) { config.epsilon_user = parse_double(v); }},
        {"w_min", [&](const std::string& v) { config.dcf.w_min = (int)parse_long(v); }},
        {"m_stage",
         [&](const std::string& v) { config.dcf.m_stage = (int)parse_long(v); }},
        {"slot_us", [&](const std::string& v) { config.dcf.slot_us = parse_double(v); }},
        {"sifs_us", [&](const std::string& v) { config.dcf.sifs_us = parse_double(v); }},
        {"difs_us", [&](const std::string& v) { config.dcf.difs_us = parse_double(v); }},
        {"header_us",
         [&](const std::string& v) { config.dcf.header_us = parse_double(v); }},
        {"ack_us", [&](const std::string& v) { config.dcf.ack_us = parse_double(v); }},
        {"propagation_us",
         [&](const std::string& v) { config.dcf.propagation_us = parse_double(v); }},
        {"payload_bytes",
         [&](const std::string& v) { config.dcf.payload_bytes = parse_double(v); }},
        {"data_rate_mbps",
         [&](const std::string& v) { config.dcf.data_rate_mbps = parse_double(v); }},
        {"experiment",
         [&](const std::string& v) { spec.kind = experiment_kind_from(v); }},
        {"k_range", [&](const std::string& v) { spec.k_range = parse_int_list(v); }},
        {"mu_t_list",
         [&](const std::string& v) { spec.mu_t_list = parse_double_list(v); }},
        {"out_dir", [&](const std::string& v) { spec.out_dir = v; }},
        {"seed",
         [&](const std::string& v) { spec.seed = (uint64_t)std::stoull(v); }},
        {"replications",
         [&](const std::string& v) { spec.replications = (int)parse_long(v); }},
        {"horizon_discount_floor",
         [&](const std::string& v) { spec.horizon_discount_floor = parse_double(v); }},
        {"delay_limit_ms",
         [&](const std::string& v) { spec.delay_limit_ms = parse_double(v); }},
        {"feasibility_scan_max",
         [&](const std::string& v) { spec.feasibility_scan_max = (int)parse_long(v); }},
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(file_path, line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError(file_path, line_no, "unknown key '" + key + "'");
        try {
            it->second(value);
        } catch (const std::exception& e) {
            throw ConfigError(file_path, line_no,
                              "bad value '" + value + "' for '" + key + "': " + e.what());
        }
    }
}

}  // namespace vfc
