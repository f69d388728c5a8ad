#include "ftfusion/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace ftfusion {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_real(const std::string& field, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno != 0 || !std::isfinite(v))
        throw ConfigError(field, "expected a real number, got '" + text + "'");
    return v;
}

long long parse_integer(const std::string& field, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size() || errno != 0)
        throw ConfigError(field, "expected an integer, got '" + text + "'");
    return v;
}

std::uint64_t parse_unsigned(const std::string& field, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    if (!text.empty() && text[0] == '-') throw ConfigError(field, "expected a nonnegative integer, got '" + text + "'");
    const unsigned long long v = std::strtoull(text.c_str(), &end, 0);
    if (text.empty() || end != text.c_str() + text.size() || errno != 0)
        throw ConfigError(field, "expected a nonnegative integer, got '" + text + "'");
    return v;
}

std::vector<int> parse_taus(const std::string& text) {
    std::vector<int> out;
    for (const auto& item : split_list(text)) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(static_cast<int>(parse_integer("taus", item)));
            continue;
        }
        const auto lo = parse_integer("taus", trim(item.substr(0, dots)));
        const auto hi = parse_integer("taus", trim(item.substr(dots + 2)));
        if (hi < lo) throw ConfigError("taus", "empty range '" + item + "'");
        for (auto t = lo; t <= hi; ++t) out.push_back(static_cast<int>(t));
    }
    return out;
}

std::string format_lambda(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

AlgorithmSelector parse_algorithm_selector(const std::string& raw) {
    const std::string token = trim(raw);
    const auto at = token.find('@');
    const std::string name = token.substr(0, at);
    const std::string arg = at == std::string::npos ? "" : token.substr(at + 1);

    AlgorithmSelector sel;
    sel.label = token;
    auto no_arg = [&] {
        if (at != std::string::npos) throw ConfigError("algorithms", "'" + name + "' takes no '@' argument");
    };
    if (name == "marzullo") {
        no_arg();
        sel.kind = AlgorithmKind::marzullo;
    } else if (name == "marzullo_classical") {
        no_arg();
        sel.kind = AlgorithmKind::marzullo;
        sel.marzullo = MarzulloVariant::classical;
    } else if (name == "bi") {
        no_arg();
        sel.kind = AlgorithmKind::bi;
    } else if (name == "gbi_oneopt" || name == "gbi") {
        no_arg();
        sel.kind = AlgorithmKind::gbi_oneopt;
        sel.label = "gbi_oneopt";
    } else if (name == "posterior_mean") {
        no_arg();
        sel.kind = AlgorithmKind::posterior_mean;
    } else if (name == "constant") {
        sel.kind = AlgorithmKind::constant;
        sel.constant = arg.empty() ? 0.0 : parse_real("algorithms", arg);
        sel.label = "constant@" + format_lambda(*sel.constant);
    } else if (name == "linear") {
        sel.kind = AlgorithmKind::linear;
        if (!arg.empty()) {
            sel.lambda = parse_real("algorithms", arg);
            if (*sel.lambda < 0.0 || *sel.lambda > 1.0)
                throw ConfigError("algorithms", "linear lambda must lie in [0, 1], got '" + arg + "'");
            sel.label = "linear@" + format_lambda(*sel.lambda);
        }
    } else {
        throw ConfigError("algorithms", "unknown algorithm '" + token + "'");
    }
    return sel;
}

void RunConfig::validate() const {
    if (n < 2) throw ConfigError("n", "must be at least 2");
    if (n > 63) throw ConfigError("n", "must be at most 63");
    if (m < 1) throw ConfigError("m", "must be positive");
    if (x_max < 1) throw ConfigError("x_max", "must be at least 1");
    if (taus.empty()) throw ConfigError("taus", "must list at least one value");
    for (int t : taus)
        if (t < 0 || t > n - 2)
            throw ConfigError("taus", "every tau must satisfy 0 <= tau <= n - 2 (got " + std::to_string(t) + ")");
    for (double l : lambdas)
        if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("lambdas", "values must lie in [0, 1]");
    if (!(objective_lambda >= 0.0 && objective_lambda <= 1.0))
        throw ConfigError("objective_lambda", "must lie in [0, 1]");
    if (trials < 100) throw ConfigError("trials", "must be at least 100");
    const bool needs_fit = std::any_of(algorithms.begin(), algorithms.end(),
                                       [](const auto& a) { return a.kind == AlgorithmKind::linear; });
    if (needs_fit && moment_samples < 10000) throw ConfigError("moment_samples", "must be at least 10000 when fitting linear fusers");
    for (const auto& a : algorithms)
        if (a.kind == AlgorithmKind::linear && !a.lambda && lambdas.empty())
            throw ConfigError("lambdas", "'linear' needs at least one lambda");
}

std::vector<AlgorithmSelector> RunConfig::expanded_algorithms() const {
    std::vector<AlgorithmSelector> out;
    for (const auto& a : algorithms) {
        if (a.kind == AlgorithmKind::linear && !a.lambda) {
            for (double l : lambdas) out.push_back(parse_algorithm_selector("linear@" + format_lambda(l)));
        } else {
            out.push_back(a);
        }
    }
    return out;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("<syntax>", source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError(key, "given more than once");

        if (key == "n") cfg.n = static_cast<int>(parse_integer(key, value));
        else if (key == "m") cfg.m = static_cast<int>(parse_integer(key, value));
        else if (key == "x_max") cfg.x_max = static_cast<int>(parse_integer(key, value));
        else if (key == "seed") cfg.seed = parse_unsigned(key, value);
        else if (key == "taus") cfg.taus = parse_taus(value);
        else if (key == "lambdas") {
            cfg.lambdas.clear();
            for (const auto& item : split_list(value)) cfg.lambdas.push_back(parse_real(key, item));
        } else if (key == "algorithms") {
            cfg.algorithms.clear();
            for (const auto& item : split_list(value)) cfg.algorithms.push_back(parse_algorithm_selector(item));
        } else if (key == "objective_lambda") cfg.objective_lambda = parse_real(key, value);
        else if (key == "trials") cfg.trials = parse_unsigned(key, value);
        else if (key == "moment_samples") cfg.moment_samples = parse_unsigned(key, value);
        else if (key == "output") cfg.output_path = value;
        else if (key == "format") {
            if (value == "csv") cfg.format = OutputFormat::csv;
            else if (value == "json") cfg.format = OutputFormat::json;
            else throw ConfigError(key, "must be 'csv' or 'json', got '" + value + "'");
        } else if (key == "threads") cfg.threads = static_cast<unsigned>(parse_unsigned(key, value));
        else throw ConfigError(key, "unknown key");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse_config(in, path);
}

void apply_environment(RunConfig& config) {
    if (const char* seed = std::getenv("FTFUSION_SEED")) config.seed = parse_unsigned("FTFUSION_SEED", seed);
    if (const char* trials = std::getenv("FTFUSION_TRIALS")) config.trials = parse_unsigned("FTFUSION_TRIALS", trials);
}

}  // namespace ftfusion
