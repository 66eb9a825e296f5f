#include "chelsea/config.hpp"

#include "chelsea/errors.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <string>

namespace chelsea {
namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

Real parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const Real v = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + value);
    }
}

Index parse_index(const std::string& key, const std::string& value) {
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("config: bad integer value for '" + key + "': " + value);
    }
    return v;
}

}  // namespace

ChelseaConfig parse_config(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config: line " + std::to_string(lineno) + " has empty key or value");
        }
        if (!kv.emplace(key, value).second) {
            throw ConfigError("config: duplicate key '" + key + "'");
        }
    }

    ChelseaConfig cfg;
    auto take = [&kv](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            return std::string();
        }
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("cache_ratio"); !v.empty()) cfg.cache_ratio = parse_real("cache_ratio", v);
    if (auto v = take("max_decode"); !v.empty()) cfg.max_decode = parse_index("max_decode", v);
    if (auto v = take("sink"); !v.empty()) cfg.sink = parse_index("sink", v);
    if (auto v = take("recent"); !v.empty()) cfg.recent = parse_index("recent", v);
    if (auto v = take("interval"); !v.empty()) cfg.interval = parse_index("interval", v);
    if (auto v = take("chunk_size"); !v.empty()) cfg.chunk_size = parse_index("chunk_size", v);
    if (auto v = take("head_count"); !v.empty()) cfg.head_count = parse_index("head_count", v);
    if (auto v = take("head_dim"); !v.empty()) cfg.head_dim = parse_index("head_dim", v);
    if (auto v = take("outlier_ratio"); !v.empty())
        cfg.outlier_ratio = parse_real("outlier_ratio", v);
    if (auto v = take("outlier_threshold"); !v.empty())
        cfg.outlier_threshold = parse_real("outlier_threshold", v);

    const std::string schedule = take("schedule");
    const std::string r_init = take("r_init");
    const std::string alpha = take("alpha");
    const std::string m = take("m");
    const std::string floor_value = take("floor");
    const Real floor_v =
        floor_value.empty() ? RatioSchedule::kDefaultFloor : parse_real("floor", floor_value);
    if (schedule.empty() || schedule == "llama2") {
        cfg.schedule = RatioSchedule::llama2_preset(floor_v);
    } else if (schedule == "llama3") {
        cfg.schedule = RatioSchedule::llama3_preset(floor_v);
    } else if (schedule == "qwen") {
        cfg.schedule = RatioSchedule::qwen_preset(floor_v);
    } else if (schedule == "custom") {
        if (r_init.empty() || alpha.empty() || m.empty()) {
            throw ConfigError("config: schedule = custom needs r_init, alpha and m");
        }
        cfg.schedule = RatioSchedule(parse_real("r_init", r_init), parse_real("alpha", alpha),
                                     parse_index("m", m), floor_v);
    } else {
        throw ConfigError("config: unknown schedule '" + schedule + "'");
    }
    if (schedule != "custom" && (!r_init.empty() || !alpha.empty() || !m.empty())) {
        throw ConfigError("config: r_init/alpha/m only apply to schedule = custom");
    }

    if (!kv.empty()) {
        throw ConfigError("config: unknown key '" + kv.begin()->first + "'");
    }
    cfg.validate();
    return cfg;
}

ChelseaConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("config: cannot open " + path.string());
    }
    return parse_config(is);
}

}  // namespace chelsea
