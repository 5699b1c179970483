#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "lunarlab/deep_agents.hpp"
#include "lunarlab/env.hpp"
#include "lunarlab/heuristic.hpp"
#include "lunarlab/metrics.hpp"
#include "lunarlab/tabular.hpp"

namespace lunarlab {

// ===========================================================================
// Workbench configuration
// ===========================================================================

enum class Algorithm : std::uint8_t { qlearn, sarsa, mc_first, mc_every, dqn, ddqn, cdqn };

inline constexpr std::array<std::pair<Algorithm, std::string_view>, 7> kAlgorithmNames{{
    {Algorithm::qlearn, "qlearn"},
    {Algorithm::sarsa, "sarsa"},
    {Algorithm::mc_first, "mc-first"},
    {Algorithm::mc_every, "mc-every"},
    {Algorithm::dqn, "dqn"},
    {Algorithm::ddqn, "ddqn"},
    {Algorithm::cdqn, "cdqn"},
}};

inline std::string_view to_string(Algorithm a) {
    for (const auto& [alg, name] : kAlgorithmNames)
        if (alg == a) return name;
    return "unknown";
}

inline bool is_tabular(Algorithm a) { return static_cast<int>(a) <= static_cast<int>(Algorithm::mc_every); }

inline TabularAlgorithm tabular_algorithm(Algorithm a) {
    switch (a) {
        case Algorithm::sarsa: return TabularAlgorithm::sarsa;
        case Algorithm::mc_first: return TabularAlgorithm::mc_first_visit;
        case Algorithm::mc_every: return TabularAlgorithm::mc_every_visit;
        default: return TabularAlgorithm::q_learning;
    }
}

inline TargetRule target_rule(Algorithm a) {
    switch (a) {
        case Algorithm::ddqn: return TargetRule::double_dqn;
        case Algorithm::cdqn: return TargetRule::clipped;
        default: return TargetRule::dqn;
    }
}

struct RunConfig {
    std::int64_t episodes = 5000;
    int max_steps = 1000;
    std::uint64_t seed = 0;
    double early_stop_threshold = 200.0;  ///< deep agents only
    int early_stop_window = 100;
    int eval_trials = 100;
    std::uint64_t eval_seed = 1'000'003;
    double eval_epsilon = 0.0;
    std::string output_dir = "runs";
    std::int64_t checkpoint_every = 0;  ///< 0: final checkpoint only

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline constexpr double kTabularGamma = 0.9;
inline constexpr double kDeepGamma = 0.99;

struct WorkbenchConfig {
    EnvConfig env;
    Algorithm algorithm = Algorithm::qlearn;
    /// Discount shared by every agent family; unset picks the family
    /// default (kTabularGamma or kDeepGamma).
    std::optional<double> gamma;
    TabularConfig tabular;
    DeepConfig deep;
    bool heuristic_enabled = false;
    HeuristicConfig heuristic;
    RunConfig run;

    /// Copies the shared fields into the per-family configs.
    void normalize() {
        tabular.algorithm = tabular_algorithm(algorithm);
        tabular.gamma = gamma.value_or(kTabularGamma);
        deep.rule = target_rule(algorithm);
        deep.gamma = gamma.value_or(kDeepGamma);
    }

    std::optional<HeuristicConfig> heuristic_or_none() const {
        return heuristic_enabled ? std::optional<HeuristicConfig>(heuristic) : std::nullopt;
    }

    friend bool operator==(const WorkbenchConfig&, const WorkbenchConfig&) = default;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scalar formatting and parsing
// ---------------------------------------------------------------------------

/// Shortest text that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

[[noreturn]] inline void type_error(std::string_view key, std::string_view expected, std::string_view got) {
    throw ConfigError(std::string(key) + ": expected " + std::string(expected) + ", got '" + std::string(got) + "'");
}

inline double parse_double(std::string_view key, std::string_view text) {
    double v = 0.0;
    text = trim(text);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) type_error(key, "a number", text);
    return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
    Int v{};
    text = trim(text);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) type_error(key, "an integer", text);
    return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "off" || text == "no" || text == "0") return false;
    type_error(key, "a boolean (true/false/on/off)", text);
}

inline std::string join_doubles(const auto& values) {
    std::string out;
    for (double v : values) {
        if (!out.empty()) out += ", ";
        out += format_double(v);
    }
    return out;
}

}  // namespace detail

/// Named resolution vectors used by the tile-coding sweeps.
inline std::optional<Resolution> named_resolution(std::string_view name) {
    if (name == "res1") return Resolution{0.5, 0.5, 0.5, 0.5, 0.2, 0.2, 0, 0};
    if (name == "res2") return Resolution{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0, 0};
    if (name == "res3") return Resolution{1.5, 1.5, 1.5, 1.5, 1.0, 1.0, 0, 0};
    return std::nullopt;
}

inline Resolution parse_resolution(std::string_view key, std::string_view text) {
    text = detail::trim(text);
    if (auto named = named_resolution(text)) return *named;
    const auto parts = detail::split(text, ',');
    if (parts.size() != kStateDim) detail::type_error(key, "8 comma-separated numbers or res1/res2/res3", text);
    Resolution r{};
    for (std::size_t i = 0; i < kStateDim; ++i) r[i] = detail::parse_double(key, parts[i]);
    return r;
}

inline std::vector<double> parse_double_list(std::string_view key, std::string_view text) {
    text = detail::trim(text);
    std::vector<double> out;
    if (text.empty()) return out;
    for (auto p : detail::split(text, ',')) out.push_back(detail::parse_double(key, p));
    return out;
}

inline std::vector<int> parse_int_list(std::string_view key, std::string_view text) {
    text = detail::trim(text);
    std::vector<int> out;
    if (text.empty()) return out;
    for (auto p : detail::split(text, ',')) out.push_back(detail::parse_int<int>(key, p));
    return out;
}

// ---------------------------------------------------------------------------
// Field registry: one entry per configurable key
// ---------------------------------------------------------------------------

struct ConfigField {
    std::string section;
    std::string key;
    std::function<void(WorkbenchConfig&, std::string_view qualified, std::string_view value)> set;
    std::function<std::string(const WorkbenchConfig&)> get;

    std::string qualified() const { return section + "." + key; }
};

namespace detail {

template <class Member>
ConfigField number_field(std::string section, std::string key, Member member) {
    return {std::move(section), std::move(key),
            [member](WorkbenchConfig& c, std::string_view q, std::string_view v) {
                auto& ref = member(c);
                using T = std::remove_reference_t<decltype(ref)>;
                if constexpr (std::is_same_v<T, double>)
                    ref = parse_double(q, v);
                else
                    ref = parse_int<T>(q, v);
            },
            [member](const WorkbenchConfig& c) {
                auto& ref = member(const_cast<WorkbenchConfig&>(c));
                using T = std::remove_reference_t<decltype(ref)>;
                if constexpr (std::is_same_v<T, double>)
                    return format_double(ref);
                else
                    return std::to_string(ref);
            }};
}

template <class Member>
ConfigField bool_field(std::string section, std::string key, Member member) {
    return {std::move(section), std::move(key),
            [member](WorkbenchConfig& c, std::string_view q, std::string_view v) { member(c) = parse_bool(q, v); },
            [member](const WorkbenchConfig& c) {
                return std::string(member(const_cast<WorkbenchConfig&>(c)) ? "true" : "false");
            }};
}

}  // namespace detail

inline const std::vector<ConfigField>& config_fields() {
    using detail::bool_field;
    using detail::number_field;
    using WC = WorkbenchConfig;
    static const std::vector<ConfigField> fields = [] {
        std::vector<ConfigField> f;
        // [env]
        f.push_back(number_field("env", "gravity", [](WC& c) -> auto& { return c.env.gravity; }));
        f.push_back(number_field("env", "main_thrust", [](WC& c) -> auto& { return c.env.main_thrust; }));
        f.push_back(number_field("env", "side_thrust", [](WC& c) -> auto& { return c.env.side_thrust; }));
        f.push_back(number_field("env", "side_torque", [](WC& c) -> auto& { return c.env.side_torque; }));
        f.push_back(number_field("env", "dt", [](WC& c) -> auto& { return c.env.dt; }));
        f.push_back(number_field("env", "pad_half_width", [](WC& c) -> auto& { return c.env.pad_half_width; }));
        f.push_back(number_field("env", "crash_speed_limit", [](WC& c) -> auto& { return c.env.crash_speed_limit; }));
        f.push_back(number_field("env", "crash_angle_limit", [](WC& c) -> auto& { return c.env.crash_angle_limit; }));
        f.push_back(number_field("env", "initial_speed_bound", [](WC& c) -> auto& { return c.env.initial_speed_bound; }));
        f.push_back(number_field("env", "max_steps", [](WC& c) -> auto& { return c.env.max_steps; }));
        f.push_back(number_field("env", "start_height", [](WC& c) -> auto& { return c.env.start_height; }));
        f.push_back(number_field("env", "start_x_range", [](WC& c) -> auto& { return c.env.start_x_range; }));
        f.push_back(number_field("env", "leg_half_span", [](WC& c) -> auto& { return c.env.leg_half_span; }));
        f.push_back(number_field("env", "ground_friction", [](WC& c) -> auto& { return c.env.ground_friction; }));
        f.push_back(bool_field("env", "shaping_enabled", [](WC& c) -> auto& { return c.env.shaping_enabled; }));
        f.push_back(number_field("env", "shaping_distance_weight", [](WC& c) -> auto& { return c.env.shaping_distance_weight; }));
        f.push_back(number_field("env", "shaping_velocity_weight", [](WC& c) -> auto& { return c.env.shaping_velocity_weight; }));
        f.push_back(number_field("env", "shaping_angle_weight", [](WC& c) -> auto& { return c.env.shaping_angle_weight; }));

        // [agent]
        f.push_back({"agent", "algorithm",
                     [](WC& c, std::string_view q, std::string_view v) {
                         v = detail::trim(v);
                         for (const auto& [alg, name] : kAlgorithmNames)
                             if (name == v) {
                                 c.algorithm = alg;
                                 return;
                             }
                         detail::type_error(q, "one of qlearn, sarsa, mc-first, mc-every, dqn, ddqn, cdqn", v);
                     },
                     [](const WC& c) { return std::string(to_string(c.algorithm)); }});
        f.push_back({"agent", "gamma",
                     [](WC& c, std::string_view q, std::string_view v) {
                         if (detail::trim(v) == "auto")
                             c.gamma.reset();
                         else
                             c.gamma = detail::parse_double(q, v);
                     },
                     [](const WC& c) { return c.gamma ? format_double(*c.gamma) : std::string("auto"); }});
        f.push_back(number_field("agent", "epsilon", [](WC& c) -> auto& { return c.tabular.epsilon; }));
        f.push_back(number_field("agent", "tiles", [](WC& c) -> auto& { return c.tabular.tiles.layers; }));
        f.push_back({"agent", "resolution",
                     [](WC& c, std::string_view q, std::string_view v) { c.tabular.tiles.resolution = parse_resolution(q, v); },
                     [](const WC& c) { return detail::join_doubles(c.tabular.tiles.resolution); }});
        f.push_back({"agent", "tile_weights",
                     [](WC& c, std::string_view q, std::string_view v) { c.tabular.tiles.weights = parse_double_list(q, v); },
                     [](const WC& c) { return detail::join_doubles(c.tabular.tiles.weights); }});
        f.push_back(number_field("agent", "velocity_clamp", [](WC& c) -> auto& { return c.tabular.tiles.velocity_clamp; }));
        f.push_back(number_field("agent", "alpha0", [](WC& c) -> auto& { return c.tabular.lr.initial; }));
        f.push_back(number_field("agent", "lr_c", [](WC& c) -> auto& { return c.tabular.lr.c; }));
        f.push_back(number_field("agent", "lr_decay_period", [](WC& c) -> auto& { return c.tabular.lr.decay_period; }));
        f.push_back({"agent", "hidden",
                     [](WC& c, std::string_view q, std::string_view v) { c.deep.hidden = parse_int_list(q, v); },
                     [](const WC& c) {
                         std::string out;
                         for (int h : c.deep.hidden) out += (out.empty() ? "" : ", ") + std::to_string(h);
                         return out;
                     }});
        f.push_back(number_field("agent", "learning_rate", [](WC& c) -> auto& { return c.deep.adam.learning_rate; }));
        f.push_back(number_field("agent", "adam_beta1", [](WC& c) -> auto& { return c.deep.adam.beta1; }));
        f.push_back(number_field("agent", "adam_beta2", [](WC& c) -> auto& { return c.deep.adam.beta2; }));
        f.push_back(number_field("agent", "adam_epsilon", [](WC& c) -> auto& { return c.deep.adam.epsilon; }));
        f.push_back(number_field("agent", "tau", [](WC& c) -> auto& { return c.deep.tau; }));
        f.push_back(number_field("agent", "batch_size", [](WC& c) -> auto& { return c.deep.batch_size; }));
        f.push_back(number_field("agent", "buffer_capacity", [](WC& c) -> auto& { return c.deep.buffer_capacity; }));
        f.push_back(number_field("agent", "learn_every", [](WC& c) -> auto& { return c.deep.learn_every; }));
        f.push_back(number_field("agent", "min_replay", [](WC& c) -> auto& { return c.deep.min_replay; }));
        f.push_back(number_field("agent", "epsilon_start", [](WC& c) -> auto& { return c.deep.epsilon_start; }));
        f.push_back(number_field("agent", "epsilon_end", [](WC& c) -> auto& { return c.deep.epsilon_end; }));
        f.push_back(number_field("agent", "epsilon_decay", [](WC& c) -> auto& { return c.deep.epsilon_decay; }));
        f.push_back({"agent", "double_selection",
                     [](WC& c, std::string_view q, std::string_view v) {
                         v = detail::trim(v);
                         if (v == "target")
                             c.deep.double_selection = DoubleSelection::target_selects;
                         else if (v == "local")
                             c.deep.double_selection = DoubleSelection::local_selects;
                         else
                             detail::type_error(q, "target or local", v);
                     },
                     [](const WC& c) { return std::string(to_string(c.deep.double_selection)); }});

        // [heuristic]
        f.push_back(bool_field("heuristic", "enabled", [](WC& c) -> auto& { return c.heuristic_enabled; }));
        f.push_back(number_field("heuristic", "k1", [](WC& c) -> auto& { return c.heuristic.k1; }));
        f.push_back(number_field("heuristic", "k2", [](WC& c) -> auto& { return c.heuristic.k2; }));
        f.push_back(number_field("heuristic", "alpha", [](WC& c) -> auto& { return c.heuristic.alpha_weight; }));
        f.push_back(number_field("heuristic", "beta", [](WC& c) -> auto& { return c.heuristic.beta_weight; }));
        f.push_back(number_field("heuristic", "eps1", [](WC& c) -> auto& { return c.heuristic.eps1; }));
        f.push_back(number_field("heuristic", "goal_x", [](WC& c) -> auto& { return c.heuristic.goal_x; }));
        f.push_back(number_field("heuristic", "goal_y", [](WC& c) -> auto& { return c.heuristic.goal_y; }));
        f.push_back(number_field("heuristic", "alpha0", [](WC& c) -> auto& { return c.heuristic.alpha0; }));
        f.push_back(number_field("heuristic", "p", [](WC& c) -> auto& { return c.heuristic.p; }));
        f.push_back(number_field("heuristic", "period", [](WC& c) -> auto& { return c.heuristic.period; }));
        f.push_back({"heuristic", "orientation",
                     [](WC& c, std::string_view q, std::string_view v) {
                         v = detail::trim(v);
                         if (v == "deviation")
                             c.heuristic.orientation = OrientationMode::deviation;
                         else if (v == "change")
                             c.heuristic.orientation = OrientationMode::change;
                         else
                             detail::type_error(q, "deviation or change", v);
                     },
                     [](const WC& c) { return std::string(to_string(c.heuristic.orientation)); }});

        // [run]
        f.push_back(number_field("run", "episodes", [](WC& c) -> auto& { return c.run.episodes; }));
        f.push_back(number_field("run", "max_steps", [](WC& c) -> auto& { return c.run.max_steps; }));
        f.push_back(number_field("run", "seed", [](WC& c) -> auto& { return c.run.seed; }));
        f.push_back(number_field("run", "early_stop_threshold", [](WC& c) -> auto& { return c.run.early_stop_threshold; }));
        f.push_back(number_field("run", "early_stop_window", [](WC& c) -> auto& { return c.run.early_stop_window; }));
        f.push_back(number_field("run", "eval_trials", [](WC& c) -> auto& { return c.run.eval_trials; }));
        f.push_back(number_field("run", "eval_seed", [](WC& c) -> auto& { return c.run.eval_seed; }));
        f.push_back(number_field("run", "eval_epsilon", [](WC& c) -> auto& { return c.run.eval_epsilon; }));
        f.push_back({"run", "output_dir",
                     [](WC& c, std::string_view, std::string_view v) { c.run.output_dir = std::string(detail::trim(v)); },
                     [](const WC& c) { return c.run.output_dir; }});
        f.push_back(number_field("run", "checkpoint_every", [](WC& c) -> auto& { return c.run.checkpoint_every; }));
        return f;
    }();
    return fields;
}

inline const ConfigField* find_field(std::string_view section, std::string_view key) {
    for (const auto& f : config_fields())
        if (f.section == section && f.key == key) return &f;
    return nullptr;
}

/// Checks every cross-field constraint; messages name the offending key.
inline void validate(const WorkbenchConfig& c) {
    auto wrap = [](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string(section) + ": " + e.what());
        }
    };
    if (c.gamma && !(*c.gamma > 0.0 && *c.gamma < 1.0))
        throw ConfigError("agent.gamma = " + format_double(*c.gamma) + " is outside the open interval (0, 1)");
    wrap("env", [&] { c.env.validate(); });
    wrap("agent", [&] { c.tabular.validate(); });
    wrap("agent", [&] { c.deep.validate(); });
    wrap("heuristic", [&] { c.heuristic.validate(); });
    if (c.run.episodes < 0) throw ConfigError("run.episodes must be >= 0");
    if (c.run.max_steps < 1) throw ConfigError("run.max_steps must be >= 1");
    if (c.run.early_stop_window < 1) throw ConfigError("run.early_stop_window must be >= 1");
    if (c.run.eval_trials < 1) throw ConfigError("run.eval_trials must be >= 1");
    if (!(c.run.eval_epsilon >= 0.0 && c.run.eval_epsilon <= 1.0))
        throw ConfigError("run.eval_epsilon must be in [0, 1]");
    if (c.run.checkpoint_every < 0) throw ConfigError("run.checkpoint_every must be >= 0");
    if (c.run.output_dir.empty()) throw ConfigError("run.output_dir must not be empty");
}

/// Applies one "section.key = value" assignment.
inline void apply_setting(WorkbenchConfig& cfg, std::string_view section, std::string_view key, std::string_view value) {
    const ConfigField* field = find_field(section, key);
    if (!field) throw ConfigError("unknown key '" + std::string(section) + "." + std::string(key) + "'");
    field->set(cfg, field->qualified(), value);
}

/// Parses "key = value" lines grouped under [section] headers; lines before
/// the first header belong to [agent]. '#' and ';' start comments. Missing
/// keys keep their defaults; the result is normalized and validated.
inline WorkbenchConfig parse_config(std::string_view text, WorkbenchConfig base = {}) {
    WorkbenchConfig cfg = std::move(base);
    std::string section = "agent";
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (section != "env" && section != "agent" && section != "heuristic" && section != "run")
                throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        apply_setting(cfg, section, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    cfg.normalize();
    validate(cfg);
    return cfg;
}

/// Fully resolved config text; parse_config(render_config(c)) == c.
inline std::string render_config(const WorkbenchConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& f : config_fields()) {
        if (f.section != section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += f.key + " = " + f.get(cfg) + "\n";
    }
    return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline WorkbenchConfig load_config(const std::filesystem::path& path, WorkbenchConfig base = {}) {
    return parse_config(read_text_file(path), std::move(base));
}

// ===========================================================================
// Checkpoints
// ===========================================================================

using AnyAgent = std::variant<TabularAgent, DeepAgent>;

inline AnyAgent make_agent(const WorkbenchConfig& cfg) {
    WorkbenchConfig c = cfg;
    c.normalize();
    if (is_tabular(c.algorithm)) return TabularAgent(c.tabular, c.run.seed, c.heuristic_or_none());
    return DeepAgent(c.deep, c.run.seed, c.heuristic_or_none());
}

class CheckpointError : public std::runtime_error {
public:
    enum class Kind { io, bad_magic, version, truncated, checksum, format };

    CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

inline constexpr std::array<char, 8> kCheckpointMagic{'L', 'U', 'N', 'A', 'R', 'C', 'K', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderSize = 8 + 4 + 4 + 8;

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : bytes) h = (h ^ b) * 0x100000001b3ULL;
    return h;
}

namespace detail {

class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        le(bits, 8);
    }
    void str(std::string_view s) {
        u64(s.size());
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    void raw(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    std::int64_t i64() { return static_cast<std::int64_t>(le(8)); }
    double f64() {
        const std::uint64_t bits = le(8);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        const std::uint64_t n = u64();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::uint64_t n) const {
        if (n > bytes_.size() - pos_) throw CheckpointError(CheckpointError::Kind::format, "checkpoint payload is malformed");
    }
    std::uint64_t le(int n) {
        need(static_cast<std::uint64_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

inline void write_layers(ByteWriter& w, const std::vector<DenseLayer>& layers) {
    w.u32(static_cast<std::uint32_t>(layers.size()));
    for (const auto& l : layers) {
        w.u32(static_cast<std::uint32_t>(l.weight.rows()));
        w.u32(static_cast<std::uint32_t>(l.weight.cols()));
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.f64(l.weight(r, c));
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) w.f64(l.bias[r]);
    }
}

inline std::vector<DenseLayer> read_layers(ByteReader& r) {
    const std::uint32_t n = r.u32();
    if (n > 64) throw CheckpointError(CheckpointError::Kind::format, "checkpoint: implausible layer count");
    std::vector<DenseLayer> layers(n);
    for (auto& l : layers) {
        const std::uint32_t rows = r.u32(), cols = r.u32();
        if (rows > 1u << 16 || cols > 1u << 16)
            throw CheckpointError(CheckpointError::Kind::format, "checkpoint: implausible layer shape");
        l.weight.resize(rows, cols);
        l.bias.resize(rows);
        for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
            for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = r.f64();
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = r.f64();
    }
    return layers;
}

inline void write_heuristic_alpha(ByteWriter& w, const std::optional<HeuristicSchedule>& h) {
    w.u8(h ? 1 : 0);
    w.f64(h ? h->alpha() : 0.0);
}

inline void read_heuristic_alpha(ByteReader& r, std::optional<HeuristicSchedule>& h) {
    const bool present = r.u8() != 0;
    const double alpha = r.f64();
    if (present != h.has_value())
        throw CheckpointError(CheckpointError::Kind::format, "checkpoint: heuristic state does not match its config");
    if (h) h->set_alpha(alpha);
}

}  // namespace detail

struct Checkpoint {
    WorkbenchConfig config;
    AnyAgent agent;
};

/// Serializes config and agent state. The replay buffer is not stored.
inline std::vector<std::uint8_t> encode_checkpoint(const WorkbenchConfig& cfg, const AnyAgent& agent) {
    detail::ByteWriter payload;
    payload.str(render_config(cfg));
    std::uint32_t kind = 0;
    if (const auto* tab = std::get_if<TabularAgent>(&agent)) {
        kind = 0;
        payload.i64(tab->episodes_trained());
        payload.str(save_rng(tab->rng()));
        detail::write_heuristic_alpha(payload, tab->heuristic());
        const TileCoder& coder = tab->coder();
        payload.u32(static_cast<std::uint32_t>(coder.layers()));
        for (int layer = 1; layer <= coder.layers(); ++layer) {
            const auto cells = coder.nonzero_cells(layer);
            payload.u64(cells.size());
            for (const auto& [key, value] : cells) {
                for (auto v : key.cell) payload.i64(v);
                payload.u8(static_cast<std::uint8_t>(code(key.action)));
                payload.f64(value);
            }
        }
    } else {
        const auto& deep = std::get<DeepAgent>(agent);
        kind = 1;
        payload.i64(deep.episodes_trained());
        payload.str(save_rng(deep.rng()));
        detail::write_heuristic_alpha(payload, deep.heuristic());
        payload.i64(deep.env_steps());
        payload.f64(deep.epsilon());
        detail::write_layers(payload, deep.local().layers());
        detail::write_layers(payload, deep.target().layers());
        payload.i64(deep.optimizer().step);
        detail::write_layers(payload, deep.optimizer().m);
        detail::write_layers(payload, deep.optimizer().v);
    }

    detail::ByteWriter out;
    for (char ch : kCheckpointMagic) out.u8(static_cast<std::uint8_t>(ch));
    out.u32(kCheckpointVersion);
    out.u32(kind);
    out.u64(payload.bytes().size());
    out.raw(payload.bytes());
    out.u64(fnv1a64(out.bytes()));
    return std::move(out.bytes());
}

inline Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    using Kind = CheckpointError::Kind;
    if (bytes.size() < kCheckpointHeaderSize) throw CheckpointError(Kind::truncated, "checkpoint is truncated (no header)");
    if (!std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), bytes.begin(),
                    [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; }))
        throw CheckpointError(Kind::bad_magic, "not a checkpoint file (bad magic)");
    detail::ByteReader header(bytes.subspan(8, kCheckpointHeaderSize - 8));
    const std::uint32_t version = header.u32();
    if (version != kCheckpointVersion)
        throw CheckpointError(Kind::version, "unsupported checkpoint version " + std::to_string(version) +
                                                 " (expected " + std::to_string(kCheckpointVersion) + ")");
    const std::uint32_t kind = header.u32();
    const std::uint64_t payload_size = header.u64();
    if (payload_size > bytes.size() || bytes.size() - kCheckpointHeaderSize < payload_size + 8)
        throw CheckpointError(Kind::truncated, "checkpoint is truncated");
    const std::size_t body = kCheckpointHeaderSize + payload_size;
    detail::ByteReader tail(bytes.subspan(body, 8));
    if (tail.u64() != fnv1a64(bytes.first(body)))
        throw CheckpointError(Kind::checksum, "checkpoint checksum mismatch (file corrupted)");
    if (bytes.size() != body + 8) throw CheckpointError(Kind::format, "trailing bytes after checkpoint");

    detail::ByteReader r(bytes.subspan(kCheckpointHeaderSize, payload_size));
    WorkbenchConfig cfg;
    try {
        cfg = parse_config(r.str());
    } catch (const ConfigError& e) {
        throw CheckpointError(Kind::format, std::string("checkpoint config: ") + e.what());
    }
    if ((kind == 0) != is_tabular(cfg.algorithm))
        throw CheckpointError(Kind::format, "checkpoint agent kind does not match its algorithm");

    AnyAgent agent = make_agent(cfg);
    if (auto* tab = std::get_if<TabularAgent>(&agent)) {
        tab->set_episodes_trained(r.i64());
        tab->rng() = load_rng(r.str());
        detail::read_heuristic_alpha(r, tab->heuristic());
        const std::uint32_t layers = r.u32();
        if (static_cast<int>(layers) != tab->coder().layers())
            throw CheckpointError(Kind::format, "checkpoint: tile layer count mismatch");
        for (int layer = 1; layer <= static_cast<int>(layers); ++layer) {
            const std::uint64_t n = r.u64();
            for (std::uint64_t i = 0; i < n; ++i) {
                CellIndex idx{};
                for (auto& v : idx) v = r.i64();
                const std::uint8_t a = r.u8();
                if (a >= kActionCount) throw CheckpointError(Kind::format, "checkpoint: bad action code");
                tab->coder().set_cell(layer, idx, static_cast<Action>(a), r.f64());
            }
        }
    } else {
        auto& deep = std::get<DeepAgent>(agent);
        deep.set_episodes_trained(r.i64());
        deep.rng() = load_rng(r.str());
        detail::read_heuristic_alpha(r, deep.heuristic());
        deep.set_env_steps(r.i64());
        deep.set_epsilon(r.f64());
        auto local = detail::read_layers(r);
        auto target = detail::read_layers(r);
        const std::int64_t step = r.i64();
        auto m = detail::read_layers(r);
        auto v = detail::read_layers(r);
        try {
            check_same_layout(deep.local().layers(), local, "checkpoint local network");
            check_same_layout(deep.local().layers(), target, "checkpoint target network");
            check_same_layout(deep.local().layers(), m, "checkpoint optimizer");
            check_same_layout(deep.local().layers(), v, "checkpoint optimizer");
        } catch (const std::invalid_argument& e) {
            throw CheckpointError(Kind::format, e.what());
        }
        deep.local().layers() = std::move(local);
        deep.target().layers() = std::move(target);
        deep.optimizer().step = step;
        deep.optimizer().m = std::move(m);
        deep.optimizer().v = std::move(v);
    }
    if (!r.at_end()) throw CheckpointError(Kind::format, "checkpoint payload has unread bytes");
    return {std::move(cfg), std::move(agent)};
}

inline void save_checkpoint(const WorkbenchConfig& cfg, const AnyAgent& agent, const std::filesystem::path& path) {
    const auto bytes = encode_checkpoint(cfg, agent);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError(CheckpointError::Kind::io, "cannot write checkpoint '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError(CheckpointError::Kind::io, "write failed for '" + path.string() + "'");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(CheckpointError::Kind::io, "cannot open checkpoint '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

// ===========================================================================
// CSV export
// ===========================================================================

inline std::string training_curve_csv(std::span<const EpisodeRecord> log, bool deep, bool heuristic) {
    std::string out = deep ? "episode,score,loss,epsilon" : "episode,score,epsilon,alpha";
    if (heuristic) out += ",alpha_heuristic";
    out += "\n";
    for (const auto& r : log) {
        out += std::to_string(r.episode) + "," + format_double(r.score) + ",";
        if (deep) {
            out += (r.loss ? format_double(*r.loss) : std::string()) + "," + format_double(r.epsilon);
        } else {
            out += format_double(r.epsilon) + "," + (r.alpha ? format_double(*r.alpha) : std::string());
        }
        if (heuristic) out += "," + (r.heuristic_alpha ? format_double(*r.heuristic_alpha) : std::string());
        out += "\n";
    }
    return out;
}

inline std::string trajectory_csv(std::span<const TrajectoryStep> traj) {
    std::string out = "t,p_x,p_y,v_x,v_y,theta,v_theta,lg1,lg2,action,reward,event\n";
    for (const auto& s : traj) {
        const auto f = s.state.features();
        out += std::to_string(s.t);
        for (std::size_t i = 0; i < 6; ++i) out += "," + format_double(f[i]);
        out += std::string(",") + (s.state.lg1 ? "1" : "0") + "," + (s.state.lg2 ? "1" : "0");
        out += "," + std::to_string(code(s.action)) + "," + format_double(s.reward) + "," +
               std::string(to_string(s.event)) + "\n";
    }
    return out;
}

// ===========================================================================
// Q-value surface over (p_x, p_y)
// ===========================================================================

struct GridSpec {
    double x_min = -1.0;
    double x_max = 1.0;
    double y_min = -1.0;
    double y_max = 1.0;
    double step = 0.1;

    static std::vector<double> axis(double lo, double hi, double step) {
        if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("grid: need step > 0 and hi >= lo");
        const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9;
        return v;
    }
    std::vector<double> xs() const { return axis(x_min, x_max, step); }
    std::vector<double> ys() const { return axis(y_min, y_max, step); }
};

struct QSurface {
    std::vector<double> xs;
    std::vector<double> ys;
    /// q[a][iy * xs.size() + ix]
    std::array<std::vector<double>, kActionCount> q;

    struct Peak {
        double x = 0.0;
        double y = 0.0;
        double value = 0.0;
        Action action = Action::idle;
    };

    /// Grid point and action of the largest Q-value.
    Peak peak() const {
        Peak best{0, 0, -std::numeric_limits<double>::infinity(), Action::idle};
        for (std::size_t a = 0; a < kActionCount; ++a)
            for (std::size_t iy = 0; iy < ys.size(); ++iy)
                for (std::size_t ix = 0; ix < xs.size(); ++ix) {
                    const double v = q[a][iy * xs.size() + ix];
                    if (v > best.value) best = {xs[ix], ys[iy], v, static_cast<Action>(a)};
                }
        return best;
    }
};

/// Q over the (p_x, p_y) grid with every other component taken from
/// `templ` (the usual choice is all zeros).
template <QAgent Agent>
QSurface q_surface(const Agent& agent, const LanderState& templ = {}, const GridSpec& grid = {}) {
    QSurface s;
    s.xs = grid.xs();
    s.ys = grid.ys();
    for (auto& col : s.q) col.resize(s.xs.size() * s.ys.size());
    for (std::size_t iy = 0; iy < s.ys.size(); ++iy)
        for (std::size_t ix = 0; ix < s.xs.size(); ++ix) {
            LanderState x = templ;
            x.p_x = s.xs[ix];
            x.p_y = s.ys[iy];
            const QValues q = agent.q_values(x);
            for (std::size_t a = 0; a < kActionCount; ++a) s.q[a][iy * s.xs.size() + ix] = q[a];
        }
    return s;
}

/// One CSV per action, rows (x, y, q); returns the written paths.
inline std::vector<std::filesystem::path> write_q_surface(const QSurface& s, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    for (std::size_t a = 0; a < kActionCount; ++a) {
        std::string out = "x,y,q\n";
        for (std::size_t iy = 0; iy < s.ys.size(); ++iy)
            for (std::size_t ix = 0; ix < s.xs.size(); ++ix)
                out += format_double(s.xs[ix]) + "," + format_double(s.ys[iy]) + "," +
                       format_double(s.q[a][iy * s.xs.size() + ix]) + "\n";
        auto path = dir / ("qsurface_action" + std::to_string(a) + ".csv");
        write_text_file(path, out);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace lunarlab
