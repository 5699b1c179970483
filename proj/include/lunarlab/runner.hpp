#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lunarlab/env.hpp"
#include "lunarlab/io.hpp"
#include "lunarlab/metrics.hpp"

namespace lunarlab {

namespace fs = std::filesystem;

/// Output root: $LUNARLAB_OUT when set, otherwise "runs".
inline std::string default_output_root() {
    const char* env = std::getenv("LUNARLAB_OUT");
    return env && *env ? std::string(env) : std::string("runs");
}

/// Defaults with the output root taken from the environment.
inline WorkbenchConfig default_config() {
    WorkbenchConfig cfg;
    cfg.run.output_dir = default_output_root();
    cfg.normalize();
    return cfg;
}

// ---------------------------------------------------------------------------
// Overrides ("key=value" with short aliases)
// ---------------------------------------------------------------------------

/// Sets one value. `key` is "section.key", a short alias (batch, heuristic)
/// or any key name that is unique across sections.
inline void apply_override(WorkbenchConfig& cfg, std::string_view key, std::string_view value) {
    key = detail::trim(key);
    if (const auto dot = key.find('.'); dot != std::string_view::npos) {
        apply_setting(cfg, key.substr(0, dot), key.substr(dot + 1), value);
        return;
    }
    if (key == "batch") key = "batch_size";
    if (key == "heuristic") key = "enabled";
    const ConfigField* match = nullptr;
    std::string candidates;
    for (const auto& f : config_fields()) {
        if (f.key != key) continue;
        candidates += (candidates.empty() ? "" : ", ") + f.qualified();
        if (match) throw ConfigError("ambiguous key '" + std::string(key) + "': use one of " + candidates + "...");
        match = &f;
    }
    if (!match) throw ConfigError("unknown key '" + std::string(key) + "'");
    match->set(cfg, match->qualified(), value);
}

inline WorkbenchConfig with_overrides(WorkbenchConfig cfg, const std::vector<std::pair<std::string, std::string>>& overrides) {
    for (const auto& [k, v] : overrides) apply_override(cfg, k, v);
    cfg.normalize();
    validate(cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainOutcome {
    AnyAgent agent;
    std::vector<EpisodeRecord> log;
};

inline double trailing_mean(const std::vector<EpisodeRecord>& log, std::size_t window) {
    if (log.empty()) return 0.0;
    const std::size_t w = std::min(window, log.size());
    double sum = 0.0;
    for (std::size_t i = log.size() - w; i < log.size(); ++i) sum += log[i].score;
    return sum / static_cast<double>(w);
}

/// Trains the configured agent from scratch. When `out_dir` is non-empty it
/// receives config.ini, training_curve.csv and checkpoints.
inline TrainOutcome train(const WorkbenchConfig& config, const fs::path& out_dir = {}, std::ostream* progress = nullptr,
                          int progress_every = 100) {
    WorkbenchConfig cfg = config;
    cfg.normalize();
    validate(cfg);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file(out_dir / "config.ini", render_config(cfg));
    }

    TrainOutcome out{make_agent(cfg), {}};
    LunarLander env(cfg.env);
    const bool deep = !is_tabular(cfg.algorithm);
    const auto window = static_cast<std::size_t>(cfg.run.early_stop_window);
    for (std::int64_t i = 0; i < cfg.run.episodes; ++i) {
        out.log.push_back(std::visit(
            [&](auto& agent) {
                const auto seed = derive_seed(cfg.run.seed, static_cast<std::uint64_t>(agent.episodes_trained()));
                return agent.run_episode(env, cfg.run.max_steps, seed);
            },
            out.agent));
        const std::int64_t done = i + 1;
        if (progress && progress_every > 0 && done % progress_every == 0) {
            *progress << "episode " << done << "  score " << format_double(std::round(out.log.back().score * 100) / 100)
                      << "  trailing-" << window << " "
                      << format_double(std::round(trailing_mean(out.log, window) * 100) / 100) << "\n";
        }
        if (!out_dir.empty() && cfg.run.checkpoint_every > 0 && done % cfg.run.checkpoint_every == 0) {
            char name[48];
            std::snprintf(name, sizeof name, "checkpoint_%06lld.bin", static_cast<long long>(done));
            save_checkpoint(cfg, out.agent, out_dir / name);
        }
        if (deep && out.log.size() >= window && trailing_mean(out.log, window) > cfg.run.early_stop_threshold) {
            if (progress) *progress << "early stop after " << done << " episodes\n";
            break;
        }
    }

    if (!out_dir.empty()) {
        write_text_file(out_dir / "training_curve.csv", training_curve_csv(out.log, deep, cfg.heuristic_enabled));
        save_checkpoint(cfg, out.agent, out_dir / "checkpoint.bin");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

inline EvalReport evaluate_agent(const AnyAgent& agent, const EnvConfig& env_cfg, std::size_t trials, std::uint64_t seed,
                                 double epsilon = 0.0, std::vector<TrialRecord>* trials_out = nullptr) {
    LunarLander env(env_cfg);
    return std::visit([&](const auto& a) { return evaluate(a, env, trials, seed, epsilon, trials_out); }, agent);
}

inline std::string eval_report_csv(const EvalReport& r) { return eval_csv_header() + "\n" + eval_csv_row(r) + "\n"; }

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepPoint {
    std::string label;
    std::vector<std::pair<std::string, std::string>> overrides;
};

/// One point per non-empty line: whitespace-separated key=value pairs; an
/// optional label=... pair names the row. '#' starts a comment.
inline std::vector<SweepPoint> parse_sweep_spec(std::string_view text) {
    std::vector<SweepPoint> points;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        SweepPoint p;
        std::string auto_label;
        std::size_t pos = 0;
        while (pos < line.size()) {
            const auto tok_end = line.find_first_of(" \t", pos);
            const std::string_view tok = line.substr(pos, tok_end == std::string_view::npos ? std::string_view::npos : tok_end - pos);
            pos = tok_end == std::string_view::npos ? line.size() : line.find_first_not_of(" \t", tok_end);
            if (pos == std::string_view::npos) pos = line.size();
            const auto eq = tok.find('=');
            if (eq == std::string_view::npos || eq == 0)
                throw ConfigError("sweep line " + std::to_string(line_no) + ": expected key=value, got '" + std::string(tok) + "'");
            std::string key(tok.substr(0, eq)), value(tok.substr(eq + 1));
            if (key == "label") {
                p.label = value;
                continue;
            }
            auto_label += (auto_label.empty() ? "" : " ") + key + "=" + value;
            p.overrides.emplace_back(std::move(key), std::move(value));
        }
        if (p.label.empty()) p.label = auto_label;
        points.push_back(std::move(p));
    }
    if (points.empty()) throw ConfigError("sweep spec has no points");
    return points;
}

/// Built-in sweeps: "table2" (tile coding) and "table3" (evaluation-time
/// exploration rate).
inline std::vector<SweepPoint> sweep_preset(std::string_view name) {
    if (name == "table2") {
        return parse_sweep_spec(
            "label=T=2,res1 algorithm=qlearn tiles=2 resolution=res1\n"
            "label=T=2,res2 algorithm=qlearn tiles=2 resolution=res2\n"
            "label=T=2,res3 algorithm=qlearn tiles=2 resolution=res3\n"
            "label=T=4,res2 algorithm=qlearn tiles=4 resolution=res2\n"
            "label=T=8,res2 algorithm=qlearn tiles=8 resolution=res2\n");
    }
    if (name == "table3") {
        return parse_sweep_spec(
            "label=epsilon=0.00 algorithm=qlearn eval_epsilon=0\n"
            "label=epsilon=0.01 algorithm=qlearn eval_epsilon=0.01\n"
            "label=epsilon=0.05 algorithm=qlearn eval_epsilon=0.05\n");
    }
    throw ConfigError("unknown sweep preset '" + std::string(name) + "' (known: table2, table3)");
}

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

struct SweepRow {
    std::string label;
    EvalReport report;
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "label," + eval_csv_header() + "\n";
    for (const auto& r : rows) out += csv_field(r.label) + "," + eval_csv_row(r.report) + "\n";
    return out;
}

/// Trains and evaluates every point in order; point i writes to
/// out_dir/point_XX and the merged table goes to out_dir/sweep.csv.
inline std::vector<SweepRow> run_sweep(const WorkbenchConfig& base, const std::vector<SweepPoint>& points,
                                       const fs::path& out_dir, std::ostream* progress = nullptr) {
    std::vector<WorkbenchConfig> configs;
    for (const auto& p : points) configs.push_back(with_overrides(base, p.overrides));  // fail before any training

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& cfg = configs[i];
        char name[32];
        std::snprintf(name, sizeof name, "point_%02zu", i);
        if (progress) *progress << "[" << (i + 1) << "/" << points.size() << "] " << points[i].label << "\n";
        const auto trained = train(cfg, out_dir / name, progress, 0);
        const auto report = evaluate_agent(trained.agent, cfg.env, static_cast<std::size_t>(cfg.run.eval_trials),
                                           cfg.run.eval_seed, cfg.run.eval_epsilon);
        write_text_file(out_dir / name / "eval.csv", eval_report_csv(report));
        rows.push_back({points[i].label, report});
    }
    write_text_file(out_dir / "sweep.csv", sweep_csv(rows));
    return rows;
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

struct ReplayOutput {
    std::vector<TrajectoryStep> trajectory;
    std::vector<fs::path> frames;
};

/// One greedy episode; frames every `cadence` steps (frame_000000.ppm is the
/// initial state) and trajectory.csv.
inline ReplayOutput replay_episode(const AnyAgent& agent, const EnvConfig& env_cfg, std::uint64_t seed,
                                   const fs::path& out_dir, int cadence = 40, int max_steps = 1000) {
    if (cadence < 1) throw std::invalid_argument("replay: cadence must be >= 1");
    LunarLander env(env_cfg);
    Rng rng(seed);
    ReplayOutput out;
    out.trajectory =
        std::visit([&](const auto& a) { return rollout(a, env, seed, 0.0, rng, max_steps); }, agent);
    fs::create_directories(out_dir);
    const int steps = static_cast<int>(out.trajectory.size());
    for (int t = 0; t <= steps; t += cadence) {
        const LanderState& s = t < steps ? out.trajectory[static_cast<std::size_t>(t)].state
                                         : out.trajectory.back().next_state;
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06d.ppm", t);
        const auto bytes = render_frame(s, env_cfg);
        write_text_file(out_dir / name, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
        out.frames.push_back(out_dir / name);
    }
    write_text_file(out_dir / "trajectory.csv", trajectory_csv(out.trajectory));
    return out;
}

/// Q-surface of any agent over the default (p_x, p_y) grid.
inline QSurface agent_q_surface(const AnyAgent& agent, const LanderState& templ = {}, const GridSpec& grid = {}) {
    return std::visit([&](const auto& a) { return q_surface(a, templ, grid); }, agent);
}

}  // namespace lunarlab
