// Command-line front end: train, eval, sweep, replay, qsurface.

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "lunarlab/lunarlab.hpp"

namespace fs = std::filesystem;
using namespace lunarlab;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::string> algorithm;
    std::optional<std::string> heuristic;
    std::optional<std::int64_t> episodes;
    std::optional<int> batch;
    std::optional<double> epsilon;
    std::optional<int> tiles;
    std::optional<std::string> resolution;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "Config file (key = value with [section] headers)");
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--out", out, "Output directory");
        cmd->add_option("--algorithm", algorithm, "qlearn|sarsa|mc-first|mc-every|dqn|ddqn|cdqn");
        cmd->add_option("--heuristic", heuristic, "on|off");
        cmd->add_option("--episodes", episodes, "Training episodes");
        cmd->add_option("--batch", batch, "Minibatch size (deep agents)");
        cmd->add_option("--epsilon", epsilon, "Exploration rate (tabular agents)");
        cmd->add_option("--tiles", tiles, "Tile-coding layers");
        cmd->add_option("--resolution", resolution, "res1|res2|res3 or 8 comma-separated numbers");
    }

    WorkbenchConfig resolve() const {
        WorkbenchConfig cfg = config.empty() ? default_config() : load_config(config, default_config());
        std::vector<std::pair<std::string, std::string>> o;
        if (seed) o.emplace_back("run.seed", std::to_string(*seed));
        if (algorithm) o.emplace_back("agent.algorithm", *algorithm);
        if (heuristic) o.emplace_back("heuristic.enabled", *heuristic);
        if (episodes) o.emplace_back("run.episodes", std::to_string(*episodes));
        if (batch) o.emplace_back("agent.batch_size", std::to_string(*batch));
        if (epsilon) o.emplace_back("agent.epsilon", format_double(*epsilon));
        if (tiles) o.emplace_back("agent.tiles", std::to_string(*tiles));
        if (resolution) o.emplace_back("agent.resolution", *resolution);
        return with_overrides(std::move(cfg), o);
    }
};

std::string run_name(const WorkbenchConfig& cfg) {
    return std::string(to_string(cfg.algorithm)) + (cfg.heuristic_enabled ? "-heuristic" : "") + "-s" +
           std::to_string(cfg.run.seed);
}

int cmd_train(const CommonFlags& flags) {
    const WorkbenchConfig cfg = flags.resolve();
    const fs::path dir = flags.out.empty() ? fs::path(cfg.run.output_dir) / run_name(cfg) : fs::path(flags.out);
    std::cout << "training " << to_string(cfg.algorithm) << (cfg.heuristic_enabled ? " (heuristic)" : "") << " for "
              << cfg.run.episodes << " episodes -> " << dir.string() << "\n";
    const auto result = train(cfg, dir, &std::cout);
    std::cout << "finished " << result.log.size() << " episodes; trailing-" << cfg.run.early_stop_window
              << " average " << format_double(std::round(trailing_mean(result.log, static_cast<std::size_t>(cfg.run.early_stop_window)) * 100) / 100)
              << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, std::optional<int> trials, std::optional<std::uint64_t> seed,
             std::optional<double> epsilon, const std::string& out) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const std::size_t n = static_cast<std::size_t>(trials.value_or(ck.config.run.eval_trials));
    const std::uint64_t s = seed.value_or(ck.config.run.eval_seed);
    const double eps = epsilon.value_or(ck.config.run.eval_epsilon);
    const auto report = evaluate_agent(ck.agent, ck.config.env, n, s, eps);
    std::cout << eval_table(std::string(to_string(ck.config.algorithm)) + (ck.config.heuristic_enabled ? "+h" : ""),
                            report);
    const fs::path dir = out.empty() ? fs::path(checkpoint).parent_path() : fs::path(out);
    write_text_file(dir / "eval.csv", eval_report_csv(report));
    std::cout << "wrote " << (dir / "eval.csv").string() << "\n";
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& spec, const std::string& preset) {
    if (spec.empty() == preset.empty()) throw ConfigError("sweep needs exactly one of --spec or --preset");
    const WorkbenchConfig cfg = flags.resolve();
    const auto points = preset.empty() ? parse_sweep_spec(read_text_file(spec)) : sweep_preset(preset);
    const fs::path dir = flags.out.empty() ? fs::path(cfg.run.output_dir) / "sweep" : fs::path(flags.out);
    write_text_file(dir / "config.ini", render_config(cfg));
    const auto rows = run_sweep(cfg, points, dir, &std::cout);
    std::cout << sweep_csv(rows) << "wrote " << (dir / "sweep.csv").string() << "\n";
    return 0;
}

int cmd_replay(const std::string& checkpoint, std::uint64_t seed, const std::string& out, int cadence) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const fs::path dir = out.empty() ? fs::path(checkpoint).parent_path() / "replay" : fs::path(out);
    const auto res = replay_episode(ck.agent, ck.config.env, seed, dir, cadence, ck.config.run.max_steps);
    const auto trial = to_trial(res.trajectory);
    std::cout << res.trajectory.size() << " steps, score " << format_double(std::round(trial.score * 100) / 100)
              << ", event " << to_string(trial.event) << "; " << res.frames.size() << " frames in " << dir.string()
              << "\n";
    return 0;
}

int cmd_qsurface(const std::string& checkpoint, const std::string& out) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const fs::path dir = out.empty() ? fs::path(checkpoint).parent_path() / "qsurface" : fs::path(out);
    const auto surface = agent_q_surface(ck.agent);
    const auto paths = write_q_surface(surface, dir);
    const auto peak = surface.peak();
    std::cout << "wrote " << paths.size() << " files to " << dir.string() << "; peak Q "
              << format_double(peak.value) << " at (" << format_double(peak.x) << ", " << format_double(peak.y)
              << ") action " << code(peak.action) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lunar lander reinforcement-learning workbench"};
    app.require_subcommand(1);

    CommonFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "Train an agent and write curve, config and checkpoints");
    train_flags.attach(train_cmd);

    std::string eval_ckpt, eval_out;
    std::optional<int> eval_trials;
    std::optional<std::uint64_t> eval_seed;
    std::optional<double> eval_eps;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
    eval_cmd->add_option("--trials", eval_trials, "Number of evaluation episodes");
    eval_cmd->add_option("--seed", eval_seed, "Evaluation seed");
    eval_cmd->add_option("--epsilon", eval_eps, "Exploration rate during evaluation");
    eval_cmd->add_option("--out", eval_out, "Output directory (default: next to the checkpoint)");

    CommonFlags sweep_flags;
    std::string sweep_spec, sweep_preset_name;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate a list of configurations");
    sweep_flags.attach(sweep_cmd);
    sweep_cmd->add_option("--spec", sweep_spec, "Sweep file: one line of key=value overrides per point");
    sweep_cmd->add_option("--preset", sweep_preset_name, "Built-in sweep: table2 or table3");

    std::string replay_ckpt, replay_out;
    std::uint64_t replay_seed = 0;
    int replay_cadence = 40;
    auto* replay_cmd = app.add_subcommand("replay", "Roll out one greedy episode and render frames");
    replay_cmd->add_option("--checkpoint", replay_ckpt, "Checkpoint file")->required();
    replay_cmd->add_option("--seed", replay_seed, "Episode seed");
    replay_cmd->add_option("--out", replay_out, "Output directory");
    replay_cmd->add_option("--every", replay_cadence, "Steps between frames")->check(CLI::PositiveNumber);

    std::string qs_ckpt, qs_out;
    auto* qs_cmd = app.add_subcommand("qsurface", "Export Q over the (x, y) grid");
    qs_cmd->add_option("--checkpoint", qs_ckpt, "Checkpoint file")->required();
    qs_cmd->add_option("--out", qs_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) return cmd_train(train_flags);
        if (*eval_cmd) return cmd_eval(eval_ckpt, eval_trials, eval_seed, eval_eps, eval_out);
        if (*sweep_cmd) return cmd_sweep(sweep_flags, sweep_spec, sweep_preset_name);
        if (*replay_cmd) return cmd_replay(replay_ckpt, replay_seed, replay_out, replay_cadence);
        if (*qs_cmd) return cmd_qsurface(qs_ckpt, qs_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
