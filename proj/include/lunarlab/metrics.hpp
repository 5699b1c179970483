#pragma once

#include <concepts>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lunarlab/env.hpp"
#include "lunarlab/random.hpp"
#include "lunarlab/rlcore.hpp"

namespace lunarlab {

/// Score above which an episode counts as a success (strict).
inline constexpr double kSuccessScore = 200.0;

/// Anything with a state-action value function.
template <class A>
concept QAgent = requires(const A& agent, const LanderState& x) {
    { agent.q_values(x) } -> std::convertible_to<QValues>;
};

struct TrialRecord {
    double score = 0.0;            ///< cumulative episode reward
    double terminal_reward = 0.0;  ///< crash/landing component of the last step
    int fuel = 0;                  ///< engine firings
    int steps = 0;
    StepEvent event = StepEvent::none;

    bool success() const { return score > kSuccessScore; }
};

struct EvalReport {
    std::size_t trials = 0;
    double average_score = 0.0;
    double pos = 0.0;  ///< probability of success
    double average_fuel = 0.0;
    double average_terminal = 0.0;
};

inline double probability_of_success(std::span<const double> scores) {
    if (scores.empty()) throw std::invalid_argument("probability_of_success: no scores");
    std::size_t wins = 0;
    for (double s : scores)
        if (s > kSuccessScore) ++wins;
    return static_cast<double>(wins) / static_cast<double>(scores.size());
}

/// Number of engine firings: every non-idle action counts.
inline int fuel_consumption(std::span<const Action> actions) {
    int n = 0;
    for (Action a : actions)
        if (a != Action::idle) ++n;
    return n;
}

inline EvalReport summarize(std::span<const TrialRecord> trials) {
    if (trials.empty()) throw std::invalid_argument("summarize: no trials");
    EvalReport rep;
    rep.trials = trials.size();
    std::vector<double> scores;
    scores.reserve(trials.size());
    for (const auto& t : trials) {
        rep.average_score += t.score;
        rep.average_fuel += t.fuel;
        rep.average_terminal += t.terminal_reward;
        scores.push_back(t.score);
    }
    const auto n = static_cast<double>(trials.size());
    rep.average_score /= n;
    rep.average_fuel /= n;
    rep.average_terminal /= n;
    rep.pos = probability_of_success(scores);
    return rep;
}

struct TrajectoryStep {
    int t = 0;
    LanderState state;  ///< state the action was taken in
    Action action = Action::idle;
    double reward = 0.0;
    StepEvent event = StepEvent::none;
    LanderState next_state;
};

/// One episode under the epsilon-greedy policy of `agent` (greedy for 0).
template <QAgent Agent, Environment Env>
std::vector<TrajectoryStep> rollout(const Agent& agent, Env& env, std::uint64_t episode_seed, double epsilon,
                                    Rng& rng, int max_steps = 1'000'000) {
    std::vector<TrajectoryStep> out;
    LanderState x = env.reset(episode_seed);
    for (int t = 0; t < max_steps; ++t) {
        const Action a = epsilon > 0.0 ? sample_action(agent.q_values(x), epsilon, rng) : greedy_action(agent.q_values(x));
        const StepResult res = env.step(a);
        out.push_back({t, x, a, res.reward, res.event, res.next_state});
        x = res.next_state;
        if (res.done) break;
    }
    return out;
}

inline TrialRecord to_trial(std::span<const TrajectoryStep> traj) {
    TrialRecord rec;
    std::vector<Action> actions;
    actions.reserve(traj.size());
    for (const auto& s : traj) {
        rec.score += s.reward;
        actions.push_back(s.action);
    }
    rec.fuel = fuel_consumption(actions);
    rec.steps = static_cast<int>(traj.size());
    if (!traj.empty()) {
        rec.event = traj.back().event;
        rec.terminal_reward = terminal_reward(rec.event);
    }
    return rec;
}

/// Plays n_trials fresh episodes (trial i seeded from (seed, i)) and
/// aggregates the four metrics.
template <QAgent Agent, Environment Env>
EvalReport evaluate(const Agent& agent, Env& env, std::size_t n_trials, std::uint64_t seed, double epsilon = 0.0,
                    std::vector<TrialRecord>* trials_out = nullptr) {
    if (n_trials == 0) throw std::invalid_argument("evaluate: n_trials must be >= 1");
    check_epsilon(epsilon);
    Rng rng(splitmix64(seed ^ 0x5eed5eed5eed5eedULL));
    std::vector<TrialRecord> trials;
    trials.reserve(n_trials);
    for (std::size_t i = 0; i < n_trials; ++i) {
        const auto traj = rollout(agent, env, derive_seed(seed, i), epsilon, rng);
        trials.push_back(to_trial(traj));
    }
    if (trials_out) *trials_out = trials;
    return summarize(trials);
}

inline std::string eval_csv_header() { return "trials,average_fuel,average_terminal,average_score,pos"; }

inline std::string eval_csv_row(const EvalReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu,%.4f,%.4f,%.4f,%.4f", r.trials, r.average_fuel, r.average_terminal,
                  r.average_score, r.pos);
    return buf;
}

/// Human-readable table with the usual four columns.
inline std::string eval_table(const std::string& label, const EvalReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%-24s %14s %16s %14s %12s\n%-24s %14.2f %16.2f %14.2f %12.2f\n", "Algorithm",
                  "Avg fuel", "Avg terminal", "Avg score", "PoS", label.c_str(), r.average_fuel,
                  r.average_terminal, r.average_score, r.pos);
    return buf;
}

}  // namespace lunarlab
