#pragma once

#include <array>
#include <concepts>
#include <optional>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "lunarlab/env.hpp"
#include "lunarlab/random.hpp"

namespace lunarlab {

struct Transition {
    LanderState x;
    Action a = Action::idle;
    double r = 0.0;
    LanderState x_next;
    bool done = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

using QValues = std::array<double, kActionCount>;

/// Index of the largest value; ties resolve to the lowest action code.
inline Action greedy_action(const QValues& q) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = i;
    return static_cast<Action>(best);
}

inline double max_value(const QValues& q) { return q[code(greedy_action(q))]; }

inline void check_epsilon(double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon must be in [0, 1], got " + std::to_string(epsilon));
}

/// epsilon-greedy distribution: the greedy action gets 1 - eps + eps/|U|,
/// every other action eps/|U|.
inline std::array<double, kActionCount> action_probabilities(const QValues& q, double epsilon) {
    check_epsilon(epsilon);
    const double share = epsilon / static_cast<double>(kActionCount);
    std::array<double, kActionCount> p;
    p.fill(share);
    p[code(greedy_action(q))] = 1.0 - epsilon + share;
    return p;
}

/// Draws from action_probabilities with a single uniform variate.
inline Action sample_action(const QValues& q, double epsilon, Rng& rng) {
    const auto p = action_probabilities(q, epsilon);
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < kActionCount; ++i) {
        acc += p[i];
        if (u < acc) return static_cast<Action>(i);
    }
    // u is within rounding of 1; fall back to the last action with mass.
    for (std::size_t i = kActionCount; i-- > 0;)
        if (p[i] > 0.0) return static_cast<Action>(i);
    return Action::idle;
}

/// Robbins-Monro step size c / (c + t).
inline double learning_rate(std::int64_t t, double c) {
    if (t < 0) throw std::invalid_argument("learning_rate: t must be >= 0");
    if (!(c > 0.0)) throw std::invalid_argument("learning_rate: c must be > 0");
    return c / (c + static_cast<double>(t));
}

/// Step size schedule whose clock advances once every `decay_period`
/// episodes: alpha(episode) = initial * c / (c + episode / decay_period).
struct LearningRateSchedule {
    double initial = 0.9;
    double c = 5.0;
    int decay_period = 1000;

    std::int64_t clock(std::int64_t episode) const { return episode / decay_period; }
    double at_episode(std::int64_t episode) const { return initial * learning_rate(clock(episode), c); }

    void validate() const {
        if (!(initial > 0.0 && initial <= 1.0)) throw std::invalid_argument("alpha0 must be in (0, 1]");
        if (!(c > 0.0)) throw std::invalid_argument("lr_c must be > 0");
        if (decay_period < 1) throw std::invalid_argument("lr_decay_period must be >= 1");
    }

    friend bool operator==(const LearningRateSchedule&, const LearningRateSchedule&) = default;
};

inline void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("gamma must be in (0, 1), got " + std::to_string(gamma));
}

/// sum_t gamma^t r_t, accumulated back to front.
inline double discounted_return(std::span<const double> rewards, double gamma) {
    double g = 0.0;
    for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) g = *it + gamma * g;
    return g;
}

/// Anything that can play episodes for an agent: the lander, or a small
/// test MDP that encodes its states as LanderState.
template <class E>
concept Environment = requires(E env, std::uint64_t seed, Action a) {
    { env.reset(seed) } -> std::convertible_to<LanderState>;
    { env.step(a) } -> std::convertible_to<StepResult>;
};

/// One row of a training curve.
struct EpisodeRecord {
    std::int64_t episode = 0;
    double score = 0.0;
    int steps = 0;
    StepEvent event = StepEvent::none;
    double epsilon = 0.0;
    std::optional<double> alpha;            ///< tabular step size
    std::optional<double> loss;             ///< mean training loss, deep agents
    std::optional<double> heuristic_alpha;  ///< shaping magnitude used this episode
};

}  // namespace lunarlab
