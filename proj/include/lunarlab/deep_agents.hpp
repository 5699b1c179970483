#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lunarlab/heuristic.hpp"
#include "lunarlab/nn.hpp"
#include "lunarlab/random.hpp"
#include "lunarlab/replay.hpp"
#include "lunarlab/rlcore.hpp"

namespace lunarlab {

enum class TargetRule : std::uint8_t { dqn, double_dqn, clipped };

inline std::string_view to_string(TargetRule r) {
    switch (r) {
        case TargetRule::dqn: return "dqn";
        case TargetRule::double_dqn: return "ddqn";
        case TargetRule::clipped: return "cdqn";
    }
    return "unknown";
}

/// Which network picks the bootstrap action in Double DQN. `target_selects`
/// picks with theta' and evaluates with theta; `local_selects` is the
/// usual van Hasselt arrangement.
enum class DoubleSelection : std::uint8_t { target_selects, local_selects };

inline std::string_view to_string(DoubleSelection s) {
    return s == DoubleSelection::target_selects ? "target" : "local";
}

struct DeepConfig {
    TargetRule rule = TargetRule::dqn;
    DoubleSelection double_selection = DoubleSelection::target_selects;
    std::vector<int> hidden{256, 128, 64};
    double gamma = 0.99;
    double tau = 1e-3;
    AdamConfig adam;
    int batch_size = 64;
    int buffer_capacity = 10'000;
    int learn_every = 4;           ///< env steps between learning steps
    int min_replay = 0;            ///< fill required before learning; 0 means one batch
    double epsilon_start = 1.0;
    double epsilon_end = 0.01;
    double epsilon_decay = 0.995;  ///< multiplicative, per episode

    std::vector<int> architecture() const {
        std::vector<int> sizes{static_cast<int>(kStateDim)};
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(static_cast<int>(kActionCount));
        return sizes;
    }

    int warmup() const { return min_replay > 0 ? min_replay : batch_size; }

    void validate() const {
        check_gamma(gamma);
        if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in [0, 1]");
        if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
        if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw std::invalid_argument("adam_beta1 must be in [0, 1)");
        if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw std::invalid_argument("adam_beta2 must be in [0, 1)");
        if (!(adam.epsilon > 0.0)) throw std::invalid_argument("adam_epsilon must be > 0");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (buffer_capacity < 1) throw std::invalid_argument("buffer_capacity must be >= 1");
        if (learn_every < 1) throw std::invalid_argument("learn_every must be >= 1");
        if (min_replay < 0) throw std::invalid_argument("min_replay must be >= 0");
        for (int h : hidden)
            if (h < 1) throw std::invalid_argument("hidden layer widths must be >= 1");
        check_epsilon(epsilon_start);
        check_epsilon(epsilon_end);
        if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) throw std::invalid_argument("epsilon_decay must be in (0, 1]");
    }

    friend bool operator==(const DeepConfig&, const DeepConfig&) = default;
};

// ---------------------------------------------------------------------------
// Target rules
// ---------------------------------------------------------------------------

inline QValues to_qvalues(const Vector& v) {
    if (v.size() != static_cast<Eigen::Index>(kActionCount))
        throw std::invalid_argument("network output must have one entry per action");
    return {v[0], v[1], v[2], v[3]};
}

inline QValues evaluate(const ValueNetwork& net, const LanderState& x) {
    const auto f = x.features();
    return to_qvalues(net.forward(f));
}

/// Bootstrapped target from the next-state values of both networks.
/// `r` may already carry heuristic shaping.
inline double target_from_values(TargetRule rule, DoubleSelection selection, double r, bool done, double gamma,
                                 const QValues& local_next, const QValues& target_next) {
    const double live = done ? 0.0 : 1.0;
    switch (rule) {
        case TargetRule::dqn:
            return r + gamma * max_value(target_next) * live;
        case TargetRule::double_dqn: {
            if (selection == DoubleSelection::target_selects) {
                const Action best = greedy_action(target_next);
                return r + gamma * local_next[code(best)] * live;
            }
            const Action best = greedy_action(local_next);
            return r + gamma * target_next[code(best)] * live;
        }
        case TargetRule::clipped:
            return r + std::min(gamma * max_value(target_next) * live, gamma * max_value(local_next) * live);
    }
    throw std::invalid_argument("unknown target rule");
}

/// r + gamma * max_a' Q(x', a'; theta') * (1 - o)
inline double dqn_target(const Transition& tr, const ValueNetwork& local, const ValueNetwork& target, double gamma) {
    return target_from_values(TargetRule::dqn, DoubleSelection::target_selects, tr.r, tr.done, gamma,
                              evaluate(local, tr.x_next), evaluate(target, tr.x_next));
}

/// Action chosen by one network at x', valued by the other.
inline double double_dqn_target(const Transition& tr, const ValueNetwork& local, const ValueNetwork& target,
                                double gamma, DoubleSelection selection = DoubleSelection::target_selects) {
    return target_from_values(TargetRule::double_dqn, selection, tr.r, tr.done, gamma, evaluate(local, tr.x_next),
                              evaluate(target, tr.x_next));
}

/// r + min over {theta, theta'} of gamma * max_a' Q(x', a'; w) * (1 - o)
inline double clipped_target(const Transition& tr, const ValueNetwork& local, const ValueNetwork& target,
                             double gamma) {
    return target_from_values(TargetRule::clipped, DoubleSelection::target_selects, tr.r, tr.done, gamma,
                              evaluate(local, tr.x_next), evaluate(target, tr.x_next));
}

// ---------------------------------------------------------------------------
// Agent
// ---------------------------------------------------------------------------

struct DeepTrainOptions {
    std::int64_t episodes = 0;
    int max_steps = 1000;
    std::uint64_t seed = 0;
    double early_stop_threshold = std::numeric_limits<double>::infinity();  ///< disabled by default
    int early_stop_window = 100;
};

/// DQN / Double DQN / Clipped Double Q-learning with experience replay and
/// a soft-updated target network. With a heuristic attached, rewards are
/// replaced by r - alpha_t * h(x, x') when targets are formed.
class DeepAgent {
public:
    explicit DeepAgent(DeepConfig config = {}, std::uint64_t seed = 0,
                       std::optional<HeuristicConfig> heuristic = std::nullopt)
        : config_(std::move(config)), rng_(seed) {
        config_.validate();
        const auto arch = config_.architecture();
        local_ = ValueNetwork::random(arch, rng_);
        target_ = local_;
        adam_ = AdamState(local_, config_.adam);
        replay_ = ReplayBuffer(static_cast<std::size_t>(config_.buffer_capacity));
        epsilon_ = config_.epsilon_start;
        if (heuristic) heuristic_.emplace(*heuristic);
    }

    const DeepConfig& config() const { return config_; }
    ValueNetwork& local() { return local_; }
    const ValueNetwork& local() const { return local_; }
    ValueNetwork& target() { return target_; }
    const ValueNetwork& target() const { return target_; }
    AdamState& optimizer() { return adam_; }
    const AdamState& optimizer() const { return adam_; }
    ReplayBuffer& replay() { return replay_; }
    Rng& rng() { return rng_; }
    const Rng& rng() const { return rng_; }
    double epsilon() const { return epsilon_; }
    void set_epsilon(double e) {
        check_epsilon(e);
        epsilon_ = e;
    }
    std::int64_t episodes_trained() const { return episode_; }
    void set_episodes_trained(std::int64_t n) { episode_ = n; }
    std::optional<HeuristicSchedule>& heuristic() { return heuristic_; }
    const std::optional<HeuristicSchedule>& heuristic() const { return heuristic_; }

    QValues q_values(const LanderState& x) const { return evaluate(local_, x); }

    /// Target for one transition under this agent's rule, shaped if a
    /// heuristic is attached.
    double target_for(const Transition& tr) const {
        const double r = heuristic_ ? heuristic_->shaped_reward(tr.r, tr.x, tr.x_next) : tr.r;
        return target_from_values(config_.rule, config_.double_selection, r, tr.done, config_.gamma,
                                  evaluate(local_, tr.x_next), evaluate(target_, tr.x_next));
    }

    /// One optimizer step on theta followed by one soft update of theta'.
    double train_step(const std::vector<Transition>& batch) {
        if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
        const auto n = static_cast<Eigen::Index>(batch.size());
        Batch b;
        b.inputs.resize(static_cast<Eigen::Index>(kStateDim), n);
        Matrix next(static_cast<Eigen::Index>(kStateDim), n);
        b.actions.resize(batch.size());
        b.targets.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const Transition& tr = batch[static_cast<std::size_t>(j)];
            const auto f = tr.x.features();
            const auto g = tr.x_next.features();
            for (std::size_t d = 0; d < kStateDim; ++d) {
                b.inputs(static_cast<Eigen::Index>(d), j) = f[d];
                next(static_cast<Eigen::Index>(d), j) = g[d];
            }
            b.actions[static_cast<std::size_t>(j)] = code(tr.a);
        }

        const Matrix target_next = target_.forward_batch(next);
        Matrix local_next;
        if (config_.rule != TargetRule::dqn) local_next = local_.forward_batch(next);
        for (Eigen::Index j = 0; j < n; ++j) {
            const Transition& tr = batch[static_cast<std::size_t>(j)];
            const double r = heuristic_ ? heuristic_->shaped_reward(tr.r, tr.x, tr.x_next) : tr.r;
            const QValues tq = to_qvalues(target_next.col(j));
            const QValues lq = config_.rule != TargetRule::dqn ? to_qvalues(local_next.col(j)) : tq;
            b.targets[j] = target_from_values(config_.rule, config_.double_selection, r, tr.done, config_.gamma, lq, tq);
        }

        auto [loss, grads] = loss_and_gradients(local_, b);
        adam_step(local_, grads, adam_);
        soft_update(local_, target_, config_.tau);
        return loss;
    }

    template <Environment Env>
    EpisodeRecord run_episode(Env& env, int max_steps, std::uint64_t episode_seed) {
        EpisodeRecord rec;
        rec.episode = episode_;
        rec.epsilon = epsilon_;
        if (heuristic_) rec.heuristic_alpha = heuristic_->alpha();

        double loss_sum = 0.0;
        int learn_steps = 0;
        LanderState x = env.reset(episode_seed);
        for (int t = 0; t < max_steps; ++t) {
            const Action a = sample_action(q_values(x), epsilon_, rng_);
            const StepResult res = env.step(a);
            rec.score += res.reward;
            ++rec.steps;
            rec.event = res.event;
            replay_.push(Transition{x, a, res.reward, res.next_state, res.done});
            ++env_steps_;
            if (env_steps_ % config_.learn_every == 0 &&
                replay_.size() >= static_cast<std::size_t>(config_.warmup())) {
                loss_sum += train_step(replay_.sample(static_cast<std::size_t>(config_.batch_size), rng_));
                ++learn_steps;
            }
            x = res.next_state;
            if (res.done) break;
        }
        if (learn_steps > 0) rec.loss = loss_sum / learn_steps;

        epsilon_ = std::max(config_.epsilon_end, epsilon_ * config_.epsilon_decay);
        ++episode_;
        if (heuristic_) heuristic_->decay(episode_);
        return rec;
    }

    /// Episode loop with early stopping once the trailing-window mean score
    /// exceeds the threshold.
    template <Environment Env>
    std::vector<EpisodeRecord> train(Env& env, const DeepTrainOptions& opts) {
        std::vector<EpisodeRecord> log;
        const auto w = static_cast<std::size_t>(std::max(opts.early_stop_window, 1));
        for (std::int64_t i = 0; i < opts.episodes; ++i) {
            log.push_back(run_episode(env, opts.max_steps, derive_seed(opts.seed, static_cast<std::uint64_t>(episode_))));
            if (log.size() < w) continue;
            double sum = 0.0;
            for (std::size_t k = log.size() - w; k < log.size(); ++k) sum += log[k].score;
            if (sum / static_cast<double>(w) > opts.early_stop_threshold) break;
        }
        return log;
    }

    std::int64_t env_steps() const { return env_steps_; }
    void set_env_steps(std::int64_t n) { env_steps_ = n; }

private:
    DeepConfig config_;
    Rng rng_;
    ValueNetwork local_;
    ValueNetwork target_;
    AdamState adam_;
    ReplayBuffer replay_;
    double epsilon_ = 1.0;
    std::int64_t episode_ = 0;
    std::int64_t env_steps_ = 0;
    std::optional<HeuristicSchedule> heuristic_;
};

}  // namespace lunarlab
