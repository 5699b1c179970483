#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lunarlab/heuristic.hpp"
#include "lunarlab/random.hpp"
#include "lunarlab/rlcore.hpp"
#include "lunarlab/tile_coding.hpp"

namespace lunarlab {

enum class TabularAlgorithm : std::uint8_t { q_learning, sarsa, mc_first_visit, mc_every_visit };

inline std::string_view to_string(TabularAlgorithm a) {
    switch (a) {
        case TabularAlgorithm::q_learning: return "qlearn";
        case TabularAlgorithm::sarsa: return "sarsa";
        case TabularAlgorithm::mc_first_visit: return "mc-first";
        case TabularAlgorithm::mc_every_visit: return "mc-every";
    }
    return "unknown";
}

struct TabularConfig {
    TabularAlgorithm algorithm = TabularAlgorithm::q_learning;
    TileCodingConfig tiles;
    double gamma = 0.9;
    double epsilon = 0.05;
    LearningRateSchedule lr;

    void validate() const {
        tiles.validate();
        check_gamma(gamma);
        check_epsilon(epsilon);
        lr.validate();
    }

    friend bool operator==(const TabularConfig&, const TabularConfig&) = default;
};

/// (x_t, a_t, r_t) as recorded during a rollout.
struct TraceStep {
    LanderState x;
    Action a = Action::idle;
    double r = 0.0;
};

using EpisodeTrace = std::vector<TraceStep>;

struct TrainOptions {
    std::int64_t episodes = 0;
    int max_steps = 1000;
    std::uint64_t seed = 0;
};

/// Q-learning, SARSA and Monte Carlo control over a tile coder.
class TabularAgent {
public:
    explicit TabularAgent(TabularConfig config = {}, std::uint64_t seed = 0,
                          std::optional<HeuristicConfig> heuristic = std::nullopt)
        : config_(config), coder_(config.tiles), rng_(seed) {
        config_.validate();
        if (heuristic) heuristic_.emplace(*heuristic);
    }

    const TabularConfig& config() const { return config_; }
    TileCoder& coder() { return coder_; }
    const TileCoder& coder() const { return coder_; }
    Rng& rng() { return rng_; }
    const Rng& rng() const { return rng_; }
    std::int64_t episodes_trained() const { return episode_; }
    void set_episodes_trained(std::int64_t n) { episode_ = n; }
    std::optional<HeuristicSchedule>& heuristic() { return heuristic_; }
    const std::optional<HeuristicSchedule>& heuristic() const { return heuristic_; }

    QValues q_values(const LanderState& x) const { return coder_.values(x); }
    double q(const LanderState& x, Action a) const { return coder_.get(x, a); }

    double current_alpha() const { return config_.lr.at_episode(episode_); }

    /// Q-learning step. The bootstrap is dropped when tr.done is set.
    double q_learning_update(const Transition& tr, double alpha) {
        check_update_inputs(tr.r, alpha);
        const double bootstrap = tr.done ? 0.0 : max_value(q_values(tr.x_next));
        const double delta = alpha * (tr.r + config_.gamma * bootstrap - q(tr.x, tr.a));
        coder_.update(tr.x, tr.a, delta);
        return delta;
    }

    /// On-policy step for the one-step-delayed tuple `prev`, bootstrapping
    /// from the action actually taken at x.
    double sarsa_update(const TraceStep& prev, const LanderState& x, Action a, double alpha) {
        check_update_inputs(prev.r, alpha);
        const double delta = alpha * (prev.r + config_.gamma * q(x, a) - q(prev.x, prev.a));
        coder_.update(prev.x, prev.a, delta);
        return delta;
    }

    /// Final SARSA update of an episode that terminated: terminal value is 0.
    double sarsa_terminal_update(const TraceStep& prev, double alpha) {
        check_update_inputs(prev.r, alpha);
        const double delta = alpha * (prev.r - q(prev.x, prev.a));
        coder_.update(prev.x, prev.a, delta);
        return delta;
    }

    /// First-visit Monte Carlo. Pairs are identified by (layer-1 cell, action).
    /// Returns the number of updates applied.
    std::size_t mc_first_visit(const EpisodeTrace& trace, double alpha) {
        if (trace.empty()) throw std::invalid_argument("mc_first_visit: empty episode trace");
        check_alpha(alpha);
        std::map<TileKey, std::size_t> first;
        for (std::size_t t = 0; t < trace.size(); ++t) first.try_emplace(pair_key(trace[t]), t);

        double ret = 0.0;
        std::size_t updates = 0;
        for (std::size_t t = trace.size(); t-- > 0;) {
            const TraceStep& st = trace[t];
            ret = config_.gamma * ret + st.r;
            if (first.at(pair_key(st)) != t) continue;
            coder_.update(st.x, st.a, alpha * (ret - q(st.x, st.a)));
            ++updates;
        }
        return updates;
    }

    /// Every-visit Monte Carlo: one update per distinct pair towards the mean
    /// of all returns observed from it. Returns the number of updates applied.
    std::size_t mc_every_visit(const EpisodeTrace& trace, double alpha) {
        if (trace.empty()) throw std::invalid_argument("mc_every_visit: empty episode trace");
        check_alpha(alpha);
        struct Visits {
            std::size_t first_t = 0;
            double sum = 0.0;
            std::size_t count = 0;
        };
        std::map<TileKey, Visits> returns;
        std::vector<TileKey> order;  // first-occurrence order
        for (std::size_t t = 0; t < trace.size(); ++t) {
            auto [it, inserted] = returns.try_emplace(pair_key(trace[t]), Visits{t, 0.0, 0});
            if (inserted) order.push_back(it->first);
        }
        double ret = 0.0;
        for (std::size_t t = trace.size(); t-- > 0;) {
            ret = config_.gamma * ret + trace[t].r;
            Visits& v = returns.at(pair_key(trace[t]));
            v.sum += ret;
            ++v.count;
        }
        for (const TileKey& key : order) {
            const Visits& v = returns.at(key);
            const TraceStep& st = trace[v.first_t];
            const double mean = v.sum / static_cast<double>(v.count);
            coder_.update(st.x, st.a, alpha * (mean - q(st.x, st.a)));
        }
        return order.size();
    }

    template <Environment Env>
    EpisodeRecord run_episode(Env& env, int max_steps, std::uint64_t episode_seed) {
        const double alpha = current_alpha();
        EpisodeRecord rec;
        rec.episode = episode_;
        rec.epsilon = config_.epsilon;
        rec.alpha = alpha;
        if (heuristic_) rec.heuristic_alpha = heuristic_->alpha();

        LanderState x = env.reset(episode_seed);
        std::optional<TraceStep> pending;  // SARSA's delayed tuple
        EpisodeTrace trace;
        bool terminated = false;
        for (int t = 0; t < max_steps; ++t) {
            const Action a = sample_action(q_values(x), config_.epsilon, rng_);
            const StepResult res = env.step(a);
            rec.score += res.reward;
            ++rec.steps;
            rec.event = res.event;
            const double r = heuristic_ ? heuristic_->shaped_reward(res.reward, x, res.next_state) : res.reward;

            switch (config_.algorithm) {
                case TabularAlgorithm::q_learning:
                    q_learning_update(Transition{x, a, r, res.next_state, res.done}, alpha);
                    break;
                case TabularAlgorithm::sarsa:
                    if (pending) sarsa_update(*pending, x, a, alpha);
                    pending = TraceStep{x, a, r};
                    break;
                case TabularAlgorithm::mc_first_visit:
                case TabularAlgorithm::mc_every_visit:
                    trace.push_back(TraceStep{x, a, r});
                    break;
            }
            x = res.next_state;
            if (res.done) {
                terminated = true;
                break;
            }
        }

        if (pending) {
            if (terminated) {
                sarsa_terminal_update(*pending, alpha);
            } else {
                const Action next = sample_action(q_values(x), config_.epsilon, rng_);
                sarsa_update(*pending, x, next, alpha);
            }
        }
        if (!trace.empty()) {
            if (config_.algorithm == TabularAlgorithm::mc_first_visit)
                mc_first_visit(trace, alpha);
            else
                mc_every_visit(trace, alpha);
        }

        ++episode_;
        if (heuristic_) heuristic_->decay(episode_);
        return rec;
    }

    /// Runs opts.episodes episodes; episode i is seeded from (opts.seed, i).
    template <Environment Env>
    std::vector<EpisodeRecord> train(Env& env, const TrainOptions& opts) {
        std::vector<EpisodeRecord> log;
        log.reserve(static_cast<std::size_t>(std::max<std::int64_t>(opts.episodes, 0)));
        for (std::int64_t i = 0; i < opts.episodes; ++i)
            log.push_back(run_episode(env, opts.max_steps, derive_seed(opts.seed, static_cast<std::uint64_t>(episode_))));
        return log;
    }

    TileKey pair_key(const TraceStep& st) const { return TileKey{coder_.encode(st.x, 1), st.a}; }

private:
    static void check_alpha(double alpha) {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
    }
    static void check_update_inputs(double r, double alpha) {
        if (!std::isfinite(r)) throw std::invalid_argument("non-finite reward");
        check_alpha(alpha);
    }

    TabularConfig config_;
    TileCoder coder_;
    Rng rng_;
    std::int64_t episode_ = 0;
    std::optional<HeuristicSchedule> heuristic_;
};

}  // namespace lunarlab
