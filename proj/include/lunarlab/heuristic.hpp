#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lunarlab/env.hpp"

namespace lunarlab {

/// How the orientation term compares two states.
enum class OrientationMode : std::uint8_t {
    deviation,  ///< tilt of the new state from vertical
    change,     ///< rotation across the step
};

inline std::string_view to_string(OrientationMode m) {
    return m == OrientationMode::deviation ? "deviation" : "change";
}

/// Gains, mixing weights and decay schedule of the heuristic penalty.
struct HeuristicConfig {
    double k1 = 1.0;            ///< gain inside the near-pad ball
    double k2 = 0.1;            ///< gain outside it
    double alpha_weight = 1.0;  ///< weight of the squared distance term
    double beta_weight = 0.1;   ///< weight of the orientation term
    double eps1 = 0.25;         ///< radius of the near-pad ball
    double goal_x = 0.0;
    double goal_y = 0.0;
    double alpha0 = 100.0;      ///< initial bias magnitude
    double p = 0.5;             ///< decay multiplier
    int period = 10;            ///< episodes between decays
    OrientationMode orientation = OrientationMode::deviation;

    void validate() const {
        auto non_negative = [](double v, const char* name) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string("heuristic.") + name + " must be >= 0");
        };
        non_negative(k1, "k1");
        non_negative(k2, "k2");
        non_negative(alpha_weight, "alpha_weight");
        non_negative(beta_weight, "beta_weight");
        non_negative(eps1, "eps1");
        non_negative(alpha0, "alpha0");
        if (!std::isfinite(goal_x) || !std::isfinite(goal_y))
            throw std::invalid_argument("heuristic goal must be finite");
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("heuristic.p must be in (0, 1)");
        if (period < 1) throw std::invalid_argument("heuristic.period must be >= 1");
    }

    friend bool operator==(const HeuristicConfig&, const HeuristicConfig&) = default;
};

/// Angle wrapped into (-pi, pi].
inline double wrap_angle(double theta) {
    double r = std::remainder(theta, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

/// Squared distance of b's position to the goal.
inline double distance_term(const LanderState& b, double goal_x = 0.0, double goal_y = 0.0) {
    const double dx = b.p_x - goal_x, dy = b.p_y - goal_y;
    return dx * dx + dy * dy;
}

inline double orientation_term(const LanderState& a, const LanderState& b,
                               OrientationMode mode = OrientationMode::deviation) {
    if (mode == OrientationMode::change) return std::abs(wrap_angle(b.theta - a.theta));
    return std::abs(wrap_angle(b.theta));
}

inline bool near_goal(const LanderState& b, const HeuristicConfig& cfg) {
    return std::hypot(b.p_x - cfg.goal_x, b.p_y - cfg.goal_y) <= cfg.eps1;
}

/// Penalty for the transition s -> s_next: k1 * phi inside the ball around
/// the goal, k2 * phi outside, with phi = alpha * distance + beta * orientation.
inline double heuristic_value(const LanderState& s, const LanderState& s_next, const HeuristicConfig& cfg) {
    const double phi = cfg.alpha_weight * distance_term(s_next, cfg.goal_x, cfg.goal_y) +
                       cfg.beta_weight * orientation_term(s, s_next, cfg.orientation);
    return (near_goal(s_next, cfg) ? cfg.k1 : cfg.k2) * phi;
}

/// Heuristic configuration plus the current bias magnitude alpha_t.
/// alpha_t is unrelated to the tabular learning rate.
class HeuristicSchedule {
public:
    explicit HeuristicSchedule(HeuristicConfig config = {})
        : config_(config), alpha_(config.alpha0) {
        config_.validate();
    }

    const HeuristicConfig& config() const { return config_; }
    double alpha() const { return alpha_; }
    void set_alpha(double a) {
        if (!(a >= 0.0)) throw std::invalid_argument("heuristic alpha must be >= 0");
        alpha_ = a;
    }

    double h(const LanderState& s, const LanderState& s_next) const { return heuristic_value(s, s_next, config_); }

    double shaped_reward(double r, const LanderState& s, const LanderState& s_next) const {
        return r - alpha_ * h(s, s_next);
    }

    /// Called after finishing `iteration` episodes: multiplies alpha by p
    /// whenever iteration is a positive multiple of the period.
    void decay(std::int64_t iteration) {
        if (iteration < 0) throw std::invalid_argument("decay: iteration must be >= 0");
        if (iteration > 0 && iteration % config_.period == 0) alpha_ *= config_.p;
    }

    /// alpha after n episodes: alpha0 * p^floor(n / period).
    double alpha_after(std::int64_t n) const {
        return config_.alpha0 * std::pow(config_.p, static_cast<double>(n / config_.period));
    }

    /// Largest value h can take on the feasible box [-1, 1]^2 (any angle).
    double h_upper_bound() const {
        const double gx = std::abs(config_.goal_x) + 1.0, gy = std::abs(config_.goal_y) + 1.0;
        const double far = config_.alpha_weight * (gx * gx + gy * gy) + config_.beta_weight * std::numbers::pi;
        const double near = config_.alpha_weight * config_.eps1 * config_.eps1 + config_.beta_weight * std::numbers::pi;
        return std::max(config_.k2 * far, config_.k1 * near);
    }

    /// First episode count after which alpha_n * h stays below tol for every
    /// transition inside the feasible box.
    std::int64_t episodes_until_negligible(double tol) const {
        const double bound = h_upper_bound();
        std::int64_t decays = 0;
        double a = config_.alpha0;
        while (a * bound >= tol) {
            a *= config_.p;
            ++decays;
        }
        return decays * config_.period;
    }

private:
    HeuristicConfig config_;
    double alpha_;
};

}  // namespace lunarlab
