#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lunarlab/random.hpp"

namespace lunarlab {

// ---------------------------------------------------------------------------
// Actions and observations
// ---------------------------------------------------------------------------

enum class Action : std::uint8_t {
    idle = 0,        ///< do nothing
    fire_left = 1,   ///< left orientation engine
    fire_main = 2,   ///< main (downward) engine
    fire_right = 3,  ///< right orientation engine
};

inline constexpr std::size_t kActionCount = 4;
inline constexpr std::array<Action, kActionCount> kAllActions{
    Action::idle, Action::fire_left, Action::fire_main, Action::fire_right};

constexpr int code(Action a) { return static_cast<int>(a); }

inline Action action_from_code(int c) {
    if (c < 0 || c >= static_cast<int>(kActionCount))
        throw std::invalid_argument("action code must be in {0,1,2,3}, got " + std::to_string(c));
    return static_cast<Action>(c);
}

inline constexpr std::size_t kStateDim = 8;

/// Observation of the lander. Positions are relative to the pad center; the
/// reference point is the midpoint between the two leg tips, so a level
/// lander standing on the ground has p_y == 0.
struct LanderState {
    double p_x = 0.0;
    double p_y = 0.0;
    double v_x = 0.0;
    double v_y = 0.0;
    double theta = 0.0;    ///< radians, 0 = upright, counter-clockwise positive
    double v_theta = 0.0;
    bool lg1 = false;      ///< left leg contact
    bool lg2 = false;      ///< right leg contact

    std::array<double, kStateDim> features() const {
        return {p_x, p_y, v_x, v_y, theta, v_theta, lg1 ? 1.0 : 0.0, lg2 ? 1.0 : 0.0};
    }

    static LanderState from_features(const std::array<double, kStateDim>& f) {
        return {f[0], f[1], f[2], f[3], f[4], f[5], f[6] != 0.0, f[7] != 0.0};
    }

    bool finite() const {
        return std::isfinite(p_x) && std::isfinite(p_y) && std::isfinite(v_x) &&
               std::isfinite(v_y) && std::isfinite(theta) && std::isfinite(v_theta);
    }

    friend bool operator==(const LanderState&, const LanderState&) = default;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Parameters of the simplified planar rigid-body model. Units are arbitrary
/// "world" units: the feasible box is [-1, 1] x [-1, 1], ground is y = 0.
struct EnvConfig {
    double gravity = 1.6;
    double main_thrust = 4.0;          ///< acceleration along the body up axis
    double side_thrust = 0.4;          ///< acceleration along the body right axis
    double side_torque = 4.0;          ///< angular acceleration
    double dt = 0.02;
    double pad_half_width = 0.2;
    double crash_speed_limit = 0.6;
    double crash_angle_limit = 0.5;
    double initial_speed_bound = 1.0;
    int max_steps = 1000;

    double start_height = 0.8;
    double start_x_range = 0.1;        ///< initial p_x drawn from [-range, range]
    double leg_half_span = 0.05;       ///< distance from reference point to each leg tip
    double ground_friction = 0.5;      ///< Coulomb coefficient on ground contact

    bool shaping_enabled = true;
    double shaping_distance_weight = 100.0;
    double shaping_velocity_weight = 100.0;
    double shaping_angle_weight = 100.0;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string("env.") + name + " must be > 0");
        };
        auto non_negative = [](double v, const char* name) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string("env.") + name + " must be >= 0");
        };
        positive(gravity, "gravity");
        positive(main_thrust, "main_thrust");
        positive(side_thrust, "side_thrust");
        positive(side_torque, "side_torque");
        positive(dt, "dt");
        positive(pad_half_width, "pad_half_width");
        positive(crash_speed_limit, "crash_speed_limit");
        positive(crash_angle_limit, "crash_angle_limit");
        positive(initial_speed_bound, "initial_speed_bound");
        if (max_steps <= 0) throw std::invalid_argument("env.max_steps must be > 0");
        if (!(start_height > 0.0 && start_height < 1.0))
            throw std::invalid_argument("env.start_height must be in (0, 1)");
        if (!(start_x_range >= 0.0 && start_x_range < 1.0))
            throw std::invalid_argument("env.start_x_range must be in [0, 1)");
        positive(leg_half_span, "leg_half_span");
        non_negative(ground_friction, "ground_friction");
        non_negative(shaping_distance_weight, "shaping_distance_weight");
        non_negative(shaping_velocity_weight, "shaping_velocity_weight");
        non_negative(shaping_angle_weight, "shaping_angle_weight");
    }

    friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

// ---------------------------------------------------------------------------
// Step results
// ---------------------------------------------------------------------------

enum class StepEvent : std::uint8_t { none, crashed, landed, landed_on_pad, out_of_bounds, timed_out };

inline std::string_view to_string(StepEvent e) {
    switch (e) {
        case StepEvent::none: return "none";
        case StepEvent::crashed: return "crashed";
        case StepEvent::landed: return "landed";
        case StepEvent::landed_on_pad: return "landed_on_pad";
        case StepEvent::out_of_bounds: return "out_of_bounds";
        case StepEvent::timed_out: return "timed_out";
    }
    return "unknown";
}

namespace reward {
inline constexpr double crash = -100.0;
inline constexpr double out_of_bounds = -100.0;
inline constexpr double landing = 100.0;
inline constexpr double pad_bonus = 200.0;
inline constexpr double leg_contact = 10.0;
inline constexpr double main_engine = -0.3;
}  // namespace reward

/// Terminal outcome reward of an episode ending in `e`: the crash/landing
/// component only (leg contacts and the pad bonus excluded), so it is <= 100.
inline double terminal_reward(StepEvent e) {
    switch (e) {
        case StepEvent::crashed: return reward::crash;
        case StepEvent::out_of_bounds: return reward::out_of_bounds;
        case StepEvent::landed:
        case StepEvent::landed_on_pad: return reward::landing;
        default: return 0.0;
    }
}

struct RewardBreakdown {
    double events = 0.0;   ///< crash / landing / pad / leg-contact rewards
    double engine = 0.0;   ///< main engine cost
    double shaping = 0.0;  ///< dense potential difference, 0 when disabled

    double total() const { return events + engine + shaping; }
};

struct StepResult {
    LanderState next_state;
    double reward = 0.0;
    bool done = false;
    StepEvent event = StepEvent::none;
    RewardBreakdown parts;
};

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

class LunarLander {
public:
    static constexpr int kRestSteps = 5;
    static constexpr double kRestThreshold = 1e-3;
    static constexpr double kLevelSnap = 0.01;   ///< |theta| below which a grounded lander is level
    static constexpr double kLevelRate = 5.0;    ///< 1/s, tipping rate on a single leg
    static constexpr double kContactEps = 1e-9;

    explicit LunarLander(EnvConfig config = {}) : config_(config) { config_.validate(); }

    const EnvConfig& config() const { return config_; }
    const LanderState& state() const { return state_; }
    int steps() const { return steps_; }
    bool done() const { return done_; }

    LanderState reset(std::uint64_t seed) {
        Rng rng(seed);
        LanderState s;
        s.p_x = uniform(rng, -config_.start_x_range, config_.start_x_range);
        s.p_y = config_.start_height;
        // Initial velocity points into the lower half-plane within 45 degrees
        // of straight down; its magnitude never exceeds the bound.
        const double speed = config_.initial_speed_bound * uniform01(rng);
        const double heading = -std::numbers::pi / 2 + uniform(rng, -std::numbers::pi / 4, std::numbers::pi / 4);
        s.v_x = speed * std::cos(heading);
        s.v_y = speed * std::sin(heading);
        return reset_to(s);
    }

    /// Starts an episode from an explicit state; used by tests and tools.
    LanderState reset_to(const LanderState& s) {
        if (!s.finite()) throw std::invalid_argument("reset_to: non-finite state");
        state_ = s;
        steps_ = 0;
        rest_count_ = 0;
        done_ = false;
        leg_rewarded_ = {s.lg1, s.lg2};
        return state_;
    }

    StepResult step(Action action) {
        if (done_) throw std::logic_error("step() called on a terminated episode; call reset() first");
        const int a = code(action);
        if (a < 0 || a >= static_cast<int>(kActionCount))
            throw std::invalid_argument("invalid action code " + std::to_string(a));

        const LanderState prev = state_;
        LanderState s = state_;
        StepResult out;

        const double sin_t = std::sin(s.theta);
        const double cos_t = std::cos(s.theta);
        double ax = 0.0;
        double ay = -config_.gravity;
        double alpha = 0.0;
        switch (action) {
            case Action::fire_main:
                ax += config_.main_thrust * -sin_t;
                ay += config_.main_thrust * cos_t;
                out.parts.engine = reward::main_engine;
                break;
            case Action::fire_left:
                ax += config_.side_thrust * cos_t;
                ay += config_.side_thrust * sin_t;
                alpha -= config_.side_torque;
                break;
            case Action::fire_right:
                ax -= config_.side_thrust * cos_t;
                ay -= config_.side_thrust * sin_t;
                alpha += config_.side_torque;
                break;
            case Action::idle: break;
        }

        // Semi-implicit Euler.
        s.v_x += ax * config_.dt;
        s.v_y += ay * config_.dt;
        s.v_theta += alpha * config_.dt;
        s.p_x += s.v_x * config_.dt;
        s.p_y += s.v_y * config_.dt;
        s.theta += s.v_theta * config_.dt;

        StepEvent event = StepEvent::none;
        const double w = config_.leg_half_span;
        const double lowest = s.p_y - w * std::abs(std::sin(s.theta));
        if (lowest <= kContactEps) {
            const double impact = std::hypot(s.v_x, s.v_y);
            if (impact > config_.crash_speed_limit || std::abs(s.theta) > config_.crash_angle_limit) {
                event = StepEvent::crashed;
            } else {
                resolve_contact(s);
            }
        }
        if (event == StepEvent::none) {
            const double left_y = s.p_y - w * std::sin(s.theta);
            const double right_y = s.p_y + w * std::sin(s.theta);
            s.lg1 = left_y <= kContactEps;
            s.lg2 = right_y <= kContactEps;
        } else {
            s.lg1 = s.lg2 = false;
        }

        if (event == StepEvent::none && (std::abs(s.p_x) > 1.0 || std::abs(s.p_y) > 1.0))
            event = StepEvent::out_of_bounds;

        if (event == StepEvent::none) {
            if (s.lg1 && !leg_rewarded_[0]) {
                out.parts.events += reward::leg_contact;
                leg_rewarded_[0] = true;
            }
            if (s.lg2 && !leg_rewarded_[1]) {
                out.parts.events += reward::leg_contact;
                leg_rewarded_[1] = true;
            }
            const double motion = std::hypot(s.v_x, s.v_y) + std::abs(s.v_theta);
            rest_count_ = (s.lg1 && s.lg2 && motion < kRestThreshold) ? rest_count_ + 1 : 0;
            if (rest_count_ >= kRestSteps) event = on_pad(s) ? StepEvent::landed_on_pad : StepEvent::landed;
        }

        switch (event) {
            case StepEvent::crashed: out.parts.events += reward::crash; break;
            case StepEvent::out_of_bounds: out.parts.events += reward::out_of_bounds; break;
            case StepEvent::landed: out.parts.events += reward::landing; break;
            case StepEvent::landed_on_pad: out.parts.events += reward::landing + reward::pad_bonus; break;
            default: break;
        }

        if (config_.shaping_enabled) out.parts.shaping = potential(s) - potential(prev);

        ++steps_;
        if (event == StepEvent::none && steps_ >= config_.max_steps) event = StepEvent::timed_out;

        state_ = s;
        done_ = event != StepEvent::none;
        out.next_state = s;
        out.event = event;
        out.done = done_;
        out.reward = out.parts.total();
        return out;
    }

    /// Dense shaping potential; its per-step difference rewards progress
    /// toward the pad, toward rest, and toward upright.
    double potential(const LanderState& s) const {
        return -(config_.shaping_distance_weight * std::hypot(s.p_x, s.p_y) +
                 config_.shaping_velocity_weight * std::hypot(s.v_x, s.v_y) +
                 config_.shaping_angle_weight * std::abs(s.theta));
    }

    bool on_pad(const LanderState& s) const {
        const double dx = config_.leg_half_span * std::cos(s.theta);
        return std::abs(s.p_x - dx) <= config_.pad_half_width && std::abs(s.p_x + dx) <= config_.pad_half_width;
    }

private:
    void resolve_contact(LanderState& s) const {
        const double w = config_.leg_half_span;
        s.p_y += -(s.p_y - w * std::abs(std::sin(s.theta)));  // lowest tip back onto the ground
        if (s.v_y < 0.0) s.v_y = 0.0;
        const double grip = config_.ground_friction * config_.gravity * config_.dt;
        s.v_x = std::abs(s.v_x) <= grip ? 0.0 : s.v_x - std::copysign(grip, s.v_x);
        if (std::abs(s.theta) <= kLevelSnap) {
            s.theta = 0.0;
            s.v_theta = 0.0;
            s.p_y = 0.0;
        } else {
            s.v_theta = -kLevelRate * s.theta;
        }
    }

    EnvConfig config_;
    LanderState state_{};
    int steps_ = 0;
    int rest_count_ = 0;
    bool done_ = true;
    std::array<bool, 2> leg_rewarded_{false, false};
};

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Frame geometry: world x in [-1, 1], y in [-0.25, 1] mapped to 512x320 px.
struct FrameLayout {
    static constexpr int width = 512;
    static constexpr int height = 320;
    static constexpr double scale = 256.0;  ///< pixels per world unit
    static constexpr double y_top = 1.0;

    static double world_x(int col) { return (col + 0.5) / scale - 1.0; }
    static double world_y(int row) { return y_top - (row + 0.5) / scale; }
};

namespace palette {
inline constexpr std::array<std::uint8_t, 3> sky{0, 0, 0};
inline constexpr std::array<std::uint8_t, 3> ground{96, 96, 96};
inline constexpr std::array<std::uint8_t, 3> pad{255, 255, 255};
inline constexpr std::array<std::uint8_t, 3> flag{230, 200, 0};
inline constexpr std::array<std::uint8_t, 3> body{128, 102, 230};
inline constexpr std::array<std::uint8_t, 3> leg{200, 200, 200};
}  // namespace palette

namespace detail {
inline double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}
}  // namespace detail

/// Binary PPM (P6) image of the scene. Byte-identical for identical input.
inline std::vector<std::uint8_t> render_frame(const LanderState& s, const EnvConfig& config = {}) {
    if (!s.finite()) throw std::invalid_argument("render_frame: non-finite state");
    using L = FrameLayout;
    const std::string header = "P6\n" + std::to_string(L::width) + " " + std::to_string(L::height) + "\n255\n";
    std::vector<std::uint8_t> img(header.begin(), header.end());
    const std::size_t origin = img.size();
    img.resize(origin + static_cast<std::size_t>(L::width * L::height * 3));

    const double ct = std::cos(s.theta), st = std::sin(s.theta);
    const double w = config.leg_half_span;
    // Body: rectangle in body frame, x in [-0.6w, 0.6w], y in [0.25w, 2.05w].
    const double bx_half = 0.6 * w, by_lo = 0.25 * w, by_hi = 2.05 * w;
    const double hip_y = 0.35 * w;
    const double px_size = 1.0 / L::scale;
    const double pad_flag_height = 0.12;

    for (int row = 0; row < L::height; ++row) {
        for (int col = 0; col < L::width; ++col) {
            const double x = L::world_x(col), y = L::world_y(row);
            auto color = y < 0.0 ? palette::ground : palette::sky;

            if (std::abs(y) <= px_size && std::abs(x) <= config.pad_half_width) color = palette::pad;
            for (double fx : {-config.pad_half_width, config.pad_half_width}) {
                if (std::abs(x - fx) <= 0.5 * px_size && y >= 0.0 && y <= pad_flag_height) color = palette::flag;
                if (y > pad_flag_height - 0.04 && y <= pad_flag_height && x - fx >= 0.0 && x - fx <= 0.05)
                    color = palette::flag;
            }

            // Point in body frame.
            const double rx = x - s.p_x, ry = y - s.p_y;
            const double lx = ct * rx + st * ry;
            const double ly = -st * rx + ct * ry;
            for (double side : {-1.0, 1.0}) {
                if (detail::segment_distance(lx, ly, side * 0.5 * w, hip_y, side * w, 0.0) <= 0.75 * px_size)
                    color = palette::leg;
            }
            if (std::abs(lx) <= bx_half && ly >= by_lo && ly <= by_hi) color = palette::body;

            const std::size_t at = origin + static_cast<std::size_t>((row * L::width + col) * 3);
            img[at] = color[0];
            img[at + 1] = color[1];
            img[at + 2] = color[2];
        }
    }
    return img;
}

}  // namespace lunarlab
