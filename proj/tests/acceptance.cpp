// Acceptance checks, one PASS/FAIL line per criterion.
//
//   lunarlab_acceptance fast   criteria 1-8 and 10
//   lunarlab_acceptance 9a|9b|9c
//   lunarlab_acceptance all
//
// Exit status is non-zero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lunarlab/lunarlab.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace lunarlab;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

LanderState random_state(Rng& rng, double vel = 1.0) {
    return LanderState{uniform(rng, -1, 1),     uniform(rng, -1, 1),     uniform(rng, -vel, vel),
                       uniform(rng, -vel, vel), uniform(rng, -3.1, 3.1), uniform(rng, -vel, vel),
                       uniform01(rng) < 0.5,    uniform01(rng) < 0.5};
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness
// ---------------------------------------------------------------------------

double oracle_loss(const ValueNetwork& net, const Batch& b) {
    double sum = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
        std::vector<double> x(static_cast<std::size_t>(b.inputs.rows()));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = b.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const double e = oracle::forward_loops(net, x)[static_cast<std::size_t>(b.actions[j])] - b.targets[static_cast<Eigen::Index>(j)];
        sum += e * e;
    }
    return sum / static_cast<double>(b.size());
}

Outcome criterion1() {
    Outcome out;
    const auto t0 = Clock::now();
    Rng rng(2024);
    std::size_t total = 0, agree = 0;
    const double h = 1e-5;
    for (int trial = 0; trial < 50; ++trial) {
        ValueNetwork net = ValueNetwork::random(std::array<int, 3>{8, 8, 4}, rng);
        Batch b;
        b.inputs.resize(8, 16);
        b.targets.resize(16);
        for (Eigen::Index j = 0; j < 16; ++j) {
            for (Eigen::Index i = 0; i < 8; ++i) b.inputs(i, j) = uniform(rng, -1, 1);
            b.actions.push_back(static_cast<int>(uniform_index(rng, 4)));
            b.targets[j] = uniform(rng, -2, 2);
        }
        const auto analytic = loss_and_gradients(net, b).grads;
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            auto check = [&](double& param, double g) {
                const double keep = param;
                param = keep + h;
                const double up = oracle_loss(net, b);
                param = keep - h;
                const double down = oracle_loss(net, b);
                param = keep;
                const double numeric = (up - down) / (2 * h);
                const double scale = std::max(std::abs(g), std::abs(numeric));
                ++total;
                if (scale < 1e-8 || std::abs(g - numeric) / scale < 1e-4) ++agree;
            };
            auto& layer = net.layers()[l];
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) check(layer.weight(r, c), analytic[l].weight(r, c));
            for (Eigen::Index r = 0; r < layer.bias.size(); ++r) check(layer.bias[r], analytic[l].bias[r]);
        }
    }
    const double frac = static_cast<double>(agree) / static_cast<double>(total);
    const double secs = seconds_since(t0);
    out.detail = fmt("%zu/%zu entries within 1e-4 (%.4f), %.2fs", agree, total, frac, secs);
    out.require(frac >= 0.99, "agreement below 99%");
    out.require(secs < 5.0, "over 5 s");
    return out;
}

// ---------------------------------------------------------------------------
// 2. Tile-coder algebra
// ---------------------------------------------------------------------------

std::int64_t round_half_away(double v) {
    const double a = std::floor(std::abs(v) + 0.5);
    return static_cast<std::int64_t>(v < 0 ? -a : a);
}

Outcome criterion2() {
    Outcome out;
    const auto t0 = Clock::now();
    Rng rng(77);
    int read_fail = 0, encode_fail = 0, translate_fail = 0;
    for (int i = 0; i < 10000; ++i) {
        TileCodingConfig cfg;
        cfg.layers = 1 + static_cast<int>(uniform_index(rng, 8));
        for (std::size_t j = 0; j < 6; ++j) cfg.resolution[j] = uniform(rng, 0.1, 1.5);
        const bool uniform_weights = i % 2 == 0;
        if (!uniform_weights) {
            double total = 0.0;
            for (int l = 0; l < cfg.layers; ++l) total += cfg.weights.emplace_back(uniform(rng, 0.05, 1.0));
            for (double& w : cfg.weights) w /= total;
        }
        TileCoder coder(cfg);
        const LanderState x = random_state(rng, 5.0);
        const auto u = static_cast<Action>(uniform_index(rng, 4));
        const double delta = uniform(rng, -50, 50);

        coder.update(x, u, delta);
        double sum_sq = 0.0;
        for (double w : coder.weights()) sum_sq += w * w;
        const double expect = uniform_weights ? delta / cfg.layers : delta * sum_sq;
        if (std::abs(coder.get(x, u) - expect) > 1e-12 * std::max(1.0, std::abs(delta))) ++read_fail;
        for (Action other : kAllActions)
            if (other != u && coder.get(x, other) != 0.0) ++read_fail;

        const auto f = x.features();
        const int layer = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cfg.layers)));
        const auto idx = coder.encode(x, layer);
        for (std::size_t j = 0; j < 6; ++j) {
            const double r = cfg.resolution[j];
            const double c = f[j] - static_cast<double>(layer - 1) * r / cfg.layers;
            if (idx[j] != round_half_away(c / r)) ++encode_fail;
        }
        if (idx[6] != (x.lg1 ? 1 : 0) || idx[7] != (x.lg2 ? 1 : 0)) ++encode_fail;

        // Shifting one real component by whole cells shifts that index only.
        const std::size_t j = uniform_index(rng, 6);
        const auto steps = static_cast<int>(uniform_index(rng, 5)) - 2;
        auto g = f;
        g[j] += steps * cfg.resolution[j];
        const auto moved = coder.encode(LanderState::from_features(g), layer);
        for (std::size_t d = 0; d < 8; ++d) {
            const std::int64_t want = idx[d] + (d == j ? steps : 0);
            // Landing exactly on a rounding tie after the shift is measure-zero but not impossible.
            if (moved[d] != want && !(d == j && std::abs(std::abs(std::fmod(g[d] / cfg.resolution[d], 1.0)) - 0.5) < 1e-9))
                ++translate_fail;
        }
    }
    const double secs = seconds_since(t0);
    out.detail = fmt("10000 triples: %d read mismatches, %d encode mismatches, %d translation mismatches, %.2fs",
                     read_fail, encode_fail, translate_fail, secs);
    out.require(read_fail == 0, "read-after-write");
    out.require(encode_fail == 0, "encode");
    out.require(translate_fail == 0, "translation");
    out.require(secs < 1.0, "over 1 s");
    return out;
}

// ---------------------------------------------------------------------------
// 3. Target-rule oracle
// ---------------------------------------------------------------------------

Outcome criterion3() {
    Outcome out;
    const auto t0 = Clock::now();
    Rng rng(31337);
    int mismatch = 0, order = 0;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int hidden = 2 + static_cast<int>(uniform_index(rng, 6));
        const auto local = ValueNetwork::random(std::array<int, 3>{8, hidden, 4}, rng);
        auto target = ValueNetwork::random(std::array<int, 3>{8, hidden, 4}, rng);
        if (i % 10 == 0) target = local;
        Transition tr;
        tr.x = random_state(rng);
        tr.x_next = random_state(rng);
        tr.a = static_cast<Action>(uniform_index(rng, 4));
        tr.r = uniform(rng, -100, 100);
        tr.done = uniform01(rng) < 0.2;
        const double gamma = uniform(rng, 0.01, 0.999);
        const auto ref = oracle::brute_targets(tr.r, tr.done, gamma, local, target, tr.x_next);
        const double got[4] = {dqn_target(tr, local, target, gamma), double_dqn_target(tr, local, target, gamma),
                               double_dqn_target(tr, local, target, gamma, DoubleSelection::local_selects),
                               clipped_target(tr, local, target, gamma)};
        const double want[4] = {ref.dqn, ref.double_target_selects, ref.double_local_selects, ref.clipped};
        for (int k = 0; k < 4; ++k) {
            const double err = std::abs(got[k] - want[k]);
            worst = std::max(worst, err);
            if (err > 1e-12) ++mismatch;
        }
        if (got[3] > got[0]) ++order;
    }
    const double secs = seconds_since(t0);
    out.detail = fmt("1000 transitions: worst |diff| %.2e, %d mismatches, %d clipped>dqn, %.2fs", worst, mismatch, order, secs);
    out.require(mismatch == 0, "target mismatch");
    out.require(order == 0, "clipped exceeded dqn");
    out.require(secs < 1.0, "over 1 s");
    return out;
}

// ---------------------------------------------------------------------------
// 4. Tabular convergence on the chain
// ---------------------------------------------------------------------------

Outcome criterion4() {
    Outcome out;
    const auto t0 = Clock::now();
    constexpr double kGamma = 0.9, kEps = 0.3;
    struct Case {
        TabularAlgorithm alg;
        const char* name;
        double eps_fixed_point;
        double tol;
    };
    const Case cases[] = {{TabularAlgorithm::q_learning, "q-learning", 0.0, 1e-2},
                          {TabularAlgorithm::sarsa, "sarsa", kEps, 1e-2},
                          {TabularAlgorithm::mc_every_visit, "mc-every", kEps, 5e-2}};
    for (const auto& c : cases) {
        TabularConfig cfg;
        cfg.algorithm = c.alg;
        cfg.gamma = kGamma;
        cfg.epsilon = kEps;
        cfg.tiles.layers = 1;
        cfg.tiles.resolution = {1, 1, 1, 1, 1, 1, 0, 0};
        cfg.lr = {0.9, 10.0, 8};
        TabularAgent agent(cfg, 1);
        oracle::ChainEnv env;
        agent.train(env, {5000, 50, 1});
        const auto ref = oracle::chain_value_iteration(kGamma, c.eps_fixed_point);
        double err = 0.0;
        for (int s = 0; s < oracle::Chain::kGoal; ++s)
            for (int a = 0; a < 4; ++a)
                err = std::max(err, std::abs(agent.q(oracle::ChainEnv::encode(s), static_cast<Action>(a)) - ref[s][a]));
        out.detail += fmt("%s%s %.4f (tol %.0e)", out.detail.empty() ? "" : ", ", c.name, err, c.tol);
        out.require(err < c.tol, std::string(c.name) + " too far");
    }
    const double secs = seconds_since(t0);
    out.detail += fmt(", %.2fs", secs);
    out.require(secs < 10.0, "over 10 s");
    return out;
}

// ---------------------------------------------------------------------------
// 5. Heuristic algebra
// ---------------------------------------------------------------------------

LanderState at(double x, double y, double theta = 0.0) {
    LanderState s;
    s.p_x = x;
    s.p_y = y;
    s.theta = theta;
    return s;
}

Outcome criterion5() {
    Outcome out;
    const auto t0 = Clock::now();
    const HeuristicConfig cfg;
    auto close = [&](double got, double want, const char* what) {
        out.require(std::abs(got - want) <= 1e-12, fmt("%s: %.15g vs %.15g", what, got, want));
    };
    close(distance_term(at(0.3, 0.4)), 0.25, "phi1(0.3,0.4)");
    close(distance_term(at(0, 0)), 0.0, "phi1(0,0)");
    close(orientation_term(at(0, 0, 1.0), at(0, 0, std::numbers::pi / 2)), std::numbers::pi / 2, "phi2(pi/2)");
    close(orientation_term(at(0, 0), at(0, 0, 2 * std::numbers::pi)), 0.0, "phi2(2pi)");
    close(orientation_term(at(0, 0, 1.0), at(0, 0, 1.25), OrientationMode::change), 0.25, "phi2 change");
    close(heuristic_value(at(0.4, 0.6), at(0, 0), cfg), 0.0, "h at goal");
    // Inside the ball: k1 * (0.1^2 + 0.1^2) = 0.02; outside: k2 * (0.5^2 + 0.5^2) = 0.05.
    close(heuristic_value(at(0.4, 0.6), at(0.1, 0.1), cfg), 1.0 * 0.02, "h inside");
    close(heuristic_value(at(0.4, 0.6), at(0.5, 0.5), cfg), 0.1 * 0.5, "h outside");
    HeuristicSchedule sched(cfg);
    close(sched.shaped_reward(0.0, at(0.5, 0.5), at(0.1, 0.1)), -100.0 * 0.02, "shaped reward");
    for (std::int64_t n = 1; n <= 1000; ++n) {
        sched.decay(n);
        double want = cfg.alpha0;
        for (std::int64_t k = 0; k < n / cfg.period; ++k) want *= cfg.p;
        if (std::abs(sched.alpha() - want) > 1e-12 * cfg.alpha0 || sched.alpha_after(n) != want) {
            out.require(false, fmt("alpha_%lld", static_cast<long long>(n)));
            break;
        }
    }
    close(sched.alpha_after(100), 100.0 / 1024.0, "alpha_100");
    const double secs = seconds_since(t0);
    if (out.detail.empty()) out.detail = "worked examples and alpha_n for n <= 1000 agree";
    out.detail += fmt(", %.3fs", secs);
    out.require(secs < 1.0, "over 1 s");
    return out;
}

// ---------------------------------------------------------------------------
// 6. Vanishing bias
// ---------------------------------------------------------------------------

Outcome criterion6() {
    Outcome out;
    const auto t0 = Clock::now();
    const HeuristicConfig hc;
    // Largest h over positions in [-1, 1]^2: either a corner outside the ball
    // or the ball's rim, each with the worst tilt.
    const double h_max = std::max(hc.k2 * (hc.alpha_weight * 2.0 + hc.beta_weight * std::numbers::pi),
                                  hc.k1 * (hc.alpha_weight * hc.eps1 * hc.eps1 + hc.beta_weight * std::numbers::pi));
    std::int64_t oracle_n = 0;
    while (hc.alpha0 * std::pow(hc.p, static_cast<double>(oracle_n / hc.period)) * h_max >= 1e-6) oracle_n += hc.period;

    DeepConfig dc;
    dc.hidden = {16};
    DeepAgent plain(dc, 5);
    DeepAgent shaped(dc, 5, hc);
    Rng rng(6);
    int bound_fail = 0, late_fail = 0;
    double worst_late = 0.0;
    for (int i = 0; i < 200; ++i) {
        Transition tr;
        tr.x = random_state(rng);
        tr.x_next = random_state(rng);
        tr.r = uniform(rng, -10, 10);
        tr.done = uniform01(rng) < 0.2;
        const double h = heuristic_value(tr.x, tr.x_next, hc);
        for (std::int64_t n : {std::int64_t{0}, std::int64_t{10}, std::int64_t{55}, std::int64_t{130}, oracle_n, oracle_n + 40}) {
            shaped.heuristic()->set_alpha(shaped.heuristic()->alpha_after(n));
            const double a_n = hc.alpha0 * std::pow(hc.p, static_cast<double>(n / hc.period));
            const double gap = std::abs(shaped.target_for(tr) - plain.target_for(tr));
            if (gap > a_n * h * (1 + 1e-9) + 1e-12) ++bound_fail;
            if (n >= oracle_n) {
                worst_late = std::max(worst_late, gap);
                if (gap >= 1e-6) ++late_fail;
            }
        }
    }
    const auto lib_n = HeuristicSchedule(hc).episodes_until_negligible(1e-6);
    const double secs = seconds_since(t0);
    out.detail = fmt("negligible after n=%lld (library %lld), worst late gap %.2e, %d bound violations, %.3fs",
                     static_cast<long long>(oracle_n), static_cast<long long>(lib_n), worst_late, bound_fail, secs);
    out.require(bound_fail == 0, "gap exceeded alpha_n * h");
    out.require(late_fail == 0, "gap not below 1e-6");
    out.require(lib_n == oracle_n, "episode count disagrees with oracle");
    out.require(std::abs(static_cast<double>(oracle_n) - 270.0) <= 20.0, "count far from 270");
    out.require(secs < 1.0, "over 1 s");
    return out;
}

// ---------------------------------------------------------------------------
// 7. Environment determinism and physics
// ---------------------------------------------------------------------------

Outcome criterion7() {
    Outcome out;
    const auto t0 = Clock::now();
    Rng rng(8);
    int diverged = 0, overran = 0;
    for (int ep = 0; ep < 200; ++ep) {
        EnvConfig cfg;
        cfg.max_steps = 50 + static_cast<int>(uniform_index(rng, 400));
        LunarLander a(cfg), b(cfg);
        const std::uint64_t seed = rng();
        if (a.reset(seed) != b.reset(seed)) ++diverged;
        int steps = 0;
        for (;;) {
            const auto u = static_cast<Action>(uniform_index(rng, 4));
            const auto ra = a.step(u), rb = b.step(u);
            ++steps;
            if (ra.next_state != rb.next_state || ra.reward != rb.reward || ra.done != rb.done) ++diverged;
            if (ra.done) break;
            if (steps > cfg.max_steps) {
                ++overran;
                break;
            }
        }
    }

    EnvConfig cfg;
    cfg.shaping_enabled = false;
    LunarLander env(cfg);
    LanderState s;
    s.p_y = 0.95;
    s.v_y = 0.3;
    env.reset_to(s);
    double worst = 0.0;
    bool falls = true;
    for (int n = 1; n <= 40; ++n) {
        const auto res = env.step(Action::idle);
        falls = falls && res.event == StepEvent::none;
        const double err = std::abs(res.next_state.v_y - (0.3 - n * cfg.gravity * cfg.dt));
        worst = std::max(worst, err / n);
    }
    const double secs = seconds_since(t0);
    out.detail = fmt("200 paired episodes: %d divergences, %d overruns; free fall worst err/n %.2e, %.3fs", diverged,
                     overran, worst, secs);
    out.require(diverged == 0, "trajectories differ");
    out.require(overran == 0, "episode exceeded max_steps");
    out.require(falls && worst <= 1e-9, "free fall");
    out.require(secs < 1.0, "over 1 s");
    return out;
}

// ---------------------------------------------------------------------------
// 8. Statistical policies
// ---------------------------------------------------------------------------

Outcome criterion8() {
    Outcome out;
    const auto t0 = Clock::now();
    Rng rng(99);
    const QValues q{0.3, 1.2, -0.5, 0.7};
    double worst = 0.0;
    for (double eps : {0.0, 0.05, 1.0}) {
        std::array<int, 4> counts{};
        const int n = 100000;
        for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(code(sample_action(q, eps, rng)))];
        for (std::size_t a = 0; a < 4; ++a) {
            const double analytic = (a == 1 ? 1.0 - eps : 0.0) + eps / 4.0;
            worst = std::max(worst, std::abs(counts[a] / static_cast<double>(n) - analytic));
        }
    }

    ReplayBuffer buf(50);
    for (int i = 0; i < 120; ++i) {
        Transition t;
        t.r = i;
        buf.push(t);
    }
    std::map<int, int> hits;
    const int draws = 200000;
    for (const auto& t : buf.sample(draws, rng)) ++hits[static_cast<int>(t.r)];
    const double p = 1.0 / 50.0, sigma = std::sqrt(draws * p * (1 - p));
    double worst_z = 0.0;
    bool only_stored = hits.size() == 50;
    for (const auto& [k, c] : hits) {
        only_stored = only_stored && k >= 70;
        worst_z = std::max(worst_z, std::abs(c - draws * p) / sigma);
    }
    const double secs = seconds_since(t0);
    out.detail = fmt("epsilon-greedy worst |freq - p| %.4f; replay worst |z| %.2f over 50 items, %.2fs", worst, worst_z, secs);
    out.require(worst <= 0.01, "epsilon-greedy frequencies");
    out.require(only_stored && worst_z <= 4.0, "replay uniformity");
    out.require(secs < 5.0, "over 5 s");
    return out;
}

// ---------------------------------------------------------------------------
// 10. Round trips
// ---------------------------------------------------------------------------

Outcome criterion10() {
    Outcome out;
    const auto t0 = Clock::now();
    double training = 0.0;
    TempDir dir("accept10");

    const std::vector<std::string> texts{
        "", "algorithm = sarsa\ntiles = 4\nresolution = res3\n[run]\nseed = 9\n",
        "algorithm = ddqn\ngamma = 0.97\ndouble_selection = local\nhidden = 32, 8\n[heuristic]\nenabled = on\np = 0.3\n",
        "[env]\ngravity = 1.1\nshaping_enabled = false\n[run]\neval_epsilon = 0.05\noutput_dir = some where\n"};
    for (const auto& text : texts) {
        const auto cfg = parse_config(text);
        out.require(parse_config(render_config(cfg)) == cfg, "config parse/render");
    }

    for (const char* text : {"algorithm = qlearn\ntiles = 2\n[run]\nepisodes = 20\nseed = 2\n",
                             "algorithm = cdqn\nhidden = 16\nbatch_size = 16\n[heuristic]\nenabled = on\n[run]\nepisodes = 5\n"}) {
        const auto cfg = parse_config(text);
        const auto tt = Clock::now();
        const auto trained = train(cfg);
        training += seconds_since(tt);
        save_checkpoint(cfg, trained.agent, dir / "agent.bin");
        const auto back = load_checkpoint(dir / "agent.bin");
        out.require(encode_checkpoint(back.config, back.agent) == encode_checkpoint(cfg, trained.agent), "checkpoint bytes");
        LunarLander env(cfg.env);
        Rng rng(0);
        for (int ep = 0; ep < 10; ++ep) {
            auto actions = [&](const AnyAgent& agent) {
                std::vector<Action> acts;
                const auto traj = std::visit([&](const auto& a) { return rollout(a, env, derive_seed(5, ep), 0.0, rng); }, agent);
                for (const auto& st : traj) acts.push_back(st.action);
                return acts;
            };
            if (actions(trained.agent) != actions(back.agent)) {
                out.require(false, "greedy actions differ after reload");
                break;
            }
        }
    }

    auto base = parse_config("tiles = 1\n[run]\nepisodes = 1\neval_trials = 1\n");
    for (const auto& [preset, rows] : {std::pair{"table2", 5}, std::pair{"table3", 3}}) {
        const auto tt = Clock::now();
        run_sweep(base, sweep_preset(preset), dir / preset);
        training += seconds_since(tt);
        const auto csv = read_text_file(dir / preset / "sweep.csv");
        const auto lines = std::count(csv.begin(), csv.end(), '\n');
        out.require(lines == rows + 1, fmt("%s sweep has %lld data rows", preset, static_cast<long long>(lines - 1)));
    }
    const double secs = seconds_since(t0) - training;
    out.detail = fmt("config, checkpoint and sweep shapes checked, %.3fs excluding %.2fs training", secs, training);
    out.require(secs < 1.0, "over 1 s");
    return out;
}

// ---------------------------------------------------------------------------
// 9. Directional learning results (long)
// ---------------------------------------------------------------------------

double mean_of(const std::vector<EpisodeRecord>& log, std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += log[i].score;
    return s / static_cast<double>(end - begin);
}

WorkbenchConfig dqn_config(int batch, bool heuristic, std::uint64_t seed, std::int64_t episodes, bool early_stop) {
    WorkbenchConfig cfg;
    cfg.algorithm = Algorithm::dqn;
    cfg.deep.batch_size = batch;
    cfg.heuristic_enabled = heuristic;
    cfg.run.seed = seed;
    cfg.run.episodes = episodes;
    if (!early_stop) cfg.run.early_stop_threshold = std::numeric_limits<double>::infinity();
    cfg.normalize();
    return cfg;
}

Outcome criterion9a() {
    Outcome out;
    int wins = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto t0 = Clock::now();
        const auto log = train(dqn_config(64, false, seed, 1500, true)).log;
        const double first = mean_of(log, 0, std::min<std::size_t>(100, log.size()));
        const double last = trailing_mean(log, 100);
        const bool ok = log.size() >= 100 && last - first >= 100.0;
        wins += ok;
        out.detail += fmt("%sseed %llu: first-100 %.1f, trailing-100 %.1f after %zu episodes (%.0fs)",
                          out.detail.empty() ? "" : "; ", static_cast<unsigned long long>(seed), first, last, log.size(),
                          seconds_since(t0));
        std::fflush(stdout);
    }
    out.require(wins >= 2, fmt("improved by >= 100 on %d of 3 seeds", wins));
    return out;
}

constexpr std::int64_t kBatch1024Budget = 500;

Outcome criterion9b() {
    Outcome out;
    int wins = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto t0 = Clock::now();
        const double plain = trailing_mean(train(dqn_config(1024, false, seed, kBatch1024Budget, false)).log, 100);
        const double shaped = trailing_mean(train(dqn_config(1024, true, seed, kBatch1024Budget, false)).log, 100);
        const bool ok = shaped - plain >= 50.0;
        wins += ok;
        out.detail += fmt("%sseed %llu: heuristic %.1f vs plain %.1f (%.0fs)", out.detail.empty() ? "" : "; ",
                          static_cast<unsigned long long>(seed), shaped, plain, seconds_since(t0));
    }
    out.detail += fmt("; budget %lld episodes", static_cast<long long>(kBatch1024Budget));
    out.require(wins >= 2, fmt("heuristic ahead by >= 50 on %d of 3 seeds", wins));
    return out;
}

Outcome criterion9c() {
    Outcome out;
    int wins = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto t0 = Clock::now();
        const auto cfg = dqn_config(64, true, seed, 1500, true);
        const auto trained = train(cfg);
        const double last = trailing_mean(trained.log, 100);
        const bool success = trained.log.size() >= 100 && last > cfg.run.early_stop_threshold;
        const auto peak = agent_q_surface(trained.agent).peak();
        const double dist = std::hypot(peak.x, peak.y);
        const bool ok = success && dist <= 0.2 + 1e-12;
        wins += ok;
        out.detail += fmt("%sseed %llu: %s run (trailing-100 %.1f), peak at (%.1f, %.1f) dist %.2f (%.0fs)",
                          out.detail.empty() ? "" : "; ", static_cast<unsigned long long>(seed),
                          success ? "successful" : "unsuccessful", last, peak.x, peak.y, dist, seconds_since(t0));
    }
    out.require(wins >= 2, fmt("peak within 0.2 of origin after success on %d of 3 seeds", wins));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string which = argc > 1 ? argv[1] : "fast";
    struct Entry {
        const char* id;
        const char* name;
        std::function<Outcome()> run;
        bool fast;
    };
    const std::vector<Entry> entries{
        {"1", "gradient correctness", criterion1, true},
        {"2", "tile-coder algebra", criterion2, true},
        {"3", "target-rule oracle", criterion3, true},
        {"4", "tabular convergence", criterion4, true},
        {"5", "heuristic algebra", criterion5, true},
        {"6", "vanishing bias", criterion6, true},
        {"7", "environment determinism and physics", criterion7, true},
        {"8", "statistical policies", criterion8, true},
        {"9a", "DQN improves over its first 100 episodes", criterion9a, false},
        {"9b", "heuristic DQN ahead of plain DQN at batch 1024", criterion9b, false},
        {"9c", "Q-surface peak near the pad", criterion9c, false},
        {"10", "round trips and sweep shapes", criterion10, true},
    };
    bool any = false, all_pass = true;
    for (const auto& e : entries) {
        const bool selected = which == "all" || which == e.id || (which == "fast" && e.fast);
        if (!selected) continue;
        any = true;
        Outcome o;
        try {
            o = e.run();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        all_pass = all_pass && o.pass;
        std::printf("%s criterion %s (%s): %s\n", o.pass ? "PASS" : "FAIL", e.id, e.name, o.detail.c_str());
        std::fflush(stdout);
    }
    if (!any) {
        std::fprintf(stderr, "unknown selection '%s' (fast, all, 1-8, 9a, 9b, 9c, 10)\n", which.c_str());
        return 2;
    }
    return all_pass ? 0 : 1;
}
