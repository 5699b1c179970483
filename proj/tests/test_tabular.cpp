#include <cmath>

#include <gtest/gtest.h>

#include "lunarlab/env.hpp"
#include "lunarlab/tabular.hpp"
#include "oracles.hpp"

using namespace lunarlab;

namespace {

TabularConfig chain_config(TabularAlgorithm alg, double gamma = 0.9) {
    TabularConfig cfg;
    cfg.algorithm = alg;
    cfg.gamma = gamma;
    cfg.tiles.layers = 1;
    cfg.tiles.resolution = {1, 1, 1, 1, 1, 1, 0, 0};
    return cfg;
}

LanderState cell(int i) { return oracle::ChainEnv::encode(i); }

}  // namespace

TEST(QLearning, UpdateExamples) {
    TabularAgent agent(chain_config(TabularAlgorithm::q_learning));
    const double d = agent.q_learning_update({cell(0), Action::fire_main, 10.0, cell(1), false}, 0.5);
    EXPECT_DOUBLE_EQ(d, 5.0);
    EXPECT_DOUBLE_EQ(agent.q(cell(0), Action::fire_main), 5.0);

    const double d2 = agent.q_learning_update({cell(2), Action::idle, -100.0, cell(0), true}, 1.0);
    EXPECT_DOUBLE_EQ(d2, -100.0);  // bootstrap from Q(cell 0) = 5 dropped
}

TEST(QLearning, FixedPointGivesZeroDelta) {
    TabularAgent agent(chain_config(TabularAlgorithm::q_learning));
    agent.coder().set_cell(1, agent.coder().encode(cell(1), 1), Action::idle, 2.0);
    agent.coder().set_cell(1, agent.coder().encode(cell(0), 1), Action::idle, 1.8);
    EXPECT_NEAR(agent.q_learning_update({cell(0), Action::idle, 0.0, cell(1), false}, 0.7), 0.0, 1e-15);
}

TEST(QLearning, RejectsBadInputs) {
    TabularAgent agent(chain_config(TabularAlgorithm::q_learning));
    EXPECT_THROW(agent.q_learning_update({cell(0), Action::idle, NAN, cell(1), false}, 0.5), std::invalid_argument);
    EXPECT_THROW(agent.q_learning_update({cell(0), Action::idle, 1.0, cell(1), false}, 0.0), std::invalid_argument);
    EXPECT_THROW(agent.q_learning_update({cell(0), Action::idle, 1.0, cell(1), false}, 1.5), std::invalid_argument);
}

TEST(Sarsa, UpdateExamples) {
    TabularAgent agent(chain_config(TabularAlgorithm::sarsa));
    EXPECT_DOUBLE_EQ(agent.sarsa_update({cell(0), Action::idle, 10.0}, cell(1), Action::idle, 0.5), 5.0);
}

TEST(Sarsa, BootstrapsFromSampledAction) {
    TabularAgent sarsa(chain_config(TabularAlgorithm::sarsa, 0.5));
    TabularAgent ql(chain_config(TabularAlgorithm::q_learning, 0.5));
    for (auto* a : {&sarsa, &ql}) {
        a->coder().set_cell(1, a->coder().encode(cell(1), 1), Action::fire_left, 2.0);
        a->coder().set_cell(1, a->coder().encode(cell(1), 1), Action::fire_main, 9.0);
    }
    EXPECT_DOUBLE_EQ(sarsa.sarsa_update({cell(0), Action::idle, 0.0}, cell(1), Action::fire_left, 1.0), 0.5 * 2.0);
    EXPECT_DOUBLE_EQ(ql.q_learning_update({cell(0), Action::idle, 0.0, cell(1), false}, 1.0), 0.5 * 9.0);
}

TEST(Sarsa, TerminalFlush) {
    TabularAgent agent(chain_config(TabularAlgorithm::sarsa));
    agent.coder().set_cell(1, agent.coder().encode(cell(2), 1), Action::fire_right, 4.0);
    EXPECT_DOUBLE_EQ(agent.sarsa_terminal_update({cell(2), Action::fire_right, -100.0}, 0.25), 0.25 * (-100.0 - 4.0));
}

TEST(MonteCarlo, FirstVisitExamples) {
    TabularAgent single(chain_config(TabularAlgorithm::mc_first_visit));
    EXPECT_EQ(single.mc_first_visit({{cell(0), Action::idle, 7.0}}, 1.0), 1u);
    EXPECT_DOUBLE_EQ(single.q(cell(0), Action::idle), 7.0);

    TabularAgent three(chain_config(TabularAlgorithm::mc_first_visit, 0.5));
    three.mc_first_visit({{cell(0), Action::idle, 1}, {cell(1), Action::idle, 1}, {cell(2), Action::idle, 1}}, 1.0);
    EXPECT_DOUBLE_EQ(three.q(cell(0), Action::idle), 1.75);
    EXPECT_DOUBLE_EQ(three.q(cell(1), Action::idle), 1.5);
    EXPECT_DOUBLE_EQ(three.q(cell(2), Action::idle), 1.0);
}

TEST(MonteCarlo, FirstVisitUsesEarliestReturn) {
    TabularAgent agent(chain_config(TabularAlgorithm::mc_first_visit, 0.5));
    // (A, B, A): returns from A are 3.5 + 0.5 * (0 + 0.5 * 2) = 4 at t=0 and 2 at t=2.
    const EpisodeTrace trace{{cell(1), Action::idle, 3.5}, {cell(2), Action::idle, 0.0}, {cell(1), Action::idle, 2.0}};
    EXPECT_EQ(agent.mc_first_visit(trace, 1.0), 2u);
    EXPECT_DOUBLE_EQ(agent.q(cell(1), Action::idle), 4.0);
}

TEST(MonteCarlo, PairsAreIdentifiedByCell) {
    TabularAgent agent(chain_config(TabularAlgorithm::mc_first_visit, 0.5));
    LanderState a = cell(1), b = cell(1);
    b.p_x = 1.2;  // same cell as 1.0
    const EpisodeTrace trace{{a, Action::idle, 0.0}, {b, Action::idle, 1.0}};
    EXPECT_EQ(agent.mc_first_visit(trace, 1.0), 1u);
}

TEST(MonteCarlo, EveryVisitAveragesReturns) {
    TabularAgent agent(chain_config(TabularAlgorithm::mc_every_visit, 0.5));
    const EpisodeTrace trace{{cell(1), Action::idle, 3.5}, {cell(2), Action::idle, 0.0}, {cell(1), Action::idle, 2.0}};
    EXPECT_EQ(agent.mc_every_visit(trace, 1.0), 2u);
    EXPECT_DOUBLE_EQ(agent.q(cell(1), Action::idle), 3.0);
    EXPECT_DOUBLE_EQ(agent.q(cell(2), Action::idle), 1.0);
}

TEST(MonteCarlo, SingleVisitMatchesFirstVisit) {
    const EpisodeTrace trace{{cell(0), Action::idle, 1.0}, {cell(1), Action::fire_left, -2.0}, {cell(2), Action::idle, 5.0}};
    TabularAgent first(chain_config(TabularAlgorithm::mc_first_visit));
    TabularAgent every(chain_config(TabularAlgorithm::mc_every_visit));
    EXPECT_EQ(first.mc_first_visit(trace, 0.3), every.mc_every_visit(trace, 0.3));
    for (int i = 0; i < 3; ++i)
        for (Action u : kAllActions) EXPECT_EQ(first.q(cell(i), u), every.q(cell(i), u));
}

TEST(MonteCarlo, FirstVisitCountNeverExceedsEveryVisit) {
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        EpisodeTrace trace;
        const int len = 1 + static_cast<int>(uniform_index(rng, 12));
        for (int t = 0; t < len; ++t)
            trace.push_back({cell(static_cast<int>(uniform_index(rng, 4))), static_cast<Action>(uniform_index(rng, 4)),
                             uniform(rng, -1, 1)});
        TabularAgent first(chain_config(TabularAlgorithm::mc_first_visit));
        TabularAgent every(chain_config(TabularAlgorithm::mc_every_visit));
        EXPECT_LE(first.mc_first_visit(trace, 0.5), every.mc_every_visit(trace, 0.5));
    }
}

TEST(MonteCarlo, EmptyTraceRejected) {
    TabularAgent agent(chain_config(TabularAlgorithm::mc_first_visit));
    EXPECT_THROW(agent.mc_first_visit({}, 0.5), std::invalid_argument);
    EXPECT_THROW(agent.mc_every_visit({}, 0.5), std::invalid_argument);
}

TEST(Tabular, ZeroRewardsNeverChangeQ) {
    Rng rng(2);
    for (auto alg : {TabularAlgorithm::q_learning, TabularAlgorithm::sarsa, TabularAlgorithm::mc_first_visit,
                     TabularAlgorithm::mc_every_visit}) {
        TabularAgent agent(chain_config(alg, 0.37));
        EpisodeTrace trace;
        for (int t = 0; t < 20; ++t) {
            const int s = static_cast<int>(uniform_index(rng, 4));
            const auto a = static_cast<Action>(uniform_index(rng, 4));
            trace.push_back({cell(s), a, 0.0});
            agent.q_learning_update({cell(s), a, 0.0, cell((s + 1) % 4), t % 5 == 0}, 0.8);
            agent.sarsa_update({cell(s), a, 0.0}, cell((s + 1) % 4), Action::idle, 0.8);
            agent.sarsa_terminal_update({cell(s), a, 0.0}, 0.8);
        }
        agent.mc_first_visit(trace, 0.8);
        agent.mc_every_visit(trace, 0.8);
        EXPECT_EQ(agent.coder().nonzero_cells(1).size(), 0u);
    }
}

TEST(Tabular, ZeroEpisodesLeavesAgentUntouched) {
    TabularAgent agent;
    LunarLander env;
    const auto log = agent.train(env, {0, 1000, 1});
    EXPECT_TRUE(log.empty());
    EXPECT_EQ(agent.coder().stored_cells(), 0u);
}

TEST(Tabular, TrainingIsDeterministic) {
    for (auto alg : {TabularAlgorithm::q_learning, TabularAlgorithm::sarsa, TabularAlgorithm::mc_first_visit,
                     TabularAlgorithm::mc_every_visit}) {
        TabularConfig cfg;
        cfg.algorithm = alg;
        auto run = [&] {
            TabularAgent agent(cfg, 5);
            LunarLander env;
            return agent.train(env, {15, 1000, 77});
        };
        const auto a = run(), b = run();
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].score, b[i].score);
            EXPECT_EQ(a[i].steps, b[i].steps);
        }
    }
}

TEST(Tabular, LogRecordsScheduleValues) {
    TabularConfig cfg;
    cfg.lr.decay_period = 2;
    TabularAgent agent(cfg, 1, HeuristicConfig{});
    LunarLander env;
    const auto log = agent.train(env, {12, 1000, 3});
    ASSERT_EQ(log.size(), 12u);
    EXPECT_DOUBLE_EQ(*log[0].alpha, 0.9);
    EXPECT_DOUBLE_EQ(*log[2].alpha, 0.9 * 5.0 / 6.0);
    EXPECT_EQ(log[0].epsilon, cfg.epsilon);
    EXPECT_EQ(*log[9].heuristic_alpha, 100.0);
    EXPECT_EQ(*log[10].heuristic_alpha, 50.0);
    EXPECT_EQ(agent.episodes_trained(), 12);
}

TEST(Tabular, QLearningFindsChainPolicy) {
    TabularConfig cfg = chain_config(TabularAlgorithm::q_learning);
    cfg.epsilon = 0.1;
    cfg.lr.decay_period = 100;
    TabularAgent agent(cfg, 1);
    oracle::ChainEnv env;
    agent.train(env, {2000, 50, 9});
    const auto q_star = oracle::chain_value_iteration(0.9, 0.0);
    for (int s = 0; s < oracle::Chain::kGoal; ++s) {
        const auto& row = q_star[s];
        const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
        EXPECT_EQ(code(greedy_action(agent.q_values(cell(s)))), best) << "state " << s;
    }
}
