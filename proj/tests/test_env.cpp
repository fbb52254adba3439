#include <doctest.h>

#include <numeric>

#include "horizonlab/env.hpp"
#include "horizonlab/env_io.hpp"
#include "horizonlab/errors.hpp"
#include "horizonlab/policies.hpp"
#include "support/oracles.hpp"

using namespace horizonlab;

namespace {

Environment line(int n, int horizon) {
    EnvironmentBuilder b;
    b.add_states(n);
    for (int i = 0; i + 1 < n; ++i) {
        b.add_edge(state_id(i), "next", state_id(i + 1), 1.0, 0.5);
    }
    b.set_initial(state_id(0));
    b.add_answer(state_id(n - 1));
    b.set_episode_horizon(horizon);
    return b.build();
}

// Always takes the last action.
class LastAction final : public DecisionPolicy {
public:
    std::string name() const override { return "last"; }
    ActionId decide(const Environment& env, StateId s, int, BudgetMeter&) override {
        return action_id(env.num_actions(s) - 1);
    }
};

class OutOfRange final : public DecisionPolicy {
public:
    std::string name() const override { return "bad"; }
    ActionId decide(const Environment& env, StateId s, int, BudgetMeter&) override {
        return action_id(env.num_actions(s));
    }
};

} // namespace

TEST_CASE("environment rejects malformed tables") {
    CHECK_THROWS_AS(Environment(0, state_id(0), {}, {}, 1), InvalidParams);
    CHECK_THROWS_AS(Environment(2, state_id(0), {}, {{}}, 1), InvalidParams);
    CHECK_THROWS_AS(Environment(1, state_id(3), {}, {{}}, 1), InvalidParams);
    CHECK_THROWS_AS(Environment(1, state_id(0), {state_id(1)}, {{}}, 1), InvalidParams);
    CHECK_THROWS_AS(Environment(1, state_id(0), {}, {{{"x", state_id(4), 0.0, 0.0}}}, 1), InvalidParams);
    CHECK_THROWS_AS(Environment(1, state_id(0), {}, {{}}, 0), InvalidParams);
    CHECK_THROWS_AS(Environment(1, state_id(0), {}, {{{"x", state_id(0), std::nan(""), 0.0}}}, 1), InvalidParams);
}

TEST_CASE("metered step and surrogate") {
    const Environment env = line(3, 5);
    BudgetMeter m;
    const StepResult r = env.step(state_id(0), action_id(0), m);
    CHECK(r.next == state_id(1));
    CHECK(r.reward == 1.0);
    CHECK(env.surrogate(state_id(1), action_id(0), m) == 0.5);
    CHECK(m.transition_calls == 1);
    CHECK(m.surrogate_calls == 1);
    CHECK_THROWS_AS(env.step(state_id(0), action_id(1), m), InvalidAction);
    CHECK(env.is_terminal(state_id(2)));
    CHECK_FALSE(env.is_terminal(state_id(0)));
}

TEST_CASE("run_episode stops at the horizon or a terminal state") {
    LastAction p;
    BudgetMeter m;
    const Trajectory short_run = run_episode(line(6, 3), p, 0, m);
    CHECK(short_run.length() == 3);
    CHECK(short_run.cumulative_return() == 3.0);
    const Trajectory full = run_episode(line(4, 10), p, 0, m);
    CHECK(full.length() == 3);
    CHECK(full.back() == state_id(3));
    OutOfRange bad;
    CHECK_THROWS_AS(run_episode(line(3, 3), bad, 0, m), InvalidAction);
}

TEST_CASE("trajectory invariants hold on random walks") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Environment env = testing::random_env(seed);
        const Trajectory t = testing::random_walk(env, seed + 7, env.episode_horizon());
        CHECK(t.states().size() == t.actions().size() + 1);
        CHECK(t.step_rewards().size() == t.actions().size());
        CHECK(t.length() <= env.episode_horizon());
        CHECK(is_consistent(t, env));
        CHECK(trajectory_return(t) == std::accumulate(t.step_rewards().begin(), t.step_rewards().end(), 0.0));
        for (int k = 0; k <= t.length(); ++k) {
            const Trajectory head = t.prefix(k);
            const Trajectory tail = t.suffix(k);
            CHECK(head.length() == k);
            CHECK(tail.length() == t.length() - k);
            CHECK(head.back() == tail.front());
        }
    }
}

TEST_CASE("is_consistent rejects a forged step") {
    const Environment env = line(3, 3);
    Trajectory t(state_id(0));
    t.append(action_id(0), state_id(2), 1.0);
    CHECK_FALSE(is_consistent(t, env));
}

TEST_CASE("environment JSON round trip keeps action order") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Environment env = testing::random_env(seed);
        const nlohmann::json j = environment_to_json(env);
        const Environment back = environment_from_json(j);
        REQUIRE(back.num_states() == env.num_states());
        CHECK(back.initial_state() == env.initial_state());
        CHECK(back.episode_horizon() == env.episode_horizon());
        CHECK(back.answers() == env.answers());
        for (int s = 0; s < env.num_states(); ++s) {
            REQUIRE(back.num_actions(state_id(s)) == env.num_actions(state_id(s)));
            for (int a = 0; a < env.num_actions(state_id(s)); ++a) {
                const Edge& x = env.edge(state_id(s), action_id(a));
                const Edge& y = back.edge(state_id(s), action_id(a));
                CHECK(x.label == y.label);
                CHECK(x.to == y.to);
                CHECK(x.reward == y.reward);
                CHECK(x.surrogate == y.surrogate);
            }
        }
        CHECK(environment_to_json(back) == j);
    }
}

TEST_CASE("environment JSON schema errors are config errors") {
    using nlohmann::json;
    const json good = {{"states", 2},
                       {"initial", 0},
                       {"answers", {1}},
                       {"edges", {{{"from", 0}, {"action_label", "go"}, {"to", 1}, {"reward", 1}, {"surrogate", 0}}}},
                       {"episode_horizon", 2}};
    CHECK(environment_from_json(good).num_actions(state_id(0)) == 1);
    json bad = good;
    bad.erase("states");
    CHECK_THROWS_AS(environment_from_json(bad), ConfigError);
    bad = good;
    bad["edges"][0]["to"] = 5;
    CHECK_THROWS_AS(environment_from_json(bad), ConfigError);
    bad = good;
    bad["edges"][0]["from"] = -1;
    CHECK_THROWS_AS(environment_from_json(bad), ConfigError);
    bad = good;
    bad["episode_horizon"] = "long";
    CHECK_THROWS_AS(environment_from_json(bad), ConfigError);
}

TEST_CASE("meters add field by field") {
    BudgetMeter a{1, 2, 3, 4};
    a += BudgetMeter{10, 20, 30, 40};
    CHECK(a == BudgetMeter{11, 22, 33, 44});
}
