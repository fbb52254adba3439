#include <doctest.h>

#include "horizonlab/env_io.hpp"
#include "horizonlab/errors.hpp"
#include "horizonlab/graph_env.hpp"
#include "support/oracles.hpp"

using namespace horizonlab;

namespace {

GraphInstanceSpec spec_for(std::uint64_t seed, int D) {
    GraphInstanceSpec spec;
    spec.seed = seed;
    spec.answer_distance = D;
    return spec;
}

// Distances are BFS distances iff answers sit at 0, no edge shortcuts by more
// than one hop, and every reachable non-answer has a one-hop-closer successor.
void check_bfs_shape(const Environment& env, const OracleInfo& oracle) {
    for (int i = 0; i < env.num_states(); ++i) {
        const StateId s = state_id(i);
        if (env.is_answer(s)) {
            CHECK(oracle.distance(s) == 0);
            continue;
        }
        bool has_closer = false;
        for (const Edge& e : env.actions(s)) {
            if (oracle.reachable(e.to)) {
                CHECK(oracle.reachable(s));
                CHECK(oracle.distance(s) <= oracle.distance(e.to) + 1);
                has_closer = has_closer || oracle.distance(e.to) + 1 == oracle.distance(s);
            }
        }
        CHECK(has_closer == oracle.reachable(s));
    }
}

} // namespace

TEST_CASE("generated instances put the answer exactly D hops away") {
    for (int D : {1, 2, 3, 4, 5, 8}) {
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            const GraphInstance g = generate_instance(spec_for(seed, D));
            CHECK(g.oracle.distance(g.env.initial_state()) == D);
            CHECK(g.env.episode_horizon() == 2 * D + 2);
            check_bfs_shape(g.env, g.oracle);
        }
    }
}

TEST_CASE("adversarial instances open with a trap and keep a safe path") {
    for (int D : {2, 3, 4, 5}) {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const GraphInstance g = generate_instance(spec_for(seed, D));
            const StateId s0 = g.env.initial_state();
            bool trap_at_root = false;
            for (const auto& [s, a] : g.trap_edges) {
                trap_at_root = trap_at_root || s == s0;
            }
            CHECK(trap_at_root);
            const TrapLabeling labels = label_traps(g.env, g.oracle);
            CHECK_FALSE(labels.initial_excluded);
            CHECK(labels.initial_trap_count >= 1);
            bool safe = false;
            for (int a = 0; a < g.env.num_actions(s0); ++a) {
                const StateId next = g.env.edge(s0, action_id(a)).to;
                safe = safe || g.oracle.distance(next) == D - 1;
            }
            CHECK(safe);
        }
    }
}

TEST_CASE("the same seed gives the same instance") {
    GraphInstanceSpec spec = spec_for(42, 4);
    spec.surrogate_mode = SurrogateMode::noisy;
    spec.noise_sigma = 0.3;
    const auto a = environment_to_json(generate_instance(spec).env).dump();
    const auto b = environment_to_json(generate_instance(spec).env).dump();
    CHECK(a == b);
    spec.seed = 43;
    CHECK(environment_to_json(generate_instance(spec).env).dump() != a);
}

TEST_CASE("oracle distances match path enumeration") {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const Environment env = testing::random_env(seed);
        CHECK(compute_oracle(env).dist == testing::enumerated_distances(env));
    }
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GraphInstanceSpec spec = spec_for(seed, 2);
        spec.branching_min = 1;
        spec.branching_max = 2;
        spec.distractor_depth = 1;
        const GraphInstance g = generate_instance(spec);
        CHECK(g.oracle.dist == testing::enumerated_distances(g.env));
    }
}

TEST_CASE("trap labels agree with the definition checked by enumeration") {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const Environment env = testing::random_env(seed);
        const OracleInfo oracle = compute_oracle(env);
        for (double q : {0.25, 0.5}) {
            for (int min_len : {1, 2}) {
                const TrapLabeling labels = label_traps(env, oracle, {q, min_len});
                for (int s = 0; s < env.num_states(); ++s) {
                    const StateId st = state_id(s);
                    if (env.is_terminal(st) || !oracle.reachable(st)) {
                        continue;
                    }
                    for (int a = 0; a < env.num_actions(st); ++a) {
                        const TrapLabel* l = labels.find(st, action_id(a));
                        REQUIRE(l != nullptr);
                        CHECK(l->is_trap == testing::is_trap_by_enumeration(env, st, action_id(a), q, min_len));
                    }
                }
            }
        }
    }
}

TEST_CASE("every labeled trap loses reachability or lengthens the path") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const GraphInstance g = generate_instance(spec_for(seed, 3 + static_cast<int>(seed % 3)));
        const TrapLabeling labels = label_traps(g.env, g.oracle);
        for (const TrapLabel& l : labels.labels) {
            if (!l.is_trap) {
                continue;
            }
            const StateId to = g.env.edge(l.state, l.action).to;
            if (l.reason == TrapReason::unreachable) {
                CHECK_FALSE(g.oracle.reachable(to));
            } else {
                CHECK(g.oracle.distance(to) >= g.oracle.distance(l.state));
                CHECK(l.lengthened_by >= 1);
            }
        }
    }
}

TEST_CASE("following the oracle solves every instance in D steps") {
    for (int D : {2, 3, 4, 5}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            GraphInstanceSpec spec = spec_for(seed, D);
            spec.surrogate_mode = seed % 2 ? SurrogateMode::aligned : SurrogateMode::adversarial;
            const GraphInstance g = generate_instance(spec);
            StateId s = g.env.initial_state();
            int steps = 0;
            double ret = 0.0;
            while (!g.env.is_answer(s)) {
                REQUIRE(steps < D);
                for (const Edge& e : g.env.actions(s)) {
                    if (g.oracle.distance(e.to) == g.oracle.distance(s) - 1) {
                        ret += e.reward;
                        s = e.to;
                        break;
                    }
                }
                ++steps;
            }
            CHECK(steps == D);
            CHECK(ret == 1.0);
        }
    }
}

TEST_CASE("aligned scores prefer progress") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        GraphInstanceSpec spec = spec_for(seed, 4);
        spec.surrogate_mode = SurrogateMode::aligned;
        const GraphInstance g = generate_instance(spec);
        for (int i = 0; i < g.env.num_states(); ++i) {
            const StateId s = state_id(i);
            if (g.env.is_terminal(s) || !g.oracle.reachable(s)) {
                continue;
            }
            for (const Edge& e : g.env.actions(s)) {
                const double expected = g.oracle.reachable(e.to)
                                            ? g.oracle.distance(s) - g.oracle.distance(e.to)
                                            : -1.0;
                CHECK(e.surrogate == expected);
            }
        }
    }
}

TEST_CASE("infeasible and invalid specs are rejected") {
    GraphInstanceSpec spec = spec_for(1, 5);
    spec.num_states = 3;
    CHECK_THROWS_AS(generate_instance(spec), InfeasibleSpec);
    spec = spec_for(1, 5);
    spec.episode_horizon = 4;
    CHECK_THROWS_AS(generate_instance(spec), InfeasibleSpec);
    spec = spec_for(1, 3);
    spec.branching_min = 5;
    spec.branching_max = 2;
    CHECK_THROWS_AS(generate_instance(spec), InvalidParams);
    spec = spec_for(1, 0);
    CHECK_THROWS_AS(generate_instance(spec), InvalidParams);
    spec = spec_for(1, 3);
    spec.dead_end_fraction = 1.5;
    CHECK_THROWS_AS(generate_instance(spec), InvalidParams);
    CHECK(surrogate_mode_from_string(to_string(SurrogateMode::noisy)) == SurrogateMode::noisy);
    CHECK_THROWS(surrogate_mode_from_string("bogus"));
}
