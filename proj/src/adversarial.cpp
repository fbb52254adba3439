#include "horizonlab/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "horizonlab/errors.hpp"

namespace horizonlab {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw InvalidParams(what);
    }
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

} // namespace

AdversarialInstance make_greedy_trap(const GreedyTrapParams& p) {
    require(positive_finite(p.M), "greedy-trap: M must be positive");
    require(p.horizon >= 2, "greedy-trap: horizon must be >= 2");

    EnvironmentBuilder b;
    const StateId s0 = b.add_state();
    const StateId sa = b.add_state();
    const StateId sb = b.add_state();
    const StateId bottom = b.add_state();

    b.add_edge(s0, "a", sa, 0.0, 1.0);
    b.add_edge(s0, "b", sb, 0.0, 0.0);
    b.add_edge(sa, "a_bot", bottom, 0.0, 0.0);
    b.add_edge(sb, "a_bot", bottom, p.M, 0.0);
    b.add_edge(bottom, "stay", bottom, 0.0, 0.0);
    b.set_initial(s0);
    b.set_episode_horizon(p.horizon);
    return {b.build(), p.M};
}

AdversarialInstance make_beam_trap(const BeamTrapParams& p) {
    require(p.beam_width_B >= 1, "beam-trap: B must be >= 1");
    require(positive_finite(p.M), "beam-trap: M must be positive");
    require(p.horizon >= 2, "beam-trap: horizon must be >= 2");

    EnvironmentBuilder b;
    const StateId s0 = b.add_state();
    const StateId bottom = b.add_state();
    b.add_edge(bottom, "stay", bottom, 0.0, 0.0);

    const StateId sg = b.add_state();
    b.add_edge(s0, "g", sg, 0.0, 0.0);
    b.add_edge(sg, "a_bot", bottom, p.M, 0.0);
    for (int j = 1; j <= p.beam_width_B + 1; ++j) {
        const StateId sj = b.add_state();
        b.add_edge(s0, fmt::format("d{}", j), sj, 0.0, 1.0);
        b.add_edge(sj, "a_bot", bottom, 0.0, 0.0);
    }
    b.set_initial(s0);
    b.set_episode_horizon(p.horizon);
    return {b.build(), p.M};
}

int lookahead_chain_segments(const LookaheadChainParams& p) {
    return (p.horizon_H - 1) / (p.k + 1);
}

AdversarialInstance make_lookahead_chain(const LookaheadChainParams& p) {
    require(p.k >= 1, "lookahead-chain: k must be >= 1");
    require(p.horizon_H > p.k, "lookahead-chain: horizon must exceed k");
    require(positive_finite(p.R_max), "lookahead-chain: R_max must be positive");
    const int segments = lookahead_chain_segments(p);
    require(segments >= 1, "lookahead-chain: floor((H-1)/(k+1)) must be >= 1");

    EnvironmentBuilder b;
    StateId junction = b.add_state();
    b.set_initial(junction);
    for (int i = 0; i < segments; ++i) {
        const StateId next_junction = state_id(b.num_states() + 2 * p.k);
        for (int branch = 0; branch < 2; ++branch) {
            const bool good = branch == 0;
            StateId prev = b.add_state();
            b.add_edge(junction, good ? "g" : "d", prev, 0.0, good ? 0.0 : 1.0);
            for (int j = 1; j < p.k; ++j) {
                const StateId cur = b.add_state();
                b.add_edge(prev, "step", cur, 0.0, 0.0);
                prev = cur;
            }
            b.add_edge(prev, "advance", next_junction, good ? p.R_max : 0.0, 0.0);
        }
        junction = b.add_state();
        if (junction != next_junction) {
            throw std::logic_error("lookahead-chain: state allocation out of order");
        }
    }
    b.set_episode_horizon(p.horizon_H);
    return {b.build(), segments * p.R_max};
}

namespace {

struct Enumerator {
    const Environment& env;
    std::uint64_t budget;
    std::uint64_t visited = 0;

    double best(StateId s, int steps_left) {
        if (steps_left == 0 || env.is_terminal(s)) {
            if (++visited > budget) {
                throw InvalidParams("brute force: trajectory budget exceeded");
            }
            return 0.0;
        }
        double out = -std::numeric_limits<double>::infinity();
        for (const Edge& e : env.actions(s)) {
            out = std::max(out, e.reward + best(e.to, steps_left - 1));
        }
        return out;
    }
};

} // namespace

double brute_force_optimal_return(const Environment& env, std::uint64_t max_trajectories) {
    Enumerator en{env, max_trajectories};
    return en.best(env.initial_state(), env.episode_horizon());
}

} // namespace horizonlab
