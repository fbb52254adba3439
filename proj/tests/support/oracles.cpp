#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>

namespace horizonlab::testing {

Environment random_env(std::uint64_t seed, const RandomEnvOptions& opts) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int n = uniform(opts.min_states, opts.max_states);
    std::vector<std::vector<Edge>> edges(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        const int count = uniform(0, 9) == 0 ? 0 : uniform(1, opts.max_actions);
        for (int a = 0; a < count; ++a) {
            Edge e;
            e.label = "a" + std::to_string(a);
            e.to = state_id(uniform(0, n - 1));
            e.reward = uniform(-4, 8) * 0.25;
            e.surrogate = uniform(-8, 8) * 0.25;
            edges[static_cast<std::size_t>(s)].push_back(e);
        }
    }
    std::vector<StateId> answers;
    const int num_answers = uniform(0, opts.max_answers);
    for (int i = 0; i < num_answers; ++i) {
        const StateId a = state_id(uniform(0, n - 1));
        if (std::find(answers.begin(), answers.end(), a) == answers.end()) {
            answers.push_back(a);
        }
    }
    const StateId initial = state_id(uniform(0, n - 1));
    return Environment(n, initial, answers, edges, uniform(opts.min_horizon, opts.max_horizon));
}

std::vector<Trajectory> enumerate_trajectories(const Environment& env, StateId s, int steps) {
    std::vector<Trajectory> out;
    std::function<void(const Trajectory&, int)> rec = [&](const Trajectory& t, int left) {
        const StateId cur = t.back();
        if (left == 0 || env.is_terminal(cur)) {
            out.push_back(t);
            return;
        }
        for (int i = 0; i < env.num_actions(cur); ++i) {
            const Edge& e = env.edge(cur, action_id(i));
            Trajectory next = t;
            next.append(action_id(i), e.to, e.reward);
            rec(next, left - 1);
        }
    };
    rec(Trajectory(s), steps);
    return out;
}

double enumerated_q(const Environment& env, StateId s, ActionId a, int k) {
    const Edge& first = env.edge(s, a);
    double best = -std::numeric_limits<double>::infinity();
    for (const Trajectory& t : enumerate_trajectories(env, first.to, k - 1)) {
        double sum = first.reward;
        for (double r : t.step_rewards()) {
            sum += r;
        }
        best = std::max(best, sum);
    }
    return best;
}

std::vector<int> enumerated_distances(const Environment& env) {
    const int n = env.num_states();
    std::vector<int> dist(static_cast<std::size_t>(n), -1);
    for (int s = 0; s < n; ++s) {
        if (env.is_answer(state_id(s))) {
            dist[static_cast<std::size_t>(s)] = 0;
            continue;
        }
        // Iterative deepening over raw paths; answers end a path.
        std::function<bool(StateId, int)> reach = [&](StateId cur, int left) -> bool {
            if (env.is_answer(cur)) {
                return true;
            }
            if (left == 0) {
                return false;
            }
            for (const Edge& e : env.actions(cur)) {
                if (reach(e.to, left - 1)) {
                    return true;
                }
            }
            return false;
        };
        for (int len = 1; len < n; ++len) {
            if (reach(state_id(s), len)) {
                dist[static_cast<std::size_t>(s)] = len;
                break;
            }
        }
    }
    return dist;
}

std::vector<std::vector<StateId>> all_shortest_solutions(const Environment& env) {
    std::vector<std::vector<StateId>> found;
    const int n = env.num_states();
    for (int len = 0; len < n && found.empty(); ++len) {
        std::function<void(std::vector<StateId>&)> rec = [&](std::vector<StateId>& path) {
            const StateId cur = path.back();
            const int used = static_cast<int>(path.size()) - 1;
            if (env.is_answer(cur)) {
                if (used == len) {
                    found.push_back(path);
                }
                return;
            }
            if (used == len) {
                return;
            }
            for (const Edge& e : env.actions(cur)) {
                path.push_back(e.to);
                rec(path);
                path.pop_back();
            }
        };
        std::vector<StateId> path{env.initial_state()};
        rec(path);
    }
    return found;
}

std::optional<int> first_error_by_paths(const Trajectory& traj, const std::vector<std::vector<StateId>>& solutions) {
    const auto& states = traj.states();
    int matched = 0;
    for (const auto& sol : solutions) {
        int m = 0;
        while (m + 1 < static_cast<int>(states.size()) && m + 1 < static_cast<int>(sol.size()) &&
               states[static_cast<std::size_t>(m + 1)] == sol[static_cast<std::size_t>(m + 1)]) {
            ++m;
        }
        matched = std::max(matched, m);
    }
    if (matched == traj.length()) {
        return std::nullopt;
    }
    return matched + 1;
}

bool is_trap_by_enumeration(const Environment& env, StateId s, ActionId a, double quantile, int min_lengthening) {
    const auto dist = enumerated_distances(env);
    const int n = env.num_actions(s);
    const double u = env.edge(s, a).surrogate;
    int higher = 0;
    for (int i = 0; i < n; ++i) {
        higher += env.edge(s, action_id(i)).surrogate > u ? 1 : 0;
    }
    const int tier = std::max(1, static_cast<int>(std::ceil(quantile * n)));
    if (higher >= tier) {
        return false;
    }
    int best_other = -1;
    for (int i = 0; i < n; ++i) {
        const int d = dist[static_cast<std::size_t>(index(env.edge(s, action_id(i)).to))];
        if (i != index(a) && d >= 0 && (best_other < 0 || d < best_other)) {
            best_other = d;
        }
    }
    if (best_other < 0) {
        return false;
    }
    const int mine = dist[static_cast<std::size_t>(index(env.edge(s, a).to))];
    return mine < 0 || mine - best_other >= min_lengthening;
}

Trajectory random_walk(const Environment& env, std::uint64_t seed, int steps) {
    std::mt19937_64 rng(seed);
    Trajectory t(env.initial_state());
    for (int i = 0; i < steps && !env.is_terminal(t.back()); ++i) {
        const int n = env.num_actions(t.back());
        const ActionId a = action_id(std::uniform_int_distribution<int>(0, n - 1)(rng));
        const Edge& e = env.edge(t.back(), a);
        t.append(a, e.to, e.reward);
    }
    return t;
}

} // namespace horizonlab::testing
