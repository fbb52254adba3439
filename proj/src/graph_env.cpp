#include "horizonlab/graph_env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include <fmt/format.h>

#include "horizonlab/errors.hpp"

namespace horizonlab {

void GraphInstanceSpec::validate() const {
    if (answer_distance < 1) {
        throw InvalidParams("graph: answer_distance must be >= 1");
    }
    if (branching_min < 1 || branching_max < branching_min) {
        throw InvalidParams("graph: need 1 <= branching_min <= branching_max");
    }
    if (distractor_depth < 1) {
        throw InvalidParams("graph: distractor_depth must be >= 1");
    }
    for (double p : {trap_rate_target, dead_end_fraction}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InvalidParams("graph: rates must lie in [0, 1]");
        }
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma) || !std::isfinite(trap_bonus)) {
        throw InvalidParams("graph: noise_sigma must be >= 0 and trap_bonus finite");
    }
    if (num_states < 0 || episode_horizon < 0) {
        throw InvalidParams("graph: num_states and episode_horizon must be >= 0");
    }
}

namespace {

struct RawEdge {
    int to = 0;
    bool trap = false;
};

class Topology {
public:
    explicit Topology(std::mt19937_64& rng, const GraphInstanceSpec& spec) : rng_(rng), spec_(spec) {}

    int add_state() {
        out_.emplace_back();
        return static_cast<int>(out_.size()) - 1;
    }

    void add_edge(int from, int to, bool trap = false) { out_[static_cast<std::size_t>(from)].push_back({to, trap}); }

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool bernoulli(double p) { return std::bernoulli_distribution(p)(rng_); }

    // Tree of `depth` levels with down/up edges; no way back out of it.
    int dead_region(int depth) {
        const int root = add_state();
        grow(root, 1, depth);
        return root;
    }

    // Chain of length L from `from` that rejoins at `rejoin`; returns its entry.
    int detour(int from, int rejoin) {
        const int length = uniform(1, spec_.distractor_depth);
        (void)from;
        const int entry = add_state();
        int prev = entry;
        for (int j = 1; j < length; ++j) {
            const int cur = add_state();
            add_edge(prev, cur);
            prev = cur;
        }
        add_edge(prev, rejoin);
        return entry;
    }

    std::vector<std::vector<RawEdge>>& out() { return out_; }

private:
    void grow(int node, int level, int depth) {
        if (level >= depth) {
            return;
        }
        const int children = uniform(1, 2);
        for (int c = 0; c < children; ++c) {
            const int child = add_state();
            add_edge(node, child);
            add_edge(child, node);
            grow(child, level + 1, depth);
        }
    }

    std::mt19937_64& rng_;
    const GraphInstanceSpec& spec_;
    std::vector<std::vector<RawEdge>> out_;
};

enum class Branch { dead, detour, back };

} // namespace

GraphInstance generate_instance(const GraphInstanceSpec& spec) {
    spec.validate();
    const int D = spec.answer_distance;
    const int horizon = spec.episode_horizon > 0 ? spec.episode_horizon : 2 * D + 2;
    if (horizon < D) {
        throw InfeasibleSpec(fmt::format("graph: episode_horizon {} shorter than answer_distance {}", horizon, D));
    }

    std::mt19937_64 rng(spec.seed);
    Topology topo(rng, spec);
    std::vector<int> chain;
    for (int i = 0; i <= D; ++i) {
        chain.push_back(topo.add_state());
    }

    for (int i = 0; i < D; ++i) {
        const int here = chain[static_cast<std::size_t>(i)];
        const int next = chain[static_cast<std::size_t>(i + 1)];
        topo.add_edge(here, next);

        const bool has_trap = i == 0 || topo.bernoulli(spec.trap_rate_target);
        int distractors = topo.uniform(spec.branching_min, spec.branching_max) - 1;
        if (has_trap) {
            distractors = std::max(distractors, 1);
        }
        for (int j = 0; j < distractors; ++j) {
            const bool trap = has_trap && j == 0;
            Branch kind{};
            if (trap) {
                kind = topo.bernoulli(spec.dead_end_fraction) ? Branch::dead : Branch::detour;
            } else {
                kind = static_cast<Branch>(topo.uniform(0, i > 0 ? 2 : 1));
            }
            switch (kind) {
            case Branch::dead:
                topo.add_edge(here, topo.dead_region(spec.distractor_depth), trap);
                break;
            case Branch::detour:
                topo.add_edge(here, topo.detour(here, next), trap);
                break;
            case Branch::back:
                topo.add_edge(here, chain[static_cast<std::size_t>(i - 1)], trap);
                break;
            }
        }
    }

    auto& out = topo.out();
    const int n = static_cast<int>(out.size());
    if (spec.num_states > 0 && n > spec.num_states) {
        throw InfeasibleSpec(fmt::format("graph: structure needs {} states, num_states is {}", n, spec.num_states));
    }

    // Distances on the bare topology, then scores.
    std::vector<std::vector<Edge>> edges(static_cast<std::size_t>(n));
    std::vector<std::vector<bool>> trap_flags(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        for (const RawEdge& e : out[static_cast<std::size_t>(s)]) {
            edges[static_cast<std::size_t>(s)].push_back({"", state_id(e.to), 0.0, 0.0});
            trap_flags[static_cast<std::size_t>(s)].push_back(e.trap);
        }
    }
    const StateId answer = state_id(chain.back());
    const OracleInfo oracle = compute_oracle(Environment(n, state_id(chain.front()), {answer}, edges, horizon));

    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
    const bool add_noise = spec.noise_sigma > 0.0 && spec.surrogate_mode != SurrogateMode::aligned;
    int label_counter = 0;
    std::vector<std::pair<StateId, ActionId>> trap_edges;
    for (int s = 0; s < n; ++s) {
        auto& row = edges[static_cast<std::size_t>(s)];
        std::vector<std::size_t> order(row.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            order[k] = k;
        }
        std::shuffle(order.begin(), order.end(), rng);

        std::vector<Edge> shuffled;
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            Edge e = row[order[pos]];
            const bool trap = trap_flags[static_cast<std::size_t>(s)][order[pos]];
            const int ds = oracle.dist[static_cast<std::size_t>(s)];
            const int dn = oracle.distance(e.to);
            double u = 0.0;
            if (ds != OracleInfo::unreachable) {
                u = dn == OracleInfo::unreachable ? -1.0 : static_cast<double>(ds - dn);
            }
            if (spec.surrogate_mode == SurrogateMode::adversarial && trap) {
                u = 1.0 + spec.trap_bonus;
            }
            if (add_noise) {
                u += noise(rng);
            }
            e.surrogate = u;
            e.reward = e.to == answer ? 1.0 : 0.0;
            e.label = fmt::format("r{}", label_counter++);
            if (trap) {
                trap_edges.emplace_back(state_id(s), action_id(static_cast<int>(pos)));
            }
            shuffled.push_back(std::move(e));
        }
        row = std::move(shuffled);
    }

    Environment env(n, state_id(chain.front()), {answer}, std::move(edges), horizon);
    return {std::move(env), oracle, std::move(trap_edges)};
}

OracleInfo compute_oracle(const Environment& env) {
    const int n = env.num_states();
    std::vector<std::vector<int>> predecessors(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        if (env.is_answer(state_id(s))) {
            continue; // episodes stop at answers
        }
        for (const Edge& e : env.actions(state_id(s))) {
            predecessors[static_cast<std::size_t>(index(e.to))].push_back(s);
        }
    }
    OracleInfo info;
    info.dist.assign(static_cast<std::size_t>(n), OracleInfo::unreachable);
    std::deque<int> frontier;
    for (StateId a : env.answers()) {
        if (info.dist[static_cast<std::size_t>(index(a))] != 0) {
            info.dist[static_cast<std::size_t>(index(a))] = 0;
            frontier.push_back(index(a));
        }
    }
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop_front();
        for (int u : predecessors[static_cast<std::size_t>(v)]) {
            if (info.dist[static_cast<std::size_t>(u)] == OracleInfo::unreachable) {
                info.dist[static_cast<std::size_t>(u)] = info.dist[static_cast<std::size_t>(v)] + 1;
                frontier.push_back(u);
            }
        }
    }
    return info;
}

const TrapLabel* TrapLabeling::find(StateId s, ActionId a) const {
    for (const TrapLabel& l : labels) {
        if (l.state == s && l.action == a) {
            return &l;
        }
    }
    return nullptr;
}

TrapLabeling label_traps(const Environment& env, const OracleInfo& oracle, const TrapLabelOptions& opts) {
    TrapLabeling out;
    for (int si = 0; si < env.num_states(); ++si) {
        const StateId s = state_id(si);
        if (!oracle.reachable(s) || env.is_terminal(s)) {
            continue;
        }
        const auto actions = env.actions(s);
        const int n = static_cast<int>(actions.size());

        std::vector<double> scores;
        for (const Edge& e : actions) {
            scores.push_back(e.surrogate);
        }
        std::sort(scores.begin(), scores.end(), std::greater<>());
        const int tier = std::max(1, static_cast<int>(std::ceil(opts.top_tier_quantile * n)));
        const double threshold = scores[static_cast<std::size_t>(std::min(tier, n) - 1)];

        for (int ai = 0; ai < n; ++ai) {
            const Edge& e = actions[static_cast<std::size_t>(ai)];
            int best_alt = OracleInfo::unreachable;
            for (int bi = 0; bi < n; ++bi) {
                const int d = oracle.distance(actions[static_cast<std::size_t>(bi)].to);
                if (bi != ai && d != OracleInfo::unreachable && (best_alt == OracleInfo::unreachable || d < best_alt)) {
                    best_alt = d;
                }
            }
            TrapLabel label{s, action_id(ai), false, TrapReason::unreachable, 0};
            const bool top_tier = e.surrogate >= threshold;
            const int d = oracle.distance(e.to);
            if (top_tier && best_alt != OracleInfo::unreachable) {
                if (d == OracleInfo::unreachable) {
                    label.is_trap = true;
                } else if (d - best_alt >= opts.min_lengthening) {
                    label.is_trap = true;
                    label.reason = TrapReason::lengthened;
                    label.lengthened_by = d - best_alt;
                }
            }
            out.labels.push_back(label);
        }

        if (s == env.initial_state()) {
            bool has_safe = false;
            for (const TrapLabel& l : out.labels) {
                if (l.state != s) {
                    continue;
                }
                out.initial_trap_count += l.is_trap ? 1 : 0;
                has_safe = has_safe || (!l.is_trap && oracle.reachable(env.edge(s, l.action).to));
            }
            out.initial_excluded = !has_safe;
        }
    }
    return out;
}

std::string to_string(SurrogateMode mode) {
    switch (mode) {
    case SurrogateMode::aligned:
        return "aligned";
    case SurrogateMode::adversarial:
        return "adversarial";
    case SurrogateMode::noisy:
        return "noisy";
    }
    return "?";
}

SurrogateMode surrogate_mode_from_string(const std::string& s) {
    if (s == "aligned") {
        return SurrogateMode::aligned;
    }
    if (s == "adversarial") {
        return SurrogateMode::adversarial;
    }
    if (s == "noisy") {
        return SurrogateMode::noisy;
    }
    throw ConfigError(fmt::format("unknown surrogate mode '{}'", s));
}

} // namespace horizonlab
