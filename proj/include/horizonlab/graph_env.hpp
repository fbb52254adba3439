#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "horizonlab/env.hpp"

namespace horizonlab {

enum class SurrogateMode {
    aligned,     // u = dist(s) - dist(s'), -1 into an unreachable region
    adversarial, // aligned, with designated trap edges scored above progress
    noisy,       // aligned plus Gaussian noise
};

/// Parameters of a synthetic oracle subgraph: a solution chain of
/// `answer_distance` hops from the initial state, with distractor branches
/// (dead-end regions, detours that rejoin the chain later, back edges) at
/// every chain state.
struct GraphInstanceSpec {
    std::uint64_t seed = 0;
    int num_states = 0; // upper bound on generated states; 0 = unbounded
    int branching_min = 2;
    int branching_max = 4;
    int answer_distance = 3;
    int distractor_depth = 2;
    SurrogateMode surrogate_mode = SurrogateMode::adversarial;
    double noise_sigma = 0.0;       // noisy mode; also perturbs adversarial scores when > 0
    double trap_rate_target = 0.5;  // chance that a chain state past the first hosts a trap branch
    double trap_bonus = 1.0;        // adversarial: trap score = 1 + trap_bonus
    double dead_end_fraction = 0.5; // share of trap branches that lose reachability
    int episode_horizon = 0;        // 0: 2 * answer_distance + 2

    void validate() const;
};

/// Exact shortest-hop distances to the answer set (reverse BFS).
struct OracleInfo {
    static constexpr int unreachable = -1;

    std::vector<int> dist;

    int distance(StateId s) const { return dist.at(static_cast<std::size_t>(index(s))); }
    bool reachable(StateId s) const { return distance(s) != unreachable; }
};

struct GraphInstance {
    Environment env;
    OracleInfo oracle;
    // Edges built as trap branches (inflated in adversarial mode).
    std::vector<std::pair<StateId, ActionId>> trap_edges;
};

GraphInstance generate_instance(const GraphInstanceSpec& spec);

OracleInfo compute_oracle(const Environment& env);

enum class TrapReason { unreachable, lengthened };

struct TrapLabel {
    StateId state{};
    ActionId action{};
    bool is_trap = false;
    TrapReason reason = TrapReason::unreachable; // meaningful when is_trap
    int lengthened_by = 0;                       // for TrapReason::lengthened
};

struct TrapLabelOptions {
    double top_tier_quantile = 0.25;
    int min_lengthening = 1;
};

struct TrapLabeling {
    // One label per action of every state that can still reach an answer.
    std::vector<TrapLabel> labels;
    // No non-trap action at the initial state keeps a solution path.
    bool initial_excluded = false;
    int initial_trap_count = 0;

    const TrapLabel* find(StateId s, ActionId a) const;
};

/// An action is a trap when its surrogate score is in the top tier at its
/// state and its successor is unreachable or at least `min_lengthening` hops
/// further from the answer than the best alternative action's successor.
TrapLabeling label_traps(const Environment& env, const OracleInfo& oracle, const TrapLabelOptions& opts = {});

std::string to_string(SurrogateMode mode);
SurrogateMode surrogate_mode_from_string(const std::string& s);

} // namespace horizonlab
