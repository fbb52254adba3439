#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "horizonlab/env.hpp"

namespace horizonlab {

// ---------------------------------------------------------------------------
// Step-wise greedy

/// argmax_a u(s, a), lowest action index on ties. Costs |A(s)| surrogate calls.
ActionId greedy_decide(const Environment& env, StateId s, BudgetMeter& meter);

class GreedyPolicy final : public DecisionPolicy {
public:
    std::string name() const override { return "greedy"; }
    ActionId decide(const Environment& env, StateId state, int steps_remaining, BudgetMeter& meter) override;
};

// ---------------------------------------------------------------------------
// Beam search over accumulated surrogate scores

enum class BeamCommit {
    recede,      // replan after every executed action
    full_prefix, // execute the whole best prefix before replanning
};

struct BeamConfig {
    int beam_width_B = 8;
    int beam_depth = 0; // 0: the environment's episode horizon
    BeamCommit commit = BeamCommit::recede;
};

struct BeamPrefix {
    std::vector<ActionId> actions;
    std::vector<StateId> states; // states.size() == actions.size() + 1
    double score = 0.0;          // sum of u along the prefix
    bool terminal = false;
};

/// layers[d] holds the survivors after extending to depth d+1.
struct BeamTrace {
    std::vector<std::vector<BeamPrefix>> layers;

    const BeamPrefix& best() const { return layers.back().front(); }
};

/// Expands prefixes depth by depth, keeping the top-B by accumulated u
/// (ties: lexicographically smallest action sequence). Terminal prefixes
/// are carried forward unchanged and keep competing.
BeamTrace beam_search(const Environment& env, StateId s, int beam_width, int depth, BudgetMeter& meter);

ActionId beam_decide(const Environment& env, StateId s, const BeamConfig& cfg, BudgetMeter& meter);

class BeamPolicy final : public DecisionPolicy {
public:
    explicit BeamPolicy(BeamConfig cfg = {});

    std::string name() const override { return "beam"; }
    void reset(std::uint64_t seed) override;
    ActionId decide(const Environment& env, StateId state, int steps_remaining, BudgetMeter& meter) override;

    const BeamConfig& config() const noexcept { return cfg_; }

private:
    BeamConfig cfg_;
    std::deque<ActionId> planned_actions_;
    std::deque<StateId> planned_states_;
};

// ---------------------------------------------------------------------------
// Truncated k-step lookahead

enum class Continuation {
    exact,               // max over every continuation (truncated lookahead value)
    greedy_by_surrogate, // follow argmax u after the candidate action
};

enum class LookaheadDepth {
    // k transitions in total, the candidate action included: sum_{t<k} r.
    total_steps,
    // the candidate action plus k simulated steps after it.
    steps_after_action,
};

struct LookaheadConfig {
    int k = 2;
    Continuation continuation = Continuation::exact;
    LookaheadDepth depth_mode = LookaheadDepth::total_steps;

    // Number of simulated transitions, the candidate action included.
    int simulated_steps() const noexcept { return depth_mode == LookaheadDepth::total_steps ? k : k + 1; }
};

/// Return of the candidate action followed by the best (or greedy)
/// continuation, over `steps` transitions in total. Rewards past a terminal
/// state or past `steps` count as zero.
double lookahead_value(const Environment& env, StateId s, ActionId a, int steps, Continuation continuation,
                       BudgetMeter& meter);

/// argmax_a of the lookahead value; ties broken by u, then lowest index.
ActionId lookahead_decide(const Environment& env, StateId s, const LookaheadConfig& cfg, BudgetMeter& meter);

class LookaheadPolicy final : public DecisionPolicy {
public:
    explicit LookaheadPolicy(LookaheadConfig cfg = {});

    std::string name() const override { return "lookahead"; }
    ActionId decide(const Environment& env, StateId state, int steps_remaining, BudgetMeter& meter) override;

    const LookaheadConfig& config() const noexcept { return cfg_; }

private:
    LookaheadConfig cfg_;
};

} // namespace horizonlab
