#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace horizonlab {

// Dense index into an environment's state table.
enum class StateId : std::int32_t {};
// Dense index into the owning state's action list.
enum class ActionId : std::int32_t {};

constexpr int index(StateId s) noexcept { return static_cast<int>(s); }
constexpr int index(ActionId a) noexcept { return static_cast<int>(a); }
constexpr StateId state_id(int i) noexcept { return static_cast<StateId>(i); }
constexpr ActionId action_id(int i) noexcept { return static_cast<ActionId>(i); }

/// Call counters standing in for planning cost. Each counter only grows
/// during a run; meters from different episodes are summed afterwards.
struct BudgetMeter {
    std::uint64_t transition_calls = 0;
    std::uint64_t surrogate_calls = 0;
    std::uint64_t proposer_calls = 0;
    std::uint64_t evaluator_calls = 0;

    BudgetMeter& operator+=(const BudgetMeter& other) noexcept;
    bool operator==(const BudgetMeter&) const = default;
};

/// One outgoing action of a state: its label, deterministic successor,
/// planning-time reward r(s, a, s') and step-wise surrogate score u(s, a).
struct Edge {
    std::string label;
    StateId to{};
    double reward = 0.0;
    double surrogate = 0.0;
};

struct StepResult {
    StateId next{};
    double reward = 0.0;
};

/// Deterministic state-transition system. Immutable once built, so a single
/// instance can be shared read-only between episode workers.
class Environment {
public:
    Environment(int num_states, StateId initial, std::vector<StateId> answers,
                std::vector<std::vector<Edge>> edges, int episode_horizon);

    int num_states() const noexcept { return static_cast<int>(edges_.size()); }
    StateId initial_state() const noexcept { return initial_; }
    int episode_horizon() const noexcept { return episode_horizon_; }
    const std::vector<StateId>& answers() const noexcept { return answers_; }

    std::span<const Edge> actions(StateId s) const;
    int num_actions(StateId s) const { return static_cast<int>(actions(s).size()); }
    bool has_action(StateId s, ActionId a) const;
    bool is_answer(StateId s) const;
    // No actions, or an answer state.
    bool is_terminal(StateId s) const;

    // Unmetered access for oracles, diagnostics and serialization.
    const Edge& edge(StateId s, ActionId a) const;

    // Metered access for policies.
    StepResult step(StateId s, ActionId a, BudgetMeter& meter) const;
    double surrogate(StateId s, ActionId a, BudgetMeter& meter) const;

private:
    void check_state(StateId s) const;

    StateId initial_{};
    std::vector<StateId> answers_;
    std::vector<bool> is_answer_;
    std::vector<std::vector<Edge>> edges_;
    int episode_horizon_ = 1;
};

/// Incremental construction helper; states are allocated densely.
class EnvironmentBuilder {
public:
    StateId add_state();
    StateId add_states(int count); // returns the first of `count` new ids
    ActionId add_edge(StateId from, std::string label, StateId to, double reward, double surrogate);
    void set_initial(StateId s) { initial_ = s; }
    void add_answer(StateId s) { answers_.push_back(s); }
    void set_episode_horizon(int h) { horizon_ = h; }
    int num_states() const noexcept { return static_cast<int>(edges_.size()); }
    std::vector<Edge>& edges_of(StateId s);

    Environment build() const;

private:
    StateId initial_{};
    std::vector<StateId> answers_;
    std::vector<std::vector<Edge>> edges_;
    int horizon_ = 1;
};

/// Alternating state/action sequence with per-step rewards. Built by
/// appending steps, so |states| = |actions| + 1 = |step_rewards| + 1 holds
/// by construction.
class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(StateId start);

    void append(ActionId a, StateId next, double reward);

    const std::vector<StateId>& states() const noexcept { return states_; }
    const std::vector<ActionId>& actions() const noexcept { return actions_; }
    const std::vector<double>& step_rewards() const noexcept { return rewards_; }
    double cumulative_return() const noexcept { return cumulative_; }
    int length() const noexcept { return static_cast<int>(actions_.size()); }
    StateId front() const { return states_.front(); }
    StateId back() const { return states_.back(); }

    // First `steps` actions, and the remainder starting at state `steps`.
    Trajectory prefix(int steps) const;
    Trajectory suffix(int steps) const;

    bool operator==(const Trajectory&) const = default;

private:
    std::vector<StateId> states_;
    std::vector<ActionId> actions_;
    std::vector<double> rewards_;
    double cumulative_ = 0.0;
};

/// Sum of step rewards, recomputed from the stored rewards.
double trajectory_return(const Trajectory& traj);

/// True when every transition of `traj` agrees with `env` (successor and reward).
bool is_consistent(const Trajectory& traj, const Environment& env);

/// Interface shared by all decision policies. One instance per concurrent
/// episode; `reset` clears any per-episode scratch.
class DecisionPolicy {
public:
    virtual ~DecisionPolicy() = default;

    virtual std::string name() const = 0;
    virtual void reset(std::uint64_t seed) { (void)seed; }
    // `steps_remaining` is the number of steps left in the episode (>= 1).
    virtual ActionId decide(const Environment& env, StateId state, int steps_remaining,
                            BudgetMeter& meter) = 0;
};

/// Receding-horizon loop: ask the policy for one action, apply it, repeat
/// until a terminal state or the episode horizon.
Trajectory run_episode(const Environment& env, DecisionPolicy& policy, std::uint64_t seed,
                       BudgetMeter& meter);

} // namespace horizonlab
