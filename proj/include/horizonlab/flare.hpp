#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "horizonlab/env.hpp"
#include "horizonlab/memory.hpp"

namespace horizonlab {

enum class MemoryScope {
    per_plan_call, // memory starts empty at every planning call
    per_episode,   // memory persists across the decisions of one episode
};

struct FlareConfig {
    int simulations_S = 16;
    int rollout_depth = 3;
    double exploration_c = 1.4;
    int proposal_k = 8;
    int memory_capacity = 200;
    double similarity_threshold_delta = 0.9;
    MemoryScope memory_scope = MemoryScope::per_plan_call;
    SimilarityKind similarity = SimilarityKind::jaccard;
    bool use_memory = true;

    void validate() const;
};

/// Candidate generator used at expansion: at most k legal actions of `s`.
class Proposer {
public:
    virtual ~Proposer() = default;
    virtual std::string name() const = 0;
    virtual std::vector<ActionId> propose(const Environment& env, StateId s, int k, std::uint64_t seed,
                                          BudgetMeter& meter) = 0;
};

/// The first k actions in the state's own action order. Uses no scores.
class FirstKProposer final : public Proposer {
public:
    std::string name() const override { return "first-k"; }
    std::vector<ActionId> propose(const Environment& env, StateId s, int k, std::uint64_t seed,
                                  BudgetMeter& meter) override;
};

/// Every action, ignoring k (no pruning).
class IdentityProposer final : public Proposer {
public:
    std::string name() const override { return "identity"; }
    std::vector<ActionId> propose(const Environment& env, StateId s, int k, std::uint64_t seed,
                                  BudgetMeter& meter) override;
};

/// The k actions with the highest surrogate score (stable by index).
class SurrogateTopKProposer final : public Proposer {
public:
    std::string name() const override { return "surrogate-top-k"; }
    std::vector<ActionId> propose(const Environment& env, StateId s, int k, std::uint64_t seed,
                                  BudgetMeter& meter) override;
};

/// Scores a simulated trajectory.
class TrajectoryEvaluator {
public:
    virtual ~TrajectoryEvaluator() = default;
    virtual std::string name() const = 0;
    virtual double evaluate(const Environment& env, const Trajectory& traj) = 0;
};

/// Sum of the planning-time rewards along the trajectory.
class ReturnEvaluator final : public TrajectoryEvaluator {
public:
    std::string name() const override { return "return"; }
    double evaluate(const Environment& env, const Trajectory& traj) override;
};

struct EdgeStats {
    ActionId action{};
    int visits = 0;
    double value_sum = 0.0;

    double q() const noexcept { return visits > 0 ? value_sum / visits : 0.0; }
};

struct TreeNode {
    bool expanded = false;
    int visits = 0;
    std::vector<EdgeStats> children; // proposer order
};

/// Search statistics keyed by state within one planning call.
class SearchTree {
public:
    const TreeNode* find(StateId s) const;
    TreeNode& node(StateId s); // creates an unexpanded node on first use
    bool is_expanded(StateId s) const;

    void expand(StateId s, std::span<const ActionId> actions);
    const EdgeStats* edge(StateId s, ActionId a) const;

    /// Adds one visit and `value` to every (s, a) on the path and one visit to each source state.
    void backup(std::span<const std::pair<StateId, ActionId>> path, double value);

    std::size_t size() const noexcept { return nodes_.size(); }
    const std::map<StateId, TreeNode>& nodes() const noexcept { return nodes_; }

private:
    std::map<StateId, TreeNode> nodes_;
};

/// argmax_a Q(s,a) + c * sqrt(log(max(N(s),1)) / (N(s,a)+1)), lowest action index on ties.
ActionId ucb_select(const SearchTree& tree, StateId s, double c);

struct SimulationRecord {
    std::vector<std::pair<StateId, ActionId>> path;
    double value = 0.0;
    bool memory_hit = false;
};

struct PlanResult {
    ActionId action{};
    SearchTree tree;
    std::vector<SimulationRecord> log;
};

/// One receding-horizon planning call. The root is expanded before the
/// simulation loop; each simulation descends by UCB, stops after expanding
/// a new node, at a terminal node, on revisiting a state of its own path, or
/// after `rollout_depth` steps (clamped to `steps_remaining`). The partial
/// trajectory's value comes from memory or the evaluator and is backed up
/// along the path. Returns argmax_a Q(root, a) over visited root edges.
PlanResult plan(const Environment& env, StateId root, const FlareConfig& cfg, Proposer& proposer,
                TrajectoryEvaluator& evaluator, TrajectoryMemory* memory, BudgetMeter& meter,
                std::uint64_t seed, std::optional<int> steps_remaining = std::nullopt);

class FlarePolicy final : public DecisionPolicy {
public:
    explicit FlarePolicy(FlareConfig cfg = {}, std::shared_ptr<Proposer> proposer = nullptr,
                         std::shared_ptr<TrajectoryEvaluator> evaluator = nullptr);

    std::string name() const override { return "flare"; }
    void reset(std::uint64_t seed) override;
    ActionId decide(const Environment& env, StateId state, int steps_remaining, BudgetMeter& meter) override;

    const FlareConfig& config() const noexcept { return cfg_; }
    const std::optional<PlanResult>& last_plan() const noexcept { return last_plan_; }

private:
    FlareConfig cfg_;
    std::shared_ptr<Proposer> proposer_;
    std::shared_ptr<TrajectoryEvaluator> evaluator_;
    TrajectoryMemory memory_;
    std::uint64_t seed_ = 0;
    std::uint64_t decisions_ = 0;
    std::optional<PlanResult> last_plan_;
};

} // namespace horizonlab
