#include "horizonlab/flare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include <fmt/format.h>

#include "horizonlab/errors.hpp"

namespace horizonlab {

void FlareConfig::validate() const {
    if (simulations_S < 1) {
        throw InvalidParams("flare: simulations_S must be >= 1");
    }
    if (rollout_depth < 1) {
        throw InvalidParams("flare: rollout_depth must be >= 1");
    }
    if (!(exploration_c >= 0.0) || !std::isfinite(exploration_c)) {
        throw InvalidParams("flare: exploration_c must be a nonnegative real");
    }
    if (proposal_k < 1) {
        throw InvalidParams("flare: proposal_k must be >= 1");
    }
    if (memory_capacity < 1) {
        throw InvalidParams("flare: memory_capacity must be >= 1");
    }
    if (!(similarity_threshold_delta >= 0.0 && similarity_threshold_delta <= 1.0)) {
        throw InvalidParams("flare: similarity_threshold_delta must lie in [0, 1]");
    }
}

std::vector<ActionId> FirstKProposer::propose(const Environment& env, StateId s, int k, std::uint64_t,
                                              BudgetMeter&) {
    const int n = std::min(k, env.num_actions(s));
    std::vector<ActionId> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.push_back(action_id(i));
    }
    return out;
}

std::vector<ActionId> IdentityProposer::propose(const Environment& env, StateId s, int, std::uint64_t,
                                                BudgetMeter&) {
    std::vector<ActionId> out;
    for (int i = 0; i < env.num_actions(s); ++i) {
        out.push_back(action_id(i));
    }
    return out;
}

std::vector<ActionId> SurrogateTopKProposer::propose(const Environment& env, StateId s, int k, std::uint64_t,
                                                     BudgetMeter& meter) {
    std::vector<std::pair<double, int>> scored;
    for (int i = 0; i < env.num_actions(s); ++i) {
        scored.emplace_back(env.surrogate(s, action_id(i), meter), i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    scored.resize(std::min<std::size_t>(scored.size(), static_cast<std::size_t>(std::max(k, 0))));
    std::vector<ActionId> out;
    for (const auto& [u, i] : scored) {
        out.push_back(action_id(i));
    }
    return out;
}

double ReturnEvaluator::evaluate(const Environment&, const Trajectory& traj) {
    return trajectory_return(traj);
}

const TreeNode* SearchTree::find(StateId s) const {
    const auto it = nodes_.find(s);
    return it == nodes_.end() ? nullptr : &it->second;
}

TreeNode& SearchTree::node(StateId s) { return nodes_[s]; }

bool SearchTree::is_expanded(StateId s) const {
    const TreeNode* n = find(s);
    return n != nullptr && n->expanded;
}

void SearchTree::expand(StateId s, std::span<const ActionId> actions) {
    TreeNode& n = node(s);
    n.expanded = true;
    n.children.clear();
    for (ActionId a : actions) {
        n.children.push_back({a, 0, 0.0});
    }
}

const EdgeStats* SearchTree::edge(StateId s, ActionId a) const {
    const TreeNode* n = find(s);
    if (n == nullptr) {
        return nullptr;
    }
    for (const EdgeStats& e : n->children) {
        if (e.action == a) {
            return &e;
        }
    }
    return nullptr;
}

void SearchTree::backup(std::span<const std::pair<StateId, ActionId>> path, double value) {
    for (const auto& [s, a] : path) {
        TreeNode& n = node(s);
        ++n.visits;
        auto it = std::find_if(n.children.begin(), n.children.end(), [a = a](const EdgeStats& e) { return e.action == a; });
        if (it == n.children.end()) {
            throw PlanningError(fmt::format("backup through unexpanded edge ({}, {})", index(s), index(a)));
        }
        ++it->visits;
        it->value_sum += value;
    }
}

ActionId ucb_select(const SearchTree& tree, StateId s, double c) {
    const TreeNode* n = tree.find(s);
    if (n == nullptr || !n->expanded || n->children.empty()) {
        throw PlanningError(fmt::format("ucb_select at unexpanded or childless state {}", index(s)));
    }
    const double log_n = std::log(static_cast<double>(std::max(n->visits, 1)));
    const EdgeStats* best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const EdgeStats& e : n->children) {
        const double score = e.q() + c * std::sqrt(log_n / (e.visits + 1));
        if (score > best_score || (score == best_score && e.action < best->action)) {
            best_score = score;
            best = &e;
        }
    }
    return best->action;
}

namespace {

std::vector<ActionId> checked_proposal(const Environment& env, StateId s, Proposer& proposer, int k,
                                       std::uint64_t seed, BudgetMeter& meter) {
    ++meter.proposer_calls;
    std::vector<ActionId> proposed = proposer.propose(env, s, k, seed, meter);
    std::vector<ActionId> out;
    for (ActionId a : proposed) {
        if (!env.has_action(s, a)) {
            throw PlanningError(fmt::format("proposer {} returned illegal action {} at state {}", proposer.name(),
                                            index(a), index(s)));
        }
        if (std::find(out.begin(), out.end(), a) == out.end()) {
            out.push_back(a);
        }
    }
    return out;
}

void expand_node(const Environment& env, SearchTree& tree, StateId s, Proposer& proposer, int k,
                 std::uint64_t seed, BudgetMeter& meter) {
    if (env.is_terminal(s)) {
        tree.expand(s, {});
        return;
    }
    const auto actions = checked_proposal(env, s, proposer, k, seed, meter);
    tree.expand(s, actions);
}

ActionId root_argmax(const Environment& env, const SearchTree& tree, StateId root, BudgetMeter& meter) {
    const TreeNode* n = tree.find(root);
    const EdgeStats* best = nullptr;
    for (const EdgeStats& e : n->children) {
        if (e.visits == 0) {
            continue;
        }
        if (best == nullptr || e.q() > best->q() || (e.q() == best->q() && e.action < best->action)) {
            best = &e;
        }
    }
    if (best != nullptr) {
        return best->action;
    }
    // No simulated root edge: fall back to the surrogate order of the proposal.
    ActionId fallback = n->children.front().action;
    double best_u = -std::numeric_limits<double>::infinity();
    for (const EdgeStats& e : n->children) {
        const double u = env.surrogate(root, e.action, meter);
        if (u > best_u || (u == best_u && e.action < fallback)) {
            best_u = u;
            fallback = e.action;
        }
    }
    return fallback;
}

} // namespace

PlanResult plan(const Environment& env, StateId root, const FlareConfig& cfg, Proposer& proposer,
                TrajectoryEvaluator& evaluator, TrajectoryMemory* memory, BudgetMeter& meter, std::uint64_t seed,
                std::optional<int> steps_remaining) {
    cfg.validate();
    if (env.is_terminal(root)) {
        throw TerminalState(fmt::format("flare: planning from terminal state {}", index(root)));
    }
    const int depth = std::min(cfg.rollout_depth, std::max(steps_remaining.value_or(cfg.rollout_depth), 1));

    PlanResult result;
    SearchTree& tree = result.tree;
    expand_node(env, tree, root, proposer, cfg.proposal_k, seed, meter);
    if (tree.find(root)->children.empty()) {
        throw PlanningError(fmt::format("flare: proposer {} returned no actions at the root", proposer.name()));
    }

    result.log.reserve(static_cast<std::size_t>(cfg.simulations_S));
    for (int i = 0; i < cfg.simulations_S; ++i) {
        StateId s = root;
        Trajectory traj(root);
        SimulationRecord rec;
        std::unordered_set<StateId> on_path{root};

        for (int t = 0; t < depth; ++t) {
            if (!tree.is_expanded(s)) {
                expand_node(env, tree, s, proposer, cfg.proposal_k, seed, meter);
                break;
            }
            if (tree.find(s)->children.empty()) {
                break;
            }
            const ActionId a = ucb_select(tree, s, cfg.exploration_c);
            const StepResult r = env.step(s, a, meter);
            traj.append(a, r.next, r.reward);
            rec.path.emplace_back(s, a);
            if (!on_path.insert(r.next).second) {
                break; // closed a cycle
            }
            s = r.next;
        }

        std::optional<double> cached;
        if (memory != nullptr && cfg.use_memory) {
            cached = memory->lookup(traj, cfg.similarity_threshold_delta);
        }
        if (cached) {
            rec.value = *cached;
            rec.memory_hit = true;
        } else {
            ++meter.evaluator_calls;
            rec.value = evaluator.evaluate(env, traj);
            if (memory != nullptr && cfg.use_memory) {
                memory->insert(traj, rec.value);
            }
        }
        tree.backup(rec.path, rec.value);
        result.log.push_back(std::move(rec));
    }

    result.action = root_argmax(env, tree, root, meter);
    return result;
}

FlarePolicy::FlarePolicy(FlareConfig cfg, std::shared_ptr<Proposer> proposer,
                         std::shared_ptr<TrajectoryEvaluator> evaluator)
    : cfg_(cfg), proposer_(proposer ? std::move(proposer) : std::make_shared<FirstKProposer>()),
      evaluator_(evaluator ? std::move(evaluator) : std::make_shared<ReturnEvaluator>()),
      memory_(cfg.memory_capacity, cfg.similarity) {
    cfg_.validate();
}

void FlarePolicy::reset(std::uint64_t seed) {
    seed_ = seed;
    decisions_ = 0;
    memory_.clear();
    last_plan_.reset();
}

ActionId FlarePolicy::decide(const Environment& env, StateId state, int steps_remaining, BudgetMeter& meter) {
    if (cfg_.memory_scope == MemoryScope::per_plan_call) {
        memory_.clear();
    }
    const std::uint64_t plan_seed = seed_ * 0x9E3779B97F4A7C15ULL + decisions_++;
    last_plan_ = plan(env, state, cfg_, *proposer_, *evaluator_, &memory_, meter, plan_seed, steps_remaining);
    return last_plan_->action;
}

} // namespace horizonlab
