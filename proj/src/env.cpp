#include "horizonlab/env.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "horizonlab/errors.hpp"

namespace horizonlab {

BudgetMeter& BudgetMeter::operator+=(const BudgetMeter& other) noexcept {
    transition_calls += other.transition_calls;
    surrogate_calls += other.surrogate_calls;
    proposer_calls += other.proposer_calls;
    evaluator_calls += other.evaluator_calls;
    return *this;
}

Environment::Environment(int num_states, StateId initial, std::vector<StateId> answers,
                         std::vector<std::vector<Edge>> edges, int episode_horizon)
    : initial_(initial), answers_(std::move(answers)), edges_(std::move(edges)),
      episode_horizon_(episode_horizon) {
    if (num_states <= 0) {
        throw InvalidParams("environment needs at least one state");
    }
    if (static_cast<int>(edges_.size()) != num_states) {
        throw InvalidParams(fmt::format("edge table has {} rows for {} states", edges_.size(), num_states));
    }
    if (episode_horizon_ < 1) {
        throw InvalidParams("episode_horizon must be positive");
    }
    check_state(initial_);
    is_answer_.assign(static_cast<std::size_t>(num_states), false);
    for (StateId s : answers_) {
        check_state(s);
        is_answer_[static_cast<std::size_t>(index(s))] = true;
    }
    for (int s = 0; s < num_states; ++s) {
        for (const Edge& e : edges_[static_cast<std::size_t>(s)]) {
            check_state(e.to);
            if (!std::isfinite(e.reward) || !std::isfinite(e.surrogate)) {
                throw InvalidParams(fmt::format("non-finite reward or surrogate on edge from state {}", s));
            }
        }
    }
}

void Environment::check_state(StateId s) const {
    if (index(s) < 0 || index(s) >= num_states()) {
        throw InvalidParams(fmt::format("state {} out of range [0, {})", index(s), num_states()));
    }
}

std::span<const Edge> Environment::actions(StateId s) const {
    check_state(s);
    return edges_[static_cast<std::size_t>(index(s))];
}

bool Environment::has_action(StateId s, ActionId a) const {
    return index(a) >= 0 && index(a) < num_actions(s);
}

bool Environment::is_answer(StateId s) const {
    check_state(s);
    return is_answer_[static_cast<std::size_t>(index(s))];
}

bool Environment::is_terminal(StateId s) const {
    return is_answer(s) || actions(s).empty();
}

const Edge& Environment::edge(StateId s, ActionId a) const {
    if (!has_action(s, a)) {
        throw InvalidAction(fmt::format("action {} is not available at state {}", index(a), index(s)));
    }
    return edges_[static_cast<std::size_t>(index(s))][static_cast<std::size_t>(index(a))];
}

StepResult Environment::step(StateId s, ActionId a, BudgetMeter& meter) const {
    const Edge& e = edge(s, a);
    ++meter.transition_calls;
    return {e.to, e.reward};
}

double Environment::surrogate(StateId s, ActionId a, BudgetMeter& meter) const {
    const Edge& e = edge(s, a);
    ++meter.surrogate_calls;
    return e.surrogate;
}

StateId EnvironmentBuilder::add_state() {
    edges_.emplace_back();
    return state_id(num_states() - 1);
}

StateId EnvironmentBuilder::add_states(int count) {
    const StateId first = state_id(num_states());
    edges_.resize(edges_.size() + static_cast<std::size_t>(count));
    return first;
}

ActionId EnvironmentBuilder::add_edge(StateId from, std::string label, StateId to, double reward,
                                      double surrogate) {
    auto& out = edges_of(from);
    out.push_back({std::move(label), to, reward, surrogate});
    return action_id(static_cast<int>(out.size()) - 1);
}

std::vector<Edge>& EnvironmentBuilder::edges_of(StateId s) {
    if (index(s) < 0 || index(s) >= num_states()) {
        throw InvalidParams(fmt::format("builder: state {} not allocated", index(s)));
    }
    return edges_[static_cast<std::size_t>(index(s))];
}

Environment EnvironmentBuilder::build() const {
    return Environment(num_states(), initial_, answers_, edges_, horizon_);
}

Trajectory::Trajectory(StateId start) : states_{start} {}

void Trajectory::append(ActionId a, StateId next, double reward) {
    actions_.push_back(a);
    states_.push_back(next);
    rewards_.push_back(reward);
    cumulative_ += reward;
}

Trajectory Trajectory::prefix(int steps) const {
    if (steps < 0 || steps > length()) {
        throw InvalidParams("prefix length out of range");
    }
    Trajectory out(states_.front());
    for (int t = 0; t < steps; ++t) {
        out.append(actions_[t], states_[t + 1], rewards_[t]);
    }
    return out;
}

Trajectory Trajectory::suffix(int steps) const {
    if (steps < 0 || steps > length()) {
        throw InvalidParams("suffix start out of range");
    }
    Trajectory out(states_[static_cast<std::size_t>(steps)]);
    for (int t = steps; t < length(); ++t) {
        out.append(actions_[t], states_[t + 1], rewards_[t]);
    }
    return out;
}

double trajectory_return(const Trajectory& traj) {
    return std::accumulate(traj.step_rewards().begin(), traj.step_rewards().end(), 0.0);
}

bool is_consistent(const Trajectory& traj, const Environment& env) {
    for (int t = 0; t < traj.length(); ++t) {
        const StateId s = traj.states()[t];
        const ActionId a = traj.actions()[t];
        if (!env.has_action(s, a)) {
            return false;
        }
        const Edge& e = env.edge(s, a);
        if (e.to != traj.states()[t + 1] || e.reward != traj.step_rewards()[t]) {
            return false;
        }
    }
    return true;
}

Trajectory run_episode(const Environment& env, DecisionPolicy& policy, std::uint64_t seed,
                       BudgetMeter& meter) {
    policy.reset(seed);
    Trajectory traj(env.initial_state());
    StateId s = env.initial_state();
    const int horizon = env.episode_horizon();
    for (int t = 0; t < horizon && !env.is_terminal(s); ++t) {
        const ActionId a = policy.decide(env, s, horizon - t, meter);
        if (!env.has_action(s, a)) {
            throw InvalidAction(fmt::format("policy {} chose action {} at state {} with {} actions",
                                            policy.name(), index(a), index(s), env.num_actions(s)));
        }
        const StepResult r = env.step(s, a, meter);
        traj.append(a, r.next, r.reward);
        s = r.next;
    }
    return traj;
}

} // namespace horizonlab
