#include "horizonlab/policies.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "horizonlab/errors.hpp"

namespace horizonlab {

namespace {

void require_actions(const Environment& env, StateId s) {
    if (env.num_actions(s) == 0) {
        throw TerminalState(fmt::format("no actions at state {}", index(s)));
    }
}

} // namespace

ActionId greedy_decide(const Environment& env, StateId s, BudgetMeter& meter) {
    require_actions(env, s);
    ActionId best = action_id(0);
    double best_score = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < env.num_actions(s); ++i) {
        const double u = env.surrogate(s, action_id(i), meter);
        if (u > best_score) {
            best_score = u;
            best = action_id(i);
        }
    }
    return best;
}

ActionId GreedyPolicy::decide(const Environment& env, StateId state, int, BudgetMeter& meter) {
    return greedy_decide(env, state, meter);
}

BeamTrace beam_search(const Environment& env, StateId s, int beam_width, int depth, BudgetMeter& meter) {
    require_actions(env, s);
    if (beam_width < 1) {
        throw InvalidParams("beam width must be >= 1");
    }
    if (depth < 1) {
        throw InvalidParams("beam depth must be >= 1");
    }

    const auto ranks_before = [](const BeamPrefix& x, const BeamPrefix& y) {
        if (x.score != y.score) {
            return x.score > y.score;
        }
        return std::lexicographical_compare(x.actions.begin(), x.actions.end(), y.actions.begin(),
                                            y.actions.end());
    };

    BeamTrace trace;
    std::vector<BeamPrefix> beam{BeamPrefix{{}, {s}, 0.0, false}};
    for (int d = 0; d < depth; ++d) {
        std::vector<BeamPrefix> candidates;
        bool extended = false;
        for (const BeamPrefix& p : beam) {
            if (p.terminal) {
                candidates.push_back(p);
                continue;
            }
            const StateId tip = p.states.back();
            for (int i = 0; i < env.num_actions(tip); ++i) {
                const ActionId a = action_id(i);
                const StepResult r = env.step(tip, a, meter);
                const double u = env.surrogate(tip, a, meter);
                BeamPrefix next = p;
                next.actions.push_back(a);
                next.states.push_back(r.next);
                next.score += u;
                next.terminal = env.is_terminal(r.next);
                candidates.push_back(std::move(next));
                extended = true;
            }
        }
        if (!extended) {
            break;
        }
        const auto keep = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(beam_width));
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                          candidates.end(), ranks_before);
        candidates.resize(keep);
        beam = candidates;
        trace.layers.push_back(std::move(candidates));
    }
    return trace;
}

namespace {

int effective_beam_depth(const Environment& env, const BeamConfig& cfg) {
    return cfg.beam_depth > 0 ? cfg.beam_depth : env.episode_horizon();
}

} // namespace

ActionId beam_decide(const Environment& env, StateId s, const BeamConfig& cfg, BudgetMeter& meter) {
    return beam_search(env, s, cfg.beam_width_B, effective_beam_depth(env, cfg), meter).best().actions.front();
}

BeamPolicy::BeamPolicy(BeamConfig cfg) : cfg_(cfg) {
    if (cfg_.beam_width_B < 1) {
        throw InvalidParams("beam width must be >= 1");
    }
    if (cfg_.beam_depth < 0) {
        throw InvalidParams("beam depth must be >= 0");
    }
}

void BeamPolicy::reset(std::uint64_t) {
    planned_actions_.clear();
    planned_states_.clear();
}

ActionId BeamPolicy::decide(const Environment& env, StateId state, int steps_remaining, BudgetMeter& meter) {
    if (cfg_.commit == BeamCommit::full_prefix && !planned_actions_.empty() && planned_states_.front() == state) {
        const ActionId a = planned_actions_.front();
        planned_actions_.pop_front();
        planned_states_.pop_front();
        return a;
    }
    planned_actions_.clear();
    planned_states_.clear();

    const int depth = std::min(effective_beam_depth(env, cfg_), std::max(steps_remaining, 1));
    const BeamTrace trace = beam_search(env, state, cfg_.beam_width_B, depth, meter);
    const BeamPrefix& best = trace.best();
    if (cfg_.commit == BeamCommit::full_prefix) {
        planned_actions_.assign(best.actions.begin() + 1, best.actions.end());
        planned_states_.assign(best.states.begin() + 1, best.states.end() - 1);
    }
    return best.actions.front();
}

namespace {

double best_continuation(const Environment& env, StateId s, int steps, BudgetMeter& meter) {
    if (steps == 0 || env.is_terminal(s)) {
        return 0.0;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < env.num_actions(s); ++i) {
        const StepResult r = env.step(s, action_id(i), meter);
        best = std::max(best, r.reward + best_continuation(env, r.next, steps - 1, meter));
    }
    return best;
}

double greedy_continuation(const Environment& env, StateId s, int steps, BudgetMeter& meter) {
    double total = 0.0;
    for (int t = 0; t < steps && !env.is_terminal(s); ++t) {
        const StepResult r = env.step(s, greedy_decide(env, s, meter), meter);
        total += r.reward;
        s = r.next;
    }
    return total;
}

} // namespace

double lookahead_value(const Environment& env, StateId s, ActionId a, int steps, Continuation continuation,
                       BudgetMeter& meter) {
    if (steps < 1) {
        throw InvalidParams("lookahead needs at least one simulated step");
    }
    const StepResult first = env.step(s, a, meter);
    const double rest = continuation == Continuation::exact
                            ? best_continuation(env, first.next, steps - 1, meter)
                            : greedy_continuation(env, first.next, steps - 1, meter);
    return first.reward + rest;
}

namespace {

ActionId lookahead_argmax(const Environment& env, StateId s, int steps, Continuation continuation,
                          BudgetMeter& meter) {
    require_actions(env, s);
    ActionId best = action_id(0);
    double best_value = -std::numeric_limits<double>::infinity();
    double best_u = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < env.num_actions(s); ++i) {
        const ActionId a = action_id(i);
        const double value = lookahead_value(env, s, a, steps, continuation, meter);
        const double u = env.surrogate(s, a, meter);
        if (value > best_value || (value == best_value && u > best_u)) {
            best = a;
            best_value = value;
            best_u = u;
        }
    }
    return best;
}

} // namespace

ActionId lookahead_decide(const Environment& env, StateId s, const LookaheadConfig& cfg, BudgetMeter& meter) {
    return lookahead_argmax(env, s, cfg.simulated_steps(), cfg.continuation, meter);
}

LookaheadPolicy::LookaheadPolicy(LookaheadConfig cfg) : cfg_(cfg) {
    if (cfg_.k < 1) {
        throw InvalidParams("lookahead k must be >= 1");
    }
}

ActionId LookaheadPolicy::decide(const Environment& env, StateId state, int steps_remaining, BudgetMeter& meter) {
    const int steps = std::min(cfg_.simulated_steps(), std::max(steps_remaining, 1));
    return lookahead_argmax(env, state, steps, cfg_.continuation, meter);
}

} // namespace horizonlab
