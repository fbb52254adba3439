#include "horizonlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "horizonlab/env_io.hpp"
#include "horizonlab/errors.hpp"

namespace horizonlab {

using nlohmann::json;

std::string to_string(FailureCategory c) {
    switch (c) {
    case FailureCategory::none:
        return "none";
    case FailureCategory::myopic_deviation:
        return "myopic_deviation";
    case FailureCategory::dead_end:
        return "dead_end";
    case FailureCategory::loop:
        return "loop";
    case FailureCategory::premature:
        return "premature";
    }
    return "?";
}

FailureCategory failure_category_from_string(const std::string& s) {
    for (FailureCategory c : failure_kinds) {
        if (to_string(c) == s) {
            return c;
        }
    }
    if (s == "none") {
        return FailureCategory::none;
    }
    throw ConfigError(fmt::format("unknown failure category '{}'", s));
}

std::optional<int> first_error(const Trajectory& traj, const OracleInfo& oracle) {
    const auto& states = traj.states();
    for (int t = 1; t <= traj.length(); ++t) {
        const int before = oracle.distance(states[static_cast<std::size_t>(t - 1)]);
        const int after = oracle.distance(states[static_cast<std::size_t>(t)]);
        if (before == OracleInfo::unreachable || after != before - 1) {
            return t;
        }
    }
    return std::nullopt;
}

std::optional<bool> trap_at_1(const Trajectory& traj, const TrapLabeling& labels) {
    if (labels.initial_excluded || traj.length() == 0) {
        return std::nullopt;
    }
    const TrapLabel* label = labels.find(traj.front(), traj.actions().front());
    return label != nullptr && label->is_trap;
}

bool reached_answer(const Trajectory& traj, const Environment& env) {
    return !traj.states().empty() && env.is_answer(traj.back());
}

bool recovery(const Trajectory& traj, const Environment& env, int first_err) {
    (void)first_err;
    return reached_answer(traj, env);
}

FailureCategory categorize_failure(const Trajectory& traj, const OracleInfo& oracle, const Environment& env,
                                   const FailureThresholds& thresholds) {
    if (reached_answer(traj, env)) {
        return FailureCategory::none;
    }
    std::map<StateId, int> visits;
    for (StateId s : traj.states()) {
        if (++visits[s] >= thresholds.loop_visits) {
            return FailureCategory::loop;
        }
    }
    const int horizon = env.episode_horizon();
    if (traj.length() < horizon && oracle.reachable(traj.back())) {
        return FailureCategory::premature;
    }
    const int divisor = std::max(1, thresholds.early_step_divisor);
    const int cutoff = (horizon + divisor - 1) / divisor;
    const auto& states = traj.states();
    for (int t = 1; t <= traj.length(); ++t) {
        if (!oracle.reachable(states[static_cast<std::size_t>(t)])) {
            return t <= cutoff ? FailureCategory::myopic_deviation : FailureCategory::dead_end;
        }
    }
    return FailureCategory::dead_end;
}

DiagnosticRecord diagnose_episode(std::string instance_id, std::string policy_name, const Trajectory& traj,
                                  const Environment& env, const OracleInfo& oracle, const TrapLabeling* labels,
                                  const BudgetMeter& budget, const FailureThresholds& thresholds) {
    DiagnosticRecord r;
    r.instance_id = std::move(instance_id);
    r.policy_name = std::move(policy_name);
    r.answer_distance = oracle.distance(env.initial_state());
    r.success = reached_answer(traj, env);
    if (labels != nullptr) {
        r.trap_at_1 = trap_at_1(traj, *labels);
    }
    r.first_error_step = first_error(traj, oracle);
    if (r.first_error_step) {
        r.recovered = recovery(traj, env, *r.first_error_step);
    }
    r.failure_category = r.success ? FailureCategory::none : categorize_failure(traj, oracle, env, thresholds);
    r.budget = budget;
    r.episode_return = traj.cumulative_return();
    r.steps = traj.length();
    return r;
}

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<T>();
}

} // namespace

json record_to_json(const DiagnosticRecord& r) {
    json j;
    j["instance_id"] = r.instance_id;
    j["policy_name"] = r.policy_name;
    j["answer_distance"] = r.answer_distance;
    j["success"] = r.success;
    j["trap_at_1"] = optional_json(r.trap_at_1);
    j["first_error_step"] = optional_json(r.first_error_step);
    j["recovered"] = optional_json(r.recovered);
    j["failure_category"] = to_string(r.failure_category);
    j["budget"] = meter_to_json(r.budget);
    j["episode_return"] = r.episode_return;
    j["steps"] = r.steps;
    if (r.error) {
        j["error"] = *r.error;
    }
    return j;
}

DiagnosticRecord record_from_json(const json& j) {
    DiagnosticRecord r;
    r.instance_id = j.at("instance_id").get<std::string>();
    r.policy_name = j.at("policy_name").get<std::string>();
    r.answer_distance = j.value("answer_distance", 0);
    r.success = j.at("success").get<bool>();
    r.trap_at_1 = optional_from<bool>(j, "trap_at_1");
    r.first_error_step = optional_from<int>(j, "first_error_step");
    r.recovered = optional_from<bool>(j, "recovered");
    r.failure_category = failure_category_from_string(j.at("failure_category").get<std::string>());
    const json& b = j.at("budget");
    r.budget.transition_calls = b.at("transition_calls").get<std::uint64_t>();
    r.budget.surrogate_calls = b.at("surrogate_calls").get<std::uint64_t>();
    r.budget.proposer_calls = b.at("proposer_calls").get<std::uint64_t>();
    r.budget.evaluator_calls = b.at("evaluator_calls").get<std::uint64_t>();
    r.episode_return = j.value("episode_return", 0.0);
    r.steps = j.value("steps", 0);
    r.error = optional_from<std::string>(j, "error");
    return r;
}

double CostWeights::cost(const BudgetMeter& m) const {
    return transition * static_cast<double>(m.transition_calls) + surrogate * static_cast<double>(m.surrogate_calls) +
           proposer * static_cast<double>(m.proposer_calls) + evaluator * static_cast<double>(m.evaluator_calls);
}

const GroupSummary* CampaignSummary::find(const std::string& policy, std::optional<int> stratum) const {
    for (const GroupSummary& g : groups) {
        if (g.policy == policy && g.stratum == stratum) {
            return &g;
        }
    }
    return nullptr;
}

namespace {

Rate proportion(int hits, int n) {
    Rate r;
    r.n = n;
    if (n > 0) {
        r.value = static_cast<double>(hits) / n;
        r.std_error = std::sqrt(r.value * (1.0 - r.value) / n);
    }
    return r;
}

Rate mean_of(const std::vector<double>& xs) {
    Rate r;
    r.n = static_cast<int>(xs.size());
    if (xs.empty()) {
        return r;
    }
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / r.n;
    r.value = mean;
    if (r.n > 1) {
        double ss = 0.0;
        for (double x : xs) {
            ss += (x - mean) * (x - mean);
        }
        r.std_error = std::sqrt(ss / (r.n - 1) / r.n);
    }
    return r;
}

GroupSummary summarize_group(const std::string& policy, std::optional<int> stratum,
                             const std::vector<const DiagnosticRecord*>& rs,
                             const std::optional<CostWeights>& weights) {
    GroupSummary g;
    g.policy = policy;
    g.stratum = stratum;
    g.episodes = static_cast<int>(rs.size());

    int successes = 0, traps = 0, trap_n = 0, recovered = 0, recovery_n = 0, max_steps = 0;
    std::vector<double> first_errors;
    BudgetMeter total;
    double cost = 0.0;
    for (const DiagnosticRecord* r : rs) {
        g.errored += r->error ? 1 : 0;
        successes += r->success ? 1 : 0;
        if (r->trap_at_1) {
            ++trap_n;
            traps += *r->trap_at_1 ? 1 : 0;
        }
        if (r->first_error_step) {
            first_errors.push_back(*r->first_error_step);
        } else {
            ++g.first_error_excluded;
        }
        if (r->recovered) {
            ++recovery_n;
            recovered += *r->recovered ? 1 : 0;
        }
        if (!r->success) {
            ++g.failures[r->failure_category];
        }
        max_steps = std::max(max_steps, r->steps);
        total += r->budget;
        if (weights) {
            cost += weights->cost(r->budget);
        }
    }
    g.success = proportion(successes, g.episodes);
    g.trap_at_1 = proportion(traps, trap_n);
    g.mean_first_error = mean_of(first_errors);
    g.recovery = proportion(recovered, recovery_n);

    for (int t = 0; t <= max_steps; ++t) {
        int alive = 0;
        for (const DiagnosticRecord* r : rs) {
            alive += (!r->first_error_step || *r->first_error_step > t) ? 1 : 0;
        }
        g.survival.push_back(static_cast<double>(alive) / g.episodes);
    }

    const auto n = static_cast<double>(g.episodes);
    g.mean_transition_calls = static_cast<double>(total.transition_calls) / n;
    g.mean_surrogate_calls = static_cast<double>(total.surrogate_calls) / n;
    g.mean_proposer_calls = static_cast<double>(total.proposer_calls) / n;
    g.mean_evaluator_calls = static_cast<double>(total.evaluator_calls) / n;
    if (weights) {
        g.mean_cost = cost / n;
    }
    return g;
}

} // namespace

CampaignSummary summarize(const std::vector<DiagnosticRecord>& records, const std::optional<CostWeights>& weights) {
    if (records.empty()) {
        throw InvalidParams("summarize: no records");
    }
    std::vector<std::string> policies;
    for (const DiagnosticRecord& r : records) {
        if (std::find(policies.begin(), policies.end(), r.policy_name) == policies.end()) {
            policies.push_back(r.policy_name);
        }
    }
    CampaignSummary out;
    for (const std::string& p : policies) {
        std::vector<const DiagnosticRecord*> all;
        std::map<int, std::vector<const DiagnosticRecord*>> strata;
        for (const DiagnosticRecord& r : records) {
            if (r.policy_name == p) {
                all.push_back(&r);
                strata[r.answer_distance].push_back(&r);
            }
        }
        out.groups.push_back(summarize_group(p, std::nullopt, all, weights));
        for (const auto& [d, rs] : strata) {
            out.groups.push_back(summarize_group(p, d, rs, weights));
        }
    }
    return out;
}

namespace {

json rate_json(const Rate& r) {
    return {{"value", r.value}, {"std_error", r.std_error}, {"n", r.n}};
}

} // namespace

json summary_to_json(const CampaignSummary& s) {
    json groups = json::array();
    for (const GroupSummary& g : s.groups) {
        json failures = json::object();
        for (FailureCategory c : failure_kinds) {
            const auto it = g.failures.find(c);
            failures[to_string(c)] = it == g.failures.end() ? 0 : it->second;
        }
        json row = {
            {"policy", g.policy},
            {"stratum", g.stratum ? json(*g.stratum) : json("all")},
            {"episodes", g.episodes},
            {"errored", g.errored},
            {"success", rate_json(g.success)},
            {"trap_at_1", rate_json(g.trap_at_1)},
            {"mean_first_error", rate_json(g.mean_first_error)},
            {"first_error_excluded", g.first_error_excluded},
            {"recovery", rate_json(g.recovery)},
            {"survival", g.survival},
            {"failures", failures},
            {"mean_budget",
             {{"transition_calls", g.mean_transition_calls},
              {"surrogate_calls", g.mean_surrogate_calls},
              {"proposer_calls", g.mean_proposer_calls},
              {"evaluator_calls", g.mean_evaluator_calls}}},
        };
        if (g.mean_cost) {
            row["mean_cost"] = *g.mean_cost;
        }
        groups.push_back(std::move(row));
    }
    return {{"groups", groups}};
}

void write_summary_csv(std::ostream& out, const CampaignSummary& s) {
    std::size_t survival_len = 0;
    for (const GroupSummary& g : s.groups) {
        survival_len = std::max(survival_len, g.survival.size());
    }
    out << "policy,stratum,episodes,errored,success_rate,success_se,trap_at_1,trap_at_1_se,trap_at_1_n,"
           "mean_first_error,mean_first_error_se,first_error_n,first_error_excluded,recovery_rate,recovery_se,"
           "recovery_n,mean_transition_calls,mean_surrogate_calls,mean_proposer_calls,mean_evaluator_calls,"
           "mean_cost";
    for (FailureCategory c : failure_kinds) {
        out << ",failures_" << to_string(c);
    }
    for (std::size_t t = 0; t < survival_len; ++t) {
        out << ",survival_" << t;
    }
    out << '\n';
    for (const GroupSummary& g : s.groups) {
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", g.policy,
                           g.stratum ? std::to_string(*g.stratum) : "all", g.episodes, g.errored, g.success.value,
                           g.success.std_error, g.trap_at_1.value, g.trap_at_1.std_error, g.trap_at_1.n,
                           g.mean_first_error.value, g.mean_first_error.std_error, g.mean_first_error.n,
                           g.first_error_excluded, g.recovery.value, g.recovery.std_error, g.recovery.n,
                           g.mean_transition_calls, g.mean_surrogate_calls, g.mean_proposer_calls,
                           g.mean_evaluator_calls, g.mean_cost ? fmt::format("{}", *g.mean_cost) : "");
        for (FailureCategory c : failure_kinds) {
            const auto it = g.failures.find(c);
            out << ',' << (it == g.failures.end() ? 0 : it->second);
        }
        for (std::size_t t = 0; t < survival_len; ++t) {
            // Curves are padded with their last value; no record is still running.
            out << ',' << fmt::format("{}", g.survival.empty() ? 0.0 : g.survival[std::min(t, g.survival.size() - 1)]);
        }
        out << '\n';
    }
}

void write_records_jsonl(std::ostream& out, const std::vector<DiagnosticRecord>& records) {
    for (const DiagnosticRecord& r : records) {
        out << record_to_json(r).dump() << '\n';
    }
}

} // namespace horizonlab
