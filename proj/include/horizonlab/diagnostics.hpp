#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "horizonlab/env.hpp"
#include "horizonlab/graph_env.hpp"

namespace horizonlab {

enum class FailureCategory { none, myopic_deviation, dead_end, loop, premature };

inline constexpr std::array<FailureCategory, 4> failure_kinds = {
    FailureCategory::myopic_deviation, FailureCategory::dead_end, FailureCategory::loop,
    FailureCategory::premature};

std::string to_string(FailureCategory c);
FailureCategory failure_category_from_string(const std::string& s);

struct FailureThresholds {
    int loop_visits = 3;        // a state visited this often marks a loop
    int early_step_divisor = 3; // reachability lost by ceil(horizon / divisor) is myopic
};

/// 1-based index of the first step at which the distance to the answer set
/// fails to drop by exactly one; nullopt if no step does.
std::optional<int> first_error(const Trajectory& traj, const OracleInfo& oracle);

/// Whether the first executed action is a labeled trap; nullopt when the
/// instance is excluded or the episode took no step.
std::optional<bool> trap_at_1(const Trajectory& traj, const TrapLabeling& labels);

bool reached_answer(const Trajectory& traj, const Environment& env);

/// Only meaningful after a first error: did the episode still end in an answer.
bool recovery(const Trajectory& traj, const Environment& env, int first_err);

/// Dominant failure mechanism of an unsuccessful episode, by fixed precedence:
/// loop, premature, myopic_deviation, dead_end.
FailureCategory categorize_failure(const Trajectory& traj, const OracleInfo& oracle, const Environment& env,
                                   const FailureThresholds& thresholds = {});

struct DiagnosticRecord {
    std::string instance_id;
    std::string policy_name;
    int answer_distance = 0;
    bool success = false;
    std::optional<bool> trap_at_1;
    std::optional<int> first_error_step;
    std::optional<bool> recovered;
    FailureCategory failure_category = FailureCategory::none;
    BudgetMeter budget;
    double episode_return = 0.0;
    int steps = 0;
    std::optional<std::string> error; // set when the episode aborted
};

DiagnosticRecord diagnose_episode(std::string instance_id, std::string policy_name, const Trajectory& traj,
                                  const Environment& env, const OracleInfo& oracle, const TrapLabeling* labels,
                                  const BudgetMeter& budget, const FailureThresholds& thresholds = {});

nlohmann::json record_to_json(const DiagnosticRecord& r);
DiagnosticRecord record_from_json(const nlohmann::json& j);

/// Optional weights turning raw counters into one cost figure.
struct CostWeights {
    double transition = 0.0;
    double surrogate = 0.0;
    double proposer = 0.0;
    double evaluator = 0.0;

    double cost(const BudgetMeter& m) const;
};

struct Rate {
    double value = 0.0;
    double std_error = 0.0;
    int n = 0; // records that entered the rate
};

struct GroupSummary {
    std::string policy;
    std::optional<int> stratum; // answer distance; nullopt = all strata
    int episodes = 0;
    int errored = 0;
    Rate success;
    Rate trap_at_1;
    Rate mean_first_error;
    int first_error_excluded = 0; // episodes without any error
    Rate recovery;
    std::vector<double> survival; // survival[t]: first error after step t, or none
    std::map<FailureCategory, int> failures;
    double mean_transition_calls = 0.0;
    double mean_surrogate_calls = 0.0;
    double mean_proposer_calls = 0.0;
    double mean_evaluator_calls = 0.0;
    std::optional<double> mean_cost;
};

struct CampaignSummary {
    // Per policy: the pooled row first, then one row per stratum ascending.
    std::vector<GroupSummary> groups;

    const GroupSummary* find(const std::string& policy, std::optional<int> stratum = std::nullopt) const;
};

/// Policies appear in order of first occurrence. Throws InvalidParams on empty input.
CampaignSummary summarize(const std::vector<DiagnosticRecord>& records,
                          const std::optional<CostWeights>& weights = std::nullopt);

nlohmann::json summary_to_json(const CampaignSummary& s);
void write_summary_csv(std::ostream& out, const CampaignSummary& s);
void write_records_jsonl(std::ostream& out, const std::vector<DiagnosticRecord>& records);

} // namespace horizonlab
