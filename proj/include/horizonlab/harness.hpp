#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "horizonlab/adversarial.hpp"
#include "horizonlab/diagnostics.hpp"
#include "horizonlab/env.hpp"
#include "horizonlab/flare.hpp"
#include "horizonlab/graph_env.hpp"
#include "horizonlab/policies.hpp"

namespace horizonlab {

// ---------------------------------------------------------------------------
// Policies from JSON

enum class PolicyType { greedy, beam, lookahead, flare };

PolicyType policy_type_from_string(const std::string& s);
std::string to_string(PolicyType t);

/// {"type": "flare", "name": "flare-nomem", "config": {...}}. `name` defaults
/// to the type. Unknown config keys are a ConfigError.
struct PolicySpec {
    PolicyType type = PolicyType::greedy;
    std::string name;
    nlohmann::json config = nlohmann::json::object();

    static PolicySpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

BeamConfig beam_config_from_json(const nlohmann::json& j);
LookaheadConfig lookahead_config_from_json(const nlohmann::json& j);
FlareConfig flare_config_from_json(const nlohmann::json& j);

/// Builds a fresh policy. FLARE picks up the remote proposer and evaluator
/// when HORIZONLAB_PROPOSER_URL / HORIZONLAB_EVALUATOR_URL are set.
std::unique_ptr<DecisionPolicy> make_policy(const PolicySpec& spec);

// ---------------------------------------------------------------------------
// Environment families

enum class EnvFamily { greedy_trap, beam_trap, lookahead_chain, graph, file };

EnvFamily env_family_from_string(const std::string& s);
std::string to_string(EnvFamily f);

GreedyTrapParams greedy_trap_params_from_json(const nlohmann::json& j);
BeamTrapParams beam_trap_params_from_json(const nlohmann::json& j);
LookaheadChainParams lookahead_chain_params_from_json(const nlohmann::json& j);
GraphInstanceSpec graph_spec_from_json(const nlohmann::json& j);

/// Environment JSON as written by gen-env: the env schema plus
/// `optimal_return` for constructed families, `traps` and `oracle` for graphs.
nlohmann::json generate_env_json(EnvFamily family, const nlohmann::json& params);

// ---------------------------------------------------------------------------
// Campaigns

struct CampaignConfig {
    EnvFamily env_family = EnvFamily::graph;
    nlohmann::json env_params = nlohmann::json::object();
    std::filesystem::path env_file;           // EnvFamily::file
    std::vector<int> answer_distances;        // graph strata, cycled by episode index
    std::vector<PolicySpec> policies;
    int episodes = 1;
    std::uint64_t base_seed = 0;
    int parallel_workers = 1;
    std::optional<CostWeights> cost_weights;
    FailureThresholds thresholds;
    TrapLabelOptions labeling;
    std::filesystem::path records_path; // optional outputs named in the file
    std::filesystem::path summary_path;

    static CampaignConfig from_json(const nlohmann::json& j);
    void validate() const;
};

CampaignConfig load_campaign_config(const std::filesystem::path& path);

/// Per-episode seed: base_seed + episode index. It seeds both the instance
/// (graph family) and every policy in that episode.
std::uint64_t episode_seed(const CampaignConfig& cfg, int episode);

struct SkippedEpisode {
    int episode = 0;
    std::string reason;
};

struct CampaignResult {
    std::vector<DiagnosticRecord> records; // episode order, then policy order
    std::vector<SkippedEpisode> skipped;
    int errored = 0;
};

CampaignResult run_campaign(const CampaignConfig& cfg);

struct SweepPoint {
    int value = 0;
    CampaignResult result;
    CampaignSummary summary;
};

/// Axis "S" sets FLARE's simulations_S, "B" beam_width_B, "k" lookahead k,
/// "budget" all three; policies without the knob run unchanged.
std::vector<SweepPoint> run_budget_sweep(const CampaignConfig& cfg, const std::string& axis,
                                         const std::vector<int>& values);

void write_sweep_csv(std::ostream& out, const std::string& axis, const std::vector<SweepPoint>& points);

// ---------------------------------------------------------------------------
// Proposition checks on the constructed families

struct PropositionCheck {
    std::string proposition; // greedy-trap, beam-trap, lookahead-chain
    std::string params;
    std::string quantity;
    double expected = 0.0;
    double observed = 0.0;
    bool pass = false;
};

struct PropositionReport {
    std::vector<PropositionCheck> checks;

    bool all_pass() const;
    std::string to_text() const;
};

/// {"greedy_trap": {"M": [...], "H": [...]},
///  "beam_trap": {"B": [...], "M": 7, "horizon": 2},
///  "lookahead_chain": [[H, k, R_max], ...]}; missing sections are skipped.
nlohmann::json default_proposition_grid();
PropositionReport run_proposition_suite(const nlohmann::json& grid);

} // namespace horizonlab
