#include "horizonlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "horizonlab/env_io.hpp"
#include "horizonlab/errors.hpp"
#include "horizonlab/remote.hpp"

namespace horizonlab {

using nlohmann::json;

namespace {

// Strict field access: every key must be known, values must have the right type.
class Fields {
public:
    Fields(const json& j, std::string where, std::set<std::string> known) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) {
            throw ConfigError(fmt::format("{}: expected an object", where_));
        }
        for (const auto& [key, value] : j.items()) {
            if (!known.contains(key)) {
                throw ConfigError(fmt::format("{}: unknown key '{}'", where_, key));
            }
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    template <typename T>
    T get(const char* key) const {
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("{}.{}: {}", where_, key, e.what()));
        }
    }

    template <typename T>
    void read(const char* key, T& out) const {
        if (has(key)) {
            out = get<T>(key);
        }
    }

    const json& raw(const char* key) const { return j_.at(key); }

private:
    const json& j_;
    std::string where_;
};

template <typename T>
T checked(const char* what, const std::function<T()>& build) {
    try {
        return build();
    } catch (const InvalidParams& e) {
        throw ConfigError(fmt::format("{}: {}", what, e.what()));
    }
}

} // namespace

PolicyType policy_type_from_string(const std::string& s) {
    if (s == "greedy") {
        return PolicyType::greedy;
    }
    if (s == "beam") {
        return PolicyType::beam;
    }
    if (s == "lookahead") {
        return PolicyType::lookahead;
    }
    if (s == "flare") {
        return PolicyType::flare;
    }
    throw ConfigError(fmt::format("unknown policy '{}'", s));
}

std::string to_string(PolicyType t) {
    switch (t) {
    case PolicyType::greedy:
        return "greedy";
    case PolicyType::beam:
        return "beam";
    case PolicyType::lookahead:
        return "lookahead";
    case PolicyType::flare:
        return "flare";
    }
    return "?";
}

PolicySpec PolicySpec::from_json(const json& j) {
    if (j.is_string()) {
        PolicySpec spec;
        spec.type = policy_type_from_string(j.get<std::string>());
        spec.name = to_string(spec.type);
        return spec;
    }
    Fields f(j, "policy", {"type", "name", "config"});
    PolicySpec spec;
    spec.type = policy_type_from_string(f.get<std::string>("type"));
    spec.name = f.has("name") ? f.get<std::string>("name") : to_string(spec.type);
    if (f.has("config")) {
        spec.config = f.raw("config");
    }
    return spec;
}

json PolicySpec::to_json() const {
    return {{"type", horizonlab::to_string(type)}, {"name", name}, {"config", config}};
}

BeamConfig beam_config_from_json(const json& j) {
    Fields f(j, "beam config", {"beam_width_B", "beam_depth", "commit"});
    BeamConfig cfg;
    f.read("beam_width_B", cfg.beam_width_B);
    f.read("beam_depth", cfg.beam_depth);
    if (f.has("commit")) {
        const auto commit = f.get<std::string>("commit");
        if (commit == "recede") {
            cfg.commit = BeamCommit::recede;
        } else if (commit == "full_prefix") {
            cfg.commit = BeamCommit::full_prefix;
        } else {
            throw ConfigError(fmt::format("beam config: unknown commit '{}'", commit));
        }
    }
    if (cfg.beam_width_B < 1 || cfg.beam_depth < 0) {
        throw ConfigError("beam config: need beam_width_B >= 1 and beam_depth >= 0");
    }
    return cfg;
}

LookaheadConfig lookahead_config_from_json(const json& j) {
    Fields f(j, "lookahead config", {"k", "continuation", "depth_mode"});
    LookaheadConfig cfg;
    f.read("k", cfg.k);
    if (f.has("continuation")) {
        const auto c = f.get<std::string>("continuation");
        if (c == "exact") {
            cfg.continuation = Continuation::exact;
        } else if (c == "greedy_by_surrogate") {
            cfg.continuation = Continuation::greedy_by_surrogate;
        } else {
            throw ConfigError(fmt::format("lookahead config: unknown continuation '{}'", c));
        }
    }
    if (f.has("depth_mode")) {
        const auto d = f.get<std::string>("depth_mode");
        if (d == "total_steps") {
            cfg.depth_mode = LookaheadDepth::total_steps;
        } else if (d == "steps_after_action") {
            cfg.depth_mode = LookaheadDepth::steps_after_action;
        } else {
            throw ConfigError(fmt::format("lookahead config: unknown depth_mode '{}'", d));
        }
    }
    if (cfg.k < 1) {
        throw ConfigError("lookahead config: k must be >= 1");
    }
    return cfg;
}

FlareConfig flare_config_from_json(const json& j) {
    Fields f(j, "flare config",
             {"simulations_S", "rollout_depth", "exploration_c", "proposal_k", "memory_capacity",
              "similarity_threshold_delta", "memory_scope", "similarity", "use_memory", "proposer"});
    FlareConfig cfg;
    f.read("simulations_S", cfg.simulations_S);
    f.read("rollout_depth", cfg.rollout_depth);
    f.read("exploration_c", cfg.exploration_c);
    f.read("proposal_k", cfg.proposal_k);
    f.read("memory_capacity", cfg.memory_capacity);
    f.read("similarity_threshold_delta", cfg.similarity_threshold_delta);
    f.read("use_memory", cfg.use_memory);
    if (f.has("memory_scope")) {
        const auto s = f.get<std::string>("memory_scope");
        if (s == "per_plan_call") {
            cfg.memory_scope = MemoryScope::per_plan_call;
        } else if (s == "per_episode") {
            cfg.memory_scope = MemoryScope::per_episode;
        } else {
            throw ConfigError(fmt::format("flare config: unknown memory_scope '{}'", s));
        }
    }
    if (f.has("similarity")) {
        const auto s = f.get<std::string>("similarity");
        if (s == "jaccard") {
            cfg.similarity = SimilarityKind::jaccard;
        } else if (s == "prefix_ratio") {
            cfg.similarity = SimilarityKind::prefix_ratio;
        } else if (s == "exact") {
            cfg.similarity = SimilarityKind::exact;
        } else {
            throw ConfigError(fmt::format("flare config: unknown similarity '{}'", s));
        }
    }
    checked<int>("flare config", [&] {
        cfg.validate();
        return 0;
    });
    return cfg;
}

namespace {

std::shared_ptr<Proposer> proposer_from_config(const json& config) {
    if (auto remote = remote_proposer_from_env()) {
        return remote;
    }
    const std::string name = config.is_object() ? config.value("proposer", std::string("first-k")) : "first-k";
    if (name == "first-k") {
        return std::make_shared<FirstKProposer>();
    }
    if (name == "identity") {
        return std::make_shared<IdentityProposer>();
    }
    if (name == "surrogate-top-k") {
        return std::make_shared<SurrogateTopKProposer>();
    }
    throw ConfigError(fmt::format("flare config: unknown proposer '{}'", name));
}

} // namespace

std::unique_ptr<DecisionPolicy> make_policy(const PolicySpec& spec) {
    switch (spec.type) {
    case PolicyType::greedy:
        Fields(spec.config, "greedy config", {});
        return std::make_unique<GreedyPolicy>();
    case PolicyType::beam:
        return std::make_unique<BeamPolicy>(beam_config_from_json(spec.config));
    case PolicyType::lookahead:
        return std::make_unique<LookaheadPolicy>(lookahead_config_from_json(spec.config));
    case PolicyType::flare: {
        const FlareConfig cfg = flare_config_from_json(spec.config);
        std::shared_ptr<TrajectoryEvaluator> evaluator = remote_evaluator_from_env();
        if (!evaluator) {
            evaluator = std::make_shared<ReturnEvaluator>();
        }
        return std::make_unique<FlarePolicy>(cfg, proposer_from_config(spec.config), evaluator);
    }
    }
    throw ConfigError("unknown policy type");
}

// ---------------------------------------------------------------------------

EnvFamily env_family_from_string(const std::string& s) {
    if (s == "greedy-trap") {
        return EnvFamily::greedy_trap;
    }
    if (s == "beam-trap") {
        return EnvFamily::beam_trap;
    }
    if (s == "lookahead-chain") {
        return EnvFamily::lookahead_chain;
    }
    if (s == "graph") {
        return EnvFamily::graph;
    }
    if (s == "file") {
        return EnvFamily::file;
    }
    throw ConfigError(fmt::format("unknown environment family '{}'", s));
}

std::string to_string(EnvFamily f) {
    switch (f) {
    case EnvFamily::greedy_trap:
        return "greedy-trap";
    case EnvFamily::beam_trap:
        return "beam-trap";
    case EnvFamily::lookahead_chain:
        return "lookahead-chain";
    case EnvFamily::graph:
        return "graph";
    case EnvFamily::file:
        return "file";
    }
    return "?";
}

GreedyTrapParams greedy_trap_params_from_json(const json& j) {
    Fields f(j, "greedy-trap params", {"M", "horizon", "H"});
    GreedyTrapParams p;
    f.read("M", p.M);
    f.read("horizon", p.horizon);
    f.read("H", p.horizon);
    return p;
}

BeamTrapParams beam_trap_params_from_json(const json& j) {
    Fields f(j, "beam-trap params", {"B", "beam_width_B", "M", "horizon"});
    BeamTrapParams p;
    f.read("B", p.beam_width_B);
    f.read("beam_width_B", p.beam_width_B);
    f.read("M", p.M);
    f.read("horizon", p.horizon);
    return p;
}

LookaheadChainParams lookahead_chain_params_from_json(const json& j) {
    Fields f(j, "lookahead-chain params", {"k", "H", "horizon_H", "R_max"});
    LookaheadChainParams p;
    f.read("k", p.k);
    f.read("H", p.horizon_H);
    f.read("horizon_H", p.horizon_H);
    f.read("R_max", p.R_max);
    return p;
}

GraphInstanceSpec graph_spec_from_json(const json& j) {
    Fields f(j, "graph params",
             {"seed", "num_states", "branching", "branching_min", "branching_max", "answer_distance",
              "distractor_depth", "surrogate_mode", "noise_sigma", "trap_rate_target", "trap_bonus",
              "dead_end_fraction", "episode_horizon"});
    GraphInstanceSpec s;
    f.read("seed", s.seed);
    f.read("num_states", s.num_states);
    if (f.has("branching")) {
        const auto range = f.get<std::vector<int>>("branching");
        if (range.size() != 2) {
            throw ConfigError("graph params: branching must be [min, max]");
        }
        s.branching_min = range[0];
        s.branching_max = range[1];
    }
    f.read("branching_min", s.branching_min);
    f.read("branching_max", s.branching_max);
    f.read("answer_distance", s.answer_distance);
    f.read("distractor_depth", s.distractor_depth);
    if (f.has("surrogate_mode")) {
        s.surrogate_mode = surrogate_mode_from_string(f.get<std::string>("surrogate_mode"));
    }
    f.read("noise_sigma", s.noise_sigma);
    f.read("trap_rate_target", s.trap_rate_target);
    f.read("trap_bonus", s.trap_bonus);
    f.read("dead_end_fraction", s.dead_end_fraction);
    f.read("episode_horizon", s.episode_horizon);
    checked<int>("graph params", [&] {
        s.validate();
        return 0;
    });
    return s;
}

namespace {

json traps_json(const Environment& env, const TrapLabeling& labels) {
    json traps = json::array();
    for (const TrapLabel& l : labels.labels) {
        if (!l.is_trap) {
            continue;
        }
        json t = {{"state", index(l.state)},
                  {"action", index(l.action)},
                  {"action_label", env.edge(l.state, l.action).label},
                  {"reason", l.reason == TrapReason::unreachable ? "unreachable" : "lengthened"}};
        if (l.reason == TrapReason::lengthened) {
            t["lengthened_by"] = l.lengthened_by;
        }
        traps.push_back(std::move(t));
    }
    return traps;
}

} // namespace

json generate_env_json(EnvFamily family, const json& params) {
    auto constructed = [](const AdversarialInstance& inst) {
        json j = environment_to_json(inst.env);
        j["optimal_return"] = inst.optimal_return;
        return j;
    };
    return checked<json>("gen-env", [&]() -> json {
        switch (family) {
        case EnvFamily::greedy_trap:
            return constructed(make_greedy_trap(greedy_trap_params_from_json(params)));
        case EnvFamily::beam_trap:
            return constructed(make_beam_trap(beam_trap_params_from_json(params)));
        case EnvFamily::lookahead_chain:
            return constructed(make_lookahead_chain(lookahead_chain_params_from_json(params)));
        case EnvFamily::graph: {
            const GraphInstance inst = generate_instance(graph_spec_from_json(params));
            const TrapLabeling labels = label_traps(inst.env, inst.oracle);
            json j = environment_to_json(inst.env);
            j["traps"] = traps_json(inst.env, labels);
            j["initial_excluded"] = labels.initial_excluded;
            j["oracle"] = {{"dist", inst.oracle.dist}};
            return j;
        }
        case EnvFamily::file:
            break;
        }
        throw ConfigError("gen-env: family 'file' cannot be generated");
    });
}

// ---------------------------------------------------------------------------

CampaignConfig CampaignConfig::from_json(const json& j) {
    Fields f(j, "campaign",
             {"env", "policies", "episodes", "base_seed", "parallel_workers", "cost_weights", "failure_thresholds",
              "labeling", "output"});
    CampaignConfig cfg;

    Fields env(f.raw("env"), "campaign.env", {"family", "params", "file", "answer_distances"});
    cfg.env_family = env_family_from_string(env.get<std::string>("family"));
    if (env.has("params")) {
        cfg.env_params = env.raw("params");
    }
    if (env.has("file")) {
        cfg.env_file = env.get<std::string>("file");
    }
    env.read("answer_distances", cfg.answer_distances);

    if (!f.has("policies") || !f.raw("policies").is_array()) {
        throw ConfigError("campaign: 'policies' must be an array");
    }
    for (const json& p : f.raw("policies")) {
        cfg.policies.push_back(PolicySpec::from_json(p));
    }
    f.read("episodes", cfg.episodes);
    f.read("base_seed", cfg.base_seed);
    f.read("parallel_workers", cfg.parallel_workers);
    if (f.has("cost_weights")) {
        Fields w(f.raw("cost_weights"), "campaign.cost_weights", {"transition", "surrogate", "proposer", "evaluator"});
        CostWeights cw;
        w.read("transition", cw.transition);
        w.read("surrogate", cw.surrogate);
        w.read("proposer", cw.proposer);
        w.read("evaluator", cw.evaluator);
        cfg.cost_weights = cw;
    }
    if (f.has("failure_thresholds")) {
        Fields t(f.raw("failure_thresholds"), "campaign.failure_thresholds", {"loop_visits", "early_step_divisor"});
        t.read("loop_visits", cfg.thresholds.loop_visits);
        t.read("early_step_divisor", cfg.thresholds.early_step_divisor);
    }
    if (f.has("labeling")) {
        Fields l(f.raw("labeling"), "campaign.labeling", {"top_tier_quantile", "min_lengthening"});
        l.read("top_tier_quantile", cfg.labeling.top_tier_quantile);
        l.read("min_lengthening", cfg.labeling.min_lengthening);
    }
    if (f.has("output")) {
        Fields o(f.raw("output"), "campaign.output", {"records", "summary"});
        if (o.has("records")) {
            cfg.records_path = o.get<std::string>("records");
        }
        if (o.has("summary")) {
            cfg.summary_path = o.get<std::string>("summary");
        }
    }
    cfg.validate();
    return cfg;
}

void CampaignConfig::validate() const {
    if (episodes < 1) {
        throw ConfigError("campaign: episodes must be >= 1");
    }
    if (parallel_workers < 1) {
        throw ConfigError("campaign: parallel_workers must be >= 1");
    }
    if (policies.empty()) {
        throw ConfigError("campaign: at least one policy is required");
    }
    std::set<std::string> names;
    for (const PolicySpec& p : policies) {
        if (!names.insert(p.name).second) {
            throw ConfigError(fmt::format("campaign: duplicate policy name '{}'", p.name));
        }
        make_policy(p); // surfaces config errors before any episode runs
    }
    if (env_family == EnvFamily::file && env_file.empty()) {
        throw ConfigError("campaign: family 'file' needs env.file");
    }
    if (env_family == EnvFamily::graph) {
        graph_spec_from_json(env_params);
        for (int d : answer_distances) {
            if (d < 1) {
                throw ConfigError("campaign: answer_distances must be >= 1");
            }
        }
    }
    if (thresholds.loop_visits < 2 || thresholds.early_step_divisor < 1) {
        throw ConfigError("campaign: need loop_visits >= 2 and early_step_divisor >= 1");
    }
    if (!(labeling.top_tier_quantile > 0.0 && labeling.top_tier_quantile <= 1.0) || labeling.min_lengthening < 1) {
        throw ConfigError("campaign: need top_tier_quantile in (0, 1] and min_lengthening >= 1");
    }
}

CampaignConfig load_campaign_config(const std::filesystem::path& path) {
    CampaignConfig cfg = CampaignConfig::from_json(load_json(path));
    if (cfg.env_family == EnvFamily::file && cfg.env_file.is_relative()) {
        cfg.env_file = path.parent_path() / cfg.env_file;
    }
    return cfg;
}

std::uint64_t episode_seed(const CampaignConfig& cfg, int episode) {
    return cfg.base_seed + static_cast<std::uint64_t>(episode);
}

namespace {

struct EpisodeEnv {
    std::string instance_id;
    Environment env;
    OracleInfo oracle;
    TrapLabeling labels;
};

// Builds the environment of one episode; nullopt plus a reason when infeasible.
std::optional<EpisodeEnv> build_episode_env(const CampaignConfig& cfg, int episode,
                                            const std::optional<Environment>& fixed, std::string& reason) {
    const std::uint64_t seed = episode_seed(cfg, episode);
    if (cfg.env_family == EnvFamily::graph) {
        GraphInstanceSpec spec = graph_spec_from_json(cfg.env_params);
        spec.seed = seed;
        if (!cfg.answer_distances.empty()) {
            spec.answer_distance =
                cfg.answer_distances[static_cast<std::size_t>(episode) % cfg.answer_distances.size()];
        }
        try {
            GraphInstance inst = generate_instance(spec);
            TrapLabeling labels = label_traps(inst.env, inst.oracle, cfg.labeling);
            return EpisodeEnv{fmt::format("graph-s{}-d{}", seed, spec.answer_distance), std::move(inst.env),
                              std::move(inst.oracle), std::move(labels)};
        } catch (const InfeasibleSpec& e) {
            reason = e.what();
            return std::nullopt;
        }
    }
    OracleInfo oracle = compute_oracle(*fixed);
    TrapLabeling labels = label_traps(*fixed, oracle, cfg.labeling);
    return EpisodeEnv{fmt::format("{}-e{}", to_string(cfg.env_family), episode), *fixed, std::move(oracle),
                      std::move(labels)};
}

std::optional<Environment> fixed_environment(const CampaignConfig& cfg) {
    return checked<std::optional<Environment>>("campaign.env", [&]() -> std::optional<Environment> {
        switch (cfg.env_family) {
        case EnvFamily::greedy_trap:
            return make_greedy_trap(greedy_trap_params_from_json(cfg.env_params)).env;
        case EnvFamily::beam_trap:
            return make_beam_trap(beam_trap_params_from_json(cfg.env_params)).env;
        case EnvFamily::lookahead_chain:
            return make_lookahead_chain(lookahead_chain_params_from_json(cfg.env_params)).env;
        case EnvFamily::file:
            return load_environment(cfg.env_file);
        case EnvFamily::graph:
            break;
        }
        return std::nullopt;
    });
}

struct EpisodeOutcome {
    std::vector<DiagnosticRecord> records;
    std::optional<std::string> skipped;
};

EpisodeOutcome run_one_episode(const CampaignConfig& cfg, int episode, const std::optional<Environment>& fixed) {
    EpisodeOutcome out;
    std::string reason;
    const std::optional<EpisodeEnv> ep = build_episode_env(cfg, episode, fixed, reason);
    if (!ep) {
        out.skipped = reason;
        return out;
    }
    const std::uint64_t seed = episode_seed(cfg, episode);
    for (const PolicySpec& spec : cfg.policies) {
        BudgetMeter meter;
        Trajectory traj(ep->env.initial_state());
        std::optional<std::string> error;
        try {
            auto policy = make_policy(spec);
            traj = run_episode(ep->env, *policy, seed, meter);
        } catch (const std::exception& e) {
            error = e.what();
        }
        DiagnosticRecord r = diagnose_episode(ep->instance_id, spec.name, traj, ep->env, ep->oracle, &ep->labels,
                                              meter, cfg.thresholds);
        r.error = std::move(error);
        out.records.push_back(std::move(r));
    }
    return out;
}

} // namespace

CampaignResult run_campaign(const CampaignConfig& cfg) {
    cfg.validate();
    const std::optional<Environment> fixed = fixed_environment(cfg);

    std::vector<EpisodeOutcome> outcomes(static_cast<std::size_t>(cfg.episodes));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int i = next++; i < cfg.episodes; i = next++) {
            try {
                outcomes[static_cast<std::size_t>(i)] = run_one_episode(cfg, i, fixed);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const int workers = std::min(cfg.parallel_workers, cfg.episodes);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    CampaignResult result;
    for (int i = 0; i < cfg.episodes; ++i) {
        EpisodeOutcome& o = outcomes[static_cast<std::size_t>(i)];
        if (o.skipped) {
            spdlog::warn("episode {} skipped: {}", i, *o.skipped);
            result.skipped.push_back({i, *o.skipped});
            continue;
        }
        for (DiagnosticRecord& r : o.records) {
            if (r.error) {
                spdlog::warn("episode {} policy {} failed: {}", i, r.policy_name, *r.error);
                ++result.errored;
            }
            result.records.push_back(std::move(r));
        }
    }
    return result;
}

std::vector<SweepPoint> run_budget_sweep(const CampaignConfig& cfg, const std::string& axis,
                                         const std::vector<int>& values) {
    if (values.empty()) {
        throw ConfigError("sweep: budget axis is empty");
    }
    if (axis != "S" && axis != "B" && axis != "k" && axis != "budget") {
        throw ConfigError(fmt::format("sweep: unknown axis '{}' (S, B, k or budget)", axis));
    }
    std::vector<SweepPoint> points;
    for (int v : values) {
        CampaignConfig point = cfg;
        for (PolicySpec& p : point.policies) {
            if (p.type == PolicyType::flare && (axis == "S" || axis == "budget")) {
                p.config["simulations_S"] = v;
            } else if (p.type == PolicyType::beam && (axis == "B" || axis == "budget")) {
                p.config["beam_width_B"] = v;
            } else if (p.type == PolicyType::lookahead && (axis == "k" || axis == "budget")) {
                p.config["k"] = v;
            }
        }
        SweepPoint sp;
        sp.value = v;
        sp.result = run_campaign(point);
        if (sp.result.records.empty()) {
            throw ConfigError("sweep: every episode was skipped");
        }
        sp.summary = summarize(sp.result.records, cfg.cost_weights);
        points.push_back(std::move(sp));
    }
    return points;
}

void write_sweep_csv(std::ostream& out, const std::string& axis, const std::vector<SweepPoint>& points) {
    out << "axis,value,policy,episodes,success_rate,success_se,mean_transition_calls,mean_surrogate_calls,"
           "mean_proposer_calls,mean_evaluator_calls,mean_cost\n";
    for (const SweepPoint& p : points) {
        for (const GroupSummary& g : p.summary.groups) {
            if (g.stratum) {
                continue;
            }
            out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", axis, p.value, g.policy, g.episodes,
                               g.success.value, g.success.std_error, g.mean_transition_calls, g.mean_surrogate_calls,
                               g.mean_proposer_calls, g.mean_evaluator_calls,
                               g.mean_cost ? fmt::format("{}", *g.mean_cost) : "");
        }
    }
}

// ---------------------------------------------------------------------------

bool PropositionReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const PropositionCheck& c) { return c.pass; });
}

std::string PropositionReport::to_text() const {
    std::string out = fmt::format("{:<16} {:<22} {:<28} {:>10} {:>10}  {}\n", "proposition", "params", "quantity",
                                  "expected", "observed", "result");
    for (const PropositionCheck& c : checks) {
        out += fmt::format("{:<16} {:<22} {:<28} {:>10} {:>10}  {}\n", c.proposition, c.params, c.quantity,
                           c.expected, c.observed, c.pass ? "PASS" : "FAIL");
    }
    const auto passed = std::count_if(checks.begin(), checks.end(), [](const PropositionCheck& c) { return c.pass; });
    out += fmt::format("{}/{} checks passed\n", passed, checks.size());
    return out;
}

json default_proposition_grid() {
    return {
        {"greedy_trap", {{"M", {1, 5, 100}}, {"H", {2, 5, 10}}}},
        {"beam_trap", {{"B", {1, 2, 4, 8, 16}}, {"M", 7}, {"horizon", 2}}},
        {"lookahead_chain", {{10, 2, 1}, {13, 1, 2}, {22, 3, 1}}},
    };
}

namespace {

double episode_return(const Environment& env, DecisionPolicy& policy) {
    BudgetMeter meter;
    return run_episode(env, policy, 0, meter).cumulative_return();
}

void add_check(PropositionReport& report, std::string prop, std::string params, std::string quantity,
               double expected, double observed) {
    report.checks.push_back({std::move(prop), std::move(params), std::move(quantity), expected, observed,
                             expected == observed});
}

} // namespace

PropositionReport run_proposition_suite(const json& grid) {
    Fields f(grid, "grid", {"greedy_trap", "beam_trap", "lookahead_chain"});
    PropositionReport report;

    if (f.has("greedy_trap")) {
        Fields g(f.raw("greedy_trap"), "grid.greedy_trap", {"M", "H"});
        for (double M : g.get<std::vector<double>>("M")) {
            for (int H : g.get<std::vector<int>>("H")) {
                const auto inst = checked<AdversarialInstance>("greedy_trap", [&] { return make_greedy_trap({M, H}); });
                const std::string params = fmt::format("M={} H={}", M, H);
                add_check(report, "greedy-trap", params, "optimal return (enumerated)", M,
                          brute_force_optimal_return(inst.env));
                GreedyPolicy greedy;
                add_check(report, "greedy-trap", params, "greedy return", 0.0, episode_return(inst.env, greedy));
                LookaheadPolicy one_step({1, Continuation::exact, LookaheadDepth::steps_after_action});
                add_check(report, "greedy-trap", params, "1-step lookahead return", M,
                          episode_return(inst.env, one_step));
            }
        }
    }

    if (f.has("beam_trap")) {
        Fields b(f.raw("beam_trap"), "grid.beam_trap", {"B", "M", "horizon"});
        const double M = b.has("M") ? b.get<double>("M") : 7.0;
        const int horizon = b.has("horizon") ? b.get<int>("horizon") : 2;
        for (int B : b.get<std::vector<int>>("B")) {
            const auto inst =
                checked<AdversarialInstance>("beam_trap", [&] { return make_beam_trap({B, M, horizon}); });
            const std::string params = fmt::format("B={} M={}", B, M);
            add_check(report, "beam-trap", params, "optimal return (enumerated)", M,
                      brute_force_optimal_return(inst.env));
            BeamPolicy beam({B, 0, BeamCommit::recede});
            add_check(report, "beam-trap", params, "beam return", 0.0, episode_return(inst.env, beam));
            FlarePolicy flare;
            add_check(report, "beam-trap", params, "flare return", M, episode_return(inst.env, flare));
        }
    }

    if (f.has("lookahead_chain")) {
        for (const json& point : f.raw("lookahead_chain")) {
            const auto triple = point.get<std::vector<double>>();
            if (triple.size() != 3) {
                throw ConfigError("grid.lookahead_chain entries must be [H, k, R_max]");
            }
            const LookaheadChainParams p{static_cast<int>(triple[1]), static_cast<int>(triple[0]), triple[2]};
            const auto inst = checked<AdversarialInstance>("lookahead_chain", [&] { return make_lookahead_chain(p); });
            const std::string params = fmt::format("H={} k={} R={}", p.horizon_H, p.k, p.R_max);
            const double gap = p.R_max * ((p.horizon_H - 1) / (p.k + 1));
            const double optimum = brute_force_optimal_return(inst.env);
            add_check(report, "lookahead-chain", params, "optimal return (enumerated)", gap, optimum);
            LookaheadPolicy pi_k({p.k, Continuation::exact, LookaheadDepth::total_steps});
            add_check(report, "lookahead-chain", params, "gap of k-lookahead", gap,
                      optimum - episode_return(inst.env, pi_k));
            LookaheadPolicy pi_k1({p.k + 1, Continuation::exact, LookaheadDepth::total_steps});
            add_check(report, "lookahead-chain", params, "(k+1)-lookahead return", optimum,
                      episode_return(inst.env, pi_k1));
        }
    }
    return report;
}

} // namespace horizonlab
