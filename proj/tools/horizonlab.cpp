#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "horizonlab/diagnostics.hpp"
#include "horizonlab/env_io.hpp"
#include "horizonlab/errors.hpp"
#include "horizonlab/harness.hpp"

namespace fs = std::filesystem;
using namespace horizonlab;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_config = 2;

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError(fmt::format("cannot write {}", path.string()));
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

json parse_json_arg(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", what, e.what()));
    }
}

std::pair<std::string, std::vector<int>> parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError(fmt::format("--axis '{}': expected NAME=v1,v2,...", text));
    }
    std::vector<int> values;
    std::stringstream ss(text.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stoi(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("--axis: '{}' is not an integer", item));
        }
    }
    return {text.substr(0, eq), values};
}

int cmd_props(const std::string& grid_path, const std::string& out_path) {
    const json grid = grid_path.empty() ? default_proposition_grid() : load_json(grid_path);
    const PropositionReport report = run_proposition_suite(grid);
    const std::string text = report.to_text();
    std::cout << text;
    if (!out_path.empty()) {
        write_text(out_path, text);
    }
    return report.all_pass() ? exit_ok : exit_check_failed;
}

void write_campaign_outputs(const CampaignResult& result, const std::optional<CostWeights>& weights,
                            const fs::path& records, const fs::path& summary_csv) {
    if (!records.empty()) {
        auto out = open_out(records);
        write_records_jsonl(out, result.records);
    }
    if (result.records.empty()) {
        spdlog::warn("no records produced; every episode was skipped");
        return;
    }
    const CampaignSummary summary = summarize(result.records, weights);
    if (!summary_csv.empty()) {
        auto out = open_out(summary_csv);
        write_summary_csv(out, summary);
        fs::path json_path = summary_csv;
        json_path.replace_extension(".json");
        if (json_path == summary_csv) {
            json_path += ".json";
        }
        write_text(json_path, summary_to_json(summary).dump(2) + "\n");
    } else {
        write_summary_csv(std::cout, summary);
    }
}

int cmd_diagnose(const std::string& config_path, std::string records, std::string summary, int workers) {
    CampaignConfig cfg = load_campaign_config(config_path);
    if (workers > 0) {
        cfg.parallel_workers = workers;
    }
    if (records.empty()) {
        records = cfg.records_path.string();
    }
    if (summary.empty()) {
        summary = cfg.summary_path.string();
    }
    const CampaignResult result = run_campaign(cfg);
    write_campaign_outputs(result, cfg.cost_weights, records, summary);
    spdlog::info("{} records, {} skipped episodes, {} errored policy runs", result.records.size(),
                 result.skipped.size(), result.errored);
    return exit_ok;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_text, const std::string& out_path,
              const std::string& records_dir, int workers) {
    CampaignConfig cfg = load_campaign_config(config_path);
    if (workers > 0) {
        cfg.parallel_workers = workers;
    }
    const auto [axis, values] = parse_axis(axis_text);
    const auto points = run_budget_sweep(cfg, axis, values);
    if (!records_dir.empty()) {
        for (const SweepPoint& p : points) {
            auto out = open_out(fs::path(records_dir) / fmt::format("{}_{}.jsonl", axis, p.value));
            write_records_jsonl(out, p.result.records);
        }
    }
    if (out_path.empty()) {
        write_sweep_csv(std::cout, axis, points);
    } else {
        auto out = open_out(out_path);
        write_sweep_csv(out, axis, points);
    }
    return exit_ok;
}

int cmd_gen_env(const std::string& family_name, const std::string& params_text, const std::string& spec_path,
                const std::string& out_path, const std::optional<std::uint64_t>& seed) {
    const EnvFamily family = env_family_from_string(family_name);
    json params = json::object();
    if (!spec_path.empty()) {
        params = load_json(spec_path);
    }
    if (!params_text.empty()) {
        params.update(parse_json_arg(params_text, "--params"));
    }
    if (seed) {
        params["seed"] = *seed;
    }
    const json env = generate_env_json(family, params);
    if (out_path.empty()) {
        std::cout << env.dump(2) << '\n';
    } else {
        save_json(out_path, env);
    }
    return exit_ok;
}

int cmd_run(const std::string& env_path, const std::string& policy, const std::string& policy_config_path,
            std::uint64_t seed, const std::string& out_path) {
    const Environment env = load_environment(env_path);
    PolicySpec spec;
    spec.type = policy_type_from_string(policy);
    spec.name = policy;
    if (!policy_config_path.empty()) {
        // Inline JSON or a file path.
        spec.config = policy_config_path.front() == '{' ? nlohmann::json::parse(policy_config_path)
                                                        : load_json(policy_config_path);
    }
    auto p = make_policy(spec);
    BudgetMeter meter;
    const Trajectory traj = run_episode(env, *p, seed, meter);
    json out = trajectory_to_json(traj, env);
    out["policy"] = spec.name;
    out["budget"] = meter_to_json(meter);
    out["success"] = reached_answer(traj, env);
    if (out_path.empty()) {
        std::cout << out.dump(2) << '\n';
    } else {
        save_json(out_path, out);
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"horizonlab: myopic planning diagnostics and tree-search planners"};
    app.require_subcommand(1);
    spdlog::set_pattern("[%l] %v");

    std::string grid, report_out;
    auto* props = app.add_subcommand("props", "check the constructed counterexample families exactly");
    props->add_option("--grid", grid, "grid JSON (defaults to the built-in grid)");
    props->add_option("--out", report_out, "write the pass/fail table here as well");

    std::string config, records, summary;
    int workers = 0;
    auto* diagnose = app.add_subcommand("diagnose", "run a campaign and emit diagnostic records and summaries");
    diagnose->add_option("--config", config, "campaign JSON")->required();
    diagnose->add_option("--out-records", records, "records JSON Lines");
    diagnose->add_option("--out-summary", summary, "summary CSV; the JSON summary goes next to it");
    diagnose->add_option("--workers", workers, "override parallel_workers");

    std::string axis, sweep_out, sweep_records;
    auto* sweep = app.add_subcommand("sweep", "rerun a campaign across budget values");
    sweep->add_option("--config", config, "campaign JSON")->required();
    sweep->add_option("--axis", axis, "NAME=v1,v2,... with NAME in S, B, k, budget")->required();
    sweep->add_option("--out", sweep_out, "sweep CSV (stdout if omitted)");
    sweep->add_option("--out-records-dir", sweep_records, "write records per budget point here");
    sweep->add_option("--workers", workers, "override parallel_workers");

    std::string family, params, spec, env_out;
    std::optional<std::uint64_t> seed;
    auto* gen = app.add_subcommand("gen-env", "write an environment file");
    gen->add_option("--family", family, "greedy-trap | beam-trap | lookahead-chain | graph")->required();
    gen->add_option("--params", params, "inline JSON parameters");
    gen->add_option("--spec", spec, "JSON parameter file");
    gen->add_option("--seed", seed, "graph seed (overrides the parameters)");
    gen->add_option("--out", env_out, "output path (stdout if omitted)");

    std::string env_path, policy, policy_config, run_out;
    std::uint64_t run_seed = 0;
    auto* run = app.add_subcommand("run", "run one episode of a policy on an environment file");
    run->add_option("--env", env_path, "environment JSON")->required();
    run->add_option("--policy", policy, "greedy | beam | lookahead | flare")->required();
    run->add_option("--policy-config", policy_config, "policy config: inline JSON object or file");
    run->add_option("--seed", run_seed, "episode seed");
    run->add_option("--out", run_out, "trajectory JSON (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (props->parsed()) {
            return cmd_props(grid, report_out);
        }
        if (diagnose->parsed()) {
            return cmd_diagnose(config, records, summary, workers);
        }
        if (sweep->parsed()) {
            return cmd_sweep(config, axis, sweep_out, sweep_records, workers);
        }
        if (gen->parsed()) {
            return cmd_gen_env(family, params, spec, env_out, seed);
        }
        if (run->parsed()) {
            return cmd_run(env_path, policy, policy_config, run_seed, run_out);
        }
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return exit_config;
    } catch (const InvalidParams& e) {
        spdlog::error("{}", e.what());
        return exit_config;
    } catch (const nlohmann::json::exception& e) {
        spdlog::error("{}", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_check_failed;
    }
    return exit_ok;
}
