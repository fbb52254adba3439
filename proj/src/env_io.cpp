#include "horizonlab/env_io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "horizonlab/errors.hpp"

namespace horizonlab {

using nlohmann::json;

json environment_to_json(const Environment& env) {
    json edges = json::array();
    for (int s = 0; s < env.num_states(); ++s) {
        for (const Edge& e : env.actions(state_id(s))) {
            edges.push_back({{"from", s},
                             {"action_label", e.label},
                             {"to", index(e.to)},
                             {"reward", e.reward},
                             {"surrogate", e.surrogate}});
        }
    }
    json answers = json::array();
    for (StateId a : env.answers()) {
        answers.push_back(index(a));
    }
    return {{"states", env.num_states()},
            {"initial", index(env.initial_state())},
            {"answers", answers},
            {"edges", edges},
            {"episode_horizon", env.episode_horizon()}};
}

Environment environment_from_json(const json& j) {
    try {
        const int n = j.at("states").get<int>();
        if (n <= 0) {
            throw ConfigError("environment: 'states' must be positive");
        }
        std::vector<std::vector<Edge>> edges(static_cast<std::size_t>(n));
        for (const json& e : j.at("edges")) {
            const int from = e.at("from").get<int>();
            if (from < 0 || from >= n) {
                throw ConfigError(fmt::format("environment: edge source {} out of range", from));
            }
            edges[static_cast<std::size_t>(from)].push_back({e.at("action_label").get<std::string>(),
                                                            state_id(e.at("to").get<int>()),
                                                            e.at("reward").get<double>(),
                                                            e.at("surrogate").get<double>()});
        }
        std::vector<StateId> answers;
        for (const json& a : j.value("answers", json::array())) {
            answers.push_back(state_id(a.get<int>()));
        }
        return Environment(n, state_id(j.at("initial").get<int>()), std::move(answers), std::move(edges),
                           j.at("episode_horizon").get<int>());
    } catch (const json::exception& ex) {
        throw ConfigError(fmt::format("environment: {}", ex.what()));
    } catch (const InvalidParams& ex) {
        throw ConfigError(fmt::format("environment: {}", ex.what()));
    }
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open {}", path.string()));
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        throw ConfigError(fmt::format("{}: {}", path.string(), ex.what()));
    }
}

Environment load_environment(const std::filesystem::path& path) {
    return environment_from_json(load_json(path));
}

void save_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError(fmt::format("cannot write {}", path.string()));
    }
    out << j.dump(2) << '\n';
}

json meter_to_json(const BudgetMeter& meter) {
    return {{"transition_calls", meter.transition_calls},
            {"surrogate_calls", meter.surrogate_calls},
            {"proposer_calls", meter.proposer_calls},
            {"evaluator_calls", meter.evaluator_calls}};
}

json trajectory_to_json(const Trajectory& traj, const Environment& env) {
    json steps = json::array();
    for (int t = 0; t < traj.length(); ++t) {
        const StateId s = traj.states()[t];
        steps.push_back({{"state", index(s)},
                         {"action", index(traj.actions()[t])},
                         {"action_label", env.edge(s, traj.actions()[t]).label},
                         {"next", index(traj.states()[t + 1])},
                         {"reward", traj.step_rewards()[t]}});
    }
    return {{"initial", index(traj.front())},
            {"final", index(traj.back())},
            {"steps", steps},
            {"return", traj.cumulative_return()}};
}

} // namespace horizonlab
