#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "horizonlab/env.hpp"

namespace horizonlab {

// Environment file schema:
//   {"states": n, "initial": id, "answers": [id...],
//    "edges": [{"from", "action_label", "to", "reward", "surrogate"}...],
//    "episode_horizon": h}
// Action order within a state is the order of its edges in the file.
nlohmann::json environment_to_json(const Environment& env);
Environment environment_from_json(const nlohmann::json& j);

Environment load_environment(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json load_json(const std::filesystem::path& path);

nlohmann::json meter_to_json(const BudgetMeter& meter);
nlohmann::json trajectory_to_json(const Trajectory& traj, const Environment& env);

} // namespace horizonlab
