#include "horizonlab/remote.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>

#include "horizonlab/errors.hpp"

namespace horizonlab {

using nlohmann::json;

json state_descriptor(const Environment& env, StateId s) {
    json actions = json::array();
    for (const Edge& e : env.actions(s)) {
        actions.push_back(e.label);
    }
    return {{"id", index(s)}, {"actions", actions}, {"is_answer", env.is_answer(s)}};
}

Endpoint Endpoint::parse(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError(fmt::format("remote url '{}' lacks a scheme", url));
    }
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint e;
    e.host_port = url.substr(0, path_start);
    if (path_start != std::string::npos) {
        e.base_path = url.substr(path_start);
        while (!e.base_path.empty() && e.base_path.back() == '/') {
            e.base_path.pop_back();
        }
    }
    return e;
}

namespace {

json post(const Endpoint& endpoint, std::chrono::milliseconds timeout, const std::string& route, const json& body) {
    httplib::Client client(endpoint.host_port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    const std::string path = endpoint.base_path + route;
    const auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
        throw PlanningError(fmt::format("POST {}{} failed: {}", endpoint.host_port, path, httplib::to_string(res.error())));
    }
    if (res->status < 200 || res->status >= 300) {
        throw PlanningError(fmt::format("POST {}{} returned status {}", endpoint.host_port, path, res->status));
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw PlanningError(fmt::format("POST {}{}: malformed response: {}", endpoint.host_port, path, e.what()));
    }
}

} // namespace

RemoteProposer::RemoteProposer(std::string url, std::chrono::milliseconds timeout)
    : endpoint_(Endpoint::parse(url)), timeout_(timeout) {}

std::vector<ActionId> RemoteProposer::propose(const Environment& env, StateId s, int k, std::uint64_t,
                                              BudgetMeter&) {
    const json res = post(endpoint_, timeout_, "/propose", {{"state", state_descriptor(env, s)}, {"k", k}});
    if (!res.contains("actions") || !res["actions"].is_array()) {
        throw PlanningError("remote proposer: response lacks an 'actions' array");
    }
    const auto actions = env.actions(s);
    std::vector<bool> taken(actions.size(), false);
    std::vector<ActionId> out;
    for (const json& label : res["actions"]) {
        if (!label.is_string()) {
            throw PlanningError("remote proposer: action labels must be strings");
        }
        bool found = false;
        // Duplicate labels at one state map to successive actions.
        for (std::size_t i = 0; i < actions.size() && !found; ++i) {
            if (!taken[i] && actions[i].label == label.get<std::string>()) {
                taken[i] = true;
                found = true;
                out.push_back(action_id(static_cast<int>(i)));
            }
        }
        if (!found) {
            throw PlanningError(fmt::format("remote proposer: '{}' is not a legal action at state {}",
                                            label.get<std::string>(), index(s)));
        }
    }
    return out;
}

RemoteEvaluator::RemoteEvaluator(std::string url, std::chrono::milliseconds timeout)
    : endpoint_(Endpoint::parse(url)), timeout_(timeout) {}

double RemoteEvaluator::evaluate(const Environment& env, const Trajectory& traj) {
    json steps = json::array();
    for (int t = 0; t < traj.length(); ++t) {
        const StateId s = traj.states()[static_cast<std::size_t>(t)];
        const ActionId a = traj.actions()[static_cast<std::size_t>(t)];
        steps.push_back({{"state", state_descriptor(env, s)}, {"action", env.edge(s, a).label}});
    }
    const json res = post(endpoint_, timeout_, "/evaluate", {{"trajectories", json::array({steps})}});
    if (!res.contains("returns") || !res["returns"].is_array() || res["returns"].size() != 1 ||
        !res["returns"][0].is_number()) {
        throw PlanningError("remote evaluator: expected exactly one numeric return");
    }
    const double value = res["returns"][0].get<double>();
    if (!std::isfinite(value)) {
        throw PlanningError("remote evaluator: return is not finite");
    }
    return value;
}

std::chrono::milliseconds remote_timeout_from_env() {
    const char* raw = std::getenv(remote_timeout_var);
    if (raw == nullptr || *raw == '\0') {
        return std::chrono::milliseconds(10000);
    }
    char* end = nullptr;
    const long ms = std::strtol(raw, &end, 10);
    if (*end != '\0' || ms <= 0) {
        throw ConfigError(fmt::format("{} must be a positive integer", remote_timeout_var));
    }
    return std::chrono::milliseconds(ms);
}

std::shared_ptr<Proposer> remote_proposer_from_env() {
    const char* url = std::getenv(proposer_url_var);
    if (url == nullptr || *url == '\0') {
        return nullptr;
    }
    return std::make_shared<RemoteProposer>(url, remote_timeout_from_env());
}

std::shared_ptr<TrajectoryEvaluator> remote_evaluator_from_env() {
    const char* url = std::getenv(evaluator_url_var);
    if (url == nullptr || *url == '\0') {
        return nullptr;
    }
    return std::make_shared<RemoteEvaluator>(url, remote_timeout_from_env());
}

} // namespace horizonlab
