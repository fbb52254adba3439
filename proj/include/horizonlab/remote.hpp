#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "horizonlab/flare.hpp"

namespace horizonlab {

inline constexpr const char* evaluator_url_var = "HORIZONLAB_EVALUATOR_URL";
inline constexpr const char* proposer_url_var = "HORIZONLAB_PROPOSER_URL";
inline constexpr const char* remote_timeout_var = "HORIZONLAB_REMOTE_TIMEOUT_MS";

/// JSON description of a state sent to remote services.
nlohmann::json state_descriptor(const Environment& env, StateId s);

/// Base URL such as "http://127.0.0.1:8080" or "http://host:8080/prefix".
struct Endpoint {
    std::string host_port; // scheme://host[:port]
    std::string base_path; // "" or "/prefix"

    static Endpoint parse(const std::string& url);
};

/// POST {base}/propose {"state", "k"} -> {"actions": [label...]}.
/// Any transport failure, non-2xx status or malformed body is a PlanningError.
class RemoteProposer final : public Proposer {
public:
    RemoteProposer(std::string url, std::chrono::milliseconds timeout);

    std::string name() const override { return "remote"; }
    std::vector<ActionId> propose(const Environment& env, StateId s, int k, std::uint64_t seed,
                                  BudgetMeter& meter) override;

private:
    Endpoint endpoint_;
    std::chrono::milliseconds timeout_;
};

/// POST {base}/evaluate {"trajectories": [[{"state", "action"}...]]} -> {"returns": [x]}.
class RemoteEvaluator final : public TrajectoryEvaluator {
public:
    RemoteEvaluator(std::string url, std::chrono::milliseconds timeout);

    std::string name() const override { return "remote"; }
    double evaluate(const Environment& env, const Trajectory& traj) override;

private:
    Endpoint endpoint_;
    std::chrono::milliseconds timeout_;
};

std::chrono::milliseconds remote_timeout_from_env();
// nullptr when the corresponding variable is unset or empty.
std::shared_ptr<Proposer> remote_proposer_from_env();
std::shared_ptr<TrajectoryEvaluator> remote_evaluator_from_env();

} // namespace horizonlab
