#include <doctest.h>

#include <httplib.h>

#include <chrono>
#include <thread>

#include "horizonlab/errors.hpp"
#include "horizonlab/flare.hpp"
#include "horizonlab/graph_env.hpp"
#include "horizonlab/remote.hpp"

using namespace horizonlab;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

// Serves proposals and returns computed from a local copy of the environment.
class FakeService {
public:
    explicit FakeService(const Environment& env) : env_(env) {
        server_.Post("/propose", [this](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body);
            const int k = body["k"];
            json labels = json::array();
            for (const json& l : body["state"]["actions"]) {
                if (static_cast<int>(labels.size()) < k) {
                    labels.push_back(l);
                }
            }
            res.set_content(json{{"actions", labels}}.dump(), "application/json");
        });
        server_.Post("/evaluate", [this](const httplib::Request& req, httplib::Response& res) {
            ++evaluations;
            const json body = json::parse(req.body);
            json returns = json::array();
            for (const json& traj : body["trajectories"]) {
                double total = 0.0;
                for (const json& step : traj) {
                    const StateId s = state_id(step["state"]["id"].get<int>());
                    for (const Edge& e : env_.actions(s)) {
                        if (e.label == step["action"].get<std::string>()) {
                            total += e.reward;
                            break;
                        }
                    }
                }
                returns.push_back(total);
            }
            res.set_content(json{{"returns", returns}}.dump(), "application/json");
        });
        server_.Post("/broken/evaluate", [](const httplib::Request&, httplib::Response& res) {
            res.status = 503;
        });
        server_.Post("/garbage/propose", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("{\"actions\": 3}", "application/json");
        });
        server_.Post("/unknown/propose", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("{\"actions\": [\"nope\"]}", "application/json");
        });
        server_.Post("/slow/evaluate", [](const httplib::Request&, httplib::Response& res) {
            std::this_thread::sleep_for(600ms);
            res.set_content("{\"returns\": [0]}", "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~FakeService() {
        server_.stop();
        thread_.join();
    }

    std::string url(const std::string& prefix = "") const {
        return "http://127.0.0.1:" + std::to_string(port_) + prefix;
    }

    int evaluations = 0;

private:
    const Environment& env_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

GraphInstance small_instance() {
    GraphInstanceSpec spec;
    spec.seed = 5;
    spec.answer_distance = 3;
    return generate_instance(spec);
}

} // namespace

TEST_CASE("remote proposer and evaluator round trip") {
    const GraphInstance g = small_instance();
    FakeService svc(g.env);
    const StateId s0 = g.env.initial_state();
    RemoteProposer proposer(svc.url(), 2000ms);
    BudgetMeter m;
    const auto actions = proposer.propose(g.env, s0, 2, 0, m);
    CHECK(actions == std::vector<ActionId>{action_id(0), action_id(1)});

    RemoteEvaluator evaluator(svc.url(), 2000ms);
    Trajectory t(s0);
    t.append(action_id(0), g.env.edge(s0, action_id(0)).to, g.env.edge(s0, action_id(0)).reward);
    ReturnEvaluator local;
    CHECK(evaluator.evaluate(g.env, t) == local.evaluate(g.env, t));
    CHECK(svc.evaluations == 1);
}

TEST_CASE("remote failures surface as planning errors") {
    const GraphInstance g = small_instance();
    FakeService svc(g.env);
    const StateId s0 = g.env.initial_state();
    Trajectory t(s0);
    BudgetMeter m;
    CHECK_THROWS_AS(RemoteEvaluator(svc.url("/broken"), 2000ms).evaluate(g.env, t), PlanningError);
    CHECK_THROWS_AS(RemoteProposer(svc.url("/garbage"), 2000ms).propose(g.env, s0, 2, 0, m), PlanningError);
    CHECK_THROWS_AS(RemoteProposer(svc.url("/unknown"), 2000ms).propose(g.env, s0, 2, 0, m), PlanningError);
    CHECK_THROWS_AS(RemoteEvaluator(svc.url("/slow"), 100ms).evaluate(g.env, t), PlanningError);
    CHECK_THROWS_AS(RemoteEvaluator("http://127.0.0.1:1", 200ms).evaluate(g.env, t), PlanningError);
}

TEST_CASE("planning through the remote interfaces matches local planning") {
    const GraphInstance g = small_instance();
    FakeService svc(g.env);
    RemoteProposer rp(svc.url(), 2000ms);
    RemoteEvaluator re(svc.url(), 2000ms);
    FirstKProposer lp;
    ReturnEvaluator le;
    FlareConfig cfg;
    cfg.use_memory = false;
    BudgetMeter m1, m2;
    const PlanResult remote = plan(g.env, g.env.initial_state(), cfg, rp, re, nullptr, m1, 3);
    const PlanResult local = plan(g.env, g.env.initial_state(), cfg, lp, le, nullptr, m2, 3);
    CHECK(remote.action == local.action);
    REQUIRE(remote.log.size() == local.log.size());
    for (std::size_t i = 0; i < local.log.size(); ++i) {
        CHECK(remote.log[i].value == local.log[i].value);
    }
    CHECK(svc.evaluations == cfg.simulations_S);
}

TEST_CASE("endpoint parsing and env lookup") {
    const Endpoint e = Endpoint::parse("http://localhost:9000/api/");
    CHECK(e.host_port == "http://localhost:9000");
    CHECK(e.base_path == "/api");
    CHECK(Endpoint::parse("http://h:1").base_path.empty());
    ::unsetenv(proposer_url_var);
    CHECK(remote_proposer_from_env() == nullptr);
    ::setenv(remote_timeout_var, "1234", 1);
    CHECK(remote_timeout_from_env() == 1234ms);
    ::unsetenv(remote_timeout_var);
    CHECK(remote_timeout_from_env() == 10000ms);
}
