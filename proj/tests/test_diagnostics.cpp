#include <doctest.h>

#include <sstream>

#include "horizonlab/diagnostics.hpp"
#include "horizonlab/errors.hpp"
#include "support/oracles.hpp"

using namespace horizonlab;

namespace {

// 0 -> 1 -> 2 (answer), 1 -> 0, 0 -> 3 (dead), 1 -> 4 (dead).
Environment small_env(int horizon) {
    EnvironmentBuilder b;
    b.add_states(5);
    b.add_edge(state_id(0), "fwd", state_id(1), 0.0, 1.0);
    b.add_edge(state_id(0), "dead", state_id(3), 0.0, 2.0);
    b.add_edge(state_id(1), "fwd", state_id(2), 1.0, 1.0);
    b.add_edge(state_id(1), "back", state_id(0), 0.0, 0.0);
    b.add_edge(state_id(1), "dead", state_id(4), 0.0, 0.0);
    b.set_initial(state_id(0));
    b.add_answer(state_id(2));
    b.set_episode_horizon(horizon);
    return b.build();
}

Trajectory walk(const Environment& env, std::initializer_list<int> actions) {
    Trajectory t(env.initial_state());
    for (int a : actions) {
        const Edge& e = env.edge(t.back(), action_id(a));
        t.append(action_id(a), e.to, e.reward);
    }
    return t;
}

DiagnosticRecord record(const std::string& policy, bool success, std::optional<bool> trap,
                        std::optional<int> first_err, int D = 3) {
    DiagnosticRecord r;
    r.instance_id = "i";
    r.policy_name = policy;
    r.answer_distance = D;
    r.success = success;
    r.trap_at_1 = trap;
    r.first_error_step = first_err;
    if (first_err) {
        r.recovered = success;
    }
    return r;
}

} // namespace

TEST_CASE("first error on hand-built trajectories") {
    const Environment env = small_env(8);
    const OracleInfo oracle = compute_oracle(env);
    CHECK_FALSE(first_error(walk(env, {0, 0}), oracle).has_value());
    CHECK(first_error(walk(env, {1}), oracle) == 1);
    CHECK(first_error(walk(env, {0, 1, 0, 0}), oracle) == 2);
    CHECK_FALSE(first_error(Trajectory(state_id(0)), oracle).has_value());
    CHECK(recovery(walk(env, {0, 1, 0, 0}), env, 2));
    CHECK_FALSE(recovery(walk(env, {0, 2}), env, 2));
}

TEST_CASE("first error agrees with shortest-solution prefixes") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Environment env = testing::random_env(seed);
        const OracleInfo oracle = compute_oracle(env);
        if (!oracle.reachable(env.initial_state())) {
            continue;
        }
        const auto solutions = testing::all_shortest_solutions(env);
        for (std::uint64_t k = 0; k < 8; ++k) {
            const Trajectory t = testing::random_walk(env, seed * 31 + k, env.episode_horizon());
            CHECK(first_error(t, oracle) == testing::first_error_by_paths(t, solutions));
        }
    }
}

TEST_CASE("trap at first step") {
    const Environment env = small_env(8);
    const OracleInfo oracle = compute_oracle(env);
    const TrapLabeling labels = label_traps(env, oracle);
    CHECK(trap_at_1(walk(env, {1}), labels) == true);
    CHECK(trap_at_1(walk(env, {0, 0}), labels) == false);
    CHECK_FALSE(trap_at_1(Trajectory(state_id(0)), labels).has_value());
    TrapLabeling excluded = labels;
    excluded.initial_excluded = true;
    CHECK_FALSE(trap_at_1(walk(env, {1}), excluded).has_value());
}

TEST_CASE("failure categories follow their precedence") {
    {
        const Environment env = small_env(8);
        const OracleInfo o = compute_oracle(env);
        CHECK(categorize_failure(walk(env, {0, 0}), o, env) == FailureCategory::none);
        CHECK(categorize_failure(walk(env, {0, 1, 0, 1, 0}), o, env) == FailureCategory::loop);
        CHECK(categorize_failure(walk(env, {0}), o, env) == FailureCategory::premature);
        CHECK(categorize_failure(walk(env, {1}), o, env) == FailureCategory::myopic_deviation);
        CHECK(categorize_failure(walk(env, {0, 1, 0, 2}), o, env) == FailureCategory::dead_end);
        FailureThresholds loose;
        loose.loop_visits = 10;
        CHECK(categorize_failure(walk(env, {0, 1, 0, 1, 0, 1, 0, 1}), o, env, loose) ==
              FailureCategory::dead_end);
    }
    {
        // ceil(3 / 3) = 1, so losing reachability at step 2 is a dead end.
        const Environment env = small_env(3);
        const OracleInfo o = compute_oracle(env);
        CHECK(categorize_failure(walk(env, {0, 2}), o, env) == FailureCategory::dead_end);
        CHECK(categorize_failure(walk(env, {1}), o, env) == FailureCategory::myopic_deviation);
    }
}

TEST_CASE("diagnose_episode fills every field") {
    const Environment env = small_env(8);
    const OracleInfo o = compute_oracle(env);
    const TrapLabeling labels = label_traps(env, o);
    BudgetMeter m;
    m.surrogate_calls = 4;
    const DiagnosticRecord r = diagnose_episode("x", "p", walk(env, {0, 1, 0, 0}), env, o, &labels, m);
    CHECK(r.success);
    CHECK(r.answer_distance == 2);
    CHECK(r.trap_at_1 == false);
    CHECK(r.first_error_step == 2);
    CHECK(r.recovered == true);
    CHECK(r.failure_category == FailureCategory::none);
    CHECK(r.episode_return == 1.0);
    CHECK(r.steps == 4);
    CHECK(r.budget.surrogate_calls == 4);

    const DiagnosticRecord back = record_from_json(record_to_json(r));
    CHECK(record_to_json(back) == record_to_json(r));
    DiagnosticRecord failed = r;
    failed.error = "boom";
    failed.recovered.reset();
    CHECK(record_to_json(record_from_json(record_to_json(failed))) == record_to_json(failed));
}

TEST_CASE("summary of a single success") {
    const CampaignSummary s = summarize({record("a", true, false, std::nullopt)});
    const GroupSummary* g = s.find("a");
    REQUIRE(g != nullptr);
    CHECK(g->success.value == 1.0);
    CHECK(g->success.std_error == 0.0);
    CHECK(g->mean_first_error.n == 0);
    CHECK(g->first_error_excluded == 1);
    CHECK(g->recovery.n == 0);
    CHECK(s.find("a", 3) != nullptr);
    CHECK(s.find("a", 4) == nullptr);
}

TEST_CASE("summary rates and standard errors") {
    std::vector<DiagnosticRecord> recs{
        record("a", true, true, 1, 2),  record("a", false, false, 3, 2), record("a", true, std::nullopt, 2, 3),
        record("a", false, true, std::nullopt, 3), record("b", true, false, std::nullopt, 2),
    };
    const CampaignSummary s = summarize(recs);
    const GroupSummary* a = s.find("a");
    REQUIRE(a != nullptr);
    CHECK(a->episodes == 4);
    CHECK(a->trap_at_1.n == 3);
    CHECK(a->trap_at_1.value == doctest::Approx(2.0 / 3.0));
    CHECK(a->success.value == 0.5);
    CHECK(a->success.std_error == doctest::Approx(0.25));
    CHECK(a->mean_first_error.value == 2.0);
    CHECK(a->mean_first_error.std_error == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(a->first_error_excluded == 1);
    CHECK(a->recovery.value == doctest::Approx(2.0 / 3.0));
    CHECK(s.find("a", 2)->episodes == 2);
    CHECK(s.find("a", 2)->trap_at_1.value == 0.5);
    CHECK(s.groups.front().policy == "a");
    CHECK_THROWS_AS(summarize({}), InvalidParams);
}

TEST_CASE("survival curve is nonincreasing and counts error-free prefixes") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<DiagnosticRecord> recs;
        const int n = 1 + static_cast<int>(rng() % 30);
        for (int i = 0; i < n; ++i) {
            std::optional<int> fe;
            if (rng() % 3 != 0) {
                fe = 1 + static_cast<int>(rng() % 8);
            }
            recs.push_back(record("p", rng() % 2 == 0, std::nullopt, fe));
            recs.back().steps = 8;
        }
        const CampaignSummary summary = summarize(recs);
        const GroupSummary* g = summary.find("p");
        REQUIRE(g != nullptr);
        for (std::size_t t = 0; t < g->survival.size(); ++t) {
            if (t > 0) {
                CHECK(g->survival[t] <= g->survival[t - 1]);
            }
            int alive = 0;
            for (const auto& r : recs) {
                alive += !r.first_error_step || *r.first_error_step > static_cast<int>(t);
            }
            CHECK(g->survival[t] == doctest::Approx(static_cast<double>(alive) / n));
        }
        CHECK(g->survival.front() == 1.0);
    }
}

TEST_CASE("summary writers produce one row per group") {
    std::vector<DiagnosticRecord> recs{record("a", true, false, std::nullopt, 2), record("b", false, true, 1, 3)};
    const CampaignSummary s = summarize(recs, CostWeights{1.0, 0.5, 0.0, 2.0});
    std::ostringstream csv;
    write_summary_csv(csv, s);
    int lines = 0;
    for (char c : csv.str()) {
        lines += c == '\n';
    }
    CHECK(lines == 1 + static_cast<int>(s.groups.size()));
    CHECK(summary_to_json(s)["groups"].size() == s.groups.size());
    std::ostringstream jsonl;
    write_records_jsonl(jsonl, recs);
    std::istringstream in(jsonl.str());
    std::string line;
    int count = 0;
    while (std::getline(in, line)) {
        CHECK(record_from_json(nlohmann::json::parse(line)).policy_name == recs[static_cast<std::size_t>(count)].policy_name);
        ++count;
    }
    CHECK(count == 2);
}
