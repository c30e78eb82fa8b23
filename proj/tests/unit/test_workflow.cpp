#include <gtest/gtest.h>

#include <atomic>
#include <random>

#include "test_support.hpp"
#include "untrue/errors.hpp"
#include "untrue/workflow.hpp"

using namespace untrue;
using namespace std::chrono_literals;

namespace {

TaskSpec task(std::string id, std::set<std::string> deps = {}, std::string action = "ok", int retries = 0) {
    return {std::move(id), std::move(deps), std::move(action), retries, 0ms};
}

ActionRegistry basic_actions() {
    ActionRegistry a;
    a.add("ok", [](const TaskContext&) {});
    a.add("fail", [](const TaskContext&) { throw std::runtime_error("boom"); });
    a.add("slow", [](const TaskContext&) { std::this_thread::sleep_for(20ms); });
    return a;
}

bool is_topological(const std::vector<TaskSpec>& tasks, const std::vector<std::string>& order) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    if (pos.size() != tasks.size()) return false;
    for (const auto& t : tasks) {
        for (const auto& d : t.deps) {
            if (pos.at(d) >= pos.at(t.task_id)) return false;
        }
    }
    return true;
}

}  // namespace

TEST(ValidateDag, SingleAndChain) {
    EXPECT_EQ(validate_dag({task("a")}), (std::vector<std::string>{"a"}));
    EXPECT_EQ(validate_dag({task("c", {"b"}), task("b", {"a"}), task("a")}),
              (std::vector<std::string>{"a", "b", "c"}));
}

TEST(ValidateDag, TiesBrokenById) {
    EXPECT_EQ(validate_dag({task("z"), task("m"), task("b", {"z"}), task("a", {"z"})}),
              (std::vector<std::string>{"m", "z", "a", "b"}));
}

TEST(ValidateDag, Errors) {
    EXPECT_THROW(validate_dag({}), DagError);
    EXPECT_THROW(validate_dag({task("a"), task("a")}), DagError);
    EXPECT_THROW(validate_dag({task("a", {"ghost"})}), DagError);
    EXPECT_THROW(validate_dag({task("a", {"a"})}), DagError);
    try {
        validate_dag({task("x"), task("a", {"c"}), task("b", {"a"}), task("c", {"b"})});
        FAIL() << "cycle accepted";
    } catch (const DagError& e) {
        std::string what = e.what();
        EXPECT_NE(what.find("a"), std::string::npos);
        EXPECT_NE(what.find("b"), std::string::npos);
        EXPECT_NE(what.find("c"), std::string::npos);
    }
}

TEST(ValidateDag, RandomDagsProduceTopologicalOrders) {
    std::mt19937 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TaskSpec> tasks;
        int n = 1 + static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) {
            std::set<std::string> deps;
            for (int j = 0; j < i; ++j) {
                if (rng() % 3 == 0) deps.insert("t" + std::to_string(j));
            }
            tasks.push_back(task("t" + std::to_string(i), deps));
        }
        std::shuffle(tasks.begin(), tasks.end(), rng);
        auto order = validate_dag(tasks);
        EXPECT_TRUE(is_topological(tasks, order));
        EXPECT_EQ(validate_dag(tasks), order);
    }
}

TEST(ExecuteDag, ChainSucceeds) {
    WorkerPool pool(2);
    auto run = execute_dag({task("a"), task("b", {"a"}), task("c", {"b"})}, basic_actions(), pool, "run-000001");
    EXPECT_TRUE(run.terminal());
    EXPECT_FALSE(run.aborted);
    for (const auto& [id, s] : run.task_states) EXPECT_EQ(s, TaskState::Success) << id;
    EXPECT_EQ(run.start_order, (std::vector<std::string>{"a", "b", "c"}));
    for (const auto& [id, n] : run.attempt_counts) EXPECT_EQ(n, 1) << id;
    EXPECT_TRUE(run.started_at && run.finished_at);
}

TEST(ExecuteDag, RetriesThenSkipsDownstream) {
    WorkerPool pool(2);
    std::atomic<int> calls{0};
    auto actions = basic_actions();
    actions.add("flaky", [&](const TaskContext&) {
        ++calls;
        throw std::runtime_error("still broken");
    });
    auto spec = task("b", {"a"}, "flaky", 2);
    spec.retry_delay = 10ms;
    std::vector<Transition> log;
    std::mutex log_mutex;
    auto run = execute_dag({task("a"), spec, task("c", {"b"}), task("d", {"c"}), task("e", {"a"})}, actions, pool,
                           "run-000002", [&](const Transition& t) {
                               std::lock_guard lock(log_mutex);
                               log.push_back(t);
                           });
    EXPECT_EQ(calls, 3);
    EXPECT_EQ(run.attempt_counts["b"], 3);
    EXPECT_EQ(run.task_states["a"], TaskState::Success);
    EXPECT_EQ(run.task_states["b"], TaskState::Failed);
    EXPECT_EQ(run.task_states["c"], TaskState::Skipped);
    EXPECT_EQ(run.task_states["d"], TaskState::Skipped);
    EXPECT_EQ(run.task_states["e"], TaskState::Success);
    EXPECT_NE(run.errors["b"].find("still broken"), std::string::npos);
    EXPECT_EQ(std::count(run.start_order.begin(), run.start_order.end(), "c"), 0);
    for (const auto& t : log) EXPECT_EQ(t.run_id, "run-000002");
}

TEST(ExecuteDag, RetrySucceedsOnSecondAttempt) {
    WorkerPool pool(1);
    auto actions = basic_actions();
    actions.add("second", [](const TaskContext& ctx) {
        if (ctx.attempt < 2) throw std::runtime_error("first attempt fails");
    });
    auto run = execute_dag({task("a", {}, "second", 1), task("b", {"a"})}, actions, pool, "run-000003");
    EXPECT_EQ(run.task_states["a"], TaskState::Success);
    EXPECT_EQ(run.attempt_counts["a"], 2);
    EXPECT_EQ(run.task_states["b"], TaskState::Success);
}

TEST(ExecuteDag, UnknownActionFails) {
    WorkerPool pool(1);
    auto run = execute_dag({task("a", {}, "missing")}, basic_actions(), pool, "run-000004");
    EXPECT_EQ(run.task_states["a"], TaskState::Failed);
    EXPECT_NE(run.errors["a"].find("unknown action"), std::string::npos);
}

TEST(ExecuteDag, DiamondOrdering) {
    WorkerPool pool(4);
    auto run = execute_dag({task("a", {}, "slow"), task("b", {"a"}, "slow"), task("c", {"a"}, "slow"),
                            task("d", {"b", "c"}, "slow")},
                           basic_actions(), pool, "run-000005");
    for (const auto& [id, s] : run.task_states) EXPECT_EQ(s, TaskState::Success) << id;
    auto start = [&](const std::string& id) { return *run.timings[id].first_start; };
    auto end = [&](const std::string& id) { return *run.timings[id].finished; };
    EXPECT_LE(end("a"), start("b"));
    EXPECT_LE(end("a"), start("c"));
    EXPECT_LE(end("b"), start("d"));
    EXPECT_LE(end("c"), start("d"));
    // b and c are independent, so with four workers they overlap.
    EXPECT_LT(start("c"), end("b"));
    EXPECT_LT(start("b"), end("c"));
}

TEST(ExecuteDag, SingleWorkerFollowsValidatedOrder) {
    std::vector<TaskSpec> tasks = {task("d", {"b"}), task("c"), task("b", {"a"}), task("a"), task("e", {"c", "d"})};
    WorkerPool pool(1);
    auto run = execute_dag(tasks, basic_actions(), pool, "run-000006");
    EXPECT_EQ(run.start_order, validate_dag(tasks));
}

TEST(ExecuteDag, ShutdownPoolAbortsRun) {
    WorkerPool pool(2);
    pool.shutdown();
    EXPECT_FALSE(pool.available());
    EXPECT_FALSE(pool.submit([] {}));
    auto run = execute_dag({task("a"), task("b", {"a"})}, basic_actions(), pool, "run-000007");
    EXPECT_TRUE(run.aborted);
    EXPECT_TRUE(run.terminal());
    EXPECT_EQ(run.task_states["a"], TaskState::Failed);
    EXPECT_NE(run.task_states["b"], TaskState::Success);
    EXPECT_NE(run.task_states["b"], TaskState::Pending);
}

TEST(ExecuteDag, InvalidDagThrowsBeforeRunning) {
    WorkerPool pool(1);
    std::atomic<int> calls{0};
    ActionRegistry actions;
    actions.add("count", [&](const TaskContext&) { ++calls; });
    EXPECT_THROW(execute_dag({task("a", {"b"}, "count"), task("b", {"a"}, "count")}, actions, pool, "run-000008"),
                 DagError);
    EXPECT_EQ(calls, 0);
}

TEST(ExecuteDag, UpdatesAreMonotone) {
    WorkerPool pool(2);
    std::vector<DagRun> snapshots;
    std::mutex m;
    execute_dag({task("a"), task("b", {"a"}, "fail"), task("c", {"b"})}, basic_actions(), pool, "run-000009", {},
                [&](const DagRun& r) {
                    std::lock_guard lock(m);
                    snapshots.push_back(r);
                });
    ASSERT_FALSE(snapshots.empty());
    EXPECT_TRUE(snapshots.back().terminal());
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
        for (const auto& [id, s] : snapshots[i - 1].task_states) {
            auto prev = s;
            auto next = snapshots[i].task_states.at(id);
            bool terminal_before = prev == TaskState::Success || prev == TaskState::Failed || prev == TaskState::Skipped;
            if (terminal_before) EXPECT_EQ(prev, next) << id;
        }
    }
}

TEST(RunLog, WritesOneRecordPerTransition) {
    testing_support::TempDir dir;
    auto path = dir / "runs.jsonl";
    std::size_t transitions = 0;
    {
        RunLog log(path);
        auto sink = log.sink();
        WorkerPool pool(2);
        execute_dag({task("a"), task("b", {"a"}, "fail"), task("c", {"b"})}, basic_actions(), pool, "run-000010",
                    [&](const Transition& t) {
                        ++transitions;
                        sink(t);
                    });
    }
    std::istringstream in(testing_support::read_file(path));
    std::string line;
    std::size_t lines = 0;
    std::map<std::string, std::string> last;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j["run_id"], "run-000010");
        last[j["task_id"]] = j["to"];
        ++lines;
    }
    EXPECT_EQ(lines, transitions);
    EXPECT_EQ(last["a"], "SUCCESS");
    EXPECT_EQ(last["b"], "FAILED");
    EXPECT_EQ(last["c"], "SKIPPED");
}

TEST(DagRunJson, Shape) {
    WorkerPool pool(1);
    auto run = execute_dag({task("a")}, basic_actions(), pool, "run-000011");
    auto j = to_json(run);
    EXPECT_EQ(j["run_id"], "run-000011");
    EXPECT_EQ(j["aborted"], false);
    EXPECT_FALSE(j["tasks"].empty());
}
