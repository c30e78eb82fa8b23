#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "untrue/dates.hpp"

namespace untrue {

enum class TaskState { Pending, Running, Success, Failed, Skipped };

/// "PENDING" | "RUNNING" | "SUCCESS" | "FAILED" | "SKIPPED"
std::string_view to_string(TaskState s);

struct TaskSpec {
    std::string task_id;
    std::set<std::string> deps;
    std::string action;
    int max_retries = 0;
    std::chrono::milliseconds retry_delay{0};
};

/// Deterministic topological order, ties broken by task_id. Throws DagError
/// for an empty set, duplicate ids, unknown dependencies, or cycles (the
/// message names the tasks on one cycle).
std::vector<std::string> validate_dag(const std::vector<TaskSpec>& tasks);

struct TaskContext {
    std::string run_id;
    std::string task_id;
    int attempt = 1;
};

/// Signals failure by throwing.
using TaskAction = std::function<void(const TaskContext&)>;

class ActionRegistry {
public:
    void add(std::string name, TaskAction action);
    const TaskAction* find(std::string_view name) const;

private:
    std::map<std::string, TaskAction, std::less<>> actions_;
};

/// Fixed-size worker pool. After shutdown() it refuses new work, which the
/// scheduler reports as an unavailable executor.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t workers);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    bool submit(std::function<void()> job);
    void shutdown();
    bool available() const;
    std::size_t size() const { return threads_.size(); }

private:
    void loop();

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> threads_;
};

struct TaskTiming {
    using Clock = std::chrono::steady_clock;
    std::optional<Clock::time_point> first_start;
    std::optional<Clock::time_point> finished;
};

struct DagRun {
    std::string run_id;
    std::map<std::string, TaskState> task_states;
    std::map<std::string, int> attempt_counts;
    std::map<std::string, std::string> errors;
    std::map<std::string, TaskTiming> timings;
    std::vector<std::string> start_order;
    std::optional<Timestamp> started_at;
    std::optional<Timestamp> finished_at;
    bool aborted = false;

    bool terminal() const;
};

nlohmann::json to_json(const DagRun& run);

struct Transition {
    std::string run_id;
    std::string task_id;
    TaskState from = TaskState::Pending;
    TaskState to = TaskState::Pending;
    int attempt = 0;
    Timestamp at;
    std::string message;
};

using TransitionSink = std::function<void(const Transition&)>;

/// Appends one JSON record per transition to a file.
class RunLog {
public:
    explicit RunLog(const std::filesystem::path& path);
    void record(const Transition& t);
    TransitionSink sink();

private:
    std::mutex mutex_;
    std::ofstream out_;
};

/// Runs every task once its dependencies have succeeded, retrying failures up
/// to max_retries with retry_delay between attempts. Dependents of a failed
/// task are skipped. `on_update` receives a copy of the run after every state
/// change.
DagRun execute_dag(const std::vector<TaskSpec>& tasks, const ActionRegistry& actions, WorkerPool& executor,
                   const std::string& run_id, const TransitionSink& sink = {},
                   const std::function<void(const DagRun&)>& on_update = {});

}  // namespace untrue
