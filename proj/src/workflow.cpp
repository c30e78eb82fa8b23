#include "untrue/workflow.hpp"

#include <algorithm>

#include "untrue/errors.hpp"

namespace untrue {

using nlohmann::json;

std::string_view to_string(TaskState s) {
    switch (s) {
        case TaskState::Pending:
            return "PENDING";
        case TaskState::Running:
            return "RUNNING";
        case TaskState::Success:
            return "SUCCESS";
        case TaskState::Failed:
            return "FAILED";
        case TaskState::Skipped:
            return "SKIPPED";
    }
    return "PENDING";
}

namespace {

std::vector<std::string> find_cycle(const std::map<std::string, const TaskSpec*>& remaining) {
    // Walk dependency edges from any remaining task; every remaining task has
    // at least one remaining dependency, so the walk must revisit a node.
    std::vector<std::string> path;
    std::map<std::string, std::size_t> position;
    std::string current = remaining.begin()->first;
    while (!position.count(current)) {
        position[current] = path.size();
        path.push_back(current);
        for (const auto& dep : remaining.at(current)->deps) {
            if (remaining.count(dep)) {
                current = dep;
                break;
            }
        }
    }
    std::vector<std::string> cycle(path.begin() + static_cast<std::ptrdiff_t>(position[current]), path.end());
    cycle.push_back(current);
    std::reverse(cycle.begin(), cycle.end());
    return cycle;
}

}  // namespace

std::vector<std::string> validate_dag(const std::vector<TaskSpec>& tasks) {
    if (tasks.empty()) throw DagError("task set is empty");
    std::map<std::string, const TaskSpec*> by_id;
    for (const auto& t : tasks) {
        if (t.task_id.empty()) throw DagError("task with empty id");
        if (!by_id.emplace(t.task_id, &t).second) throw DagError("duplicate task id '" + t.task_id + "'");
        if (t.max_retries < 0) throw DagError("negative max_retries on '" + t.task_id + "'");
    }
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> dependents;
    for (const auto& t : tasks) {
        indegree[t.task_id] += 0;
        for (const auto& dep : t.deps) {
            if (dep == t.task_id) throw DagError("cycle detected: " + dep + " -> " + dep);
            if (!by_id.count(dep)) throw DagError("task '" + t.task_id + "' depends on unknown task '" + dep + "'");
            ++indegree[t.task_id];
            dependents[dep].push_back(t.task_id);
        }
    }
    std::set<std::string> ready;
    for (const auto& [id, n] : indegree) {
        if (n == 0) ready.insert(id);
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        auto id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (const auto& next : dependents[id]) {
            if (--indegree[next] == 0) ready.insert(next);
        }
    }
    if (order.size() != tasks.size()) {
        std::map<std::string, const TaskSpec*> remaining;
        for (const auto& [id, n] : indegree) {
            if (n > 0) remaining[id] = by_id[id];
        }
        auto cycle = find_cycle(remaining);
        std::string msg = "cycle detected: ";
        for (std::size_t i = 0; i < cycle.size(); ++i) msg += (i ? " -> " : "") + cycle[i];
        throw DagError(msg);
    }
    return order;
}

void ActionRegistry::add(std::string name, TaskAction action) { actions_[std::move(name)] = std::move(action); }

const TaskAction* ActionRegistry::find(std::string_view name) const {
    auto it = actions_.find(name);
    return it == actions_.end() ? nullptr : &it->second;
}

// --- worker pool --------------------------------------------------------------

WorkerPool::WorkerPool(std::size_t workers) {
    if (workers == 0) throw std::invalid_argument("worker pool needs at least one worker");
    for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { loop(); });
}

WorkerPool::~WorkerPool() {
    shutdown();
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
}

bool WorkerPool::submit(std::function<void()> job) {
    {
        std::lock_guard lock(mutex_);
        if (stopping_) return false;
        queue_.push_back(std::move(job));
    }
    cv_.notify_one();
    return true;
}

void WorkerPool::shutdown() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    cv_.notify_all();
}

bool WorkerPool::available() const {
    std::lock_guard lock(mutex_);
    return !stopping_;
}

void WorkerPool::loop() {
    while (true) {
        std::function<void()> job;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            // Drain queued work even while stopping so no accepted job is lost.
            if (queue_.empty()) return;
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        job();
    }
}

// --- runs -------------------------------------------------------------------

bool DagRun::terminal() const {
    return std::all_of(task_states.begin(), task_states.end(), [](const auto& kv) {
        return kv.second == TaskState::Success || kv.second == TaskState::Failed || kv.second == TaskState::Skipped;
    });
}

json to_json(const DagRun& run) {
    json tasks = json::object();
    std::optional<TaskTiming::Clock::time_point> origin;
    for (const auto& [id, timing] : run.timings) {
        if (timing.first_start && (!origin || *timing.first_start < *origin)) origin = timing.first_start;
    }
    for (const auto& [id, state] : run.task_states) {
        json t = {{"state", to_string(state)}, {"attempts", run.attempt_counts.count(id) ? run.attempt_counts.at(id) : 0}};
        if (auto e = run.errors.find(id); e != run.errors.end()) t["error"] = e->second;
        if (auto tm = run.timings.find(id); tm != run.timings.end() && origin) {
            auto ms = [&](TaskTiming::Clock::time_point p) {
                return std::chrono::duration<double, std::milli>(p - *origin).count();
            };
            if (tm->second.first_start) t["started_ms"] = ms(*tm->second.first_start);
            if (tm->second.finished) t["finished_ms"] = ms(*tm->second.finished);
        }
        tasks[id] = std::move(t);
    }
    json out = {{"run_id", run.run_id}, {"tasks", std::move(tasks)}, {"aborted", run.aborted}};
    out["started_at"] = run.started_at ? json(format_timestamp(*run.started_at)) : json(nullptr);
    out["finished_at"] = run.finished_at ? json(format_timestamp(*run.finished_at)) : json(nullptr);
    out["state"] = !run.finished_at ? "running"
                   : std::any_of(run.task_states.begin(), run.task_states.end(),
                                 [](const auto& kv) { return kv.second != TaskState::Success; })
                       ? "failed"
                       : "success";
    return out;
}

RunLog::RunLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
    if (!out_) throw ConfigError("cannot open run log: " + path.string());
}

void RunLog::record(const Transition& t) {
    json j = {{"run_id", t.run_id},     {"task_id", t.task_id},          {"from", to_string(t.from)},
              {"to", to_string(t.to)},  {"attempt", t.attempt},          {"at", format_timestamp(t.at)}};
    if (!t.message.empty()) j["message"] = t.message;
    std::lock_guard lock(mutex_);
    out_ << j.dump() << '\n';
    out_.flush();
}

TransitionSink RunLog::sink() {
    return [this](const Transition& t) { record(t); };
}

DagRun execute_dag(const std::vector<TaskSpec>& tasks, const ActionRegistry& actions, WorkerPool& executor,
                   const std::string& run_id, const TransitionSink& sink,
                   const std::function<void(const DagRun&)>& on_update) {
    auto order = validate_dag(tasks);
    std::map<std::string, const TaskSpec*> specs;
    for (const auto& t : tasks) specs[t.task_id] = &t;

    std::mutex m;
    std::condition_variable cv;
    DagRun run;
    run.run_id = run_id;
    run.started_at = std::chrono::system_clock::now();
    for (const auto& id : order) {
        run.task_states[id] = TaskState::Pending;
        run.attempt_counts[id] = 0;
    }
    std::size_t running = 0;
    bool abort = false;

    // Callers hold `m`.
    auto transition = [&](const std::string& id, TaskState to, int attempt, std::string message) {
        auto from = run.task_states[id];
        run.task_states[id] = to;
        if (!message.empty()) run.errors[id] = message;
        if (sink) sink(Transition{run_id, id, from, to, attempt, std::chrono::system_clock::now(), std::move(message)});
    };
    auto publish = [&]() {
        if (on_update) on_update(run);
    };

    auto job_for = [&](const std::string& id) {
        return [&, id]() {
            const auto& spec = *specs.at(id);
            const TaskAction* action = actions.find(spec.action);
            bool ok = false;
            std::string error;
            if (!action) {
                error = "unknown action '" + spec.action + "'";
            } else {
                for (int attempt = 1; attempt <= spec.max_retries + 1; ++attempt) {
                    {
                        std::lock_guard lock(m);
                        run.attempt_counts[id] = attempt;
                        auto& timing = run.timings[id];
                        if (!timing.first_start) timing.first_start = TaskTiming::Clock::now();
                        if (attempt > 1 && sink) {
                            sink(Transition{run_id, id, TaskState::Running, TaskState::Running, attempt,
                                            std::chrono::system_clock::now(), "retry after: " + error});
                        }
                    }
                    try {
                        (*action)(TaskContext{run_id, id, attempt});
                        ok = true;
                        break;
                    } catch (const std::exception& e) {
                        error = e.what();
                    } catch (...) {
                        error = "unknown failure";
                    }
                    if (attempt <= spec.max_retries) std::this_thread::sleep_for(spec.retry_delay);
                }
            }
            {
                std::lock_guard lock(m);
                run.timings[id].finished = TaskTiming::Clock::now();
                transition(id, ok ? TaskState::Success : TaskState::Failed, run.attempt_counts[id],
                           ok ? std::string{} : error);
                --running;
                publish();
            }
            cv.notify_all();
        };
    };

    std::unique_lock lock(m);
    if (!executor.available()) abort = true;
    while (true) {
        // Skips propagate in topological order, so one pass covers transitive dependents.
        for (const auto& id : order) {
            if (run.task_states[id] != TaskState::Pending) continue;
            for (const auto& dep : specs[id]->deps) {
                auto s = run.task_states[dep];
                if (s == TaskState::Failed || s == TaskState::Skipped) {
                    transition(id, TaskState::Skipped, 0, "upstream task '" + dep + "' did not succeed");
                    break;
                }
            }
        }
        if (!abort) {
            for (const auto& id : order) {
                if (running >= executor.size()) break;
                if (run.task_states[id] != TaskState::Pending) continue;
                const auto& deps = specs[id]->deps;
                bool ready = std::all_of(deps.begin(), deps.end(),
                                         [&](const auto& d) { return run.task_states[d] == TaskState::Success; });
                if (!ready) continue;
                transition(id, TaskState::Running, 1, {});
                run.start_order.push_back(id);
                ++running;
                if (!executor.submit(job_for(id))) {
                    --running;
                    transition(id, TaskState::Failed, 0, "executor unavailable");
                    abort = true;
                    break;
                }
            }
        }
        if (abort) {
            for (const auto& id : order) {
                if (run.task_states[id] == TaskState::Pending) {
                    transition(id, TaskState::Failed, run.attempt_counts[id], "executor unavailable");
                }
            }
            run.aborted = true;
        }
        publish();
        bool pending = std::any_of(order.begin(), order.end(),
                                   [&](const auto& id) { return run.task_states[id] == TaskState::Pending; });
        if (running == 0 && !pending) break;
        cv.wait(lock);
    }
    run.finished_at = std::chrono::system_clock::now();
    publish();
    return run;
}

}  // namespace untrue
