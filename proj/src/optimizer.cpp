#include "bbo/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <memory>
#include <thread>

#include "bbo/errors.hpp"

namespace bbo {

const char* to_string(StopReason r)
{
    switch (r) {
    case StopReason::MaxRuns: return "max_runs";
    case StopReason::WallClock: return "wall_clock";
    case StopReason::Exhausted: return "exhausted";
    case StopReason::UserAbort: return "user_abort";
    }
    return "?";
}

Objective make_objective(
    std::function<std::pair<std::vector<double>, std::vector<double>>(const Configuration&)> fn)
{
    return [fn = std::move(fn)](const Configuration& c, const TrialContext&) {
        auto [f, g] = fn(c);
        TrialResult r;
        r.objectives = std::move(f);
        r.constraints = std::move(g);
        return r;
    };
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

Observation failed(Observation obs, TrialState state, const std::string& why)
{
    obs.trial_state = state;
    obs.objectives.clear();
    obs.constraints.clear();
    obs.extra["error"] = why;
    return obs;
}

} // namespace

Observation evaluate_safe(const Objective& objective, const Configuration& config,
                          std::size_t num_objectives, std::size_t num_constraints,
                          const TrialContext& ctx, bool record_elapsed)
{
    Observation obs;
    obs.config = config;
    const auto start = Clock::now();
    auto stamp = [&](Observation o) {
        o.elapsed_time = record_elapsed ? seconds_since(start) : 0.0;
        return o;
    };

    TrialResult result;
    try {
        if (ctx.timeout) {
            auto task = std::make_shared<std::packaged_task<TrialResult()>>(
                [objective, config, ctx] { return objective(config, ctx); });
            auto future = task->get_future();
            std::thread([task] { (*task)(); }).detach();
            const auto limit = std::chrono::duration<double>(std::max(*ctx.timeout, 0.0));
            if (future.wait_for(limit) != std::future_status::ready)
                return stamp(failed(obs, TrialState::Timeout, "evaluation exceeded the timeout"));
            result = future.get();
        } else {
            result = objective(config, ctx);
        }
    } catch (const EvaluationTimeout& e) {
        return stamp(failed(obs, TrialState::Timeout, e.what()));
    } catch (const std::exception& e) {
        return stamp(failed(obs, TrialState::Failed, e.what()));
    } catch (...) {
        return stamp(failed(obs, TrialState::Failed, "unknown exception"));
    }

    obs.extra = std::move(result.extra);
    if (result.state != TrialState::Success) {
        obs.trial_state = result.state;
        return stamp(obs);
    }
    if (result.objectives.size() != num_objectives || result.constraints.size() != num_constraints)
        return stamp(failed(obs, TrialState::Failed,
                            "objective returned " + std::to_string(result.objectives.size()) +
                                " objectives and " + std::to_string(result.constraints.size()) +
                                " constraints, expected " + std::to_string(num_objectives) +
                                " and " + std::to_string(num_constraints)));
    for (const auto* v : {&result.objectives, &result.constraints})
        for (double x : *v)
            if (!std::isfinite(x)) return stamp(failed(obs, TrialState::Failed, "non-finite value"));
    obs.objectives = std::move(result.objectives);
    obs.constraints = std::move(result.constraints);
    return stamp(obs);
}

OptResult run(const TaskSpec& task, const Objective& objective, const RunOptions& options)
{
    if (!objective) throw SetupError("no objective function given");
    if (options.parallelism < 1) throw SetupError("parallelism must be at least 1");
    Advisor advisor(task, options.advisor);
    const auto start = Clock::now();
    const std::size_t m = task.num_objectives, p = task.num_constraints;

    OptResult out{advisor.history(), std::nullopt, {}, 0.0, StopReason::MaxRuns};
    std::size_t told = 0;
    while (true) {
        if (told >= task.max_runs) {
            out.stop_reason = StopReason::MaxRuns;
            break;
        }
        if (options.wall_clock_limit && seconds_since(start) >= *options.wall_clock_limit) {
            out.stop_reason = StopReason::WallClock;
            break;
        }
        if (options.should_stop && options.should_stop()) {
            out.stop_reason = StopReason::UserAbort;
            break;
        }

        const std::size_t q = std::min(options.parallelism, task.max_runs - told);
        std::vector<Configuration> batch;
        bool exhausted = false;
        try {
            batch = advisor.ask_batch(q);
        } catch (const ExhaustedSpaceError&) {
            // Whatever was suggested before running dry is still evaluated.
            batch = advisor.pending();
            exhausted = true;
        }
        if (batch.empty()) {
            out.stop_reason = StopReason::Exhausted;
            break;
        }

        std::vector<Observation> results(batch.size());
        auto eval = [&](std::size_t i) {
            TrialContext ctx{told + i, options.timeout};
            results[i] = evaluate_safe(objective, batch[i], m, p, ctx, options.record_elapsed);
        };
        if (batch.size() == 1) {
            eval(0);
        } else {
            std::vector<std::thread> workers;
            for (std::size_t i = 0; i < batch.size(); ++i) workers.emplace_back(eval, i);
            for (auto& w : workers) w.join();
        }
        for (auto& obs : results) {
            advisor.tell(obs);
            ++told;
            if (options.on_observation) options.on_observation(obs);
        }
        if (exhausted) {
            out.stop_reason = StopReason::Exhausted;
            break;
        }
    }

    out.history = advisor.history();
    out.total_elapsed = seconds_since(start);
    if (m == 1) out.incumbent = out.history.incumbent();
    else out.pareto_front = out.history.pareto_front();
    return out;
}

} // namespace bbo
