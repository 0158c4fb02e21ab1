#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbo/advisor.hpp"
#include "bbo/history.hpp"

namespace bbo {

enum class StopReason { MaxRuns, WallClock, Exhausted, UserAbort };

const char* to_string(StopReason r);

/// What an objective hands back. Objectives that run their own deadline (such
/// as subprocesses) may report a non-success state directly.
struct TrialResult {
    std::vector<double> objectives;
    std::vector<double> constraints;
    TrialState state = TrialState::Success;
    std::map<std::string, std::string> extra;
};

struct TrialContext {
    std::size_t trial_index = 0;
    /// Seconds; empty means unlimited.
    std::optional<double> timeout;
};

using Objective = std::function<TrialResult(const Configuration&, const TrialContext&)>;

/// Adapts a plain (objectives, constraints) callable.
Objective make_objective(
    std::function<std::pair<std::vector<double>, std::vector<double>>(const Configuration&)> fn);

/// Runs the objective and folds every failure into the returned observation:
/// exceptions and wrong-length or non-finite results give FAILED, a missed
/// deadline or EvaluationTimeout gives TIMEOUT. With a timeout the call runs on
/// a helper thread that is abandoned if it overruns, so the objective must not
/// reference state that dies with the caller.
Observation evaluate_safe(const Objective& objective, const Configuration& config,
                          std::size_t num_objectives, std::size_t num_constraints,
                          const TrialContext& ctx = {}, bool record_elapsed = true);

struct RunOptions {
    std::optional<double> wall_clock_limit;
    std::size_t parallelism = 1;
    std::optional<double> timeout;
    AdvisorOptions advisor;
    /// Polled between batches; returning true stops the run.
    std::function<bool()> should_stop;
    /// Called after every tell, in tell order.
    std::function<void(const Observation&)> on_observation;
    /// When false, elapsed_time is stored as 0 so repeated runs export identical bytes.
    bool record_elapsed = true;
};

struct OptResult {
    History history;
    std::optional<Observation> incumbent;
    std::vector<Observation> pareto_front;
    double total_elapsed = 0.0;
    StopReason stop_reason = StopReason::MaxRuns;
};

/// Ask, evaluate, tell until the budget or wall clock runs out. Batches of
/// min(parallelism, remaining budget) run concurrently and are told in
/// suggestion order. Throws SetupError for an empty objective or zero parallelism.
OptResult run(const TaskSpec& task, const Objective& objective, const RunOptions& options = {});

} // namespace bbo
