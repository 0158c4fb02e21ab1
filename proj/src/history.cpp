#include "bbo/history.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bbo/errors.hpp"
#include "bbo/moo.hpp"

namespace bbo {

const char* to_string(TrialState s)
{
    switch (s) {
    case TrialState::Success: return "SUCCESS";
    case TrialState::Failed: return "FAILED";
    case TrialState::Timeout: return "TIMEOUT";
    }
    return "?";
}

TrialState trial_state_from_string(const std::string& s)
{
    if (s == "SUCCESS") return TrialState::Success;
    if (s == "FAILED") return TrialState::Failed;
    if (s == "TIMEOUT") return TrialState::Timeout;
    throw ParseError(fmt::format("unknown trial_state '{}'", s));
}

bool Observation::is_feasible() const
{
    return std::all_of(constraints.begin(), constraints.end(), [](double c) { return c <= 0.0; });
}

History::History(std::string task_id, std::size_t num_objectives, std::size_t num_constraints,
                 std::optional<std::vector<double>> ref_point,
                 std::shared_ptr<const SearchSpace> space)
    : task_id_(std::move(task_id)),
      num_objectives_(num_objectives),
      num_constraints_(num_constraints),
      space_(std::move(space))
{
    if (num_objectives_ < 1) throw ObservationShapeError("a task needs at least one objective");
    set_ref_point(std::move(ref_point));
}

void History::set_ref_point(std::optional<std::vector<double>> ref)
{
    if (ref && ref->size() != num_objectives_)
        throw ObservationShapeError(fmt::format("ref_point has length {}, expected {}",
                                                ref->size(), num_objectives_));
    ref_point_ = std::move(ref);
}

void History::check_shape(const Observation& obs) const
{
    const bool ok = obs.is_success();
    // Failed trials may omit values entirely.
    auto length_ok = [&](std::size_t got, std::size_t want) {
        return got == want || (!ok && got == 0);
    };
    if (!length_ok(obs.objectives.size(), num_objectives_))
        throw ObservationShapeError(fmt::format("observation has {} objectives, task has {}",
                                                obs.objectives.size(), num_objectives_));
    if (!length_ok(obs.constraints.size(), num_constraints_))
        throw ObservationShapeError(fmt::format("observation has {} constraints, task has {}",
                                                obs.constraints.size(), num_constraints_));
    if (ok) {
        for (double v : obs.objectives)
            if (!std::isfinite(v))
                throw ObservationShapeError("successful observation has non-finite objectives");
        for (double v : obs.constraints)
            if (!std::isfinite(v))
                throw ObservationShapeError("successful observation has non-finite constraints");
    }
    if (!(obs.elapsed_time >= 0.0)) throw ObservationShapeError("elapsed_time must be >= 0");
}

void History::record(Observation obs)
{
    check_shape(obs);
    if (space_) obs.config = space_->validate(obs.config);
    observations_.push_back(std::move(obs));
}

std::size_t History::success_count() const
{
    return static_cast<std::size_t>(std::count_if(
        observations_.begin(), observations_.end(), [](const auto& o) { return o.is_success(); }));
}

std::optional<Observation> History::incumbent() const
{
    if (num_objectives_ != 1)
        throw WrongTaskTypeError("incumbent is defined for single-objective tasks only");
    const Observation* best = nullptr;
    for (const auto& o : observations_) {
        if (!o.is_success() || !o.is_feasible()) continue;
        if (!best || o.objectives[0] < best->objectives[0]) best = &o;
    }
    if (!best) return std::nullopt;
    return *best;
}

std::vector<Observation> History::pareto_front() const
{
    if (num_objectives_ < 2)
        throw WrongTaskTypeError("pareto_front is defined for multi-objective tasks only");
    std::vector<const Observation*> pool;
    for (const auto& o : observations_)
        if (o.is_success() && o.is_feasible()) pool.push_back(&o);
    std::vector<Observation> front;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        bool keep = true;
        for (std::size_t j = 0; j < pool.size() && keep; ++j) {
            if (i == j) continue;
            if (moo::dominates(pool[j]->objectives, pool[i]->objectives)) keep = false;
            // Equal objective vectors collapse onto the earliest.
            else if (j < i && pool[j]->objectives == pool[i]->objectives) keep = false;
        }
        if (keep) front.push_back(*pool[i]);
    }
    return front;
}

TrainingData History::training_targets(const SearchSpace& space, Encoding enc,
                                       FailureStrategy strategy) const
{
    if (success_count() == 0)
        throw InsufficientDataError("training requires at least one successful observation");

    // Imputed objective per dimension: worst success + sample std of successes.
    std::vector<double> worst(num_objectives_, -std::numeric_limits<double>::infinity());
    std::vector<double> imputed(num_objectives_, 0.0);
    if (strategy == FailureStrategy::ImputeWorst) {
        for (std::size_t k = 0; k < num_objectives_; ++k) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& o : observations_) {
                if (!o.is_success()) continue;
                worst[k] = std::max(worst[k], o.objectives[k]);
                sum += o.objectives[k];
                ++n;
            }
            double mean = sum / static_cast<double>(n);
            double ss = 0.0;
            for (const auto& o : observations_)
                if (o.is_success()) ss += (o.objectives[k] - mean) * (o.objectives[k] - mean);
            double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
            imputed[k] = worst[k] + sd;
        }
    }

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < observations_.size(); ++i)
        if (observations_[i].is_success() || strategy == FailureStrategy::ImputeWorst)
            rows.push_back(i);

    TrainingData data;
    const auto n = static_cast<Eigen::Index>(rows.size());
    data.X.resize(n, static_cast<Eigen::Index>(space.encoded_size(enc)));
    data.objectives.assign(num_objectives_, Eigen::VectorXd(n));
    data.constraints.assign(num_constraints_, Eigen::VectorXd(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& o = observations_[rows[static_cast<std::size_t>(r)]];
        data.X.row(r) = to_unit_vector(space, o.config, enc).transpose();
        for (std::size_t k = 0; k < num_objectives_; ++k)
            data.objectives[k][r] = o.is_success() ? o.objectives[k] : imputed[k];
        for (std::size_t k = 0; k < num_constraints_; ++k)
            data.constraints[k][r] = o.is_success() ? o.constraints[k] : 1.0;
    }
    data.rows = std::move(rows);
    return data;
}

std::optional<std::vector<double>> History::effective_ref_point() const
{
    if (ref_point_) return ref_point_;
    std::vector<double> worst(num_objectives_, -std::numeric_limits<double>::infinity());
    bool any = false;
    // Prefer feasible points so infeasible outliers do not stretch the box.
    for (bool feasible_only : {true, false}) {
        for (const auto& o : observations_) {
            if (!o.is_success() || (feasible_only && !o.is_feasible())) continue;
            any = true;
            for (std::size_t k = 0; k < num_objectives_; ++k) worst[k] = std::max(worst[k], o.objectives[k]);
        }
        if (any) break;
    }
    if (!any) return std::nullopt;
    for (auto& w : worst) w = w == 0.0 ? 0.1 : w + 0.1 * std::abs(w);
    return worst;
}

bool operator==(const History& a, const History& b)
{
    bool spaces_equal = (!a.space_ && !b.space_) || (a.space_ && b.space_ && *a.space_ == *b.space_);
    return a.task_id_ == b.task_id_ && a.num_objectives_ == b.num_objectives_ &&
           a.num_constraints_ == b.num_constraints_ && a.ref_point_ == b.ref_point_ &&
           spaces_equal && a.observations_ == b.observations_;
}

} // namespace bbo
