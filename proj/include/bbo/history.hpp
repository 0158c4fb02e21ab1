#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bbo/space.hpp"

namespace bbo {

enum class TrialState { Success, Failed, Timeout };

const char* to_string(TrialState s);
TrialState trial_state_from_string(const std::string& s);

/// One evaluation record. Objectives follow the minimization convention and
/// a constraint value <= 0 means satisfied.
struct Observation {
    Configuration config;
    std::vector<double> objectives;
    std::vector<double> constraints;
    TrialState trial_state = TrialState::Success;
    double elapsed_time = 0.0;
    std::map<std::string, std::string> extra;

    bool is_success() const { return trial_state == TrialState::Success; }
    bool is_feasible() const;

    friend bool operator==(const Observation&, const Observation&) = default;
};

enum class FailureStrategy { Drop, ImputeWorst };

/// Encoded surrogate training set: one target vector per objective and per constraint.
struct TrainingData {
    Eigen::MatrixXd X;
    std::vector<Eigen::VectorXd> objectives;
    std::vector<Eigen::VectorXd> constraints;
    /// Row i of X came from observation rows[i].
    std::vector<std::size_t> rows;
};

class History {
public:
    History(std::string task_id, std::size_t num_objectives, std::size_t num_constraints,
            std::optional<std::vector<double>> ref_point = std::nullopt,
            std::shared_ptr<const SearchSpace> space = nullptr);

    const std::string& task_id() const { return task_id_; }
    std::size_t num_objectives() const { return num_objectives_; }
    std::size_t num_constraints() const { return num_constraints_; }
    const std::optional<std::vector<double>>& ref_point() const { return ref_point_; }
    void set_ref_point(std::optional<std::vector<double>> ref);
    /// Search space the configurations belong to, when known.
    const std::shared_ptr<const SearchSpace>& space() const { return space_; }

    const std::vector<Observation>& observations() const { return observations_; }
    std::size_t size() const { return observations_.size(); }
    bool empty() const { return observations_.empty(); }
    const Observation& operator[](std::size_t i) const { return observations_[i]; }

    /// Appends an observation. Throws ObservationShapeError on dimension mismatch.
    void record(Observation obs);

    /// Best feasible successful observation (single objective); earliest wins ties.
    std::optional<Observation> incumbent() const;
    /// Feasible, successful, non-dominated observations in record order.
    std::vector<Observation> pareto_front() const;
    std::size_t success_count() const;
    /// Stored ref_point, else the worst success per objective pushed out by 10%
    /// (0 becomes 0.1). Feasible successes are used when there are any.
    std::optional<std::vector<double>> effective_ref_point() const;

    TrainingData training_targets(const SearchSpace& space, Encoding enc,
                                  FailureStrategy strategy = FailureStrategy::ImputeWorst) const;

    friend bool operator==(const History& a, const History& b);

private:
    void check_shape(const Observation& obs) const;

    std::string task_id_;
    std::size_t num_objectives_;
    std::size_t num_constraints_;
    std::optional<std::vector<double>> ref_point_;
    std::shared_ptr<const SearchSpace> space_;
    std::vector<Observation> observations_;
};

} // namespace bbo
