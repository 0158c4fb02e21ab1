#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bbo/moo.hpp"
#include "bbo/space.hpp"
#include "bbo/surrogate.hpp"

namespace bbo {

enum class AcquisitionKind { None, EI, EIC, EHVI, EHVI_C };

const char* to_string(AcquisitionKind kind);

double normal_pdf(double z);
double normal_cdf(double z);

/// EI for minimization: sigma * (z Phi(z) + phi(z)), z = (eta - mean) / sigma.
double expected_improvement(double mean, double variance, double eta);

/// P(c <= 0) under N(mean, variance).
double probability_of_feasibility(double mean, double variance);

/// Everything an acquisition function needs at one advisor step.
struct AcquisitionContext {
    std::shared_ptr<const SearchSpace> space;
    std::vector<std::shared_ptr<const SurrogateModel>> objective_models;
    std::vector<std::shared_ptr<const SurrogateModel>> constraint_models;
    /// Best feasible objective (single objective); empty before the first feasible point.
    std::optional<double> eta;
    /// Current Pareto front in objective space (multi-objective).
    std::vector<moo::Point> front;
    std::optional<moo::Point> ref_point;
    std::vector<Configuration> pending;

    /// Checks model counts and that every front point lies inside ref_point.
    /// Throws ConfigurationError.
    void validate() const;
};

/// EI times the product of constraint feasibility probabilities; the product
/// alone while no feasible point exists.
double constrained_ei(const Configuration& x, const AcquisitionContext& ctx);

/// Monte Carlo expected hypervolume improvement of x. Throws ConfigurationError
/// without a reference point.
double ehvi(const Configuration& x, const AcquisitionContext& ctx, std::size_t mc_samples,
            Rng& rng);

/// Expected hypervolume improvement of a Gaussian with the given moments, using
/// fixed standard-normal draws (rows are samples, columns objectives).
double ehvi_from_moments(std::span<const double> mean, std::span<const double> sd,
                         const std::vector<moo::Point>& front, const moo::Point& ref,
                         const Eigen::MatrixXd& normals);

/// Batched scorer over configurations. Multi-objective kinds draw their Monte
/// Carlo normals once at construction so scores are a deterministic function
/// of the configuration (common random numbers across candidates).
class AcquisitionFunction {
public:
    AcquisitionFunction(AcquisitionKind kind, AcquisitionContext ctx, std::size_t mc_samples,
                        Rng& rng);

    std::vector<double> operator()(const std::vector<Configuration>& configs) const;
    double operator()(const Configuration& config) const;

    AcquisitionKind kind() const { return kind_; }
    const AcquisitionContext& context() const { return ctx_; }

private:
    AcquisitionKind kind_;
    AcquisitionContext ctx_;
    Eigen::MatrixXd normals_;
    std::vector<moo::Point> sorted_front_;
};

using BatchScoreFn = std::function<std::vector<double>(const std::vector<Configuration>&)>;

/// Adapts a per-configuration score into a batch scorer.
BatchScoreFn batched(std::function<double(const Configuration&)> fn);

struct MaximizerOptions {
    std::size_t n_candidates = 5000;
    std::size_t n_local_starts = 10;
    std::size_t max_local_steps = 50;
    /// Random neighbors scored around every told and pending configuration.
    std::size_t neighbors_per_seed = 4;
    double initial_step = 0.05;
};

struct ScoredConfiguration {
    Configuration config;
    double score;
};

/// Random candidates plus neighborhoods of told/pending points, refined by
/// coordinate-wise local search from the best starts. Returns unseen
/// configurations in descending score order. Throws ExhaustedSpaceError when
/// nothing unseen remains.
std::vector<ScoredConfiguration> maximize_acquisition(const BatchScoreFn& score,
                                                      const SearchSpace& space, Rng& rng,
                                                      const MaximizerOptions& options,
                                                      const std::vector<Configuration>& told,
                                                      const std::vector<Configuration>& pending);

/// A pending point as seen by the penalizer: location and model moments there.
struct PenaltyCenter {
    Eigen::VectorXd x;
    double mean;
    double variance;
};

/// Smooth exclusion factor in (0,1] around one pending point (minimization:
/// the exclusion radius is (mean - best) / lipschitz).
double penalizer_factor(const Eigen::VectorXd& x, const PenaltyCenter& center, double lipschitz,
                        double best);

/// score multiplied by the penalizer of every pending point.
double local_penalization(double score, const Eigen::VectorXd& x,
                          const std::vector<Eigen::VectorXd>& pending, const SurrogateModel& model,
                          double lipschitz, double best);

/// Largest finite-difference gradient norm of the model mean over random
/// points of the encoded unit cube, floored at 1e-3.
double estimate_lipschitz(const SurrogateModel& model, Rng& rng, std::size_t n_points = 500);

} // namespace bbo
