#pragma once

#include <optional>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "bbo/surrogate.hpp"

namespace bbo {

/// Matérn-5/2 ARD kernel hyperparameters.
struct GPHyperparameters {
    Eigen::VectorXd lengthscales;
    double signal_variance = 1.0;
    double noise_variance = 1e-3;

    /// (log l_1, ..., log l_d, log sf2, log sn2)
    Eigen::VectorXd to_log() const;
    static GPHyperparameters from_log(const Eigen::VectorXd& theta);
    static GPHyperparameters defaults(std::size_t dim);
};

/// Box for the hyperparameter search, in natural units.
struct GPBounds {
    static constexpr double lengthscale_min = 1e-3;
    static constexpr double lengthscale_max = 1e3;
    static constexpr double signal_min = 1e-3;
    static constexpr double signal_max = 1e3;
    static constexpr double noise_min = 1e-8;
    static constexpr double noise_max = 1e-1;
};

struct GPFitOptions {
    std::size_t restarts = 3;
    std::size_t max_iterations = 100;
    /// Extra starting point tried besides the defaults (e.g. the previous fit).
    std::optional<GPHyperparameters> warm_start;
};

struct LogLikelihood {
    double value;
    /// Gradient with respect to GPHyperparameters::to_log().
    Eigen::VectorXd gradient;
};

class GaussianProcess : public SurrogateModel {
public:
    /// Conditions on (X, y) with fixed hyperparameters. With `standardize` the
    /// targets are shifted and scaled to zero mean and unit variance first.
    static GaussianProcess condition(Eigen::MatrixXd X, const Eigen::VectorXd& y,
                                     GPHyperparameters hyper, bool standardize = true);

    Prediction predict(const Eigen::VectorXd& x) const override;
    void predict_batch(const Eigen::MatrixXd& X, Eigen::VectorXd& mean,
                       Eigen::VectorXd& variance) const override;
    Encoding encoding() const override { return Encoding::OneHot; }
    std::size_t input_dim() const override { return static_cast<std::size_t>(X_.cols()); }

    const GPHyperparameters& hyperparameters() const { return hyper_; }
    const Eigen::MatrixXd& inputs() const { return X_; }
    /// Standardized targets the model was conditioned on.
    const Eigen::VectorXd& standardized_targets() const { return y_; }
    double target_mean() const { return y_mean_; }
    double target_scale() const { return y_scale_; }
    /// Diagonal jitter that was needed to factorize the kernel matrix.
    double jitter() const { return jitter_; }

private:
    GaussianProcess() = default;

    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    GPHyperparameters hyper_;
    Eigen::MatrixXd L_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
};

/// Matérn-5/2 ARD kernel matrix between the rows of A and B (no noise term).
Eigen::MatrixXd matern52(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const GPHyperparameters& hyper);

/// Gaussian log marginal likelihood of y under the kernel and its gradient in log space.
/// Throws NumericError when the kernel matrix stays indefinite after maximal jitter.
LogLikelihood gp_log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                         const GPHyperparameters& hyper);

/// Same, on the model's own inputs and standardized targets.
LogLikelihood gp_log_marginal_likelihood(const GaussianProcess& model,
                                         const GPHyperparameters& hyper);

/// Fits hyperparameters by multi-start maximization of the log marginal likelihood.
/// Throws InsufficientDataError when fewer than two rows are given.
GaussianProcess fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng,
                       const GPFitOptions& options = {});

} // namespace bbo
