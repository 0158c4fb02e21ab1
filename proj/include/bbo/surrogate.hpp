#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "bbo/space.hpp"

namespace bbo {

struct Prediction {
    double mean;
    double variance;
};

/// A fitted probabilistic regressor over encoded configurations.
/// Fitted models are immutable; predictions may run concurrently.
class SurrogateModel {
public:
    virtual ~SurrogateModel() = default;

    virtual Prediction predict(const Eigen::VectorXd& x) const = 0;
    /// Row-wise prediction for a batch of encoded inputs.
    virtual void predict_batch(const Eigen::MatrixXd& X, Eigen::VectorXd& mean,
                               Eigen::VectorXd& variance) const;
    /// Encoding the model's inputs were built with.
    virtual Encoding encoding() const = 0;
    virtual std::size_t input_dim() const = 0;
};

} // namespace bbo
