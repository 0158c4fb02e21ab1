#pragma once

#include <vector>

#include <Eigen/Core>

#include "bbo/surrogate.hpp"

namespace bbo {

struct PRFOptions {
    std::size_t n_trees = 10;
    std::size_t min_samples_leaf = 3;
    double feature_fraction = 0.8;
    bool bootstrap = true;
    /// 0 means unlimited.
    std::size_t max_depth = 0;
};

/// Random forest whose leaves keep the mean and variance of their training
/// targets, giving an ensemble predictive distribution.
class RandomForest : public SurrogateModel {
public:
    struct Node {
        int feature = -1;  // -1 for leaves
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double mean = 0.0;
        double variance = 0.0;
    };
    using Tree = std::vector<Node>;

    Prediction predict(const Eigen::VectorXd& x) const override;
    Encoding encoding() const override { return Encoding::Index; }
    std::size_t input_dim() const override { return dim_; }

    /// Leaf (mean, variance) reached in every tree.
    std::vector<Prediction> tree_predictions(const Eigen::VectorXd& x) const;
    const std::vector<Tree>& trees() const { return trees_; }

private:
    friend RandomForest fit_prf(const Eigen::MatrixXd&, const Eigen::VectorXd&, Rng&,
                                const PRFOptions&);
    std::vector<Tree> trees_;
    std::size_t dim_ = 0;
};

/// Throws InsufficientDataError when fewer than two rows are given.
RandomForest fit_prf(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng,
                     const PRFOptions& options = {});

} // namespace bbo
