#include "bbo/prf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bbo/errors.hpp"

namespace bbo {

namespace {

struct Builder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    const PRFOptions& opt;
    Rng& rng;
    RandomForest::Tree tree;
    std::vector<Eigen::Index> features;

    int grow(std::vector<Eigen::Index>& idx, std::size_t depth)
    {
        const auto n = idx.size();
        double sum = 0.0, sq = 0.0;
        double lo = y[idx.front()], hi = lo;
        for (auto i : idx) {
            sum += y[i];
            sq += y[i] * y[i];
            lo = std::min(lo, y[i]);
            hi = std::max(hi, y[i]);
        }
        const double mean = std::clamp(sum / static_cast<double>(n), lo, hi);
        double var = 0.0;
        for (auto i : idx) var += (y[i] - mean) * (y[i] - mean);
        const double parent_sse = var;
        var /= static_cast<double>(n);

        int id = static_cast<int>(tree.size());
        tree.push_back({-1, 0.0, -1, -1, mean, var});

        const std::size_t min_leaf = std::max<std::size_t>(1, opt.min_samples_leaf);
        if (n < 2 * min_leaf || parent_sse <= 0.0 || (opt.max_depth && depth >= opt.max_depth))
            return id;

        // Random feature subset for this split.
        std::shuffle(features.begin(), features.end(), rng);
        const auto k = static_cast<std::size_t>(std::max(
            1.0, std::ceil(static_cast<double>(features.size()) * opt.feature_fraction)));

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_sse = parent_sse - 1e-12 * (1.0 + parent_sse);
        std::vector<Eigen::Index> order(idx);
        for (std::size_t f = 0; f < std::min(k, features.size()); ++f) {
            const Eigen::Index feat = features[f];
            std::sort(order.begin(), order.end(), [&](auto a, auto b) {
                return X(a, feat) < X(b, feat) || (X(a, feat) == X(b, feat) && a < b);
            });
            double ls = 0.0, lsq = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                double v = y[order[i]];
                ls += v;
                lsq += v * v;
                const std::size_t nl = i + 1, nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                double xa = X(order[i], feat), xb = X(order[i + 1], feat);
                if (!(xa < xb)) continue;
                double rs = sum - ls, rsq = sq - lsq;
                double sse = (lsq - ls * ls / static_cast<double>(nl)) +
                             (rsq - rs * rs / static_cast<double>(nr));
                if (sse < best_sse) {
                    best_sse = sse;
                    best_feature = static_cast<int>(feat);
                    best_threshold = 0.5 * (xa + xb);
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<Eigen::Index> left, right;
        for (auto i : idx) (X(i, best_feature) <= best_threshold ? left : right).push_back(i);
        if (left.empty() || right.empty()) return id;
        idx.clear();
        idx.shrink_to_fit();

        int l = grow(left, depth + 1);
        int r = grow(right, depth + 1);
        tree[static_cast<std::size_t>(id)].feature = best_feature;
        tree[static_cast<std::size_t>(id)].threshold = best_threshold;
        tree[static_cast<std::size_t>(id)].left = l;
        tree[static_cast<std::size_t>(id)].right = r;
        return id;
    }
};

const RandomForest::Node& leaf_for(const RandomForest::Tree& tree, const Eigen::VectorXd& x)
{
    const RandomForest::Node* node = &tree.front();
    while (node->feature >= 0)
        node = &tree[static_cast<std::size_t>(x[node->feature] <= node->threshold ? node->left
                                                                                   : node->right)];
    return *node;
}

} // namespace

RandomForest fit_prf(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng,
                     const PRFOptions& options)
{
    if (X.rows() < 2) throw InsufficientDataError("forest fitting needs at least two observations");
    if (X.rows() != y.size()) throw NumericError("input/target row count mismatch");
    if (options.n_trees < 1) throw NumericError("forest needs at least one tree");
    RandomForest forest;
    forest.dim_ = static_cast<std::size_t>(X.cols());
    const auto n = static_cast<std::size_t>(X.rows());
    std::uniform_int_distribution<Eigen::Index> pick(0, X.rows() - 1);
    for (std::size_t t = 0; t < options.n_trees; ++t) {
        std::vector<Eigen::Index> idx(n);
        if (options.bootstrap)
            for (auto& i : idx) i = pick(rng);
        else
            std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        Builder b{X, y, options, rng, {}, {}};
        b.features.resize(forest.dim_);
        std::iota(b.features.begin(), b.features.end(), Eigen::Index{0});
        b.grow(idx, 0);
        forest.trees_.push_back(std::move(b.tree));
    }
    return forest;
}

std::vector<Prediction> RandomForest::tree_predictions(const Eigen::VectorXd& x) const
{
    std::vector<Prediction> out;
    out.reserve(trees_.size());
    for (const auto& tree : trees_) {
        const auto& leaf = leaf_for(tree, x);
        out.push_back({leaf.mean, leaf.variance});
    }
    return out;
}

Prediction RandomForest::predict(const Eigen::VectorXd& x) const
{
    double m = 0.0, second = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& tree : trees_) {
        const auto& leaf = leaf_for(tree, x);
        m += leaf.mean;
        lo = std::min(lo, leaf.mean);
        hi = std::max(hi, leaf.mean);
        second += leaf.variance + leaf.mean * leaf.mean;
    }
    const double T = static_cast<double>(trees_.size());
    m = std::clamp(m / T, lo, hi);
    double var = second / T - m * m;
    return {m, std::max(var, 1e-12)};
}

} // namespace bbo
