#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "bbo/errors.hpp"
#include "bbo/gp.hpp"
#include "bbo/prf.hpp"
#include "oracles.hpp"

namespace bbo {
namespace {

Eigen::MatrixXd random_inputs(Rng& rng, Eigen::Index n, Eigen::Index d)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < d; ++k) X(i, k) = u(rng);
    return X;
}

TEST(GaussianProcess, ConstantTargetsPredictConstant)
{
    Rng rng(1);
    auto X = random_inputs(rng, 6, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 3.25);
    auto gp = fit_gp(X, y, rng);
    for (const auto& q : {Eigen::Vector2d(0.1, 0.9), Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1, 0)})
        EXPECT_NEAR(gp.predict(q).mean, 3.25, 1e-6);
}

TEST(GaussianProcess, InterpolatesSineAtTrainingInputs)
{
    Rng rng(2);
    Eigen::MatrixXd X(8, 1);
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i) {
        X(i, 0) = i / 7.0;
        y[i] = std::sin(6 * X(i, 0));
    }
    auto gp = fit_gp(X, y, rng);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(gp.predict(X.row(i).transpose()).mean, y[i], 0.05);
}

TEST(GaussianProcess, VarianceSmallerAtDataThanFarAway)
{
    Rng rng(3);
    Eigen::MatrixXd X(4, 1);
    X << 0.0, 0.1, 0.2, 0.3;
    Eigen::VectorXd y(4);
    y << 1.0, 0.5, 0.2, 0.4;
    auto gp = fit_gp(X, y, rng);
    double at_data = gp.predict(Eigen::VectorXd::Constant(1, 0.1)).variance;
    double far = gp.predict(Eigen::VectorXd::Constant(1, 1.0)).variance;
    EXPECT_GE(at_data, 0.0);
    EXPECT_LE(at_data, far);
}

TEST(GaussianProcess, NeedsTwoRows)
{
    Rng rng(4);
    EXPECT_THROW(fit_gp(Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1), rng),
                 InsufficientDataError);
}

TEST(GaussianProcess, LikelihoodGradientMatchesFiniteDifferences)
{
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        auto X = random_inputs(rng, 10, 3);
        Eigen::VectorXd y(10);
        for (int i = 0; i < 10; ++i) y[i] = std::sin(3 * X(i, 0)) + X(i, 1) * X(i, 2);
        Eigen::VectorXd theta(5);
        for (int k = 0; k < 3; ++k) theta[k] = std::log(0.1 + u(rng));
        theta[3] = std::log(0.5 + u(rng));
        theta[4] = std::log(1e-3 + 0.01 * u(rng));
        auto lml = [&](const Eigen::VectorXd& th) {
            return gp_log_marginal_likelihood(X, y, GPHyperparameters::from_log(th)).value;
        };
        auto analytic = gp_log_marginal_likelihood(X, y, GPHyperparameters::from_log(theta)).gradient;
        auto fd = oracle::central_difference(lml, theta, 1e-5);
        for (Eigen::Index k = 0; k < theta.size(); ++k)
            EXPECT_LE(std::abs(analytic[k] - fd[k]), 1e-4 * std::max(std::abs(fd[k]), 1e-3))
                << "component " << k;
    }
}

TEST(GaussianProcess, DuplicatePointsTakeJitterPath)
{
    Eigen::MatrixXd X(3, 1);
    X << 0.2, 0.2, 0.7;
    Eigen::VectorXd y(3);
    y << 1.0, 1.0, -1.0;
    GPHyperparameters h = GPHyperparameters::defaults(1);
    h.noise_variance = 1e-300;
    auto gp = GaussianProcess::condition(X, y, h);
    EXPECT_GT(gp.jitter(), 0.0);
    double a = gp_log_marginal_likelihood(X, y, h).value;
    h.noise_variance = 2e-300;
    double b = gp_log_marginal_likelihood(X, y, h).value;
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_NEAR(a, b, 1e-9);
}

TEST(GaussianProcess, LikelihoodDropsForBadNoiseLevel)
{
    Rng rng(6);
    auto X = random_inputs(rng, 20, 1);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) y[i] = std::sin(6 * X(i, 0));
    auto gp = fit_gp(X, y, rng);
    auto h = gp.hyperparameters();
    // 1-D scan over noise: the fitted value beats settings far from it.
    double best = gp_log_marginal_likelihood(gp, h).value;
    for (double noise : {1e-1}) {
        auto bad = h;
        bad.noise_variance = noise;
        EXPECT_LT(gp_log_marginal_likelihood(gp, bad).value, best);
    }
}

TEST(GaussianProcess, AddingDataNeverIncreasesVariance)
{
    Rng rng(7);
    GPHyperparameters h = GPHyperparameters::defaults(2);
    h.lengthscales << 0.3, 0.4;
    h.noise_variance = 1e-4;
    auto X = random_inputs(rng, 15, 2);
    Eigen::VectorXd y = Eigen::VectorXd::Random(15);
    auto queries = random_inputs(rng, 32, 2);
    for (Eigen::Index n = 2; n < 15; ++n) {
        auto small = GaussianProcess::condition(X.topRows(n), y.head(n), h, false);
        auto large = GaussianProcess::condition(X.topRows(n + 1), y.head(n + 1), h, false);
        for (Eigen::Index q = 0; q < queries.rows(); ++q)
            EXPECT_LE(large.predict(queries.row(q).transpose()).variance,
                      small.predict(queries.row(q).transpose()).variance + 1e-9);
    }
}

TEST(GaussianProcess, BatchPredictionMatchesSingle)
{
    Rng rng(8);
    auto X = random_inputs(rng, 12, 3);
    Eigen::VectorXd y = X.rowwise().sum();
    auto gp = fit_gp(X, y, rng);
    auto Q = random_inputs(rng, 5, 3);
    Eigen::VectorXd mean, var;
    gp.predict_batch(Q, mean, var);
    for (Eigen::Index i = 0; i < 5; ++i) {
        auto p = gp.predict(Q.row(i).transpose());
        EXPECT_NEAR(p.mean, mean[i], 1e-12);
        EXPECT_NEAR(p.variance, var[i], 1e-12);
    }
}

TEST(RandomForest, ConstantTargets)
{
    Rng rng(1);
    auto X = random_inputs(rng, 20, 3);
    auto forest = fit_prf(X, Eigen::VectorXd::Constant(20, -2.0), rng);
    auto Q = random_inputs(rng, 50, 3);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        auto p = forest.predict(Q.row(i).transpose());
        EXPECT_EQ(p.mean, -2.0);
        EXPECT_LE(p.variance, 1e-12);
    }
}

TEST(RandomForest, PredictionsStayInTargetRange)
{
    Rng rng(2);
    auto X = random_inputs(rng, 40, 4);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) y[i] = std::exp(X(i, 0)) - 3 * X(i, 2);
    auto forest = fit_prf(X, y, rng);
    auto Q = random_inputs(rng, 10000, 4);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        double m = forest.predict(Q.row(i).transpose()).mean;
        EXPECT_GE(m, y.minCoeff());
        EXPECT_LE(m, y.maxCoeff());
    }
}

TEST(RandomForest, VarianceFollowsLawOfTotalVariance)
{
    Rng rng(3);
    auto X = random_inputs(rng, 30, 2);
    Eigen::VectorXd y = (X.col(0).array() * 5).sin().matrix() + X.col(1);
    auto forest = fit_prf(X, y, rng);
    auto Q = random_inputs(rng, 20, 2);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        auto trees = forest.tree_predictions(Q.row(i).transpose());
        double m = 0, s = 0;
        for (const auto& t : trees) {
            m += t.mean;
            s += t.variance + t.mean * t.mean;
        }
        m /= static_cast<double>(trees.size());
        double var = s / static_cast<double>(trees.size()) - m * m;
        auto p = forest.predict(Q.row(i).transpose());
        EXPECT_NEAR(p.mean, m, 1e-12);
        EXPECT_NEAR(p.variance, std::max(var, 1e-12), 1e-12);
    }
}

TEST(RandomForest, SingleFullTreeReproducesTargets)
{
    Rng rng(4);
    auto X = random_inputs(rng, 25, 3);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(25, 0.0, 24.0);
    PRFOptions opt;
    opt.n_trees = 1;
    opt.min_samples_leaf = 1;
    opt.bootstrap = false;
    opt.feature_fraction = 1.0;
    auto forest = fit_prf(X, y, rng, opt);
    for (Eigen::Index i = 0; i < 25; ++i)
        EXPECT_DOUBLE_EQ(forest.predict(X.row(i).transpose()).mean, y[i]);
}

TEST(RandomForest, DeterministicUnderSeed)
{
    Rng a(9), b(9), data(10);
    auto X = random_inputs(data, 30, 3);
    Eigen::VectorXd y = X.rowwise().squaredNorm();
    auto f1 = fit_prf(X, y, a);
    auto f2 = fit_prf(X, y, b);
    auto Q = random_inputs(data, 20, 3);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        EXPECT_EQ(f1.predict(Q.row(i).transpose()).mean, f2.predict(Q.row(i).transpose()).mean);
        EXPECT_EQ(f1.predict(Q.row(i).transpose()).variance,
                  f2.predict(Q.row(i).transpose()).variance);
    }
    EXPECT_THROW(fit_prf(X.topRows(1), y.head(1), a), InsufficientDataError);
}

TEST(Surrogates, FitAndPredictFiftyByTenUnderTwoSeconds)
{
    Rng rng(11);
    auto X = random_inputs(rng, 50, 10);
    Eigen::VectorXd y = X.rowwise().squaredNorm();
    auto Q = random_inputs(rng, 100, 10);
    for (int kind = 0; kind < 2; ++kind) {
        auto start = std::chrono::steady_clock::now();
        Eigen::VectorXd mean, var;
        if (kind == 0) fit_gp(X, y, rng).predict_batch(Q, mean, var);
        else fit_prf(X, y, rng).predict_batch(Q, mean, var);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        EXPECT_LT(secs, 2.0) << (kind == 0 ? "GP" : "PRF");
    }
}

} // namespace
} // namespace bbo
