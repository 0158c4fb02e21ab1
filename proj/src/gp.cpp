#include "bbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "bbo/errors.hpp"

namespace bbo {

namespace {

const double kSqrt5 = std::sqrt(5.0);

struct Factorization {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt)
{
    if (llt.info() != Eigen::Success) return false;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i)
        if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i))) return false;
    return true;
}

// Cholesky with geometric jitter escalation 1e-8 .. 1e-4.
Factorization factorize(const Eigen::MatrixXd& K)
{
    Factorization f;
    f.llt.compute(K);
    if (factor_ok(f.llt)) return f;
    const auto n = K.rows();
    for (double jitter = 1e-8; jitter <= 1e-4 * 1.0001; jitter *= 10.0) {
        f.llt.compute(K + jitter * Eigen::MatrixXd::Identity(n, n));
        if (factor_ok(f.llt)) {
            f.jitter = jitter;
            return f;
        }
    }
    throw NumericError("kernel matrix is not positive definite even with maximal jitter");
}

Eigen::VectorXd log_lower_bounds(std::size_t d)
{
    Eigen::VectorXd lo(static_cast<Eigen::Index>(d) + 2);
    lo.head(static_cast<Eigen::Index>(d)).setConstant(std::log(GPBounds::lengthscale_min));
    lo[static_cast<Eigen::Index>(d)] = std::log(GPBounds::signal_min);
    lo[static_cast<Eigen::Index>(d) + 1] = std::log(GPBounds::noise_min);
    return lo;
}

Eigen::VectorXd log_upper_bounds(std::size_t d)
{
    Eigen::VectorXd hi(static_cast<Eigen::Index>(d) + 2);
    hi.head(static_cast<Eigen::Index>(d)).setConstant(std::log(GPBounds::lengthscale_max));
    hi[static_cast<Eigen::Index>(d)] = std::log(GPBounds::signal_max);
    hi[static_cast<Eigen::Index>(d) + 1] = std::log(GPBounds::noise_max);
    return hi;
}

struct Objective {
    double f;
    Eigen::VectorXd g;
    bool ok;
};

// Projected limited-memory BFGS on -LML inside the log-space box.
std::pair<Eigen::VectorXd, double> maximize_lml(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                                Eigen::VectorXd theta, std::size_t max_iterations)
{
    const auto d = static_cast<std::size_t>(X.cols());
    const Eigen::VectorXd lo = log_lower_bounds(d);
    const Eigen::VectorXd hi = log_upper_bounds(d);
    auto project = [&](const Eigen::VectorXd& v) { return v.cwiseMax(lo).cwiseMin(hi).eval(); };
    auto evaluate = [&](const Eigen::VectorXd& th) -> Objective {
        try {
            auto r = gp_log_marginal_likelihood(X, y, GPHyperparameters::from_log(th));
            if (!std::isfinite(r.value) || !r.gradient.allFinite()) return {0.0, {}, false};
            return {-r.value, -r.gradient, true};
        } catch (const NumericError&) {
            return {0.0, {}, false};
        }
    };

    theta = project(theta);
    Objective cur = evaluate(theta);
    if (!cur.ok) return {theta, std::numeric_limits<double>::infinity()};

    constexpr std::size_t kMemory = 8;
    std::deque<Eigen::VectorXd> S, Y;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd pg = cur.g;
        for (Eigen::Index i = 0; i < pg.size(); ++i)
            if ((theta[i] <= lo[i] && pg[i] > 0.0) || (theta[i] >= hi[i] && pg[i] < 0.0))
                pg[i] = 0.0;
        if (pg.norm() < 1e-6) break;

        // Two-loop recursion.
        Eigen::VectorXd q = pg;
        std::vector<double> a(S.size());
        for (std::size_t k = S.size(); k-- > 0;) {
            a[k] = S[k].dot(q) / Y[k].dot(S[k]);
            q -= a[k] * Y[k];
        }
        if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
        for (std::size_t k = 0; k < S.size(); ++k) {
            double b = Y[k].dot(q) / Y[k].dot(S[k]);
            q += (a[k] - b) * S[k];
        }
        Eigen::VectorXd dir = -q;
        for (Eigen::Index i = 0; i < dir.size(); ++i)
            if ((theta[i] <= lo[i] && dir[i] < 0.0) || (theta[i] >= hi[i] && dir[i] > 0.0))
                dir[i] = 0.0;
        if (dir.dot(pg) >= 0.0) {
            dir = -pg;
            S.clear();
            Y.clear();
        }

        double step = std::min(1.0, 3.0 / dir.norm());
        bool accepted = false;
        Eigen::VectorXd next;
        Objective cand{};
        for (int halvings = 0; halvings < 30; ++halvings, step *= 0.5) {
            next = project(theta + step * dir);
            cand = evaluate(next);
            if (cand.ok && cand.f <= cur.f + 1e-4 * cur.g.dot(next - theta)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;

        Eigen::VectorXd s = next - theta;
        Eigen::VectorXd yv = cand.g - cur.g;
        if (s.dot(yv) > 1e-10) {
            S.push_back(s);
            Y.push_back(yv);
            if (S.size() > kMemory) {
                S.pop_front();
                Y.pop_front();
            }
        }
        double improvement = cur.f - cand.f;
        theta = next;
        cur = cand;
        if (improvement < 1e-10 * (1.0 + std::abs(cur.f))) break;
    }
    return {theta, cur.f};
}

} // namespace

Eigen::VectorXd GPHyperparameters::to_log() const
{
    const auto d = lengthscales.size();
    Eigen::VectorXd theta(d + 2);
    theta.head(d) = lengthscales.array().log().matrix();
    theta[d] = std::log(signal_variance);
    theta[d + 1] = std::log(noise_variance);
    return theta;
}

GPHyperparameters GPHyperparameters::from_log(const Eigen::VectorXd& theta)
{
    const auto d = theta.size() - 2;
    GPHyperparameters h;
    h.lengthscales = theta.head(d).array().exp().matrix();
    h.signal_variance = std::exp(theta[d]);
    h.noise_variance = std::exp(theta[d + 1]);
    return h;
}

GPHyperparameters GPHyperparameters::defaults(std::size_t dim)
{
    GPHyperparameters h;
    h.lengthscales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), 0.5);
    h.signal_variance = 1.0;
    h.noise_variance = 1e-3;
    return h;
}

Eigen::MatrixXd matern52(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const GPHyperparameters& hyper)
{
    const Eigen::VectorXd inv_l = hyper.lengthscales.cwiseInverse();
    const Eigen::MatrixXd As = A * inv_l.asDiagonal();
    const Eigen::MatrixXd Bs = B * inv_l.asDiagonal();
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            double r = (As.row(i) - Bs.row(j)).norm();
            K(i, j) = hyper.signal_variance * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r * r) *
                      std::exp(-kSqrt5 * r);
        }
    }
    return K;
}

LogLikelihood gp_log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                         const GPHyperparameters& hyper)
{
    const auto n = X.rows();
    const auto d = X.cols();
    if (hyper.lengthscales.size() != d)
        throw NumericError("lengthscale count does not match input dimension");

    const Eigen::VectorXd inv_l = hyper.lengthscales.cwiseInverse();
    const Eigen::MatrixXd Xs = X * inv_l.asDiagonal();
    Eigen::MatrixXd Kf(n, n);
    // A = dk/dlog(l_k) without the per-dimension squared-distance factor.
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            double r = (Xs.row(i) - Xs.row(j)).norm();
            double e = std::exp(-kSqrt5 * r);
            Kf(i, j) = Kf(j, i) = hyper.signal_variance * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r * r) * e;
            A(i, j) = A(j, i) = hyper.signal_variance * 5.0 / 3.0 * (1.0 + kSqrt5 * r) * e;
        }
    }
    Eigen::MatrixXd K = Kf;
    K.diagonal().array() += hyper.noise_variance;
    Factorization f = factorize(K);

    Eigen::VectorXd alpha = f.llt.solve(y);
    double log_det_half = f.llt.matrixLLT().diagonal().array().log().sum();
    LogLikelihood out;
    out.value = -0.5 * y.dot(alpha) - log_det_half -
                0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

    Eigen::MatrixXd W = alpha * alpha.transpose() - f.llt.solve(Eigen::MatrixXd::Identity(n, n));
    out.gradient.resize(d + 2);
    Eigen::MatrixXd WA = W.cwiseProduct(A);
    for (Eigen::Index k = 0; k < d; ++k) {
        double g = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) {
                double diff = Xs(i, k) - Xs(j, k);
                g += WA(i, j) * diff * diff;
            }
        out.gradient[k] = 0.5 * g;
    }
    out.gradient[d] = 0.5 * W.cwiseProduct(Kf).sum();
    out.gradient[d + 1] = 0.5 * hyper.noise_variance * W.trace();
    return out;
}

LogLikelihood gp_log_marginal_likelihood(const GaussianProcess& model,
                                         const GPHyperparameters& hyper)
{
    return gp_log_marginal_likelihood(model.inputs(), model.standardized_targets(), hyper);
}

GaussianProcess GaussianProcess::condition(Eigen::MatrixXd X, const Eigen::VectorXd& y,
                                           GPHyperparameters hyper, bool standardize)
{
    if (X.rows() != y.size()) throw NumericError("input/target row count mismatch");
    GaussianProcess gp;
    gp.X_ = std::move(X);
    if (standardize) {
        gp.y_mean_ = y.mean();
        double var = (y.array() - gp.y_mean_).square().mean();
        gp.y_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    gp.y_ = ((y.array() - gp.y_mean_) / gp.y_scale_).matrix();
    gp.hyper_ = std::move(hyper);

    Eigen::MatrixXd K = matern52(gp.X_, gp.X_, gp.hyper_);
    K.diagonal().array() += gp.hyper_.noise_variance;
    Factorization f = factorize(K);
    gp.jitter_ = f.jitter;
    gp.L_ = f.llt.matrixL();
    gp.alpha_ = f.llt.solve(gp.y_);
    return gp;
}

Prediction GaussianProcess::predict(const Eigen::VectorXd& x) const
{
    Eigen::MatrixXd q = x.transpose();
    Eigen::VectorXd mean, var;
    predict_batch(q, mean, var);
    return {mean[0], var[0]};
}

void GaussianProcess::predict_batch(const Eigen::MatrixXd& X, Eigen::VectorXd& mean,
                                    Eigen::VectorXd& variance) const
{
    Eigen::MatrixXd Ks = matern52(X_, X, hyper_);
    mean = (Ks.transpose() * alpha_).array() * y_scale_ + y_mean_;
    L_.triangularView<Eigen::Lower>().solveInPlace(Ks);
    variance = ((hyper_.signal_variance - Ks.colwise().squaredNorm().transpose().array())
                    .max(0.0) *
                y_scale_ * y_scale_)
                   .matrix();
}

GaussianProcess fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng,
                       const GPFitOptions& options)
{
    if (X.rows() < 2) throw InsufficientDataError("GP fitting needs at least two observations");
    if (X.cols() < 1) throw InsufficientDataError("GP fitting needs at least one input dimension");
    if (!y.allFinite()) throw NumericError("GP targets must be finite");
    const auto d = static_cast<std::size_t>(X.cols());

    // Standardize once; the optimizer works on the standardized targets.
    const double mean = y.mean();
    const double var = (y.array() - mean).square().mean();
    const double scale = var > 1e-24 ? std::sqrt(var) : 1.0;
    const Eigen::VectorXd ys = ((y.array() - mean) / scale).matrix();

    std::vector<Eigen::VectorXd> starts;
    starts.push_back(GPHyperparameters::defaults(d).to_log());
    if (options.warm_start && static_cast<std::size_t>(options.warm_start->lengthscales.size()) == d)
        starts.push_back(options.warm_start->to_log());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t r = 0; r < options.restarts; ++r) {
        Eigen::VectorXd theta(static_cast<Eigen::Index>(d) + 2);
        for (std::size_t k = 0; k < d; ++k)
            theta[static_cast<Eigen::Index>(k)] = std::log(0.05) + unit(rng) * std::log(40.0);
        theta[static_cast<Eigen::Index>(d)] = std::log(0.2) + unit(rng) * std::log(25.0);
        theta[static_cast<Eigen::Index>(d) + 1] = std::log(1e-6) + unit(rng) * std::log(1e4);
        starts.push_back(theta);
    }

    Eigen::VectorXd best;
    double best_f = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        auto [theta, f] = maximize_lml(X, ys, s, options.max_iterations);
        if (f < best_f) {
            best_f = f;
            best = theta;
        }
    }
    if (!std::isfinite(best_f))
        throw NumericError("GP hyperparameter search failed from every starting point");
    return GaussianProcess::condition(X, y, GPHyperparameters::from_log(best), true);
}

} // namespace bbo
