#include "bbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "bbo/errors.hpp"

namespace bbo {

namespace {

Eigen::MatrixXd encode_rows(const SearchSpace& space, const std::vector<Configuration>& configs,
                            Encoding enc)
{
    Eigen::MatrixXd X(static_cast<Eigen::Index>(configs.size()),
                      static_cast<Eigen::Index>(space.encoded_size(enc)));
    for (std::size_t i = 0; i < configs.size(); ++i)
        X.row(static_cast<Eigen::Index>(i)) = to_unit_vector(space, configs[i], enc).transpose();
    return X;
}

// Front points strictly usable for hypervolume: inside ref, non-dominated, sorted by f0.
std::vector<moo::Point> prepare_front(const std::vector<moo::Point>& front, const moo::Point& ref)
{
    std::vector<moo::Point> inside;
    for (const auto& p : front) {
        bool ok = p.size() == ref.size();
        for (std::size_t k = 0; ok && k < p.size(); ++k) ok = p[k] <= ref[k];
        if (ok) inside.push_back(p);
    }
    auto nd = moo::non_dominated(inside);
    std::sort(nd.begin(), nd.end());
    return nd;
}

double ehvi_sorted(std::span<const double> mean, std::span<const double> sd,
                   const std::vector<moo::Point>& sorted_front, const moo::Point& ref,
                   const Eigen::MatrixXd& normals, double front_hv)
{
    const std::size_t m = mean.size();
    const auto S = normals.rows();
    double total = 0.0;
    if (m == 2) {
        for (Eigen::Index s = 0; s < S; ++s) {
            double y0 = std::min(mean[0] + sd[0] * normals(s, 0), ref[0]);
            double y1 = std::min(mean[1] + sd[1] * normals(s, 1), ref[1]);
            total += moo::hypervolume_improvement_2d(sorted_front, y0, y1, ref);
        }
    } else {
        std::vector<moo::Point> pts = sorted_front;
        pts.emplace_back(m);
        for (Eigen::Index s = 0; s < S; ++s) {
            bool inside = true;
            for (std::size_t k = 0; k < m; ++k) {
                pts.back()[k] = std::min(mean[k] + sd[k] * normals(s, static_cast<Eigen::Index>(k)),
                                         ref[k]);
                if (!(pts.back()[k] < ref[k])) inside = false;
            }
            if (inside) total += std::max(0.0, moo::hypervolume(pts, ref) - front_hv);
        }
    }
    return std::max(0.0, total / static_cast<double>(S));
}

Eigen::MatrixXd draw_normals(std::size_t samples, std::size_t m, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index k = 0; k < Z.cols(); ++k) Z(i, k) = normal(rng);
    return Z;
}

Prediction predict_config(const SurrogateModel& model, const SearchSpace& space,
                          const Configuration& x)
{
    return model.predict(to_unit_vector(space, x, model.encoding()));
}

} // namespace

const char* to_string(AcquisitionKind kind)
{
    switch (kind) {
    case AcquisitionKind::None: return "none";
    case AcquisitionKind::EI: return "EI";
    case AcquisitionKind::EIC: return "EIC";
    case AcquisitionKind::EHVI: return "EHVI";
    case AcquisitionKind::EHVI_C: return "EHVI_C";
    }
    return "?";
}

double normal_pdf(double z)
{
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double expected_improvement(double mean, double variance, double eta)
{
    const double sigma = std::sqrt(std::max(variance, 0.0));
    if (sigma <= 0.0) return std::max(eta - mean, 0.0);
    const double z = (eta - mean) / sigma;
    return std::max(0.0, sigma * (z * normal_cdf(z) + normal_pdf(z)));
}

double probability_of_feasibility(double mean, double variance)
{
    const double sigma = std::sqrt(std::max(variance, 0.0));
    if (sigma <= 0.0) return mean <= 0.0 ? 1.0 : 0.0;
    return normal_cdf(-mean / sigma);
}

void AcquisitionContext::validate() const
{
    if (!space) throw ConfigurationError("acquisition context has no search space");
    if (objective_models.empty()) throw ConfigurationError("acquisition needs an objective model");
    if (ref_point) {
        if (ref_point->size() != objective_models.size())
            throw ConfigurationError("ref_point length differs from the number of objectives");
        for (const auto& p : front) {
            bool strict = false;
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (p[k] > (*ref_point)[k])
                    throw ConfigurationError("a front point lies outside the reference point");
                if (p[k] < (*ref_point)[k]) strict = true;
            }
            if (!strict) throw ConfigurationError("a front point coincides with the reference point");
        }
    }
}

double constrained_ei(const Configuration& x, const AcquisitionContext& ctx)
{
    double pof = 1.0;
    for (const auto& model : ctx.constraint_models) {
        auto p = predict_config(*model, *ctx.space, x);
        pof *= probability_of_feasibility(p.mean, p.variance);
    }
    if (!ctx.eta) return pof;
    auto p = predict_config(*ctx.objective_models.front(), *ctx.space, x);
    return expected_improvement(p.mean, p.variance, *ctx.eta) * pof;
}

double ehvi_from_moments(std::span<const double> mean, std::span<const double> sd,
                         const std::vector<moo::Point>& front, const moo::Point& ref,
                         const Eigen::MatrixXd& normals)
{
    auto sorted = prepare_front(front, ref);
    return ehvi_sorted(mean, sd, sorted, ref, normals, moo::hypervolume(sorted, ref));
}

double ehvi(const Configuration& x, const AcquisitionContext& ctx, std::size_t mc_samples,
            Rng& rng)
{
    if (!ctx.ref_point) throw ConfigurationError("EHVI requires a reference point");
    if (mc_samples < 1) throw ConfigurationError("EHVI needs at least one Monte Carlo sample");
    const std::size_t m = ctx.objective_models.size();
    std::vector<double> mean(m), sd(m);
    for (std::size_t k = 0; k < m; ++k) {
        auto p = predict_config(*ctx.objective_models[k], *ctx.space, x);
        mean[k] = p.mean;
        sd[k] = std::sqrt(std::max(p.variance, 0.0));
    }
    return ehvi_from_moments(mean, sd, ctx.front, *ctx.ref_point, draw_normals(mc_samples, m, rng));
}

AcquisitionFunction::AcquisitionFunction(AcquisitionKind kind, AcquisitionContext ctx,
                                         std::size_t mc_samples, Rng& rng)
    : kind_(kind), ctx_(std::move(ctx))
{
    ctx_.validate();
    if (kind_ == AcquisitionKind::EHVI || kind_ == AcquisitionKind::EHVI_C) {
        if (!ctx_.ref_point) throw ConfigurationError("EHVI requires a reference point");
        if (mc_samples < 1) throw ConfigurationError("EHVI needs at least one Monte Carlo sample");
        normals_ = draw_normals(mc_samples, ctx_.objective_models.size(), rng);
        sorted_front_ = prepare_front(ctx_.front, *ctx_.ref_point);
    }
}

double AcquisitionFunction::operator()(const Configuration& config) const
{
    return (*this)(std::vector<Configuration>{config}).front();
}

std::vector<double> AcquisitionFunction::operator()(const std::vector<Configuration>& configs) const
{
    const std::size_t n = configs.size();
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;

    std::map<Encoding, Eigen::MatrixXd> encoded;
    auto rows_for = [&](Encoding enc) -> const Eigen::MatrixXd& {
        auto it = encoded.find(enc);
        if (it == encoded.end()) it = encoded.emplace(enc, encode_rows(*ctx_.space, configs, enc)).first;
        return it->second;
    };
    auto predict_all = [&](const std::vector<std::shared_ptr<const SurrogateModel>>& models) {
        std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> res(models.size());
        for (std::size_t k = 0; k < models.size(); ++k)
            models[k]->predict_batch(rows_for(models[k]->encoding()), res[k].first, res[k].second);
        return res;
    };

    const auto obj = predict_all(ctx_.objective_models);
    std::vector<double> pof(n, 1.0);
    if (kind_ == AcquisitionKind::EIC || kind_ == AcquisitionKind::EHVI_C) {
        const auto con = predict_all(ctx_.constraint_models);
        for (const auto& [mean, var] : con)
            for (std::size_t i = 0; i < n; ++i)
                pof[i] *= probability_of_feasibility(mean[static_cast<Eigen::Index>(i)],
                                                     var[static_cast<Eigen::Index>(i)]);
    }

    const std::size_t m = obj.size();
    const double front_hv =
        ctx_.ref_point && m > 2 ? moo::hypervolume(sorted_front_, *ctx_.ref_point) : 0.0;
    std::vector<double> mean(m), sd(m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        switch (kind_) {
        case AcquisitionKind::EI:
        case AcquisitionKind::EIC:
            if (ctx_.eta)
                out[i] = expected_improvement(obj[0].first[ii], obj[0].second[ii], *ctx_.eta) * pof[i];
            else if (kind_ == AcquisitionKind::EIC)
                out[i] = pof[i];
            else
                out[i] = std::sqrt(std::max(obj[0].second[ii], 0.0));
            break;
        case AcquisitionKind::EHVI:
        case AcquisitionKind::EHVI_C:
            if (pof[i] <= 0.0) break;
            for (std::size_t k = 0; k < m; ++k) {
                mean[k] = obj[k].first[ii];
                sd[k] = std::sqrt(std::max(obj[k].second[ii], 0.0));
            }
            out[i] = ehvi_sorted(mean, sd, sorted_front_, *ctx_.ref_point, normals_, front_hv) * pof[i];
            break;
        case AcquisitionKind::None: break;
        }
    }
    return out;
}

BatchScoreFn batched(std::function<double(const Configuration&)> fn)
{
    return [fn = std::move(fn)](const std::vector<Configuration>& configs) {
        std::vector<double> out;
        out.reserve(configs.size());
        for (const auto& c : configs) out.push_back(fn(c));
        return out;
    };
}

// ---------------------------------------------------------------------------
// Inner optimizer

namespace {

Configuration random_neighbor(const SearchSpace& space, const Configuration& c, Rng& rng)
{
    std::normal_distribution<double> noise(0.0, 0.05);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> discrete;
    std::vector<std::pair<std::string, Value>> values = c.values();
    for (std::size_t j = 0; j < space.dimension(); ++j) {
        const auto& p = space.parameter(j);
        if (p.is_numeric()) values[j].second = p.from_unit(p.to_unit(values[j].second) + noise(rng));
        else discrete.push_back(j);
    }
    if (!discrete.empty() && unit(rng) < 0.5) {
        std::uniform_int_distribution<std::size_t> pick(0, discrete.size() - 1);
        const std::size_t j = discrete[pick(rng)];
        const auto& p = space.parameter(j);
        std::uniform_int_distribution<std::size_t> other(0, p.items().size() - 2);
        std::size_t cur = static_cast<std::size_t>(p.index_of(values[j].second));
        std::size_t k = other(rng);
        if (k >= cur) ++k;
        values[j].second = p.items()[k];
    }
    return Configuration(std::move(values));
}

// Coordinate moves: +-step on floats (unit scale), +-max(1, step*range) on ints,
// adjacent levels on ordinals, every other choice on categoricals.
std::vector<Configuration> coordinate_neighbors(const SearchSpace& space, const Configuration& c,
                                                double step)
{
    std::vector<Configuration> out;
    const auto& base = c.values();
    auto with = [&](std::size_t j, Value v) {
        if (v == base[j].second) return;
        auto values = base;
        values[j].second = std::move(v);
        out.emplace_back(std::move(values));
    };
    for (std::size_t j = 0; j < space.dimension(); ++j) {
        const auto& p = space.parameter(j);
        switch (p.kind()) {
        case ParamKind::Float: {
            double u = p.to_unit(base[j].second);
            with(j, p.from_unit(u - step));
            with(j, p.from_unit(u + step));
            break;
        }
        case ParamKind::Int: {
            auto v = std::get<std::int64_t>(base[j].second);
            auto delta = std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::llround(step * (p.high() - p.low()))));
            auto lo = static_cast<std::int64_t>(p.low()), hi = static_cast<std::int64_t>(p.high());
            with(j, std::clamp(v - delta, lo, hi));
            with(j, std::clamp(v + delta, lo, hi));
            break;
        }
        case ParamKind::Ordinal: {
            int idx = p.index_of(base[j].second);
            if (idx > 0) with(j, p.items()[static_cast<std::size_t>(idx - 1)]);
            if (idx + 1 < static_cast<int>(p.items().size()))
                with(j, p.items()[static_cast<std::size_t>(idx + 1)]);
            break;
        }
        case ParamKind::Categorical:
            for (const auto& choice : p.items()) with(j, choice);
            break;
        }
    }
    return out;
}

bool has_float(const SearchSpace& space)
{
    return !space.is_discrete();
}

} // namespace

std::vector<ScoredConfiguration> maximize_acquisition(const BatchScoreFn& score,
                                                      const SearchSpace& space, Rng& rng,
                                                      const MaximizerOptions& options,
                                                      const std::vector<Configuration>& told,
                                                      const std::vector<Configuration>& pending)
{
    if (options.n_candidates < 1) throw ConfigurationError("n_candidates must be >= 1");
    std::set<Configuration> excluded(told.begin(), told.end());
    excluded.insert(pending.begin(), pending.end());

    std::map<Configuration, double> cache;
    std::vector<Configuration> order;  // insertion order of scored configurations
    auto score_new = [&](std::vector<Configuration> batch) {
        std::vector<Configuration> fresh;
        std::set<Configuration> seen;
        for (auto& c : batch)
            if (!excluded.count(c) && !cache.count(c) && seen.insert(c).second)
                fresh.push_back(std::move(c));
        if (fresh.empty()) return;
        auto scores = score(fresh);
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            double s = std::isfinite(scores[i]) ? scores[i] : -std::numeric_limits<double>::infinity();
            cache.emplace(fresh[i], s);
            order.push_back(std::move(fresh[i]));
        }
    };

    const std::uint64_t card = space.cardinality();
    if (card != 0 && card <= options.n_candidates) {
        score_new(enumerate_all(space));
    } else {
        std::vector<Configuration> candidates = sample_random(space, options.n_candidates, rng);
        for (const auto* seeds : {&told, &pending})
            for (const auto& c : *seeds)
                for (std::size_t k = 0; k < options.neighbors_per_seed; ++k)
                    candidates.push_back(random_neighbor(space, c, rng));
        score_new(std::move(candidates));
    }
    if (order.empty())
        throw ExhaustedSpaceError("every configuration of the space has been told or is pending");

    // Local search from the best distinct starts.
    std::vector<std::size_t> ranked(order.size());
    std::iota(ranked.begin(), ranked.end(), std::size_t{0});
    std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
        return cache.at(order[a]) > cache.at(order[b]);
    });
    std::vector<Configuration> starts;
    for (std::size_t i = 0; i < std::min(options.n_local_starts, ranked.size()); ++i)
        starts.push_back(order[ranked[i]]);

    auto lookup = [&](const Configuration& c) {
        auto it = cache.find(c);
        return it == cache.end() ? -std::numeric_limits<double>::infinity() : it->second;
    };
    for (const auto& start : starts) {
        Configuration cur = start;
        double cur_score = lookup(cur);
        double step = options.initial_step;
        for (std::size_t s = 0; s < options.max_local_steps; ++s) {
            auto nbrs = coordinate_neighbors(space, cur, step);
            score_new(nbrs);
            const Configuration* best = nullptr;
            double best_score = cur_score;
            for (const auto& nb : nbrs) {
                double v = lookup(nb);
                if (v > best_score) {
                    best_score = v;
                    best = &nb;
                }
            }
            if (best) {
                cur = *best;
                cur_score = best_score;
            } else if (has_float(space) && step > 1e-4) {
                step *= 0.5;
            } else {
                break;
            }
        }
    }

    std::vector<ScoredConfiguration> out;
    out.reserve(order.size());
    for (auto& c : order) out.push_back({c, cache.at(c)});
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.score > b.score; });
    return out;
}

// ---------------------------------------------------------------------------
// Local penalization

double penalizer_factor(const Eigen::VectorXd& x, const PenaltyCenter& center, double lipschitz,
                        double best)
{
    const double sd = std::sqrt(2.0 * std::max(center.variance, 1e-12));
    const double z = (lipschitz * (x - center.x).norm() - (center.mean - best)) / sd;
    return std::clamp(0.5 * std::erfc(-z), std::numeric_limits<double>::min(), 1.0);
}

double local_penalization(double score, const Eigen::VectorXd& x,
                          const std::vector<Eigen::VectorXd>& pending, const SurrogateModel& model,
                          double lipschitz, double best)
{
    double factor = 1.0;
    for (const auto& xj : pending) {
        auto p = model.predict(xj);
        factor *= penalizer_factor(x, {xj, p.mean, p.variance}, lipschitz, best);
    }
    return score * factor;
}

double estimate_lipschitz(const SurrogateModel& model, Rng& rng, std::size_t n_points)
{
    const auto d = static_cast<Eigen::Index>(model.input_dim());
    constexpr double h = 1e-4;
    std::uniform_real_distribution<double> unit(h, 1.0 - h);
    Eigen::MatrixXd Q(static_cast<Eigen::Index>(n_points) * 2 * d, d);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n_points); ++i) {
        Eigen::VectorXd x(d);
        for (Eigen::Index k = 0; k < d; ++k) x[k] = unit(rng);
        for (Eigen::Index k = 0; k < d; ++k) {
            Q.row((i * d + k) * 2) = x.transpose();
            Q.row((i * d + k) * 2 + 1) = x.transpose();
            Q((i * d + k) * 2, k) += h;
            Q((i * d + k) * 2 + 1, k) -= h;
        }
    }
    Eigen::VectorXd mean, var;
    model.predict_batch(Q, mean, var);
    double L = 0.0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n_points); ++i) {
        double sq = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
            double g = (mean[(i * d + k) * 2] - mean[(i * d + k) * 2 + 1]) / (2.0 * h);
            sq += g * g;
        }
        L = std::max(L, std::sqrt(sq));
    }
    return std::max(L, 1e-3);
}

} // namespace bbo
