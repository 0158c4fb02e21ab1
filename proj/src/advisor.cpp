#include "bbo/advisor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "bbo/errors.hpp"
#include "bbo/moo.hpp"

namespace bbo {

const char* to_string(AlgorithmChoice v)
{
    switch (v) {
    case AlgorithmChoice::Auto: return "auto";
    case AlgorithmChoice::GP: return "gp";
    case AlgorithmChoice::PRF: return "prf";
    case AlgorithmChoice::EA: return "ea";
    case AlgorithmChoice::Random: return "random";
    }
    return "?";
}

const char* to_string(InitDesign v)
{
    return v == InitDesign::LatinHypercube ? "latin_hypercube" : "random";
}

const char* to_string(SurrogateKind v)
{
    switch (v) {
    case SurrogateKind::GP: return "GP";
    case SurrogateKind::PRF: return "PRF";
    case SurrogateKind::None: return "none";
    }
    return "?";
}

const char* to_string(FallbackKind v)
{
    switch (v) {
    case FallbackKind::DE: return "DE";
    case FallbackKind::NSGA2: return "NSGA2";
    case FallbackKind::Random: return "random";
    }
    return "?";
}

const char* to_string(BatchStrategy v)
{
    return v == BatchStrategy::LocalPenalization ? "local_penalization" : "constant_liar_median";
}

AlgorithmChoice algorithm_choice_from_string(const std::string& s)
{
    for (auto v : {AlgorithmChoice::Auto, AlgorithmChoice::GP, AlgorithmChoice::PRF,
                   AlgorithmChoice::EA, AlgorithmChoice::Random})
        if (s == to_string(v)) return v;
    throw ParseError("unknown algorithm '" + s + "' (expected auto, gp, prf, ea or random)");
}

InitDesign init_design_from_string(const std::string& s)
{
    if (s == "latin_hypercube") return InitDesign::LatinHypercube;
    if (s == "random") return InitDesign::Random;
    throw ParseError("unknown init_design '" + s + "' (expected latin_hypercube or random)");
}

void TaskSpec::validate() const
{
    if (!space) throw ConfigurationError("task has no search space");
    if (space->dimension() == 0) throw ConfigurationError("search space is empty");
    if (num_objectives < 1) throw ConfigurationError("num_objectives must be at least 1");
    if (max_runs < 1) throw ConfigurationError("max_runs must be at least 1");
    if (batch_size < 1) throw ConfigurationError("batch_size must be at least 1");
    if (init_count && *init_count < 1) throw ConfigurationError("init_count must be at least 1");
    if (ref_point) {
        if (ref_point->size() != num_objectives)
            throw ConfigurationError("ref_point length differs from num_objectives");
        for (double r : *ref_point)
            if (!std::isfinite(r)) throw ConfigurationError("ref_point entries must be finite");
    }
}

std::size_t TaskSpec::resolved_init_count() const
{
    if (init_count) return *init_count;
    const std::size_t d = space ? space->dimension() : 0;
    return std::max<std::size_t>(1, std::min(std::max<std::size_t>(2 * d, 8), max_runs / 3));
}

AlgorithmPlan auto_select(const TaskSpec& task)
{
    const std::size_t m = task.num_objectives, p = task.num_constraints;
    const std::size_t d = task.space ? task.space->dimension() : 0;
    AlgorithmPlan plan;
    if (m == 1) plan.acquisition = p > 0 ? AcquisitionKind::EIC : AcquisitionKind::EI;
    else plan.acquisition = p > 0 ? AcquisitionKind::EHVI_C : AcquisitionKind::EHVI;
    plan.fallback = FallbackKind::Random;

    switch (task.algorithm) {
    case AlgorithmChoice::Auto:
        plan.surrogate = d > 10 || task.max_runs > 300 ? SurrogateKind::PRF : SurrogateKind::GP;
        break;
    case AlgorithmChoice::GP: plan.surrogate = SurrogateKind::GP; break;
    case AlgorithmChoice::PRF: plan.surrogate = SurrogateKind::PRF; break;
    case AlgorithmChoice::EA:
        plan.surrogate = SurrogateKind::None;
        plan.acquisition = AcquisitionKind::None;
        plan.fallback = m == 1 ? FallbackKind::DE : FallbackKind::NSGA2;
        break;
    case AlgorithmChoice::Random:
        plan.surrogate = SurrogateKind::None;
        plan.acquisition = AcquisitionKind::None;
        break;
    }
    plan.batch_strategy = plan.surrogate == SurrogateKind::GP && m == 1
                              ? BatchStrategy::LocalPenalization
                              : BatchStrategy::ConstantLiarMedian;
    return plan;
}

namespace {

double median(Eigen::VectorXd v)
{
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

Advisor::Advisor(TaskSpec task, AdvisorOptions options)
    : task_((task.validate(), std::move(task))),
      options_(std::move(options)),
      plan_(auto_select(task_)),
      rng_(task_.seed),
      history_(task_.task_id, task_.num_objectives, task_.num_constraints, task_.ref_point,
               task_.space)
{
    const auto& space = *task_.space;
    if (plan_.surrogate != SurrogateKind::None) {
        const std::size_t n = task_.resolved_init_count();
        init_design_ = task_.init_design == InitDesign::LatinHypercube ? latin_hypercube(space, n, rng_)
                                                                       : sample_random(space, n, rng_);
        // Discrete spaces can produce repeats; keep the first occurrence.
        std::set<Configuration> unique;
        std::vector<Configuration> kept;
        for (auto& c : init_design_)
            if (unique.insert(c).second) kept.push_back(std::move(c));
        init_design_ = std::move(kept);
    } else if (plan_.fallback != FallbackKind::Random) {
        const std::size_t n = options_.population_size;
        if (plan_.fallback == FallbackKind::DE && n < 4)
            throw PopulationSizeError("differential evolution needs at least 4 individuals");
        if (plan_.fallback == FallbackKind::NSGA2 && (n == 0 || n % 2))
            throw PopulationSizeError("NSGA-II needs an even, nonzero population");
        const auto dim = static_cast<Eigen::Index>(space.encoded_size(Encoding::Index));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::VectorXd g(dim);
            for (auto& x : g) x = unit(rng_);
            ea_genomes_.push_back(std::move(g));
        }
        ea_results_.assign(n, std::nullopt);
        ea_configs_.assign(n, std::nullopt);
    }
}

bool Advisor::seen(const Configuration& c) const
{
    return told_.count(c) || std::find(pending_.begin(), pending_.end(), c) != pending_.end();
}

void Advisor::mark_pending(const Configuration& c)
{
    pending_.push_back(c);
}

Configuration Advisor::random_unseen()
{
    const auto& space = *task_.space;
    if (space.is_discrete()) {
        std::set<Configuration> all(told_.begin(), told_.end());
        all.insert(pending_.begin(), pending_.end());
        if (all.size() >= space.cardinality())
            throw ExhaustedSpaceError("every configuration of the discrete space was suggested");
    }
    for (int tries = 0; tries < 1000; ++tries) {
        auto c = sample_random(space, 1, rng_).front();
        if (!seen(c)) return c;
    }
    if (space.is_discrete()) {
        std::vector<Configuration> unseen;
        for (auto& c : enumerate_all(space))
            if (!seen(c)) unseen.push_back(std::move(c));
        if (!unseen.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, unseen.size() - 1);
            return unseen[pick(rng_)];
        }
    }
    throw ExhaustedSpaceError("no unseen configuration could be sampled");
}

Configuration Advisor::next_initial()
{
    while (next_init_ < init_design_.size()) {
        const auto& c = init_design_[next_init_++];
        if (!seen(c)) return c;
    }
    return random_unseen();
}

Encoding Advisor::model_encoding() const
{
    return plan_.surrogate == SurrogateKind::GP ? Encoding::OneHot : Encoding::Index;
}

void Advisor::refit()
{
    objective_models_.clear();
    constraint_models_.clear();
    last_acq_.reset();
    lipschitz_ = 0.0;
    const auto data = history_.training_targets(*task_.space, model_encoding());
    const std::size_t m = task_.num_objectives, p = task_.num_constraints;
    gp_hyper_.resize(m + p);

    auto fit_one = [&](std::size_t k, const Eigen::VectorXd& y) -> std::shared_ptr<const SurrogateModel> {
        if (plan_.surrogate == SurrogateKind::PRF)
            return std::make_shared<RandomForest>(fit_prf(data.X, y, rng_, options_.prf));
        GPFitOptions opt;
        opt.max_iterations = options_.gp_max_iterations;
        opt.restarts = gp_hyper_[k] ? options_.gp_refit_restarts : options_.gp_restarts;
        opt.warm_start = gp_hyper_[k];
        auto gp = fit_gp(data.X, y, rng_, opt);
        gp_hyper_[k] = gp.hyperparameters();
        return std::make_shared<GaussianProcess>(std::move(gp));
    };
    std::vector<std::shared_ptr<const SurrogateModel>> obj, con;
    for (std::size_t k = 0; k < m; ++k) obj.push_back(fit_one(k, data.objectives[k]));
    for (std::size_t k = 0; k < p; ++k) con.push_back(fit_one(m + k, data.constraints[k]));
    objective_models_ = std::move(obj);
    constraint_models_ = std::move(con);
}

std::pair<Advisor::ModelList, Advisor::ModelList> Advisor::fit_with_lies()
{
    const auto& space = *task_.space;
    const auto enc = model_encoding();
    const auto data = history_.training_targets(space, enc);
    const auto n = data.X.rows();
    const auto extra = static_cast<Eigen::Index>(pending_.size());
    Eigen::MatrixXd X(n + extra, data.X.cols());
    X.topRows(n) = data.X;
    for (Eigen::Index i = 0; i < extra; ++i)
        X.row(n + i) = to_unit_vector(space, pending_[static_cast<std::size_t>(i)], enc).transpose();

    auto with_lie = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd out(n + extra);
        out.head(n) = y;
        out.tail(extra).setConstant(median(y));
        return out;
    };
    auto fit_one = [&](std::size_t k, const Eigen::VectorXd& y) -> std::shared_ptr<const SurrogateModel> {
        if (plan_.surrogate == SurrogateKind::PRF)
            return std::make_shared<RandomForest>(fit_prf(X, with_lie(y), rng_, options_.prf));
        return std::make_shared<GaussianProcess>(
            GaussianProcess::condition(X, with_lie(y), *gp_hyper_[k]));
    };
    const std::size_t m = task_.num_objectives, p = task_.num_constraints;
    std::vector<std::shared_ptr<const SurrogateModel>> obj, con;
    for (std::size_t k = 0; k < m; ++k) obj.push_back(fit_one(k, data.objectives[k]));
    for (std::size_t k = 0; k < p; ++k) con.push_back(fit_one(m + k, data.constraints[k]));
    return {std::move(obj), std::move(con)};
}

std::optional<std::vector<double>> Advisor::effective_ref_point() const
{
    if (task_.ref_point) return task_.ref_point;
    return history_.effective_ref_point();
}

AcquisitionContext Advisor::make_context(ModelList obj, ModelList con) const
{
    AcquisitionContext ctx;
    ctx.space = task_.space;
    ctx.objective_models = std::move(obj);
    ctx.constraint_models = std::move(con);
    ctx.pending = pending_;
    if (task_.num_objectives == 1) {
        if (auto inc = history_.incumbent()) ctx.eta = inc->objectives.front();
    } else {
        ctx.ref_point = effective_ref_point();
        if (ctx.ref_point) {
            for (const auto& o : history_.pareto_front()) {
                bool inside = true, strict = false;
                for (std::size_t k = 0; k < o.objectives.size(); ++k) {
                    inside &= o.objectives[k] <= (*ctx.ref_point)[k];
                    strict |= o.objectives[k] < (*ctx.ref_point)[k];
                }
                if (inside && strict) ctx.front.push_back(o.objectives);
            }
        }
    }
    return ctx;
}

double Advisor::penalty_best() const
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : history_.observations())
        if (o.is_success() && o.is_feasible()) best = std::min(best, o.objectives.front());
    if (std::isfinite(best)) return best;
    for (const auto& o : history_.observations())
        if (o.is_success()) best = std::min(best, o.objectives.front());
    return std::isfinite(best) ? best : 0.0;
}

Configuration Advisor::ask_model(bool batch_follower)
{
    if (stale_) {
        stale_ = false;
        fit_failed_ = false;
        try {
            refit();
        } catch (const InsufficientDataError&) {
            fit_failed_ = true;
        } catch (const NumericError&) {
            fit_failed_ = true;
        }
    }
    if (fit_failed_) return random_unseen();

    auto ctx = batch_follower && plan_.batch_strategy == BatchStrategy::ConstantLiarMedian &&
                       !pending_.empty()
                   ? std::apply([this](auto&&... a) { return make_context(std::move(a)...); },
                                fit_with_lies())
                   : make_context(objective_models_, constraint_models_);
    if (task_.num_objectives > 1 && !ctx.ref_point) return random_unseen();
    auto acq = std::make_shared<const AcquisitionFunction>(plan_.acquisition, std::move(ctx),
                                                           options_.ehvi_samples, rng_);
    last_acq_ = acq;
    BatchScoreFn score = [acq](const std::vector<Configuration>& configs) { return (*acq)(configs); };

    if (batch_follower && plan_.batch_strategy == BatchStrategy::LocalPenalization &&
        !pending_.empty()) {
        const auto& model = *objective_models_.front();
        if (lipschitz_ <= 0.0) lipschitz_ = estimate_lipschitz(model, rng_);
        std::vector<PenaltyCenter> centers;
        for (const auto& c : pending_) {
            auto x = to_unit_vector(*task_.space, c, model.encoding());
            auto p = model.predict(x);
            centers.push_back({std::move(x), p.mean, p.variance});
        }
        score = [acq, centers, space = task_.space, enc = model.encoding(), L = lipschitz_,
                 best = penalty_best()](const std::vector<Configuration>& configs) {
            auto raw = (*acq)(configs);
            for (std::size_t i = 0; i < configs.size(); ++i) {
                const auto x = to_unit_vector(*space, configs[i], enc);
                for (const auto& c : centers) raw[i] *= penalizer_factor(x, c, L, best);
            }
            return raw;
        };
    }

    std::vector<Configuration> told;
    told.reserve(history_.size());
    for (const auto& o : history_.observations()) told.push_back(o.config);
    auto ranked = maximize_acquisition(score, *task_.space, rng_, options_.maximizer, told, pending_);
    return ranked.front().config;
}

Configuration Advisor::ask_evolution()
{
    if (ea_next_ >= ea_genomes_.size()) return random_unseen();
    const auto& space = *task_.space;
    const std::size_t slot = ea_next_++;
    auto config = from_unit_vector(space, ea_genomes_[slot], Encoding::Index);
    if (seen(config)) config = random_unseen();
    ea_genomes_[slot] = to_unit_vector(space, config, Encoding::Index);
    ea_configs_[slot] = config;
    return config;
}

void Advisor::ea_tell(const Observation& obs)
{
    for (std::size_t i = 0; i < ea_configs_.size(); ++i) {
        if (ea_results_[i] || !ea_configs_[i] || !(*ea_configs_[i] == obs.config)) continue;
        Individual ind;
        ind.genome = ea_genomes_[i];
        if (obs.is_success()) {
            ind.objectives = obs.objectives;
            ind.constraint_violation = constraint_violation(obs.constraints);
        } else {
            ind.objectives.assign(task_.num_objectives, std::numeric_limits<double>::infinity());
            ind.constraint_violation = std::numeric_limits<double>::infinity();
        }
        ea_results_[i] = std::move(ind);
        break;
    }
    if (std::all_of(ea_results_.begin(), ea_results_.end(), [](const auto& r) { return r.has_value(); }))
        ea_advance();
}

void Advisor::ea_advance()
{
    std::vector<Individual> trials;
    for (auto& r : ea_results_) trials.push_back(std::move(*r));
    const bool de = plan_.fallback == FallbackKind::DE;
    if (ea_pop_.individuals.empty()) {
        ea_pop_.individuals = std::move(trials);
    } else if (de) {
        ea_pop_ = de_select(ea_pop_, std::move(trials));
    } else {
        std::vector<Individual> pool = ea_pop_.individuals;
        pool.insert(pool.end(), trials.begin(), trials.end());
        ea_pop_.individuals = nsga2_survival(pool, ea_pop_.size());
        ++ea_pop_.generation;
    }
    ea_genomes_ = de ? de_propose(ea_pop_, options_.de, rng_) : nsga2_offspring(ea_pop_, options_.nsga2, rng_);
    ea_results_.assign(ea_genomes_.size(), std::nullopt);
    ea_configs_.assign(ea_genomes_.size(), std::nullopt);
    ea_next_ = 0;
}

Configuration Advisor::ask()
{
    return ask_batch(1).front();
}

std::vector<Configuration> Advisor::ask_batch(std::size_t q)
{
    if (q < 1) throw ConfigurationError("batch size must be at least 1");
    std::vector<Configuration> out;
    for (std::size_t i = 0; i < q; ++i) {
        Configuration c;
        if (plan_.surrogate == SurrogateKind::None) {
            c = plan_.fallback == FallbackKind::Random ? random_unseen() : ask_evolution();
        } else if (next_init_ < init_design_.size() && history_.size() < init_design_.size()) {
            c = next_initial();
        } else {
            c = ask_model(!out.empty());
        }
        mark_pending(c);
        out.push_back(std::move(c));
    }
    return out;
}

TellStatus Advisor::tell(const Observation& obs, bool external)
{
    history_.record(obs);
    const auto& recorded = history_.observations().back();
    auto it = std::find(pending_.begin(), pending_.end(), recorded.config);
    TellStatus status = TellStatus::Accepted;
    if (it != pending_.end()) pending_.erase(it);
    else if (!external) status = TellStatus::UnknownConfiguration;
    told_.insert(recorded.config);
    stale_ = true;
    if (plan_.surrogate == SurrogateKind::None && plan_.fallback != FallbackKind::Random)
        ea_tell(recorded);
    return status;
}

} // namespace bbo
