#include "bbo/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bbo/errors.hpp"
#include "bbo/moo.hpp"

namespace bbo {

double constraint_violation(const std::vector<double>& constraints)
{
    double v = 0.0;
    for (double c : constraints) v += std::max(c, 0.0);
    return v;
}

Individual evaluate_individual(Eigen::VectorXd genome, const GenomeObjective& objective)
{
    Individual ind;
    auto eval = objective(genome);
    ind.genome = std::move(genome);
    ind.objectives = std::move(eval.objectives);
    ind.constraint_violation = constraint_violation(eval.constraints);
    return ind;
}

Population random_population(std::size_t n, std::size_t dim, const GenomeObjective& objective,
                             Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Population pop;
    pop.individuals.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd g(static_cast<Eigen::Index>(dim));
        for (auto& x : g) x = unit(rng);
        pop.individuals.push_back(evaluate_individual(std::move(g), objective));
    }
    return pop;
}

bool better_single(const Individual& a, const Individual& b)
{
    if (a.feasible() != b.feasible()) return a.feasible();
    if (!a.feasible()) return a.constraint_violation < b.constraint_violation;
    return a.objectives.front() < b.objectives.front();
}

bool constrained_dominates(const Individual& a, const Individual& b)
{
    if (a.feasible() != b.feasible()) return a.feasible();
    if (!a.feasible()) return a.constraint_violation < b.constraint_violation;
    return moo::dominates(a.objectives, b.objectives);
}

// ---------------------------------------------------------------------------
// Differential evolution

std::vector<Eigen::VectorXd> de_propose(const Population& pop, const DEOptions& options, Rng& rng)
{
    const std::size_t n = pop.size();
    if (n < 4) throw PopulationSizeError("differential evolution needs at least 4 individuals");
    const auto d = pop.individuals.front().genome.size();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<Eigen::Index> gene(0, d - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Eigen::VectorXd> trials;
    trials.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r[3];
        for (int k = 0; k < 3; ++k) {
            do r[k] = pick(rng);
            while (r[k] == i || (k > 0 && r[k] == r[0]) || (k > 1 && r[k] == r[1]));
        }
        const auto& x = pop.individuals;
        Eigen::VectorXd mutant =
            (x[r[0]].genome + options.F * (x[r[1]].genome - x[r[2]].genome)).cwiseMax(0.0).cwiseMin(1.0);
        Eigen::VectorXd trial = x[i].genome;
        const Eigen::Index j_rand = gene(rng);
        for (Eigen::Index j = 0; j < d; ++j)
            if (j == j_rand || unit(rng) < options.CR) trial[j] = mutant[j];
        trials.push_back(std::move(trial));
    }
    return trials;
}

Population de_select(const Population& pop, std::vector<Individual> trials)
{
    if (trials.size() != pop.size())
        throw PopulationSizeError("one trial per individual is required");
    Population next;
    next.generation = pop.generation + 1;
    next.individuals.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (better_single(pop.individuals[i], trials[i])) next.individuals.push_back(pop.individuals[i]);
        else next.individuals.push_back(std::move(trials[i]));
    }
    return next;
}

Population de_step(const Population& pop, const DEOptions& options,
                   const GenomeObjective& objective, Rng& rng)
{
    auto genomes = de_propose(pop, options, rng);
    std::vector<Individual> trials;
    trials.reserve(genomes.size());
    for (auto& g : genomes) trials.push_back(evaluate_individual(std::move(g), objective));
    return de_select(pop, std::move(trials));
}

// ---------------------------------------------------------------------------
// NSGA-II

std::pair<Eigen::VectorXd, Eigen::VectorXd> sbx_crossover(const Eigen::VectorXd& a,
                                                          const Eigen::VectorXd& b, double eta_c,
                                                          Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd c1 = a, c2 = b;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        if (unit(rng) > 0.5) continue;
        const double u = unit(rng);
        const double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta_c + 1.0))
                                     : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta_c + 1.0));
        c1[j] = std::clamp(0.5 * ((1 + beta) * a[j] + (1 - beta) * b[j]), 0.0, 1.0);
        c2[j] = std::clamp(0.5 * ((1 - beta) * a[j] + (1 + beta) * b[j]), 0.0, 1.0);
    }
    return {std::move(c1), std::move(c2)};
}

Eigen::VectorXd polynomial_mutation(Eigen::VectorXd x, double eta_m, double rate, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& g : x) {
        if (unit(rng) >= rate) continue;
        const double u = unit(rng);
        const double delta = u < 0.5 ? std::pow(2.0 * u, 1.0 / (eta_m + 1.0)) - 1.0
                                     : 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (eta_m + 1.0));
        g = std::clamp(g + delta, 0.0, 1.0);
    }
    return x;
}

std::vector<std::vector<std::size_t>> constrained_fronts(const std::vector<Individual>& pool)
{
    std::vector<std::size_t> feasible, infeasible;
    for (std::size_t i = 0; i < pool.size(); ++i) (pool[i].feasible() ? feasible : infeasible).push_back(i);

    std::vector<std::vector<std::size_t>> fronts;
    std::vector<moo::Point> pts;
    pts.reserve(feasible.size());
    for (auto i : feasible) pts.push_back(pool[i].objectives);
    for (auto& front : moo::non_dominated_sort(pts)) {
        for (auto& k : front) k = feasible[k];
        fronts.push_back(std::move(front));
    }

    std::stable_sort(infeasible.begin(), infeasible.end(), [&](std::size_t a, std::size_t b) {
        return pool[a].constraint_violation < pool[b].constraint_violation;
    });
    for (std::size_t k = 0; k < infeasible.size();) {
        std::vector<std::size_t> group{infeasible[k]};
        const double v = pool[infeasible[k]].constraint_violation;
        while (++k < infeasible.size() && pool[infeasible[k]].constraint_violation == v)
            group.push_back(infeasible[k]);
        std::sort(group.begin(), group.end());
        fronts.push_back(std::move(group));
    }
    return fronts;
}

namespace {

// Crowding distance of every individual within its own front.
std::vector<double> crowding_by_front(const std::vector<Individual>& pool,
                                      const std::vector<std::vector<std::size_t>>& fronts)
{
    std::vector<double> crowd(pool.size(), 0.0);
    for (const auto& front : fronts) {
        if (!pool[front.front()].feasible()) continue;
        std::vector<moo::Point> pts;
        for (auto i : front) pts.push_back(pool[i].objectives);
        auto d = moo::crowding_distance(pts);
        for (std::size_t k = 0; k < front.size(); ++k) crowd[front[k]] = d[k];
    }
    return crowd;
}

} // namespace

std::vector<Eigen::VectorXd> nsga2_offspring(const Population& pop, const NSGA2Options& options,
                                             Rng& rng)
{
    const std::size_t n = pop.size();
    if (n == 0 || n % 2 != 0) throw PopulationSizeError("NSGA-II needs an even, nonzero population");
    const auto& ind = pop.individuals;
    const auto crowd = crowding_by_front(ind, constrained_fronts(ind));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto tournament = [&]() -> const Eigen::VectorXd& {
        const std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        if (n > 1)
            while (b == a) b = pick(rng);
        if (constrained_dominates(ind[a], ind[b])) return ind[a].genome;
        if (constrained_dominates(ind[b], ind[a])) return ind[b].genome;
        return crowd[b] > crowd[a] ? ind[b].genome : ind[a].genome;
    };

    const double rate = 1.0 / static_cast<double>(ind.front().genome.size());
    std::vector<Eigen::VectorXd> children;
    children.reserve(n);
    while (children.size() < n) {
        const Eigen::VectorXd& p1 = tournament();
        const Eigen::VectorXd& p2 = tournament();
        Eigen::VectorXd c1 = p1, c2 = p2;
        if (unit(rng) < options.crossover_probability)
            std::tie(c1, c2) = sbx_crossover(p1, p2, options.eta_c, rng);
        children.push_back(polynomial_mutation(std::move(c1), options.eta_m, rate, rng));
        children.push_back(polynomial_mutation(std::move(c2), options.eta_m, rate, rng));
    }
    return children;
}

std::vector<Individual> nsga2_survival(const std::vector<Individual>& pool, std::size_t n)
{
    if (pool.size() <= n) return pool;
    const auto fronts = constrained_fronts(pool);
    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    for (const auto& front : fronts) {
        if (chosen.size() + front.size() <= n) {
            chosen.insert(chosen.end(), front.begin(), front.end());
            if (chosen.size() == n) break;
            continue;
        }
        std::vector<std::size_t> order = front;
        if (pool[front.front()].feasible()) {
            std::vector<moo::Point> pts;
            for (auto i : front) pts.push_back(pool[i].objectives);
            const auto d = moo::crowding_distance(pts);
            std::vector<std::size_t> idx(front.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(),
                             [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
            for (std::size_t k = 0; k < idx.size(); ++k) order[k] = front[idx[k]];
        }
        chosen.insert(chosen.end(), order.begin(),
                      order.begin() + static_cast<std::ptrdiff_t>(n - chosen.size()));
        break;
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<Individual> out;
    out.reserve(n);
    for (auto i : chosen) out.push_back(pool[i]);
    return out;
}

Population nsga2_step(const Population& pop, const NSGA2Options& options,
                      const GenomeObjective& objective, Rng& rng)
{
    auto children = nsga2_offspring(pop, options, rng);
    std::vector<Individual> pool = pop.individuals;
    for (auto& g : children) pool.push_back(evaluate_individual(std::move(g), objective));
    Population next;
    next.generation = pop.generation + 1;
    next.individuals = nsga2_survival(pool, pop.size());
    return next;
}

} // namespace bbo
