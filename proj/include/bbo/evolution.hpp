#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bbo/space.hpp"

namespace bbo {

/// Sum of positive constraint values.
double constraint_violation(const std::vector<double>& constraints);

struct Individual {
    /// Index-encoded point of the unit cube.
    Eigen::VectorXd genome;
    /// Empty until evaluated.
    std::vector<double> objectives;
    double constraint_violation = 0.0;

    bool evaluated() const { return !objectives.empty(); }
    bool feasible() const { return constraint_violation <= 0.0; }
};

struct Population {
    std::vector<Individual> individuals;
    std::size_t generation = 0;

    std::size_t size() const { return individuals.size(); }
};

struct Evaluation {
    std::vector<double> objectives;
    std::vector<double> constraints;
};

using GenomeObjective = std::function<Evaluation(const Eigen::VectorXd&)>;

/// Evaluates `genome` and fills objectives and violation.
Individual evaluate_individual(Eigen::VectorXd genome, const GenomeObjective& objective);

/// N uniform genomes, evaluated.
Population random_population(std::size_t n, std::size_t dim, const GenomeObjective& objective,
                             Rng& rng);

/// Feasibility rules on the first objective: feasible beats infeasible, lower
/// violation among infeasible, lower objective among feasible. Ties are not better.
bool better_single(const Individual& a, const Individual& b);

/// Constrained dominance for multi-objective selection.
bool constrained_dominates(const Individual& a, const Individual& b);

struct DEOptions {
    double F = 0.5;
    double CR = 0.9;
};

/// DE/rand/1/bin trial vectors, one per individual, clamped to [0,1].
/// Throws PopulationSizeError when N < 4.
std::vector<Eigen::VectorXd> de_propose(const Population& pop, const DEOptions& options, Rng& rng);

/// Greedy one-to-one replacement; a trial wins unless its parent is strictly better.
Population de_select(const Population& pop, std::vector<Individual> trials);

Population de_step(const Population& pop, const DEOptions& options,
                   const GenomeObjective& objective, Rng& rng);

struct NSGA2Options {
    double crossover_probability = 0.9;
    double eta_c = 15.0;
    double eta_m = 20.0;
};

/// Simulated binary crossover of two parents (genes in [0,1]).
std::pair<Eigen::VectorXd, Eigen::VectorXd> sbx_crossover(const Eigen::VectorXd& a,
                                                          const Eigen::VectorXd& b, double eta_c,
                                                          Rng& rng);

/// Polynomial mutation with per-gene probability `rate` (genes in [0,1]).
Eigen::VectorXd polynomial_mutation(Eigen::VectorXd x, double eta_m, double rate, Rng& rng);

/// Constrained non-dominated fronts: feasible individuals by Pareto rank, then
/// infeasible ones grouped by equal violation in increasing order.
std::vector<std::vector<std::size_t>> constrained_fronts(const std::vector<Individual>& pool);

/// Tournament selection, SBX and polynomial mutation: N offspring genomes.
/// Throws PopulationSizeError when N is odd or zero.
std::vector<Eigen::VectorXd> nsga2_offspring(const Population& pop, const NSGA2Options& options,
                                             Rng& rng);

/// Environmental selection: fill by front, truncate the last one by crowding distance.
std::vector<Individual> nsga2_survival(const std::vector<Individual>& pool, std::size_t n);

Population nsga2_step(const Population& pop, const NSGA2Options& options,
                      const GenomeObjective& objective, Rng& rng);

} // namespace bbo
