#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bbo/optimizer.hpp"

namespace bbo {

using ProblemFn = std::function<std::pair<std::vector<double>, std::vector<double>>(const Configuration&)>;

struct BenchmarkProblem {
    std::string name;
    std::shared_ptr<const SearchSpace> space;
    std::size_t num_objectives = 1;
    std::size_t num_constraints = 0;
    ProblemFn evaluate;
    /// Global minimum for single-objective problems.
    std::optional<double> known_optimum;
    /// Multi-objective problems: reference point and the best attainable hypervolume.
    std::optional<std::vector<double>> ref_point;
    std::optional<double> optimal_hv;
};

/// CONSTR: minimize (x1, (1 + x2) / x1) subject to 6 - (x2 + 9 x1) <= 0 and
/// 1 - (9 x1 - x2) <= 0, with x1 in [0.1, 1] and x2 in [0, 5].
std::pair<std::vector<double>, std::vector<double>> constr_evaluate(double x1, double x2);
double branin(double x1, double x2);
/// Standard Ackley function; minimum 0 at the origin.
double ackley(const std::vector<double>& x);

struct ConstrReference {
    std::vector<double> ref_point;
    double optimal_hv = 0.0;
    /// Non-dominated feasible objective vectors found on the grid, sorted by f1.
    std::vector<std::vector<double>> front;
};

/// Front of the feasible points of a grid x grid lattice over the input box,
/// with ref point (10, 10). Results are cached per grid size.
const ConstrReference& compute_constr_reference(std::size_t grid = 2000);

BenchmarkProblem constr_problem();
BenchmarkProblem branin_problem();
BenchmarkProblem ackley_problem(std::size_t dimension = 2);

std::vector<std::string> problem_names();
std::vector<std::string> strategy_names();
/// Throws ConfigurationError listing the valid names.
BenchmarkProblem problem_by_name(const std::string& name);
AlgorithmChoice strategy_by_name(const std::string& name);

/// Objective adapter and task for one benchmark run.
Objective problem_objective(const BenchmarkProblem& problem);
TaskSpec problem_task(const BenchmarkProblem& problem, AlgorithmChoice algorithm, std::uint64_t seed,
                      std::size_t budget);

/// Final incumbent value (m = 1, +inf without one) or hypervolume difference (m > 1).
double benchmark_score(const BenchmarkProblem& problem, const History& history);

struct BenchCell {
    std::string problem;
    std::uint64_t seed = 0;
    std::string strategy;
    double score = 0.0;
    double rank = 0.0;
};

struct BenchTable {
    std::vector<std::string> problems;
    std::vector<std::string> strategies;
    std::size_t n_seeds = 0;
    std::size_t budget = 0;
    /// Ordered by problem, then seed, then strategy.
    std::vector<BenchCell> cells;
    std::map<std::string, double> median_rank;
    /// problem -> strategy -> number of seeds on which the strategy held the best rank (ties count for all).
    std::map<std::string, std::map<std::string, std::size_t>> wins;
};

/// 1-based ranks, lower score first; tied scores share the average of their positions.
std::vector<double> average_ranks(const std::vector<double>& scores);

/// Fills in ranks, median ranks and win counts for cells whose scores are set.
void rank_cells(BenchTable& table);

struct BenchOptions {
    AdvisorOptions advisor;
    /// Called after every finished run.
    std::function<void(const BenchCell&)> on_cell;
};

/// Runs every strategy on every (problem, seed) with task seed = seed index.
/// Throws ConfigurationError for fewer than two strategies or unknown names.
BenchTable run_benchmark(const std::vector<std::string>& problems, const std::vector<std::string>& strategies,
                         std::size_t n_seeds, std::size_t budget, const BenchOptions& options = {});

/// problem,seed,strategy,score,rank
std::string bench_csv(const BenchTable& table);
std::string bench_summary_json(const BenchTable& table);

} // namespace bbo
