#include "bbo/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include <fmt/format.h>

#include "bbo/errors.hpp"
#include "bbo/moo.hpp"

namespace bbo {

std::pair<std::vector<double>, std::vector<double>> constr_evaluate(double x1, double x2)
{
    return {{x1, (1.0 + x2) / x1}, {6.0 - (x2 + 9.0 * x1), 1.0 - (9.0 * x1 - x2)}};
}

double branin(double x1, double x2)
{
    constexpr double pi = std::numbers::pi;
    const double b = 5.1 / (4 * pi * pi), c = 5 / pi, t = 1 / (8 * pi);
    const double u = x2 - b * x1 * x1 + c * x1 - 6;
    return u * u + 10 * (1 - t) * std::cos(x1) + 10;
}

double ackley(const std::vector<double>& x)
{
    constexpr double a = 20, b = 0.2, c = 2 * std::numbers::pi;
    const double n = static_cast<double>(x.size());
    double sq = 0, cs = 0;
    for (double v : x) {
        sq += v * v;
        cs += std::cos(c * v);
    }
    return -a * std::exp(-b * std::sqrt(sq / n)) - std::exp(cs / n) + a + std::numbers::e;
}

namespace {

ConstrReference build_constr_reference(std::size_t grid)
{
    std::vector<std::pair<double, double>> feasible;
    feasible.reserve(grid * grid / 2);
    const double step1 = 0.9 / static_cast<double>(grid - 1), step2 = 5.0 / static_cast<double>(grid - 1);
    for (std::size_t i = 0; i < grid; ++i) {
        const double x1 = 0.1 + step1 * static_cast<double>(i);
        for (std::size_t j = 0; j < grid; ++j) {
            const double x2 = step2 * static_cast<double>(j);
            auto [f, c] = constr_evaluate(x1, x2);
            if (c[0] <= 0 && c[1] <= 0) feasible.emplace_back(f[0], f[1]);
        }
    }
    std::sort(feasible.begin(), feasible.end());
    ConstrReference ref;
    ref.ref_point = {10.0, 10.0};
    // Sorted by (f1, f2): a point is non-dominated iff its f2 beats every earlier one.
    double best_f2 = std::numeric_limits<double>::infinity();
    for (const auto& [f1, f2] : feasible) {
        if (f2 < best_f2) {
            best_f2 = f2;
            ref.front.push_back({f1, f2});
        }
    }
    ref.optimal_hv = moo::hypervolume(ref.front, ref.ref_point);
    return ref;
}

std::shared_ptr<const SearchSpace> box(const std::vector<std::pair<double, double>>& bounds)
{
    std::vector<ParameterSpec> ps;
    for (std::size_t j = 0; j < bounds.size(); ++j)
        ps.push_back(ParameterSpec::real("x" + std::to_string(j + 1), bounds[j].first, bounds[j].second));
    return std::make_shared<const SearchSpace>(std::move(ps));
}

} // namespace

const ConstrReference& compute_constr_reference(std::size_t grid)
{
    if (grid < 2) throw ConfigurationError("CONSTR reference grid needs at least 2 points per axis");
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<ConstrReference>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[grid];
    if (!slot) slot = std::make_unique<ConstrReference>(build_constr_reference(grid));
    return *slot;
}

BenchmarkProblem constr_problem()
{
    BenchmarkProblem p;
    p.name = "constr";
    p.space = box({{0.1, 1.0}, {0.0, 5.0}});
    p.num_objectives = 2;
    p.num_constraints = 2;
    p.evaluate = [](const Configuration& c) { return constr_evaluate(c.number("x1"), c.number("x2")); };
    const auto& ref = compute_constr_reference();
    p.ref_point = ref.ref_point;
    p.optimal_hv = ref.optimal_hv;
    return p;
}

BenchmarkProblem branin_problem()
{
    BenchmarkProblem p;
    p.name = "branin";
    p.space = box({{-5.0, 10.0}, {0.0, 15.0}});
    p.evaluate = [](const Configuration& c) {
        return std::pair{std::vector<double>{branin(c.number("x1"), c.number("x2"))}, std::vector<double>{}};
    };
    p.known_optimum = 0.397887357729738;
    return p;
}

BenchmarkProblem ackley_problem(std::size_t dimension)
{
    if (dimension < 1) throw ConfigurationError("Ackley needs at least one dimension");
    BenchmarkProblem p;
    p.name = "ackley";
    p.space = box(std::vector<std::pair<double, double>>(dimension, {-32.768, 32.768}));
    p.evaluate = [dimension](const Configuration& c) {
        std::vector<double> x(dimension);
        for (std::size_t j = 0; j < dimension; ++j) x[j] = std::get<double>(c.values()[j].second);
        return std::pair{std::vector<double>{ackley(x)}, std::vector<double>{}};
    };
    p.known_optimum = 0.0;
    return p;
}

std::vector<std::string> problem_names()
{
    return {"constr", "branin", "ackley"};
}

std::vector<std::string> strategy_names()
{
    return {"auto", "gp", "prf", "ea", "random"};
}

namespace {

std::string joined(const std::vector<std::string>& names)
{
    std::string s;
    for (const auto& n : names) s += (s.empty() ? "" : ", ") + n;
    return s;
}

} // namespace

BenchmarkProblem problem_by_name(const std::string& name)
{
    if (name == "constr") return constr_problem();
    if (name == "branin") return branin_problem();
    if (name == "ackley") return ackley_problem();
    throw ConfigurationError(fmt::format("unknown problem '{}' (valid: {})", name, joined(problem_names())));
}

AlgorithmChoice strategy_by_name(const std::string& name)
{
    try {
        return algorithm_choice_from_string(name);
    } catch (const ParseError&) {
        throw ConfigurationError(fmt::format("unknown strategy '{}' (valid: {})", name, joined(strategy_names())));
    }
}

Objective problem_objective(const BenchmarkProblem& problem)
{
    return make_objective(problem.evaluate);
}

TaskSpec problem_task(const BenchmarkProblem& problem, AlgorithmChoice algorithm, std::uint64_t seed,
                      std::size_t budget)
{
    TaskSpec t;
    t.space = problem.space;
    t.task_id = problem.name;
    t.num_objectives = problem.num_objectives;
    t.num_constraints = problem.num_constraints;
    t.max_runs = budget;
    t.algorithm = algorithm;
    t.ref_point = problem.ref_point;
    t.seed = seed;
    return t;
}

double benchmark_score(const BenchmarkProblem& problem, const History& history)
{
    if (problem.num_objectives == 1) {
        auto inc = history.incumbent();
        return inc ? inc->objectives.front() : std::numeric_limits<double>::infinity();
    }
    std::vector<moo::Point> pts;
    for (const auto& o : history.pareto_front()) pts.push_back(o.objectives);
    return moo::hypervolume_difference(pts, *problem.ref_point, *problem.optimal_hv).value;
}

std::vector<double> average_ranks(const std::vector<double>& scores)
{
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> ranks(scores.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

namespace {

double median(std::vector<double> v)
{
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

} // namespace

void rank_cells(BenchTable& table)
{
    table.median_rank.clear();
    table.wins.clear();
    for (const auto& p : table.problems)
        for (const auto& s : table.strategies) table.wins[p][s] = 0;

    // Cells of one (problem, seed) are contiguous.
    for (std::size_t i = 0; i < table.cells.size();) {
        std::size_t j = i;
        while (j < table.cells.size() && table.cells[j].problem == table.cells[i].problem &&
               table.cells[j].seed == table.cells[i].seed)
            ++j;
        std::vector<double> scores;
        for (std::size_t k = i; k < j; ++k) scores.push_back(table.cells[k].score);
        const auto ranks = average_ranks(scores);
        const double best = *std::min_element(ranks.begin(), ranks.end());
        for (std::size_t k = i; k < j; ++k) {
            table.cells[k].rank = ranks[k - i];
            if (ranks[k - i] == best) ++table.wins[table.cells[k].problem][table.cells[k].strategy];
        }
        i = j;
    }
    for (const auto& s : table.strategies) {
        std::vector<double> r;
        for (const auto& c : table.cells)
            if (c.strategy == s) r.push_back(c.rank);
        table.median_rank[s] = median(r);
    }
}

BenchTable run_benchmark(const std::vector<std::string>& problems, const std::vector<std::string>& strategies,
                         std::size_t n_seeds, std::size_t budget, const BenchOptions& options)
{
    if (strategies.size() < 2) throw ConfigurationError("a benchmark needs at least two strategies");
    if (problems.empty()) throw ConfigurationError("a benchmark needs at least one problem");
    std::vector<AlgorithmChoice> algos;
    for (const auto& s : strategies) algos.push_back(strategy_by_name(s));
    std::vector<BenchmarkProblem> probs;
    for (const auto& p : problems) probs.push_back(problem_by_name(p));

    BenchTable table{problems, strategies, n_seeds, budget, {}, {}, {}};
    RunOptions run_opts;
    run_opts.advisor = options.advisor;
    run_opts.record_elapsed = false;
    for (const auto& prob : probs) {
        const auto objective = problem_objective(prob);
        for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
            for (std::size_t s = 0; s < strategies.size(); ++s) {
                auto result = run(problem_task(prob, algos[s], seed, budget), objective, run_opts);
                BenchCell cell{prob.name, seed, strategies[s], benchmark_score(prob, result.history), 0.0};
                if (options.on_cell) options.on_cell(cell);
                table.cells.push_back(std::move(cell));
            }
        }
    }
    rank_cells(table);
    return table;
}

std::string bench_csv(const BenchTable& table)
{
    std::string s = "problem,seed,strategy,score,rank\n";
    for (const auto& c : table.cells)
        s += fmt::format("{},{},{},{:.17g},{:g}\n", c.problem, c.seed, c.strategy, c.score, c.rank);
    return s;
}

std::string bench_summary_json(const BenchTable& table)
{
    Json j;
    j["problems"] = table.problems;
    j["strategies"] = table.strategies;
    j["n_seeds"] = table.n_seeds;
    j["budget"] = table.budget;
    Json med = Json::object();
    for (const auto& s : table.strategies) med[s] = table.median_rank.at(s);
    j["median_rank"] = std::move(med);
    Json wins = Json::object();
    for (const auto& p : table.problems) {
        Json w = Json::object();
        for (const auto& s : table.strategies) w[s] = table.wins.at(p).at(s);
        wins[p] = std::move(w);
    }
    j["wins"] = std::move(wins);
    Json med_score = Json::object();
    for (const auto& p : table.problems) {
        Json w = Json::object();
        for (const auto& s : table.strategies) {
            std::vector<double> v;
            for (const auto& c : table.cells)
                if (c.problem == p && c.strategy == s) v.push_back(c.score);
            const double m = median(v);
            w[s] = std::isfinite(m) ? Json(m) : Json(nullptr);
        }
        med_score[p] = std::move(w);
    }
    j["median_score"] = std::move(med_score);
    return j.dump(2) + "\n";
}

} // namespace bbo
