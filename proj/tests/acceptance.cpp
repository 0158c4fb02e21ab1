// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "bbo/acquisition.hpp"
#include "bbo/advisor.hpp"
#include "bbo/bench.hpp"
#include "bbo/cli.hpp"
#include "bbo/gp.hpp"
#include "bbo/moo.hpp"
#include "bbo/optimizer.hpp"
#include "bbo/report.hpp"
#include "bbo/subprocess.hpp"
#include "html_check.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace bbo;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// 1 -----------------------------------------------------------------------

Outcome auto_selection()
{
    const auto start = Clock::now();
    auto task_with = [](std::size_t d, std::size_t max_runs) {
        std::vector<ParameterSpec> ps;
        for (std::size_t j = 0; j < d; ++j) ps.push_back(ParameterSpec::real("x" + std::to_string(j), 0, 1));
        TaskSpec t;
        t.space = std::make_shared<const SearchSpace>(ps);
        t.max_runs = max_runs;
        return t;
    };
    const AlgorithmPlan prf{SurrogateKind::PRF, AcquisitionKind::EI, FallbackKind::Random,
                            BatchStrategy::ConstantLiarMedian};
    const AlgorithmPlan gp{SurrogateKind::GP, AcquisitionKind::EI, FallbackKind::Random,
                           BatchStrategy::LocalPenalization};
    const bool a = auto_select(task_with(11, 100)) == prf;
    const bool b = auto_select(task_with(3, 301)) == prf;
    const bool c = auto_select(task_with(10, 300)) == gp;
    const double took = seconds_since(start);
    return {a && b && c && took < 1.0,
            fmt::format("d=11 -> PRF {}, max_runs=301 -> PRF {}, d=10/max_runs=300 -> GP {}, {:.3f} s", a, b, c,
                        took)};
}

// 2 -----------------------------------------------------------------------

Outcome branin_convergence()
{
    const auto start = Clock::now();
    const auto problem = branin_problem();
    const auto objective = problem_objective(problem);
    RunOptions opts;
    opts.record_elapsed = false;
    std::vector<double> gp_best, rand_best;
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto gp_task = problem_task(problem, AlgorithmChoice::GP, seed, 60);
        gp_task.init_count = 10;
        const double g = benchmark_score(problem, run(gp_task, objective, opts).history);
        const double r =
            benchmark_score(problem, run(problem_task(problem, AlgorithmChoice::Random, seed, 60), objective, opts).history);
        gp_best.push_back(g);
        rand_best.push_back(r);
        wins += g < r;
    }
    const double took = seconds_since(start);
    const double med = median(gp_best);
    return {med <= 0.8 && wins >= 8 && took < 180.0,
            fmt::format("median best {:.4f} (<= 0.8), random median {:.4f}, GP better on {}/10 seeds (>= 8), {:.1f} s "
                        "(< 180)",
                        med, median(rand_best), wins, took)};
}

// 3 -----------------------------------------------------------------------

Outcome constr_dominance()
{
    const auto start = Clock::now();
    const auto problem = constr_problem();
    const auto objective = problem_objective(problem);
    RunOptions opts;
    opts.record_elapsed = false;
    std::vector<double> adv, rnd;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        adv.push_back(
            benchmark_score(problem, run(problem_task(problem, AlgorithmChoice::Auto, seed, 100), objective, opts).history));
        rnd.push_back(benchmark_score(
            problem, run(problem_task(problem, AlgorithmChoice::Random, seed, 100), objective, opts).history));
    }
    const double took = seconds_since(start);
    const double a = median(adv), r = median(rnd);
    return {a <= 0.5 * r && took < 600.0,
            fmt::format("median HV difference {:.4f} vs random {:.4f} (ratio {:.3f} <= 0.5), optimal HV {:.4f}, "
                        "{:.1f} s (< 600)",
                        a, r, a / r, *problem.optimal_hv, took)};
}

// 4 -----------------------------------------------------------------------

Outcome hypervolume_correctness()
{
    Rng rng(404);
    std::uniform_real_distribution<double> U(0, 1);
    double worst_rel = 0, worst_sweep = 0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t m = t % 2 ? 3 : 2;
        const std::size_t n = 1 + rng() % 20;
        std::vector<moo::Point> pts(n, moo::Point(m));
        for (auto& p : pts)
            for (auto& v : p) v = U(rng);
        const moo::Point ref(m, 1.0);
        const double exact = moo::hypervolume(pts, ref);
        const auto mc = oracle::mc_hypervolume(pts, ref, 10'000'000, 1000 + t);
        worst_rel = std::max(worst_rel, std::abs(exact - mc.value) / mc.value);
    }
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng() % 50;
        std::vector<moo::Point> pts(n, moo::Point(2));
        for (auto& p : pts)
            for (auto& v : p) v = std::round(U(rng) * (t % 2 ? 8 : 1e6)) / (t % 2 ? 8 : 1e6);
        const moo::Point ref{1.1, 1.1};
        worst_sweep = std::max(worst_sweep, std::abs(moo::hypervolume_2d(pts, ref) - moo::hypervolume_recursive(pts, ref)));
    }
    return {worst_rel <= 0.01 && worst_sweep <= 1e-12,
            fmt::format("worst relative error vs 1e7-sample MC {:.2e} (<= 1e-2) over 20 instances, "
                        "sweep vs recursive max |diff| {:.1e} (<= 1e-12)",
                        worst_rel, worst_sweep)};
}

// 5 -----------------------------------------------------------------------

Outcome sorting_exactness()
{
    Rng rng(505);
    int mismatches = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng() % 200, m = 1 + rng() % 4;
        const bool coarse = t % 3 == 0;  // many ties and duplicates
        std::uniform_real_distribution<double> U(0, 1);
        std::vector<moo::Point> pts(n, moo::Point(m));
        for (auto& p : pts)
            for (auto& v : p) v = coarse ? std::floor(U(rng) * 5) : U(rng);
        mismatches += moo::non_dominated_sort(pts) != oracle::peeling_sort(pts);
    }
    return {mismatches == 0, fmt::format("{} of 200 instances differ from the peeling oracle", mismatches)};
}

// 6 -----------------------------------------------------------------------

Outcome gp_gradient()
{
    Rng rng(606);
    std::uniform_real_distribution<double> U(0, 1);
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
        const int d = 1 + t % 4, n = 5 + t % 11;
        Eigen::MatrixXd X(n, d);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = U(rng);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = std::sin(4 * X(i, 0)) + X.row(i).sum() + 0.1 * U(rng);
        Eigen::VectorXd theta(d + 2);
        for (int k = 0; k < d; ++k) theta[k] = std::log(0.05 + U(rng));
        theta[d] = std::log(0.3 + 2 * U(rng));
        theta[d + 1] = std::log(1e-4 + 0.05 * U(rng));
        auto lml = [&](const Eigen::VectorXd& th) {
            return gp_log_marginal_likelihood(X, y, GPHyperparameters::from_log(th)).value;
        };
        const auto analytic = gp_log_marginal_likelihood(X, y, GPHyperparameters::from_log(theta)).gradient;
        const auto fd = oracle::central_difference(lml, theta, 1e-5);
        for (Eigen::Index k = 0; k < theta.size(); ++k)
            worst = std::max(worst, std::abs(analytic[k] - fd[k]) / std::max(std::abs(fd[k]), 1e-3));
    }
    return {worst <= 1e-4, fmt::format("worst relative gradient error {:.2e} (<= 1e-4) over 20 instances", worst)};
}

// 7 -----------------------------------------------------------------------

Outcome ei_pof_numerics()
{
    // One pool of 1e7 standard normals shared by every triple; each estimate
    // is still a full 1e7-sample average.
    Rng rng(707);
    std::normal_distribution<double> N;
    std::vector<double> z(10'000'000);
    for (auto& v : z) v = N(rng);
    std::uniform_real_distribution<double> U(0, 1);
    double worst_ei = 0, worst_pof = 0;
    for (int t = 0; t < 50; ++t) {
        const double mean = -2 + 4 * U(rng), sd = 0.05 + 0.95 * U(rng), eta = -2 + 4 * U(rng);
        double ei = 0;
        std::size_t feasible = 0;
        for (double s : z) {
            const double y = mean + sd * s;
            ei += std::max(eta - y, 0.0);
            feasible += y <= 0;
        }
        ei /= static_cast<double>(z.size());
        const double pof = static_cast<double>(feasible) / static_cast<double>(z.size());
        worst_ei = std::max(worst_ei, std::abs(expected_improvement(mean, sd * sd, eta) - ei));
        worst_pof = std::max(worst_pof, std::abs(probability_of_feasibility(mean, sd * sd) - pof));
    }
    return {worst_ei <= 1e-3 && worst_pof <= 1e-3,
            fmt::format("worst |EI - MC| {:.2e}, worst |PoF - MC| {:.2e} (both <= 1e-3) over 50 triples", worst_ei,
                        worst_pof)};
}

// 8 -----------------------------------------------------------------------

Outcome determinism()
{
    RunOptions opts;
    opts.record_elapsed = false;
    bool bytes_equal = true, loop_equal = true;
    for (const auto& name : {"branin", "constr"}) {
        const auto problem = problem_by_name(name);
        const auto objective = problem_objective(problem);
        const auto task = problem_task(problem, AlgorithmChoice::Auto, 11, 30);
        const auto a = run(task, objective, opts);
        const auto b = run(task, objective, opts);
        bytes_equal = bytes_equal && export_json(a.history) == export_json(b.history);

        Advisor adv(task, opts.advisor);
        for (std::size_t i = 0; i < task.max_runs; ++i) {
            const auto c = adv.ask();
            adv.tell(evaluate_safe(objective, c, problem.num_objectives, problem.num_constraints,
                                   {i, std::nullopt}, false));
        }
        loop_equal = loop_equal && export_json(adv.history()) == export_json(a.history);
    }
    return {bytes_equal && loop_equal,
            fmt::format("repeated runs byte-identical: {}, manual ask/tell loop identical to run: {} "
                        "(Branin and CONSTR, 30 evaluations)",
                        bytes_equal, loop_equal)};
}

// 9 -----------------------------------------------------------------------

Outcome failure_robustness()
{
    const auto problem = constr_problem();
    Rng crash_rng(909);
    std::bernoulli_distribution crash(0.3);
    std::vector<bool> crashed;
    Objective objective = [&](const Configuration& c, const TrialContext&) {
        const bool fail = crash(crash_rng);
        crashed.push_back(fail);
        if (fail) throw std::runtime_error("simulated crash");
        auto [f, g] = problem.evaluate(c);
        return TrialResult{f, g, TrialState::Success, {}};
    };
    RunOptions opts;
    auto result = run(problem_task(problem, AlgorithmChoice::Auto, 9, 60), objective, opts);
    const auto& h = result.history;
    bool flags_ok = h.size() == crashed.size();
    std::size_t failed = 0;
    for (std::size_t i = 0; flags_ok && i < h.size(); ++i) {
        const auto& o = h[i];
        const bool is_failed = o.trial_state == TrialState::Failed;
        failed += is_failed;
        flags_ok = is_failed == crashed[i] &&
                   (is_failed ? o.objectives.empty() && o.extra.count("error") : o.objectives.size() == 2);
    }
    bool front_ok = !result.pareto_front.empty();
    for (const auto& o : result.pareto_front) front_ok = front_ok && o.is_success() && o.is_feasible();
    return {h.size() == 60 && flags_ok && front_ok,
            fmt::format("{} evaluations, {} crashed and flagged FAILED, flags correct: {}, Pareto front size {}",
                        h.size(), failed, flags_ok, result.pareto_front.size())};
}

// 10 ----------------------------------------------------------------------

Outcome shapley_sanity()
{
    auto space = std::make_shared<const SearchSpace>(
        std::vector<ParameterSpec>{ParameterSpec::real("x1", 0, 1), ParameterSpec::real("x2", 0, 1)});
    double worst_ratio = INFINITY;
    std::size_t rows = 0, outside = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        History h("x1-only", 1, 0, std::nullopt, space);
        Rng rng(1000 + seed);
        for (const auto& c : sample_random(*space, 60, rng)) {
            Observation o;
            o.config = c;
            o.objectives = {c.number("x1")};
            h.record(o);
        }
        ShapleyOptions opts;
        opts.n_permutations = 256;
        const auto r = importance_shapley(h, rng, opts);
        worst_ratio = std::min(worst_ratio, r.importance[0] / std::max(r.importance[1], 1e-300));
        for (const auto& row : r.rows) {
            ++rows;
            // The floor covers floating-point summation when the MC error is exactly zero.
            outside += std::abs(row.efficiency_residual) >
                       3 * row.residual_std_error + 1e-9 * (1 + std::abs(row.prediction));
        }
    }
    return {worst_ratio > 5 && outside == 0,
            fmt::format("smallest importance(x1)/importance(x2) {:.3g} (> 5) over 5 histories, "
                        "{} of {} rows with efficiency residual beyond 3 SE",
                        worst_ratio, outside, rows)};
}

// 11 ----------------------------------------------------------------------

Outcome cli_end_to_end()
{
    const fs::path dir = fs::temp_directory_path() / ("bbo_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string task = R"({"task_id": "e2e", "num_objectives": 1, "max_runs": 5, "seed": 1,
        "search_space": {"parameters": [{"name": "a", "type": "float", "low": 0, "high": 1},
                                        {"name": "b", "type": "int", "low": 1, "high": 4}]}})";
    write_file_atomic(dir / "task.json", task);
    const std::string bbo = BBO_BINARY_PATH, stub = STUB_OBJECTIVE_PATH;
    auto invoke = [&](const std::string& mode, const std::string& out, const std::string& flags = "") {
        return run_shell(fmt::format("{} run --task {} --cmd '{} {}' --out {} {}", bbo, (dir / "task.json").string(),
                                     stub, mode, (dir / out).string(), flags),
                         "");
    };

    std::vector<std::string> problems;
    auto expect_rows = [&](const std::string& mode, const std::string& flags, TrialState state, const char* extra_key) {
        const auto proc = invoke(mode, mode, flags);
        if (proc.exit_code != 0) {
            problems.push_back(fmt::format("{}: exit {}", mode, proc.exit_code));
            return;
        }
        try {
            const auto h = import_json(read_file(dir / mode / "history.json"));
            bool ok = h.size() == 5;
            for (const auto& o : h.observations())
                ok = ok && o.trial_state == state && (!extra_key || o.extra.count(extra_key));
            if (state == TrialState::Success)
                for (const auto& o : h.observations())
                    ok = ok && o.objectives[0] == o.config.number("a") + o.config.number("b");
            if (!ok) problems.push_back(mode + ": unexpected rows");
            const auto html = testing::check_html(read_file(dir / mode / "report.html"));
            if (!html.ok) problems.push_back(mode + ": report " + html.error);
        } catch (const std::exception& e) {
            problems.push_back(mode + ": " + e.what());
        }
    };
    expect_rows("sum", "", TrialState::Success, nullptr);
    expect_rows("fail", "", TrialState::Failed, "error");
    expect_rows("garbage", "", TrialState::Failed, "protocol_error");
    expect_rows("shape", "", TrialState::Failed, "protocol_error");
    expect_rows("sleep", "--timeout 0.2", TrialState::Timeout, "error");
    fs::remove_all(dir);
    std::string detail = "SUCCESS, nonzero exit, invalid JSON, wrong shape and timeout runs";
    detail += problems.empty() ? " all produce valid history JSON and well-formed HTML with the expected row states"
                               : ": " + problems.front();
    return {problems.empty(), detail};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"auto-selection rule exactness", auto_selection},
        {"Branin convergence, GP+EI vs random", branin_convergence},
        {"CONSTR dominance over random", constr_dominance},
        {"hypervolume correctness", hypervolume_correctness},
        {"non-dominated sorting exactness", sorting_exactness},
        {"GP likelihood gradient check", gp_gradient},
        {"EI/PoF numerical checks", ei_pof_numerics},
        {"determinism", determinism},
        {"failure robustness", failure_robustness},
        {"Shapley importance sanity", shapley_sanity},
        {"end-to-end CLI", cli_end_to_end},
    };
    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoul(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && !selected.count(i + 1)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << fmt::format("{} criterion {:>2} {}: {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                                 o.detail)
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
