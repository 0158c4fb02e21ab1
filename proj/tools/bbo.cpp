#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bbo/cli.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Black-box optimization toolkit"};
    app.require_subcommand(1);

    bbo::RunArgs run;
    std::size_t parallelism = 0;
    double timeout = 0;
    auto* run_cmd = app.add_subcommand("run", "Optimize an external program");
    run_cmd->add_option("--task", run.task_file, "Task file (JSON)")->required();
    run_cmd->add_option("--cmd", run.command, "Shell command evaluating one configuration")->required();
    run_cmd->add_option("--out", run.out_dir, "Output directory")->capture_default_str();
    auto* par_opt = run_cmd->add_option("--parallelism", parallelism, "Concurrent evaluations")
                        ->check(CLI::PositiveNumber);
    auto* timeout_opt =
        run_cmd->add_option("--timeout", timeout, "Seconds allowed per evaluation")->check(CLI::PositiveNumber);

    std::string history_file, out_html;
    auto* report_cmd = app.add_subcommand("report", "Render an HTML report from a history file");
    report_cmd->add_option("history", history_file, "History JSON")->required();
    report_cmd->add_option("-o,--output", out_html, "Output HTML file")->required();

    bbo::BenchArgs bench;
    std::string problems = "constr,branin,ackley", strategies = "auto,random";
    auto* bench_cmd = app.add_subcommand("bench", "Compare strategies on the built-in problems");
    bench_cmd->add_option("--problems", problems, "Comma-separated problems (constr, branin, ackley)")
        ->capture_default_str();
    bench_cmd->add_option("--strategies", strategies, "Comma-separated strategies (auto, gp, prf, ea, random)")
        ->capture_default_str();
    bench_cmd->add_option("--seeds", bench.seeds, "Seeds per problem")->capture_default_str();
    bench_cmd->add_option("--budget", bench.budget, "Evaluations per run")->capture_default_str();
    bench_cmd->add_option("--out", bench.out_dir, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return bbo::kExitSetup;
    }

    if (*run_cmd) {
        if (*par_opt) run.parallelism = parallelism;
        if (*timeout_opt) run.timeout = timeout;
        return bbo::cmd_run(run, std::cout, std::cerr);
    }
    if (*report_cmd) return bbo::cmd_report(history_file, out_html, std::cout, std::cerr);
    bench.problems = split_list(problems);
    bench.strategies = split_list(strategies);
    return bbo::cmd_bench(bench, std::cout, std::cerr);
}
