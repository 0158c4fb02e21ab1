#include "bbo/cli.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include <unistd.h>

#include <fmt/format.h>

#include "bbo/bench.hpp"
#include "bbo/errors.hpp"
#include "bbo/optimizer.hpp"
#include "bbo/report.hpp"
#include "bbo/subprocess.hpp"

namespace bbo {

namespace {

std::size_t count_field(const Json& j, const char* key, std::size_t fallback, std::size_t min = 0)
{
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_unsigned() || j[key].get<std::size_t>() < min)
        throw ParseError(fmt::format("task.{}: expected an integer >= {}", key, min));
    return j[key].get<std::size_t>();
}

std::optional<double> seconds_field(const Json& j, const char* key)
{
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number() || j[key].get<double>() <= 0)
        throw ParseError(fmt::format("task.{}: expected a positive number of seconds", key));
    return j[key].get<double>();
}

std::string string_field(const Json& j, const char* key, std::string fallback)
{
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) throw ParseError(fmt::format("task.{}: expected a string", key));
    return j[key].get<std::string>();
}

} // namespace

TaskFile parse_task_file(const std::string& text)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::string msg = e.what();
        if (auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
        throw ParseError("task file: " + msg);
    }
    if (!j.is_object()) throw ParseError("task file: expected a JSON object");
    static const char* known[] = {"task_id",   "search_space", "num_objectives", "num_constraints",
                                  "max_runs",  "algorithm",    "init_design",    "init_count",
                                  "ref_point", "seed",         "parallelism",    "batch_size",
                                  "timeout",   "wall_clock_limit"};
    for (const auto& [key, _] : j.items())
        if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
            throw ParseError(fmt::format("task.{}: unknown field", key));

    TaskFile tf;
    auto& t = tf.task;
    if (!j.contains("search_space")) throw ParseError("task.search_space: missing");
    try {
        t.space = std::make_shared<const SearchSpace>(space_from_json(j["search_space"]));
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("task.search_space: {}", e.what()));
    }
    t.task_id = string_field(j, "task_id", t.task_id);
    t.num_objectives = count_field(j, "num_objectives", 1, 1);
    t.num_constraints = count_field(j, "num_constraints", 0);
    t.max_runs = count_field(j, "max_runs", t.max_runs, 1);
    try {
        t.algorithm = algorithm_choice_from_string(string_field(j, "algorithm", "auto"));
        t.init_design = init_design_from_string(string_field(j, "init_design", "latin_hypercube"));
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("task: {}", e.what()));
    }
    if (j.contains("init_count")) t.init_count = count_field(j, "init_count", 0, 1);
    if (j.contains("ref_point") && !j["ref_point"].is_null()) {
        const auto& r = j["ref_point"];
        if (!r.is_array()) throw ParseError("task.ref_point: expected an array of numbers");
        std::vector<double> ref;
        for (const auto& v : r) {
            if (!v.is_number()) throw ParseError("task.ref_point: expected an array of numbers");
            ref.push_back(v.get<double>());
        }
        t.ref_point = std::move(ref);
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ParseError("task.seed: expected a non-negative integer");
        t.seed = j["seed"].get<std::uint64_t>();
    }
    const std::size_t par = count_field(j, "parallelism", 1, 1);
    const std::size_t batch = count_field(j, "batch_size", par, 1);
    if (j.contains("parallelism") && j.contains("batch_size") && par != batch)
        throw ParseError("task: parallelism and batch_size disagree");
    tf.parallelism = j.contains("parallelism") ? par : batch;
    t.batch_size = tf.parallelism;
    tf.timeout = seconds_field(j, "timeout");
    tf.wall_clock_limit = seconds_field(j, "wall_clock_limit");
    try {
        t.validate();
    } catch (const ConfigurationError& e) {
        throw ParseError(fmt::format("task: {}", e.what()));
    }
    return tf;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read {}: {}", path.string(), std::strerror(errno)));
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(fmt::format("error reading {}", path.string()));
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::error_code ec;
    const auto dir = path.parent_path();
    if (!dir.empty()) {
        std::filesystem::create_directories(dir, ec);
        if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    }
    auto tmp = path;
    tmp += fmt::format(".tmp{}", ::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot write {}: {}", tmp.string(), std::strerror(errno)));
        out << content;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp, ec);
            throw IoError(fmt::format("error writing {}", tmp.string()));
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError(fmt::format("cannot move output into {}", path.string()));
    }
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err)
{
    try {
        if (args.command.find_first_not_of(" \t") == std::string::npos)
            throw SetupError("no objective command given (--cmd)");
        auto tf = parse_task_file(read_file(args.task_file));
        RunOptions opts;
        opts.advisor = args.advisor;
        opts.parallelism = args.parallelism.value_or(tf.parallelism);
        opts.wall_clock_limit = tf.wall_clock_limit;
        if (opts.parallelism < 1) throw SetupError("--parallelism must be at least 1");
        const auto timeout = args.timeout ? args.timeout : tf.timeout;
        if (timeout && *timeout <= 0) throw SetupError("--timeout must be positive");
        tf.task.batch_size = opts.parallelism;
        const auto& task = tf.task;
        // The subprocess enforces its own deadline, so no helper-thread timeout here.
        auto objective = subprocess_objective(args.command, task.num_objectives, task.num_constraints, timeout);
        opts.on_observation = [&out, n = std::size_t{0}](const Observation& o) mutable {
            out << fmt::format("trial {}: {}", ++n, to_string(o.trial_state));
            for (double v : o.objectives) out << fmt::format(" {:.6g}", v);
            out << "\n";
        };
        auto result = run(task, objective, opts);

        write_file_atomic(args.out_dir / "history.json", export_json(result.history));
        write_file_atomic(args.out_dir / "report.html", render_html(result.history, analyze(result.history, task.seed)));
        out << fmt::format("finished {} evaluations ({}), {} successful\n", result.history.size(),
                           to_string(result.stop_reason), result.history.success_count());
        if (result.incumbent) out << fmt::format("best objective {:.6g}\n", result.incumbent->objectives.front());
        if (task.num_objectives > 1) out << fmt::format("pareto front size {}\n", result.pareto_front.size());
        out << "wrote " << (args.out_dir / "history.json").string() << " and "
            << (args.out_dir / "report.html").string() << "\n";
        return kExitOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitSetup;
    }
}

int cmd_report(const std::filesystem::path& history_file, const std::filesystem::path& out_html, std::ostream& out,
               std::ostream& err)
{
    try {
        const auto history = import_json(read_file(history_file));
        write_file_atomic(out_html, render_html(history, analyze(history)));
        out << "wrote " << out_html.string() << "\n";
        return kExitOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << history_file.string() << ": " << e.what() << "\n";
        return kExitSetup;
    }
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err)
{
    try {
        for (const auto& p : args.problems) problem_by_name(p);
        for (const auto& s : args.strategies) strategy_by_name(s);
        if (args.seeds < 1 || args.budget < 1) throw ConfigurationError("--seeds and --budget must be positive");
        BenchOptions opts;
        opts.on_cell = [&out](const BenchCell& c) {
            out << fmt::format("{} seed {} {}: {:.6g}\n", c.problem, c.seed, c.strategy, c.score);
        };
        const auto table = run_benchmark(args.problems, args.strategies, args.seeds, args.budget, opts);
        write_file_atomic(args.out_dir / "bench.csv", bench_csv(table));
        write_file_atomic(args.out_dir / "summary.json", bench_summary_json(table));
        for (const auto& s : table.strategies) out << fmt::format("median rank {}: {:g}\n", s, table.median_rank.at(s));
        out << "wrote " << (args.out_dir / "bench.csv").string() << " and "
            << (args.out_dir / "summary.json").string() << "\n";
        return kExitOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitSetup;
    }
}

} // namespace bbo
