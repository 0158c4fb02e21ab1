#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bbo/advisor.hpp"

namespace bbo {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitSetup = 2, kExitIo = 3 };

/// Contents of a task file: the task plus run-level settings.
struct TaskFile {
    TaskSpec task;
    std::size_t parallelism = 1;
    std::optional<double> timeout;
    std::optional<double> wall_clock_limit;
};

/// Parses a JSON task file. Throws ParseError naming the line or field at fault.
TaskFile parse_task_file(const std::string& text);

/// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see partial output. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct RunArgs {
    std::filesystem::path task_file;
    std::string command;
    std::filesystem::path out_dir = "bbo-out";
    /// Override the task file's values when set.
    std::optional<std::size_t> parallelism;
    std::optional<double> timeout;
    AdvisorOptions advisor;
};

struct BenchArgs {
    std::vector<std::string> problems;
    std::vector<std::string> strategies;
    std::size_t seeds = 10;
    std::size_t budget = 100;
    std::filesystem::path out_dir = "bbo-bench";
};

/// Runs the optimization against an external command and writes
/// history.json and report.html into the output directory.
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& history_file, const std::filesystem::path& out_html,
               std::ostream& out, std::ostream& err);
/// Writes bench.csv and summary.json into the output directory.
int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err);

} // namespace bbo
