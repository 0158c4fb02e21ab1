#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bbo/optimizer.hpp"

namespace bbo {

struct ProcessResult {
    /// Exit status, or -1 when the process was killed by a signal.
    int exit_code = -1;
    /// Terminating signal, 0 if none.
    int signal = 0;
    bool timed_out = false;
    std::string out;
    std::string err;
};

/// Runs `/bin/sh -c command` in its own process group with `input` on stdin and
/// `env` added to the inherited environment. On timeout the whole group is
/// killed. Throws SetupError if the process cannot be started.
ProcessResult run_shell(const std::string& command, const std::string& input,
                        const std::vector<std::pair<std::string, std::string>>& env = {},
                        std::optional<double> timeout = std::nullopt);

/// Objective that spawns `command` once per evaluation. The child reads
/// {"config": {...}} from stdin and writes {"objectives": [...], "constraints": [...]}
/// as the last nonempty line of stdout; BBO_TRIAL_INDEX holds the trial index.
/// Nonzero exit, a bad response or the deadline passing map to FAILED or TIMEOUT.
Objective subprocess_objective(std::string command, std::size_t num_objectives, std::size_t num_constraints,
                               std::optional<double> timeout = std::nullopt);

} // namespace bbo
