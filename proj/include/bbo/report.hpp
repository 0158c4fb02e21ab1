#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bbo/history.hpp"
#include "bbo/prf.hpp"

namespace bbo {

/// (1-based trial index, value) pairs.
using Series = std::vector<std::pair<std::size_t, double>>;

/// Best feasible objective after each trial, skipping indices before the first
/// feasible success. Throws WrongTaskTypeError unless the task has one objective.
Series convergence_curve(const History& history);

/// Hypervolume of the feasible front after every trial. Throws WrongTaskTypeError
/// for single-objective tasks.
Series hv_over_time(const History& history, const std::vector<double>& ref_point);

/// Permutation-sampling Shapley estimate for one explicand.
struct RowShapley {
    Eigen::VectorXd phi;
    double prediction = 0.0;
    /// sum(phi) - (prediction - mean background prediction).
    double efficiency_residual = 0.0;
    /// Monte Carlo standard error of that residual.
    double residual_std_error = 0.0;
};

/// Each permutation draws one background row z, walks from z to x feature by
/// feature in permuted order, and credits every prediction change to the
/// feature just switched.
RowShapley shapley_row(const std::function<double(const Eigen::VectorXd&)>& f,
                       const Eigen::MatrixXd& background, const Eigen::VectorXd& x,
                       std::size_t n_permutations, Rng& rng);

struct ShapleyOptions {
    std::size_t n_permutations = 64;
    std::size_t background_size = 32;
    std::size_t explicand_count = 64;
    std::size_t objective_index = 0;
    PRFOptions prf;
};

struct ImportanceResult {
    std::vector<std::string> names;
    /// Mean |phi| per parameter over the explicands.
    std::vector<double> importance;
    std::vector<RowShapley> rows;
    double baseline = 0.0;
};

/// Fits a PRF to the successful observations and explains its predictions.
/// Needs a history that knows its search space and at least 2d successes,
/// otherwise throws InsufficientDataError.
ImportanceResult importance_shapley(const History& history, Rng& rng,
                                    const ShapleyOptions& options = {});

struct ReportAnalyses {
    Series convergence;
    Series hypervolume;
    std::optional<std::vector<double>> hv_ref_point;
    std::optional<ImportanceResult> importance;
};

/// Computes every analysis the history supports. The hypervolume reference is
/// History::effective_ref_point(); importance is skipped without enough data.
ReportAnalyses analyze(const History& history, std::uint64_t seed = 0);

/// Self-contained HTML page: charts as inline SVG, the observation table and the
/// exported history embedded as a JSON data island (id "bbo-history").
std::string render_html(const History& history, const ReportAnalyses& analyses);

/// Canonical JSON text of a history, field order fixed, version "1".
std::string export_json(const History& history);
/// Throws ParseError naming the offending line or field.
History import_json(const std::string& text);

} // namespace bbo
