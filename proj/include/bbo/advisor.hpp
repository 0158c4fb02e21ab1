#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bbo/acquisition.hpp"
#include "bbo/evolution.hpp"
#include "bbo/gp.hpp"
#include "bbo/history.hpp"
#include "bbo/prf.hpp"
#include "bbo/space.hpp"

namespace bbo {

enum class AlgorithmChoice { Auto, GP, PRF, EA, Random };
enum class InitDesign { LatinHypercube, Random };
enum class SurrogateKind { GP, PRF, None };
enum class FallbackKind { DE, NSGA2, Random };
enum class BatchStrategy { LocalPenalization, ConstantLiarMedian };

const char* to_string(AlgorithmChoice v);
const char* to_string(InitDesign v);
const char* to_string(SurrogateKind v);
const char* to_string(FallbackKind v);
const char* to_string(BatchStrategy v);
/// Throws ParseError on unknown names.
AlgorithmChoice algorithm_choice_from_string(const std::string& s);
InitDesign init_design_from_string(const std::string& s);

struct TaskSpec {
    std::shared_ptr<const SearchSpace> space;
    std::string task_id = "task";
    std::size_t num_objectives = 1;
    std::size_t num_constraints = 0;
    std::size_t max_runs = 100;
    std::size_t batch_size = 1;
    AlgorithmChoice algorithm = AlgorithmChoice::Auto;
    InitDesign init_design = InitDesign::LatinHypercube;
    /// Defaults to max(2d, 8), capped at max_runs / 3.
    std::optional<std::size_t> init_count;
    std::optional<std::vector<double>> ref_point;
    std::uint64_t seed = 0;

    /// Throws ConfigurationError.
    void validate() const;
    std::size_t resolved_init_count() const;
};

struct AlgorithmPlan {
    SurrogateKind surrogate = SurrogateKind::GP;
    AcquisitionKind acquisition = AcquisitionKind::EI;
    FallbackKind fallback = FallbackKind::Random;
    BatchStrategy batch_strategy = BatchStrategy::LocalPenalization;

    friend bool operator==(const AlgorithmPlan&, const AlgorithmPlan&) = default;
};

AlgorithmPlan auto_select(const TaskSpec& task);

/// Knobs below the task level; defaults are what the CLI and benchmarks use.
struct AdvisorOptions {
    std::size_t ehvi_samples = 2048;
    MaximizerOptions maximizer;
    /// Random restarts for the first GP fit; later fits warm-start from the
    /// previous hyperparameters with `gp_refit_restarts` extra starts.
    std::size_t gp_restarts = 3;
    std::size_t gp_refit_restarts = 1;
    std::size_t gp_max_iterations = 100;
    PRFOptions prf;
    std::size_t population_size = 40;
    DEOptions de;
    NSGA2Options nsga2;
};

enum class TellStatus { Accepted, UnknownConfiguration };

/// Ask-and-tell engine. Single owner: ask/tell must not be called concurrently.
class Advisor {
public:
    explicit Advisor(TaskSpec task, AdvisorOptions options = {});

    const TaskSpec& task() const { return task_; }
    const AlgorithmPlan& plan() const { return plan_; }
    const AdvisorOptions& options() const { return options_; }

    /// Throws ExhaustedSpaceError when every configuration was already suggested.
    Configuration ask();
    std::vector<Configuration> ask_batch(std::size_t q);

    /// Records the observation and clears its pending entry. An observation for a
    /// configuration that was never suggested is still recorded; unless `external`
    /// is set the return value flags it.
    TellStatus tell(const Observation& obs, bool external = false);

    History history() const { return history_; }
    const std::vector<Configuration>& pending() const { return pending_; }
    const std::vector<Configuration>& initial_design() const { return init_design_; }

    /// Acquisition used by the most recent model-based suggestion, if any.
    std::shared_ptr<const AcquisitionFunction> last_acquisition() const { return last_acq_; }
    /// Objective and constraint models from the most recent fit.
    const std::vector<std::shared_ptr<const SurrogateModel>>& objective_models() const
    {
        return objective_models_;
    }
    const std::vector<std::shared_ptr<const SurrogateModel>>& constraint_models() const
    {
        return constraint_models_;
    }
    /// Lipschitz estimate used by local penalization (0 until first use).
    double lipschitz() const { return lipschitz_; }

private:
    bool seen(const Configuration& c) const;
    void mark_pending(const Configuration& c);
    Configuration random_unseen();
    Configuration next_initial();
    Configuration ask_model(bool batch_follower);
    Configuration ask_evolution();
    using ModelList = std::vector<std::shared_ptr<const SurrogateModel>>;

    void refit();
    /// Models refit with every pending point imputed at the median target.
    std::pair<ModelList, ModelList> fit_with_lies();
    Encoding model_encoding() const;
    AcquisitionContext make_context(ModelList obj, ModelList con) const;
    std::optional<std::vector<double>> effective_ref_point() const;
    double penalty_best() const;
    void ea_tell(const Observation& obs);
    void ea_advance();

    TaskSpec task_;
    AdvisorOptions options_;
    AlgorithmPlan plan_;
    Rng rng_;
    History history_;
    std::set<Configuration> told_;
    std::vector<Configuration> pending_;
    std::vector<Configuration> init_design_;
    std::size_t next_init_ = 0;

    bool stale_ = true;
    bool fit_failed_ = false;
    std::vector<std::shared_ptr<const SurrogateModel>> objective_models_;
    std::vector<std::shared_ptr<const SurrogateModel>> constraint_models_;
    std::vector<std::optional<GPHyperparameters>> gp_hyper_;
    std::shared_ptr<const AcquisitionFunction> last_acq_;
    double lipschitz_ = 0.0;

    // Evolutionary mode.
    Population ea_pop_;
    std::vector<Eigen::VectorXd> ea_genomes_;
    std::vector<std::optional<Individual>> ea_results_;
    std::vector<std::optional<Configuration>> ea_configs_;
    std::size_t ea_next_ = 0;
};

} // namespace bbo
