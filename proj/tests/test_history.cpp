#include <gtest/gtest.h>

#include <cmath>

#include "bbo/errors.hpp"
#include "bbo/history.hpp"
#include "bbo/moo.hpp"

namespace bbo {
namespace {

auto space1d()
{
    return std::make_shared<const SearchSpace>(
        std::vector<ParameterSpec>{ParameterSpec::real("x", 0.0, 1.0)});
}

Observation obs(double x, std::vector<double> f, std::vector<double> c = {},
                TrialState state = TrialState::Success)
{
    Observation o;
    o.config = Configuration({{"x", x}});
    o.objectives = std::move(f);
    o.constraints = std::move(c);
    o.trial_state = state;
    return o;
}

TEST(History, RecordAppendsInOrder)
{
    History h("t", 1, 0);
    h.record(obs(0.1, {1.0}));
    EXPECT_EQ(h.size(), 1u);
    for (int i = 0; i < 99; ++i) h.record(obs(i / 100.0, {static_cast<double>(i)}));
    EXPECT_EQ(h.size(), 100u);
    for (int i = 0; i < 99; ++i) EXPECT_EQ(h[static_cast<std::size_t>(i) + 1].objectives[0], i);
}

TEST(History, RecordRejectsShapeMismatch)
{
    History h("t", 1, 0);
    EXPECT_THROW(h.record(obs(0.1, {1.0, 2.0})), ObservationShapeError);
    History hc("t", 1, 2);
    EXPECT_THROW(hc.record(obs(0.1, {1.0}, {0.0})), ObservationShapeError);
    EXPECT_THROW(h.record(obs(0.1, {std::nan("")})), ObservationShapeError);
    EXPECT_EQ(h.size(), 0u);
    // Failed trials may omit values.
    EXPECT_NO_THROW(hc.record(obs(0.1, {}, {}, TrialState::Failed)));
}

TEST(History, RecordValidatesAgainstSpace)
{
    History h("t", 1, 0, std::nullopt, space1d());
    EXPECT_THROW(h.record(obs(2.0, {1.0})), InvalidConfigurationError);
}

TEST(History, IncumbentPicksMinimumEarliestFeasible)
{
    History h("t", 1, 0);
    for (double f : {3.0, 1.0, 2.0}) h.record(obs(f / 10, {f}));
    EXPECT_EQ(h.incumbent()->objectives[0], 1.0);

    History ties("t", 1, 0);
    ties.record(obs(0.1, {1.0}));
    ties.record(obs(0.2, {1.0}));
    EXPECT_EQ(ties.incumbent()->config.number("x"), 0.1);

    History constrained("t", 1, 1);
    constrained.record(obs(0.1, {0.5}, {1.0}));
    constrained.record(obs(0.2, {0.9}, {-1.0}));
    EXPECT_EQ(constrained.incumbent()->objectives[0], 0.9);

    History none("t", 1, 1);
    none.record(obs(0.1, {0.5}, {1.0}));
    EXPECT_FALSE(none.incumbent().has_value());

    History multi("t", 2, 0);
    EXPECT_THROW(multi.incumbent(), WrongTaskTypeError);
}

TEST(History, ParetoFrontBasics)
{
    History h("t", 2, 0);
    h.record(obs(0.1, {1, 2}));
    h.record(obs(0.2, {2, 1}));
    h.record(obs(0.3, {2, 2}));
    auto front = h.pareto_front();
    ASSERT_EQ(front.size(), 2u);
    EXPECT_EQ(front[0].objectives, (std::vector<double>{1, 2}));
    EXPECT_EQ(front[1].objectives, (std::vector<double>{2, 1}));

    History same("t", 2, 0);
    for (int i = 0; i < 4; ++i) same.record(obs(i / 10.0, {1, 1}));
    auto single = same.pareto_front();
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].config.number("x"), 0.0);

    History one("t", 1, 0);
    EXPECT_THROW(one.pareto_front(), WrongTaskTypeError);
}

// Brute-force oracle: keep a feasible success if nothing feasible dominates it.
TEST(History, ParetoFrontMatchesPairwiseOracle)
{
    Rng rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        History h("t", 2, 1);
        std::vector<Observation> all;
        for (int i = 0; i < 50; ++i) {
            auto o = obs(u(rng), {u(rng), u(rng)}, {u(rng) - 0.2});
            if (i % 7 == 3) o.trial_state = TrialState::Failed;
            h.record(o);
            all.push_back(o);
        }
        std::vector<std::vector<double>> expected;
        for (const auto& a : all) {
            if (!a.is_success() || !a.is_feasible()) continue;
            bool dominated = false;
            for (const auto& b : all)
                if (b.is_success() && b.is_feasible() && moo::dominates(b.objectives, a.objectives))
                    dominated = true;
            if (!dominated) expected.push_back(a.objectives);
        }
        std::vector<std::vector<double>> got;
        for (const auto& o : h.pareto_front()) got.push_back(o.objectives);
        EXPECT_EQ(got, expected);
    }
}

TEST(History, TrainingTargetsDropKeepsSuccesses)
{
    auto space = space1d();
    History h("t", 1, 0);
    for (double f : {1.0, 2.0, 3.0}) h.record(obs(f / 4, {f}));
    auto data = h.training_targets(*space, Encoding::Index, FailureStrategy::Drop);
    EXPECT_EQ(data.X.rows(), 3);
    EXPECT_EQ(data.objectives[0], Eigen::Vector3d(1, 2, 3));
}

TEST(History, TrainingTargetsImputeWorstPlusStd)
{
    auto space = space1d();
    History h("t", 1, 1);
    h.record(obs(0.1, {1.0}, {-1.0}));
    h.record(obs(0.2, {3.0}, {-1.0}));
    h.record(obs(0.3, {}, {}, TrialState::Failed));
    auto data = h.training_targets(*space, Encoding::Index, FailureStrategy::ImputeWorst);
    ASSERT_EQ(data.X.rows(), 3);
    EXPECT_NEAR(data.objectives[0][2], 3.0 + std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(data.objectives[0][2], 4.4142, 1e-4);
    EXPECT_EQ(data.constraints[0][2], 1.0);

    auto dropped = h.training_targets(*space, Encoding::Index, FailureStrategy::Drop);
    EXPECT_EQ(dropped.X.rows(), 2);
}

TEST(History, TrainingTargetsNeedsSuccess)
{
    auto space = space1d();
    History h("t", 1, 0);
    h.record(obs(0.3, {}, {}, TrialState::Failed));
    EXPECT_THROW(h.training_targets(*space, Encoding::Index), InsufficientDataError);
}

TEST(History, IncumbentIsNonincreasingOverPrefixes)
{
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    History h("t", 1, 1);
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
        h.record(obs(u(rng), {u(rng)}, {u(rng) - 0.5}));
        if (auto inc = h.incumbent()) {
            EXPECT_LE(inc->objectives[0], prev);
            prev = inc->objectives[0];
        }
    }
}

} // namespace
} // namespace bbo
