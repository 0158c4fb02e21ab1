#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bbo/errors.hpp"
#include "bbo/evolution.hpp"
#include "bbo/moo.hpp"

namespace bbo {
namespace {

Evaluation sphere(const Eigen::VectorXd& g)
{
    return {{(10.0 * g.array() - 5.0).square().sum()}, {}};
}

// CONSTR on the unit cube: x1 in [0.1, 1], x2 in [0, 5].
Evaluation constr(const Eigen::VectorXd& g)
{
    const double x1 = 0.1 + 0.9 * g[0], x2 = 5.0 * g[1];
    return {{x1, (1 + x2) / x1}, {6 - (x2 + 9 * x1), 1 - (9 * x1 - x2)}};
}

double best_of(const Population& pop)
{
    double best = INFINITY;
    for (const auto& ind : pop.individuals)
        if (ind.feasible()) best = std::min(best, ind.objectives[0]);
    return best;
}

Individual make(std::vector<double> f, double violation = 0.0)
{
    Individual ind;
    ind.genome = Eigen::VectorXd::Zero(2);
    ind.objectives = std::move(f);
    ind.constraint_violation = violation;
    return ind;
}

TEST(Evolution, ConstraintViolation)
{
    EXPECT_EQ(constraint_violation({}), 0.0);
    EXPECT_EQ(constraint_violation({-1.0, 0.0}), 0.0);
    EXPECT_EQ(constraint_violation({2.0, -1.0, 0.5}), 2.5);
}

TEST(Evolution, FeasibilityRules)
{
    EXPECT_TRUE(better_single(make({5}), make({1}, 0.1)));
    EXPECT_TRUE(better_single(make({5}, 0.1), make({1}, 0.2)));
    EXPECT_TRUE(better_single(make({1}), make({2})));
    EXPECT_FALSE(better_single(make({1}), make({1})));
    EXPECT_TRUE(constrained_dominates(make({0, 0}), make({1, 1})));
    EXPECT_FALSE(constrained_dominates(make({0, 1}), make({1, 0})));
    EXPECT_TRUE(constrained_dominates(make({9, 9}), make({0, 0}, 1.0)));
}

TEST(DifferentialEvolution, RejectsSmallPopulation)
{
    Rng rng(1);
    auto pop = random_population(3, 2, sphere, rng);
    EXPECT_THROW(de_propose(pop, {}, rng), PopulationSizeError);
}

TEST(DifferentialEvolution, ZeroScaleZeroCrossoverLimit)
{
    Rng rng(2);
    auto pop = random_population(10, 3, sphere, rng);
    auto trials = de_propose(pop, {0.0, 0.0}, rng);
    for (std::size_t i = 0; i < trials.size(); ++i) {
        // At most the forced gene differs from the parent, and that gene comes from another member.
        int changed = 0;
        for (Eigen::Index j = 0; j < 3; ++j) {
            if (trials[i][j] == pop.individuals[i].genome[j]) continue;
            ++changed;
            bool from_member = false;
            for (const auto& other : pop.individuals) from_member |= other.genome[j] == trials[i][j];
            EXPECT_TRUE(from_member);
        }
        EXPECT_LE(changed, 1);
    }
    double before = best_of(pop);
    auto next = de_step(pop, {0.0, 0.0}, sphere, rng);
    EXPECT_LE(best_of(next), before);
}

TEST(DifferentialEvolution, BestNeverWorsens)
{
    Rng rng(3);
    auto pop = random_population(12, 4, sphere, rng);
    double prev = best_of(pop);
    for (int g = 0; g < 50; ++g) {
        pop = de_step(pop, {}, sphere, rng);
        EXPECT_LE(best_of(pop), prev);
        prev = best_of(pop);
        EXPECT_EQ(pop.generation, static_cast<std::size_t>(g + 1));
    }
}

// Straightforward DE/rand/1/bin written independently of the library.
double reference_de(std::uint64_t seed, int d, int n, int gens)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    auto f = [](const std::vector<double>& x) {
        double s = 0;
        for (double v : x) s += (10 * v - 5) * (10 * v - 5);
        return s;
    };
    std::vector<std::vector<double>> pop(n, std::vector<double>(d));
    std::vector<double> fit(n);
    for (int i = 0; i < n; ++i) {
        for (auto& v : pop[i]) v = u(rng);
        fit[i] = f(pop[i]);
    }
    for (int g = 0; g < gens; ++g) {
        auto next = pop;
        for (int i = 0; i < n; ++i) {
            int a, b, c;
            do a = static_cast<int>(u(rng) * n); while (a == i);
            do b = static_cast<int>(u(rng) * n); while (b == i || b == a);
            do c = static_cast<int>(u(rng) * n); while (c == i || c == a || c == b);
            int jr = static_cast<int>(u(rng) * d);
            std::vector<double> t = pop[i];
            for (int j = 0; j < d; ++j)
                if (j == jr || u(rng) < 0.9)
                    t[j] = std::clamp(pop[a][j] + 0.5 * (pop[b][j] - pop[c][j]), 0.0, 1.0);
            double ft = f(t);
            if (ft <= fit[i]) {
                next[i] = t;
                fit[i] = ft;
            }
        }
        pop = next;
    }
    return *std::min_element(fit.begin(), fit.end());
}

TEST(DifferentialEvolution, SolvesSphereLikeReference)
{
    std::vector<double> ours, reference;
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(s);
        auto pop = random_population(20, 5, sphere, rng);
        for (int g = 0; g < 100; ++g) pop = de_step(pop, {}, sphere, rng);
        ours.push_back(best_of(pop));
        reference.push_back(reference_de(s + 100, 5, 20, 100));
    }
    std::sort(ours.begin(), ours.end());
    std::sort(reference.begin(), reference.end());
    EXPECT_LE(ours[5], 1e-3);
    EXPECT_LE(reference[5], 1e-3);
}

TEST(Nsga2, RejectsOddPopulation)
{
    Rng rng(4);
    auto pop = random_population(5, 2, constr, rng);
    EXPECT_THROW(nsga2_offspring(pop, {}, rng), PopulationSizeError);
}

TEST(Nsga2, OperatorsKeepGenomesInUnitCube)
{
    Rng rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100000; ++t) {
        Eigen::VectorXd a(3), b(3);
        for (int k = 0; k < 3; ++k) {
            a[k] = t % 3 == 0 ? std::round(u(rng)) : u(rng);
            b[k] = u(rng);
        }
        auto [c1, c2] = sbx_crossover(a, b, 15, rng);
        auto m = polynomial_mutation(c1, 20, 1.0, rng);
        for (const auto* v : {&c1, &c2, &m}) {
            ASSERT_GE(v->minCoeff(), 0.0);
            ASSERT_LE(v->maxCoeff(), 1.0);
        }
    }
    auto pop = random_population(10, 3, sphere, rng);
    for (int i = 0; i < 1000; ++i) {
        for (const auto& g : de_propose(pop, {1.9, 1.0}, rng)) {
            ASSERT_GE(g.minCoeff(), 0.0);
            ASSERT_LE(g.maxCoeff(), 1.0);
        }
    }
}

TEST(Nsga2, SurvivalMatchesHandTrace)
{
    // Front 1: O. Front 2: P1..P5 with crowding P2=0.8, P3=0.75, P4=1.2 and
    // infinite boundaries. Two infeasible points rank last.
    std::vector<Individual> pool{
        make({3, 1.5}),   // 0 P4
        make({0, 0}, 2),  // 1 infeasible
        make({1, 5}),     // 2 P1
        make({0, 0}),     // 3 O
        make({2, 2.8}),   // 4 P3
        make({0, 0}, 1),  // 5 infeasible
        make({1.5, 3}),   // 6 P2
        make({5, 1}),     // 7 P5
    };
    auto fronts = constrained_fronts(pool);
    ASSERT_EQ(fronts.size(), 4u);
    EXPECT_EQ(fronts[0], (std::vector<std::size_t>{3}));
    EXPECT_EQ(fronts[1], (std::vector<std::size_t>{0, 2, 4, 6, 7}));
    EXPECT_EQ(fronts[2], (std::vector<std::size_t>{5}));
    EXPECT_EQ(fronts[3], (std::vector<std::size_t>{1}));

    auto survivors = nsga2_survival(pool, 4);
    std::vector<std::vector<double>> got;
    for (const auto& s : survivors) got.push_back(s.objectives);
    EXPECT_EQ(got, (std::vector<std::vector<double>>{{3, 1.5}, {1, 5}, {0, 0}, {5, 1}}));

    // With only two feasible slots filled, the smaller violation survives.
    std::vector<Individual> few{make({1, 1}, 3), make({0, 1}), make({1, 0}), make({2, 2}, 0.5)};
    auto kept = nsga2_survival(few, 3);
    ASSERT_EQ(kept.size(), 3u);
    EXPECT_EQ(kept[2].constraint_violation, 0.5);
}

TEST(Nsga2, ElitismWhenOffspringAreWorse)
{
    std::vector<Individual> pool;
    for (int i = 0; i < 4; ++i) pool.push_back(make({static_cast<double>(i), 3.0 - i}));
    for (int i = 0; i < 4; ++i) pool.push_back(make({10.0 + i, 10.0 + i}));
    auto next = nsga2_survival(pool, 4);
    ASSERT_EQ(next.size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(next[i].objectives, pool[i].objectives);
}

double front_hv(const std::vector<Individual>& inds)
{
    std::vector<moo::Point> pts;
    for (const auto& ind : inds)
        if (ind.feasible()) pts.push_back(ind.objectives);
    return moo::hypervolume(pts, {10, 10});
}

std::vector<moo::Point> first_front(const std::vector<Individual>& inds)
{
    std::vector<moo::Point> pts;
    const auto fronts = constrained_fronts(inds);
    for (auto i : fronts.front())
        if (inds[i].feasible()) pts.push_back(inds[i].objectives);
    return pts;
}

TEST(Nsga2, FirstFrontNeverRegresses)
{
    Rng rng(6);
    auto pop = random_population(20, 2, constr, rng);
    for (int g = 0; g < 20; ++g) {
        auto next = nsga2_step(pop, {}, constr, rng);
        const auto before = first_front(pop.individuals);
        for (const auto& p : first_front(next.individuals))
            for (const auto& q : before) EXPECT_FALSE(moo::dominates(q, p));
        pop = std::move(next);
    }
}

TEST(Nsga2, BeatsRandomSelectionOnConstr)
{
    std::vector<double> evolved, baseline;
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(s);
        auto pop = random_population(40, 2, constr, rng);
        for (int g = 0; g < 30; ++g) pop = nsga2_step(pop, {}, constr, rng);
        evolved.push_back(front_hv(pop.individuals));

        // Same number of evaluations, keeping a random subset each generation.
        Rng brng(s + 1000);
        auto rpop = random_population(40, 2, constr, brng);
        std::vector<Individual> archive = rpop.individuals;
        for (int g = 0; g < 30; ++g) {
            auto children = random_population(40, 2, constr, brng);
            std::vector<Individual> pool = rpop.individuals;
            pool.insert(pool.end(), children.individuals.begin(), children.individuals.end());
            std::shuffle(pool.begin(), pool.end(), brng);
            pool.resize(40);
            rpop.individuals = pool;
        }
        baseline.push_back(front_hv(rpop.individuals));
    }
    std::sort(evolved.begin(), evolved.end());
    std::sort(baseline.begin(), baseline.end());
    EXPECT_GE(evolved[5], baseline[5]);
}

TEST(Evolution, DeterministicUnderSeed)
{
    auto run = [](std::uint64_t seed) {
        Rng rng(seed);
        auto pop = random_population(8, 2, constr, rng);
        for (int g = 0; g < 5; ++g) pop = nsga2_step(pop, {}, constr, rng);
        std::vector<double> genes;
        for (const auto& ind : pop.individuals)
            genes.insert(genes.end(), ind.genome.data(), ind.genome.data() + ind.genome.size());
        return genes;
    };
    EXPECT_EQ(run(7), run(7));
    EXPECT_NE(run(7), run(8));
}

} // namespace
} // namespace bbo
