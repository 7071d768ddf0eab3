#include <algorithm>
#include <cmath>
#include <set>

#include <doctest.h>

#include "obh/ais.hpp"
#include "obh/benchmarks.hpp"
#include "obh/errors.hpp"
#include "support.hpp"

using namespace obh;
using namespace obh::ais;

namespace {

Objective unit_box_sphere(std::size_t dims) {
    Objective obj;
    obj.bounds.assign(dims, Interval{0.0, 1.0});
    obj.fitness = [](const std::vector<double>& x) {
        double sum = 0.0;
        for (double v : x) sum += v * v;
        return -sum;
    };
    return obj;
}

Population population_with_fitness(const std::vector<double>& fitnesses) {
    Population pop;
    for (std::size_t i = 0; i < fitnesses.size(); ++i) {
        Antibody a;
        a.genome = {static_cast<double>(i)};
        a.fitness = fitnesses[i];
        pop.members.push_back(a);
    }
    return pop;
}

ClonalParams tiny_params() {
    ClonalParams p;
    p.population_size = 5;
    p.select_count = 2;
    p.clone_factor = 1.0;
    p.mutation_base = 0.1;
    p.replace_count = 1;
    p.max_generations = 3;
    p.seed = 9;
    return p;
}

} // namespace

TEST_CASE("params: invariants enforced at construction") {
    ClonalParams p = tiny_params();
    CHECK_NOTHROW(p.validate());

    p.select_count = 6; // k > N
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = tiny_params();
    p.replace_count = 9; // d > N
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = tiny_params();
    p.population_size = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = tiny_params();
    p.clone_factor = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("init_population: bounds, cardinality, determinism") {
    ClonalParams p = tiny_params();

    SUBCASE("single member stays inside the unit box") {
        p.population_size = 1;
        p.select_count = 1;
        p.replace_count = 0;
        Rng rng(77);
        const auto pop = init_population(p, unit_box_sphere(3), rng);
        REQUIRE(pop.members.size() == 1);
        for (double x : pop.members[0].genome) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
        }
        CHECK(pop.generation == 0);
        CHECK_FALSE(pop.members[0].fitness.has_value());
    }

    SUBCASE("N=50, dim=5") {
        p.population_size = 50;
        Rng rng(5);
        const auto pop = init_population(p, unit_box_sphere(5), rng);
        REQUIRE(pop.members.size() == 50);
        for (const auto& m : pop.members) {
            CHECK(m.genome.size() == 5);
        }
    }

    SUBCASE("same seed yields bitwise-identical genomes") {
        Rng rng_a(123);
        Rng rng_b(123);
        const auto a = init_population(p, unit_box_sphere(4), rng_a);
        const auto b = init_population(p, unit_box_sphere(4), rng_b);
        REQUIRE(a.members.size() == b.members.size());
        for (std::size_t i = 0; i < a.members.size(); ++i) {
            CHECK(a.members[i].genome == b.members[i].genome);
        }
    }
}

TEST_CASE("evaluate: sphere values and determinism") {
    Objective sphere = unit_box_sphere(3);
    Population pop;
    Antibody origin;
    origin.genome = {0.0, 0.0, 0.0};
    pop.members.push_back(origin);
    evaluate(pop, sphere);
    CHECK(*pop.members[0].fitness == 0.0);

    Objective sphere2 = unit_box_sphere(2);
    sphere2.bounds = {Interval{-3, 3}, Interval{-3, 3}};
    Population pop2;
    Antibody a;
    a.genome = {1.0, 2.0};
    pop2.members.push_back(a);
    evaluate(pop2, sphere2);
    CHECK(*pop2.members[0].fitness == -5.0);

    const double before = *pop2.members[0].fitness;
    evaluate(pop2, sphere2);
    CHECK(*pop2.members[0].fitness == before);
}

TEST_CASE("evaluate: objective failure carries the genome") {
    Objective bad;
    bad.bounds = {Interval{0, 1}};
    bad.fitness = [](const std::vector<double>&) -> double {
        throw std::runtime_error("boom");
    };
    Population pop;
    Antibody a;
    a.genome = {0.25};
    pop.members.push_back(a);
    CHECK_THROWS_WITH_AS(evaluate(pop, bad), doctest::Contains("0.25"), RunError);
}

TEST_CASE("select_top: ordering, ties, boundaries") {
    const auto pop = population_with_fitness({3, 1, 4, 1, 5});

    SUBCASE("best two") {
        const auto idx = select_top_indices(pop, 2);
        REQUIRE(idx.size() == 2);
        CHECK(idx[0] == 4); // fitness 5
        CHECK(idx[1] == 2); // fitness 4
    }

    SUBCASE("ties broken by lower index") {
        const auto tied = population_with_fitness({1, 1, 1});
        const auto idx = select_top_indices(tied, 2);
        CHECK(idx == std::vector<std::size_t>{0, 1});
    }

    SUBCASE("k = N sorts the whole population") {
        const auto idx = select_top_indices(pop, 5);
        CHECK(idx == std::vector<std::size_t>{4, 2, 0, 1, 3});
    }

    SUBCASE("unevaluated member is a state error") {
        Population raw = pop;
        raw.members[1].fitness.reset();
        CHECK_THROWS_AS(select_top_indices(raw, 2), StateError);
    }
}

TEST_CASE("clone_count: affinity-proportional schedule") {
    // beta=1, N=5: 5/1, 5/2, 5/3, 5/4, 5/5 -> 5, 3, 2, 1, 1
    CHECK(clone_count(1.0, 5, 1) == 5);
    CHECK(clone_count(1.0, 5, 2) == 3);
    CHECK(clone_count(1.0, 5, 3) == 2);
    CHECK(clone_count(1.0, 5, 4) == 1);
    CHECK(clone_count(1.0, 5, 5) == 1);
    // rounding is half away from zero: 50/4 = 12.5 -> 13
    CHECK(clone_count(1.0, 50, 4) == 13);
    // floor of one clone
    CHECK(clone_count(0.01, 5, 5) == 1);
}

TEST_CASE("mutation_scale: strictly increasing in rank") {
    const double s1 = mutation_scale(0.3, 1, 5);
    const double s5 = mutation_scale(0.3, 5, 5);
    CHECK(s1 == doctest::Approx(0.06));
    CHECK(s5 == doctest::Approx(0.3));
    for (std::size_t r = 1; r < 5; ++r) {
        CHECK(mutation_scale(0.3, r, 5) < mutation_scale(0.3, r + 1, 5));
    }
}

TEST_CASE("clone_and_hypermutate: counts, zero sigma, bounds") {
    ClonalParams p = tiny_params();
    Objective obj = unit_box_sphere(2);
    Population pop;
    for (int i = 0; i < 5; ++i) {
        Antibody a;
        a.genome = {0.5, 0.5};
        a.fitness = static_cast<double>(5 - i);
        pop.members.push_back(a);
    }

    SUBCASE("total clone count follows the schedule") {
        Rng rng(3);
        const auto selected = select_top(pop, 5);
        const auto clones = clone_and_hypermutate(selected, p, obj, rng);
        CHECK(clones.size() == 12); // 5+3+2+1+1
        for (const auto& c : clones) {
            CHECK(c.fitness.has_value());
        }
    }

    SUBCASE("sigma0 = 0 reproduces the parents") {
        p.mutation_base = 0.0;
        Rng rng(3);
        const auto selected = select_top(pop, 2);
        const auto clones = clone_and_hypermutate(selected, p, obj, rng);
        for (const auto& c : clones) {
            CHECK(c.genome == std::vector<double>{0.5, 0.5});
        }
    }

    SUBCASE("large sigma stays clamped inside bounds") {
        p.mutation_base = 50.0;
        Rng rng(3);
        const auto selected = select_top(pop, 5);
        const auto clones = clone_and_hypermutate(selected, p, obj, rng);
        for (const auto& c : clones) {
            for (double x : c.genome) {
                CHECK(x >= 0.0);
                CHECK(x <= 1.0);
            }
        }
    }

    SUBCASE("empty selection is a state error") {
        Rng rng(3);
        CHECK_THROWS_AS(clone_and_hypermutate({}, p, obj, rng), StateError);
    }
}

TEST_CASE("replace_worst: worst-two removal and elitism") {
    ClonalParams p = tiny_params();

    SUBCASE("the d worst go, all d newcomers arrive") {
        auto pop = population_with_fitness({5, 4, 3, 2, 1});
        const auto newcomers = population_with_fitness({6, 0}).members;
        replace_worst(pop, newcomers, 2, p);
        REQUIRE(pop.members.size() == 5);
        std::multiset<double> got;
        for (const auto& m : pop.members) {
            got.insert(*m.fitness);
        }
        CHECK(got == std::multiset<double>{0, 3, 4, 5, 6});
    }

    SUBCASE("d=0 still merges a dominating newcomer through the elitist slot") {
        auto pop = population_with_fitness({5, 4, 3, 2, 1});
        const auto newcomers = population_with_fitness({7}).members;
        replace_worst(pop, newcomers, 0, p);
        REQUIRE(pop.members.size() == 5);
        double max_fit = -1e300;
        double min_fit = 1e300;
        for (const auto& m : pop.members) {
            max_fit = std::max(max_fit, *m.fitness);
            min_fit = std::min(min_fit, *m.fitness);
        }
        CHECK(max_fit == 7.0);  // elite merged
        CHECK(min_fit == 2.0);  // worst slot gave way
    }

    SUBCASE("too few newcomers is a state error") {
        auto pop = population_with_fitness({5, 4, 3});
        CHECK_THROWS_AS(replace_worst(pop, {}, 1, p), StateError);
    }
}

TEST_CASE("run: history shape, elitism, determinism") {
    ClonalParams p;
    p.population_size = 20;
    p.select_count = 5;
    p.clone_factor = 1.0;
    p.mutation_base = 0.2;
    p.replace_count = 2;
    p.max_generations = 30;
    p.seed = 42;
    const Objective obj = negated_sphere(3, 2.0);

    const auto result = run(obj, p);
    REQUIRE(result.history.size() == 30);
    for (std::size_t i = 1; i < result.history.size(); ++i) {
        CHECK(result.history[i].best_fitness >= result.history[i - 1].best_fitness);
    }
    CHECK(*result.best.fitness == result.history.back().best_fitness);

    SUBCASE("single generation") {
        p.max_generations = 1;
        const auto one = run(obj, p);
        CHECK(one.history.size() == 1);
    }

    SUBCASE("same seed, identical history") {
        const auto again = run(obj, p);
        REQUIRE(again.history.size() == result.history.size());
        for (std::size_t i = 0; i < result.history.size(); ++i) {
            CHECK(again.history[i].best_fitness == result.history[i].best_fitness);
        }
        CHECK(again.best.genome == result.best.genome);
    }
}

TEST_CASE("run: population invariants hold across random seeds") {
    // Drive the per-generation operations directly so genomes are observable.
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 99ULL}) {
        ClonalParams p = tiny_params();
        p.seed = seed;
        p.max_generations = 10;
        Objective obj = unit_box_sphere(3);
        Rng rng(p.seed);
        Population pop = init_population(p, obj, rng);
        evaluate(pop, obj);
        for (std::size_t gen = 0; gen < p.max_generations; ++gen) {
            const auto selected = select_top(pop, p.select_count);
            const auto clones = clone_and_hypermutate(selected, p, obj, rng);
            replace_worst(pop, clones, p.replace_count, p);
            pop.generation += 1;

            CHECK(pop.members.size() == p.population_size);
            for (const auto& m : pop.members) {
                for (double x : m.genome) {
                    CHECK(x >= 0.0);
                    CHECK(x <= 1.0);
                }
            }
        }
        CHECK(pop.generation == 10);
    }
}

TEST_CASE("run: beats random search on the sphere at equal budget") {
    ClonalParams p;
    p.population_size = 20;
    p.select_count = 5;
    p.mutation_base = 0.2;
    p.replace_count = 2;
    p.max_generations = 40;
    p.seed = 7;
    const Objective obj = negated_sphere(3);
    const auto result = run(obj, p);
    const double baseline = obh::test::random_search(obj, result.evaluations, 7);
    CHECK(*result.best.fitness > baseline);
}

TEST_CASE("benchmarks: known optima and config errors") {
    const Objective sphere = negated_sphere(4);
    CHECK(sphere.fitness(std::vector<double>(4, 0.0)) == 0.0);

    const Objective ackley = negated_ackley(3);
    CHECK(ackley.fitness(std::vector<double>(3, 0.0)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ackley.fitness({1.0, -1.0, 0.5}) < -1.0);

    CHECK_THROWS_AS(negated_sphere(0), ConfigError);
}
