#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "obh/rng.hpp"

namespace obh::ais {

// Closed interval for one genome component.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// A candidate solution. fitness stays empty until evaluate() runs.
struct Antibody {
    std::vector<double> genome;
    std::optional<double> fitness;
};

struct Population {
    std::vector<Antibody> members;
    std::uint64_t generation = 0;
};

// Evaluation contract: deterministic, higher fitness is better. Minimization
// problems are wrapped by negating the objective.
struct Objective {
    std::vector<Interval> bounds;
    std::function<double(const std::vector<double>&)> fitness;
};

struct ClonalParams {
    std::size_t population_size = 50;
    std::size_t select_count = 10;
    double clone_factor = 1.0;   // beta
    double mutation_base = 0.3;  // sigma0
    std::size_t replace_count = 5;
    std::size_t max_generations = 100;
    std::uint64_t seed = 0;

    // Throws ConfigError when any invariant is violated.
    void validate() const;
};

struct HistoryPoint {
    std::uint64_t generation = 0;
    double best_fitness = 0.0;
};

struct RunResult {
    Antibody best;
    std::vector<HistoryPoint> history; // best-so-far per generation, non-decreasing
    std::size_t evaluations = 0;       // total objective calls, including init
};

// Number of clones granted to the antibody at 1-based rank r:
// round(beta * N / r), half away from zero, never below 1.
std::size_t clone_count(double clone_factor, std::size_t population_size, std::size_t rank);

// Gaussian step scale for rank r of k: sigma0 * (r / k). Elites move little,
// tail selections explore.
double mutation_scale(double mutation_base, std::size_t rank, std::size_t select_count);

// N antibodies drawn uniformly within bounds, all unevaluated, generation 0.
// Draw order: member-major, component-minor.
Population init_population(const ClonalParams& params, const Objective& objective, Rng& rng);

// Sets every member's fitness. Order and genomes unchanged.
void evaluate(Population& pop, const Objective& objective);

// Indices of the k best members, best first; ties broken by lower index.
std::vector<std::size_t> select_top_indices(const Population& pop, std::size_t k);

// Copies of the k best members, best first.
std::vector<Antibody> select_top(const Population& pop, std::size_t k);

// For the selection ordered best-first (ranks 1..k): clone_count(r) clones
// each, perturbed per component by gaussian * mutation_scale(r), clamped to
// bounds, evaluated. Output is rank-major; originals untouched.
std::vector<Antibody> clone_and_hypermutate(const std::vector<Antibody>& selected,
                                            const ClonalParams& params,
                                            const Objective& objective,
                                            Rng& rng);

// Deletes the d lowest-fitness members, then inserts the best d newcomers.
// The single best antibody across the old population and the newcomers is
// always retained: if it would be lost, it takes the worst slot of the result.
void replace_worst(Population& pop, const std::vector<Antibody>& newcomers,
                   std::size_t d, const ClonalParams& params);

// Full loop for max_generations. Per generation, in fixed draw order:
// select top k, clone and hypermutate, merge each parent's best clone into the
// parent's slot when it beats the parent, then replace the d worst with fresh
// uniform-random antibodies (delete-then-add, elitist slot protected).
RunResult run(const Objective& objective, const ClonalParams& params);

} // namespace obh::ais
