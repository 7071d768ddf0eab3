#include "obh/ais.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "obh/errors.hpp"

namespace obh::ais {

namespace {

std::string describe_genome(const std::vector<double>& genome) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < genome.size(); ++i) {
        if (i > 0) os << ", ";
        os << genome[i];
    }
    os << ")";
    return os.str();
}

double fitness_of(const Antibody& a) {
    if (!a.fitness) {
        throw StateError("ais: antibody is unevaluated");
    }
    return *a.fitness;
}

void evaluate_one(Antibody& a, const Objective& objective) {
    double value = 0.0;
    try {
        value = objective.fitness(a.genome);
    } catch (const std::exception& e) {
        throw RunError(std::string("ais: objective failed on genome ") +
                       describe_genome(a.genome) + ": " + e.what());
    }
    if (!std::isfinite(value)) {
        throw RunError("ais: objective returned non-finite fitness on genome " +
                       describe_genome(a.genome));
    }
    a.fitness = value;
}

double clamp_to(const Interval& b, double x) {
    return std::min(b.hi, std::max(b.lo, x));
}

} // namespace

void ClonalParams::validate() const {
    if (population_size == 0) {
        throw ConfigError("clonal: population_size must be positive");
    }
    if (select_count == 0 || select_count > population_size) {
        throw ConfigError("clonal: select_count must satisfy 1 <= k <= N");
    }
    if (replace_count > population_size) {
        throw ConfigError("clonal: replace_count must satisfy d <= N");
    }
    if (!(clone_factor > 0.0)) {
        throw ConfigError("clonal: clone_factor must be positive");
    }
    if (!(mutation_base >= 0.0)) {
        throw ConfigError("clonal: mutation_base must be non-negative");
    }
    if (max_generations == 0) {
        throw ConfigError("clonal: max_generations must be positive");
    }
}

std::size_t clone_count(double clone_factor, std::size_t population_size, std::size_t rank) {
    const double raw = clone_factor * static_cast<double>(population_size) /
                       static_cast<double>(rank);
    const long long rounded = std::llround(raw); // half away from zero
    return static_cast<std::size_t>(std::max<long long>(1, rounded));
}

double mutation_scale(double mutation_base, std::size_t rank, std::size_t select_count) {
    return mutation_base * static_cast<double>(rank) / static_cast<double>(select_count);
}

Population init_population(const ClonalParams& params, const Objective& objective, Rng& rng) {
    params.validate();
    if (objective.bounds.empty()) {
        throw ConfigError("ais: objective declares no genome bounds");
    }
    Population pop;
    pop.generation = 0;
    pop.members.resize(params.population_size);
    for (auto& member : pop.members) {
        member.genome.reserve(objective.bounds.size());
        for (const auto& b : objective.bounds) {
            member.genome.push_back(rng.uniform(b.lo, b.hi));
        }
    }
    return pop;
}

void evaluate(Population& pop, const Objective& objective) {
    for (auto& member : pop.members) {
        evaluate_one(member, objective);
    }
}

std::vector<std::size_t> select_top_indices(const Population& pop, std::size_t k) {
    if (k > pop.members.size()) {
        throw StateError("ais: select_top asked for more members than the population holds");
    }
    for (const auto& member : pop.members) {
        fitness_of(member);
    }
    std::vector<std::size_t> order(pop.members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *pop.members[a].fitness > *pop.members[b].fitness;
    });
    order.resize(k);
    return order;
}

std::vector<Antibody> select_top(const Population& pop, std::size_t k) {
    std::vector<Antibody> picked;
    picked.reserve(k);
    for (std::size_t idx : select_top_indices(pop, k)) {
        picked.push_back(pop.members[idx]);
    }
    return picked;
}

std::vector<Antibody> clone_and_hypermutate(const std::vector<Antibody>& selected,
                                            const ClonalParams& params,
                                            const Objective& objective,
                                            Rng& rng) {
    if (selected.empty()) {
        throw StateError("ais: clone_and_hypermutate on empty selection");
    }
    const std::size_t k = selected.size();
    std::vector<Antibody> clones;
    for (std::size_t rank = 1; rank <= k; ++rank) {
        const Antibody& parent = selected[rank - 1];
        fitness_of(parent);
        const std::size_t count = clone_count(params.clone_factor, params.population_size, rank);
        const double scale = mutation_scale(params.mutation_base, rank, k);
        for (std::size_t c = 0; c < count; ++c) {
            Antibody clone;
            clone.genome.reserve(parent.genome.size());
            for (std::size_t dim = 0; dim < parent.genome.size(); ++dim) {
                const double step = rng.gaussian() * scale;
                clone.genome.push_back(clamp_to(objective.bounds[dim],
                                                parent.genome[dim] + step));
            }
            evaluate_one(clone, objective);
            clones.push_back(std::move(clone));
        }
    }
    return clones;
}

void replace_worst(Population& pop, const std::vector<Antibody>& newcomers,
                   std::size_t d, const ClonalParams& params) {
    (void)params;
    if (newcomers.size() < d) {
        throw StateError("ais: replace_worst needs at least d newcomers");
    }
    for (const auto& member : pop.members) {
        fitness_of(member);
    }
    for (const auto& n : newcomers) {
        fitness_of(n);
    }

    // Best across old population and newcomers; population wins ties.
    Antibody best_overall;
    bool have_best = false;
    for (const auto& member : pop.members) {
        if (!have_best || *member.fitness > *best_overall.fitness) {
            best_overall = member;
            have_best = true;
        }
    }
    for (const auto& n : newcomers) {
        if (!have_best || *n.fitness > *best_overall.fitness) {
            best_overall = n;
            have_best = true;
        }
    }

    // Delete the d worst, keeping lower-index members on ties.
    std::vector<std::size_t> order(pop.members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *pop.members[a].fitness > *pop.members[b].fitness;
    });
    std::vector<Antibody> kept;
    kept.reserve(pop.members.size());
    const std::size_t keep_n = pop.members.size() - d;
    std::vector<std::size_t> keep_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep_n));
    std::sort(keep_idx.begin(), keep_idx.end()); // preserve member order
    for (std::size_t idx : keep_idx) {
        kept.push_back(std::move(pop.members[idx]));
    }

    // Insert the best d newcomers, in fitness order.
    std::vector<std::size_t> norder(newcomers.size());
    std::iota(norder.begin(), norder.end(), std::size_t{0});
    std::stable_sort(norder.begin(), norder.end(), [&](std::size_t a, std::size_t b) {
        return *newcomers[a].fitness > *newcomers[b].fitness;
    });
    for (std::size_t i = 0; i < d; ++i) {
        kept.push_back(newcomers[norder[i]]);
    }

    // Elitist slot: the overall best always survives.
    if (have_best && !kept.empty()) {
        auto best_kept = std::max_element(kept.begin(), kept.end(),
                                          [](const Antibody& a, const Antibody& b) {
                                              return *a.fitness < *b.fitness;
                                          });
        if (*best_kept->fitness < *best_overall.fitness) {
            auto worst_kept = std::min_element(kept.begin(), kept.end(),
                                               [](const Antibody& a, const Antibody& b) {
                                                   return *a.fitness < *b.fitness;
                                               });
            *worst_kept = best_overall;
        }
    }

    pop.members = std::move(kept);
}

RunResult run(const Objective& objective, const ClonalParams& params) {
    params.validate();
    Rng rng(params.seed);

    RunResult result;
    Population pop = init_population(params, objective, rng);
    evaluate(pop, objective);
    result.evaluations = pop.members.size();

    auto best_member = [&]() {
        return *std::max_element(pop.members.begin(), pop.members.end(),
                                 [](const Antibody& a, const Antibody& b) {
                                     return *a.fitness < *b.fitness;
                                 });
    };
    result.best = best_member();

    result.history.reserve(params.max_generations);
    for (std::size_t gen = 0; gen < params.max_generations; ++gen) {
        const auto top = select_top_indices(pop, params.select_count);
        std::vector<Antibody> selected;
        selected.reserve(top.size());
        for (std::size_t idx : top) {
            selected.push_back(pop.members[idx]);
        }

        const auto clones = clone_and_hypermutate(selected, params, objective, rng);
        result.evaluations += clones.size();

        // Merge each parent's best clone into the parent's slot when it wins.
        std::size_t offset = 0;
        for (std::size_t rank = 1; rank <= top.size(); ++rank) {
            const std::size_t count = clone_count(params.clone_factor, params.population_size, rank);
            const Antibody* best_clone = nullptr;
            for (std::size_t c = 0; c < count; ++c) {
                const Antibody& candidate = clones[offset + c];
                if (best_clone == nullptr || *candidate.fitness > *best_clone->fitness) {
                    best_clone = &candidate;
                }
            }
            offset += count;
            Antibody& parent_slot = pop.members[top[rank - 1]];
            if (best_clone != nullptr && *best_clone->fitness > *parent_slot.fitness) {
                parent_slot = *best_clone;
            }
        }

        // Fresh uniform-random newcomers for diversification.
        std::vector<Antibody> fresh;
        fresh.reserve(params.replace_count);
        for (std::size_t i = 0; i < params.replace_count; ++i) {
            Antibody a;
            a.genome.reserve(objective.bounds.size());
            for (const auto& b : objective.bounds) {
                a.genome.push_back(rng.uniform(b.lo, b.hi));
            }
            evaluate_one(a, objective);
            fresh.push_back(std::move(a));
        }
        result.evaluations += fresh.size();

        replace_worst(pop, fresh, params.replace_count, params);
        pop.generation += 1;

        const Antibody current_best = best_member();
        if (*current_best.fitness > *result.best.fitness) {
            result.best = current_best;
        }
        result.history.push_back({pop.generation, *result.best.fitness});
    }
    return result;
}

} // namespace obh::ais
