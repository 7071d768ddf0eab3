#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "obh/dedup.hpp"

namespace obh::eval {

// Known duplicate pairs, canonical (left < right), no self-pairs.
struct GroundTruth {
    std::set<std::pair<std::size_t, std::size_t>> pairs;

    void add(std::size_t a, std::size_t b);
    bool contains(std::size_t a, std::size_t b) const;
    std::size_t size() const { return pairs.size(); }
};

// A zero denominator leaves the metric empty: reported as an explicit
// undefined status, never silently coerced to 0 or 1.
struct MetricsReport {
    std::size_t identified = 0;
    std::size_t correctly_identified = 0;
    std::size_t wrongly_identified = 0;
    std::optional<double> recall_eq1;
    std::optional<double> fp_error_eq2;
    std::optional<double> conventional_precision;
    std::optional<double> conventional_recall;
};

// correct / identified.
std::optional<double> recall_eq1(std::size_t correct, std::size_t identified);

// wrong / identified. Complements recall_eq1 whenever identified > 0.
std::optional<double> fp_error_eq2(std::size_t wrong, std::size_t identified);

// Standard precision (tp / predicted positives) and recall (tp / |truth|).
std::pair<std::optional<double>, std::optional<double>>
conventional_metrics(const std::vector<dedup::CandidatePair>& decisions,
                     const GroundTruth& truth);

// Every unordered pair scored and classified with the same similarity and
// classification operations the window path uses. Guarded at n <= 5000.
std::vector<dedup::CandidatePair> brute_force_oracle(const std::vector<dedup::Record>& normalized,
                                                     const dedup::MatchPolicy& policy);

struct SyntheticData {
    std::vector<dedup::Record> records;
    GroundTruth truth;
};

// Copy round(dup_rate * n) source records, corrupt each copy with 1..max_edits
// character-level edits spread over random fields, append, shuffle, reindex.
// A transposition consumes two units of the edit budget, so every copy stays
// within max_edits plain edit distance of its source.
SyntheticData inject_duplicates(const std::vector<dedup::Record>& clean,
                                double dup_rate, std::size_t max_edits,
                                std::uint64_t seed);

// Seeded clean person-like records over synthetic_schema(); all distinct.
std::vector<dedup::Record> make_clean_records(std::size_t n, std::uint64_t seed);
std::vector<std::string> synthetic_schema();

// Counts DUPLICATE decisions against the truth set and fills in both metric
// families. Decisions must be final.
MetricsReport score_run(const std::vector<dedup::CandidatePair>& decisions,
                        const GroundTruth& truth);

} // namespace obh::eval
