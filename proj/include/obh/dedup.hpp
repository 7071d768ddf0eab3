#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "obh/ais.hpp"

namespace obh::dedup {

struct Record {
    std::size_t id = 0;
    std::vector<std::string> fields;
};

// Sort-key recipe: tokenize the used fields, sort tokens, keep the first
// token_count tokens, take prefix_len characters of each.
struct KeySpec {
    std::size_t token_count = 3;
    std::size_t prefix_len = 4;
    std::vector<std::size_t> fields_used; // indices into the schema

    void validate(std::size_t schema_arity) const;
};

// The tunable match policy; this is what the optimizer's genome encodes.
struct MatchPolicy {
    std::vector<double> weights; // one per field, non-negative, sum 1
    double theta_low = 0.6;
    double theta_high = 0.85;

    void validate() const;

    // Decode a genome of field_count raw weights plus both thresholds.
    // Raw weights are clamped to [0,1] and renormalized (uniform when all
    // zero); thresholds are clamped to [0,1] and swapped if inverted, so any
    // mutated genome decodes to a feasible policy.
    static MatchPolicy from_genome(const std::vector<double>& genome);
    std::vector<double> to_genome() const;
};

enum class Decision { Pending, Duplicate, Ambiguous, NonDuplicate };

std::string_view decision_name(Decision d);

struct CandidatePair {
    std::size_t left = 0;  // canonical: left < right
    std::size_t right = 0;
    std::optional<double> score;
    Decision decision = Decision::Pending;
};

CandidatePair make_pair(std::size_t a, std::size_t b);

// Lowercase, strip punctuation, collapse whitespace. Idempotent.
std::string normalize_text(std::string_view text);
Record normalize(const Record& record);

// Classic Levenshtein distance.
std::size_t edit_distance(std::string_view a, std::string_view b);

// 1 - editDistance(a,b) / max(len(a), len(b)); 1.0 when both are empty.
double field_similarity(std::string_view a, std::string_view b);

// Key of a normalized record. Invariant under token order and under any
// casing / punctuation the normalization removes.
std::string token_key(const Record& normalized, const KeySpec& spec);

// Sorted-neighborhood candidate generation over normalized records: sort by
// token key (ties by record id), pair each record with its window-1
// successors. Pairs come back canonical and sorted by (left, right).
std::vector<CandidatePair> sort_and_window(const std::vector<Record>& normalized,
                                           const KeySpec& spec, std::size_t window);

// Weighted mean of per-field similarities. Records must match the policy's
// schema arity.
double record_similarity(const Record& left, const Record& right,
                         const MatchPolicy& policy);

Decision classify(double score, const MatchPolicy& policy);

// Scores and classifies every pair in place. records must be normalized;
// pair ids are looked up by record id.
void score_pairs(std::vector<CandidatePair>& pairs,
                 const std::vector<Record>& normalized,
                 const MatchPolicy& policy);

struct LabeledPair {
    std::size_t left = 0;
    std::size_t right = 0;
    bool is_duplicate = false;
};

// Labeled pairs with per-field similarities precomputed once, so evaluating a
// candidate policy is a dot product per pair.
class CalibrationSet {
public:
    static CalibrationSet build(const std::vector<Record>& normalized,
                                const std::vector<LabeledPair>& pairs);

    std::size_t size() const { return labels_.size(); }
    std::size_t field_count() const { return field_count_; }
    bool label(std::size_t i) const { return labels_[i] != 0; }
    double score(std::size_t i, const MatchPolicy& policy) const;

private:
    std::size_t field_count_ = 0;
    std::vector<double> field_sims_; // size * field_count, row-major
    std::vector<char> labels_;
};

// F1 of the policy's DUPLICATE decisions against the calibration labels.
// AMBIGUOUS counts as not identified. 0 when no positives are predicted or
// present.
double policy_fitness(const MatchPolicy& policy, const CalibrationSet& calibration);

// Objective over the policy genome, for the clonal selection optimizer.
ais::Objective policy_objective(std::size_t field_count, const CalibrationSet& calibration);

// Rescore and reclassify AMBIGUOUS pairs under a new policy. Pairs that stay
// inside the ambiguity band remain AMBIGUOUS.
std::vector<CandidatePair> resolve_backlog(const std::vector<CandidatePair>& backlog,
                                           const std::vector<Record>& normalized,
                                           const MatchPolicy& policy);

} // namespace obh::dedup
