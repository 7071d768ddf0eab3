#include "obh/dedup.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "obh/errors.hpp"

namespace obh::dedup {

namespace {

std::unordered_map<std::size_t, std::size_t> index_by_id(const std::vector<Record>& records) {
    std::unordered_map<std::size_t, std::size_t> map;
    map.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!map.emplace(records[i].id, i).second) {
            throw InputError("dedup: duplicate record id " + std::to_string(records[i].id));
        }
    }
    return map;
}

const Record& record_for(const std::vector<Record>& records,
                         const std::unordered_map<std::size_t, std::size_t>& index,
                         std::size_t id) {
    auto it = index.find(id);
    if (it == index.end()) {
        throw InputError("dedup: pair references unknown record id " + std::to_string(id));
    }
    return records[it->second];
}

} // namespace

void KeySpec::validate(std::size_t schema_arity) const {
    if (token_count == 0) {
        throw ConfigError("key: token_count must be at least 1");
    }
    if (prefix_len == 0) {
        throw ConfigError("key: prefix_len must be at least 1");
    }
    if (fields_used.empty()) {
        throw ConfigError("key: fields_used must not be empty");
    }
    for (std::size_t idx : fields_used) {
        if (idx >= schema_arity) {
            throw ConfigError("key: fields_used references field index " +
                              std::to_string(idx) + " outside the schema");
        }
    }
}

void MatchPolicy::validate() const {
    if (weights.empty()) {
        throw ConfigError("policy: weights must not be empty");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) {
            throw ConfigError("policy: weights must be non-negative");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("policy: weights must sum to 1");
    }
    if (!(0.0 <= theta_low && theta_low <= theta_high && theta_high <= 1.0)) {
        throw ConfigError("policy: thresholds must satisfy 0 <= theta_low <= theta_high <= 1");
    }
}

MatchPolicy MatchPolicy::from_genome(const std::vector<double>& genome) {
    if (genome.size() < 3) {
        throw ConfigError("policy: genome needs at least one weight plus two thresholds");
    }
    const std::size_t field_count = genome.size() - 2;
    MatchPolicy policy;
    policy.weights.resize(field_count);
    double sum = 0.0;
    for (std::size_t i = 0; i < field_count; ++i) {
        policy.weights[i] = std::clamp(genome[i], 0.0, 1.0);
        sum += policy.weights[i];
    }
    if (sum > 0.0) {
        for (double& w : policy.weights) {
            w /= sum;
        }
    } else {
        std::fill(policy.weights.begin(), policy.weights.end(),
                  1.0 / static_cast<double>(field_count));
    }
    double lo = std::clamp(genome[field_count], 0.0, 1.0);
    double hi = std::clamp(genome[field_count + 1], 0.0, 1.0);
    if (lo > hi) {
        std::swap(lo, hi);
    }
    policy.theta_low = lo;
    policy.theta_high = hi;
    return policy;
}

std::vector<double> MatchPolicy::to_genome() const {
    std::vector<double> genome = weights;
    genome.push_back(theta_low);
    genome.push_back(theta_high);
    return genome;
}

std::string_view decision_name(Decision d) {
    switch (d) {
    case Decision::Pending: return "PENDING";
    case Decision::Duplicate: return "DUPLICATE";
    case Decision::Ambiguous: return "AMBIGUOUS";
    case Decision::NonDuplicate: return "NON_DUPLICATE";
    }
    return "PENDING";
}

CandidatePair make_pair(std::size_t a, std::size_t b) {
    CandidatePair p;
    p.left = std::min(a, b);
    p.right = std::max(a, b);
    return p;
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char ch : text) {
        if (std::isspace(ch)) {
            pending_space = true;
            continue;
        }
        if (std::ispunct(ch)) {
            continue;
        }
        if (pending_space && !out.empty()) {
            out.push_back(' ');
        }
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(ch)));
    }
    return out;
}

Record normalize(const Record& record) {
    Record out;
    out.id = record.id;
    out.fields.reserve(record.fields.size());
    for (const auto& field : record.fields) {
        out.fields.push_back(normalize_text(field));
    }
    return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    if (a == b) {
        return 0;
    }
    if (a.empty()) {
        return b.size();
    }
    if (b.empty()) {
        return a.size();
    }
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> curr(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 0; i < a.size(); ++i) {
        curr[0] = i + 1;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const std::size_t cost = (a[i] == b[j]) ? 0 : 1;
            curr[j + 1] = std::min({prev[j + 1] + 1, curr[j] + 1, prev[j] + cost});
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

double field_similarity(std::string_view a, std::string_view b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) {
        return 1.0;
    }
    return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

std::string token_key(const Record& normalized, const KeySpec& spec) {
    std::vector<std::string> tokens;
    for (std::size_t idx : spec.fields_used) {
        if (idx >= normalized.fields.size()) {
            throw InputError("key: record " + std::to_string(normalized.id) +
                             " is narrower than the key spec");
        }
        const std::string& field = normalized.fields[idx];
        std::size_t start = 0;
        while (start < field.size()) {
            std::size_t end = field.find(' ', start);
            if (end == std::string::npos) {
                end = field.size();
            }
            if (end > start) {
                tokens.emplace_back(field.substr(start, end - start));
            }
            start = end + 1;
        }
    }
    std::sort(tokens.begin(), tokens.end());
    std::string key;
    const std::size_t take = std::min(spec.token_count, tokens.size());
    for (std::size_t i = 0; i < take; ++i) {
        key += tokens[i].substr(0, spec.prefix_len);
    }
    return key;
}

std::vector<CandidatePair> sort_and_window(const std::vector<Record>& normalized,
                                           const KeySpec& spec, std::size_t window) {
    if (window < 2) {
        throw ConfigError("window: size must be at least 2");
    }
    std::vector<std::pair<std::string, std::size_t>> keyed;
    keyed.reserve(normalized.size());
    for (const auto& record : normalized) {
        keyed.emplace_back(token_key(record, spec), record.id);
    }
    std::sort(keyed.begin(), keyed.end());

    std::vector<CandidatePair> pairs;
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        const std::size_t last = std::min(i + window, keyed.size());
        for (std::size_t j = i + 1; j < last; ++j) {
            pairs.push_back(make_pair(keyed[i].second, keyed[j].second));
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const CandidatePair& a, const CandidatePair& b) {
        return a.left != b.left ? a.left < b.left : a.right < b.right;
    });
    pairs.erase(std::unique(pairs.begin(), pairs.end(),
                            [](const CandidatePair& a, const CandidatePair& b) {
                                return a.left == b.left && a.right == b.right;
                            }),
                pairs.end());
    return pairs;
}

double record_similarity(const Record& left, const Record& right,
                         const MatchPolicy& policy) {
    policy.validate();
    if (left.fields.size() != policy.weights.size() ||
        right.fields.size() != policy.weights.size()) {
        throw InputError("similarity: record arity does not match the policy schema");
    }
    double score = 0.0;
    for (std::size_t i = 0; i < policy.weights.size(); ++i) {
        score += policy.weights[i] * field_similarity(left.fields[i], right.fields[i]);
    }
    return score;
}

Decision classify(double score, const MatchPolicy& policy) {
    if (score >= policy.theta_high) {
        return Decision::Duplicate;
    }
    if (score >= policy.theta_low) {
        return Decision::Ambiguous;
    }
    return Decision::NonDuplicate;
}

void score_pairs(std::vector<CandidatePair>& pairs,
                 const std::vector<Record>& normalized,
                 const MatchPolicy& policy) {
    const auto index = index_by_id(normalized);
    for (auto& pair : pairs) {
        const Record& left = record_for(normalized, index, pair.left);
        const Record& right = record_for(normalized, index, pair.right);
        const double score = record_similarity(left, right, policy);
        pair.score = score;
        pair.decision = classify(score, policy);
    }
}

CalibrationSet CalibrationSet::build(const std::vector<Record>& normalized,
                                     const std::vector<LabeledPair>& pairs) {
    CalibrationSet set;
    if (normalized.empty()) {
        throw ConfigError("calibration: no records supplied");
    }
    set.field_count_ = normalized.front().fields.size();
    const auto index = index_by_id(normalized);
    set.field_sims_.reserve(pairs.size() * set.field_count_);
    set.labels_.reserve(pairs.size());
    for (const auto& pair : pairs) {
        const Record& left = record_for(normalized, index, pair.left);
        const Record& right = record_for(normalized, index, pair.right);
        if (left.fields.size() != set.field_count_ || right.fields.size() != set.field_count_) {
            throw InputError("calibration: records disagree on schema arity");
        }
        for (std::size_t f = 0; f < set.field_count_; ++f) {
            set.field_sims_.push_back(field_similarity(left.fields[f], right.fields[f]));
        }
        set.labels_.push_back(pair.is_duplicate ? 1 : 0);
    }
    return set;
}

double CalibrationSet::score(std::size_t i, const MatchPolicy& policy) const {
    const double* sims = field_sims_.data() + i * field_count_;
    double score = 0.0;
    for (std::size_t f = 0; f < field_count_; ++f) {
        score += policy.weights[f] * sims[f];
    }
    return score;
}

double policy_fitness(const MatchPolicy& policy, const CalibrationSet& calibration) {
    if (calibration.size() == 0) {
        throw ConfigError("calibration: empty calibration set");
    }
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < calibration.size(); ++i) {
        const bool predicted = classify(calibration.score(i, policy), policy) == Decision::Duplicate;
        const bool actual = calibration.label(i);
        if (predicted && actual) {
            ++tp;
        } else if (predicted && !actual) {
            ++fp;
        } else if (!predicted && actual) {
            ++fn;
        }
    }
    if (tp + fp == 0 || tp + fn == 0) {
        return 0.0;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (precision + recall == 0.0) {
        return 0.0;
    }
    return 2.0 * precision * recall / (precision + recall);
}

ais::Objective policy_objective(std::size_t field_count, const CalibrationSet& calibration) {
    if (field_count == 0) {
        throw ConfigError("calibration: field_count must be positive");
    }
    if (calibration.size() == 0) {
        throw ConfigError("calibration: empty calibration set");
    }
    ais::Objective obj;
    obj.bounds.assign(field_count + 2, ais::Interval{0.0, 1.0});
    obj.fitness = [&calibration](const std::vector<double>& genome) {
        return policy_fitness(MatchPolicy::from_genome(genome), calibration);
    };
    return obj;
}

std::vector<CandidatePair> resolve_backlog(const std::vector<CandidatePair>& backlog,
                                           const std::vector<Record>& normalized,
                                           const MatchPolicy& policy) {
    std::vector<CandidatePair> out = backlog;
    score_pairs(out, normalized, policy);
    return out;
}

} // namespace obh::dedup
