#include "obh/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "obh/errors.hpp"
#include "obh/rng.hpp"

namespace obh::eval {

namespace {

constexpr std::size_t kOracleGuard = 5000;
constexpr const char* kEditAlphabet = "abcdefghijklmnopqrstuvwxyz";

char random_letter(Rng& rng) {
    return kEditAlphabet[rng.index(26)];
}

enum class EditOp { Substitute, Insert, Delete, Transpose };

// One character-level edit on a random field. Returns the budget consumed
// (2 for a transposition, 1 otherwise).
std::size_t apply_edit(dedup::Record& record, std::size_t budget, Rng& rng) {
    std::vector<EditOp> ops = {EditOp::Substitute, EditOp::Insert, EditOp::Delete};
    if (budget >= 2) {
        ops.push_back(EditOp::Transpose);
    }
    const EditOp op = ops[rng.index(ops.size())];
    const std::size_t field_idx = rng.index(record.fields.size());
    std::string& field = record.fields[field_idx];

    switch (op) {
    case EditOp::Insert: {
        const std::size_t pos = rng.index(field.size() + 1);
        field.insert(field.begin() + static_cast<std::ptrdiff_t>(pos), random_letter(rng));
        return 1;
    }
    case EditOp::Substitute: {
        if (field.empty()) {
            field.push_back(random_letter(rng));
            return 1;
        }
        const std::size_t pos = rng.index(field.size());
        char replacement = random_letter(rng);
        while (replacement == field[pos]) {
            replacement = random_letter(rng);
        }
        field[pos] = replacement;
        return 1;
    }
    case EditOp::Delete: {
        if (field.empty()) {
            field.push_back(random_letter(rng));
            return 1;
        }
        field.erase(field.begin() + static_cast<std::ptrdiff_t>(rng.index(field.size())));
        return 1;
    }
    case EditOp::Transpose: {
        if (field.size() < 2) {
            field.push_back(random_letter(rng));
            return 1;
        }
        const std::size_t pos = rng.index(field.size() - 1);
        std::swap(field[pos], field[pos + 1]);
        return 2;
    }
    }
    return 1;
}

const char* kGivenNames[] = {
    "james", "mary", "robert", "patricia", "john", "jennifer", "michael", "linda",
    "david", "elizabeth", "william", "barbara", "richard", "susan", "joseph",
    "jessica", "thomas", "sarah", "charles", "karen", "amelia", "lucas", "mia",
    "oliver", "sofia", "ethan", "haruki", "yuki", "mateo", "ines", "nadia", "omar",
};

const char* kSurnames[] = {
    "smith", "johnson", "williams", "brown", "jones", "garcia", "miller", "davis",
    "rodriguez", "martinez", "hernandez", "lopez", "gonzalez", "wilson", "anderson",
    "thomas", "taylor", "moore", "jackson", "martin", "lee", "perez", "thompson",
    "white", "harris", "sanchez", "clark", "ramirez", "lewis", "robinson", "walker",
    "young", "allen", "king", "wright", "scott", "torres", "nguyen", "hill", "flores",
    "green", "adams", "nelson", "baker", "hall", "rivera", "campbell", "mitchell",
};

const char* kStreets[] = {
    "maple avenue", "oak street", "cedar lane", "pine road", "elm drive",
    "birch court", "willow way", "chestnut boulevard", "sycamore place",
    "juniper terrace", "magnolia crescent", "hawthorn close", "laurel grove",
    "poplar walk", "aspen circle", "alder row", "hazel mews", "linden park",
    "rowan gardens", "spruce hollow", "cypress bend", "walnut ridge",
    "beech meadow", "holly field",
};

const char* kCities[] = {
    "springfield", "riverton", "fairview", "kingston", "ashland", "brookfield",
    "clearwater", "lakeside", "mapleton", "oakdale", "pinehurst", "ridgewood",
    "stonebridge", "westfield", "greenville", "harborview",
};

} // namespace

void GroundTruth::add(std::size_t a, std::size_t b) {
    if (a == b) {
        throw ConfigError("truth: self-pair (" + std::to_string(a) + ") is not allowed");
    }
    pairs.emplace(std::min(a, b), std::max(a, b));
}

bool GroundTruth::contains(std::size_t a, std::size_t b) const {
    return pairs.count({std::min(a, b), std::max(a, b)}) > 0;
}

std::optional<double> recall_eq1(std::size_t correct, std::size_t identified) {
    if (correct > identified) {
        throw StateError("metrics: correct exceeds identified");
    }
    if (identified == 0) {
        return std::nullopt;
    }
    return static_cast<double>(correct) / static_cast<double>(identified);
}

std::optional<double> fp_error_eq2(std::size_t wrong, std::size_t identified) {
    if (wrong > identified) {
        throw StateError("metrics: wrong exceeds identified");
    }
    if (identified == 0) {
        return std::nullopt;
    }
    return static_cast<double>(wrong) / static_cast<double>(identified);
}

std::pair<std::optional<double>, std::optional<double>>
conventional_metrics(const std::vector<dedup::CandidatePair>& decisions,
                     const GroundTruth& truth) {
    std::size_t predicted = 0;
    std::size_t tp = 0;
    for (const auto& pair : decisions) {
        if (pair.decision == dedup::Decision::Duplicate) {
            ++predicted;
            if (truth.contains(pair.left, pair.right)) {
                ++tp;
            }
        }
    }
    std::optional<double> precision;
    if (predicted > 0) {
        precision = static_cast<double>(tp) / static_cast<double>(predicted);
    }
    std::optional<double> recall;
    if (truth.size() > 0) {
        recall = static_cast<double>(tp) / static_cast<double>(truth.size());
    }
    return {precision, recall};
}

std::vector<dedup::CandidatePair> brute_force_oracle(const std::vector<dedup::Record>& normalized,
                                                     const dedup::MatchPolicy& policy) {
    if (normalized.size() > kOracleGuard) {
        throw ConfigError("oracle: refusing quadratic enumeration over n=" +
                          std::to_string(normalized.size()) + " records (guard: " +
                          std::to_string(kOracleGuard) + ")");
    }
    std::vector<dedup::CandidatePair> pairs;
    pairs.reserve(normalized.size() * (normalized.size() > 0 ? normalized.size() - 1 : 0) / 2);
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        for (std::size_t j = i + 1; j < normalized.size(); ++j) {
            pairs.push_back(dedup::make_pair(normalized[i].id, normalized[j].id));
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const dedup::CandidatePair& a, const dedup::CandidatePair& b) {
                  return a.left != b.left ? a.left < b.left : a.right < b.right;
              });
    dedup::score_pairs(pairs, normalized, policy);
    return pairs;
}

SyntheticData inject_duplicates(const std::vector<dedup::Record>& clean,
                                double dup_rate, std::size_t max_edits,
                                std::uint64_t seed) {
    if (!(dup_rate >= 0.0 && dup_rate <= 1.0)) {
        throw ConfigError("generator: dup_rate must lie in [0, 1]");
    }
    if (max_edits == 0) {
        throw ConfigError("generator: max_edits must be at least 1");
    }
    const std::size_t copies =
        static_cast<std::size_t>(std::llround(dup_rate * static_cast<double>(clean.size())));
    if (clean.empty() && dup_rate > 0.0) {
        throw ConfigError("generator: cannot inject duplicates into an empty dataset");
    }

    SyntheticData out;
    if (copies == 0) {
        out.records = clean;
        return out;
    }

    Rng rng(seed);

    // Partial Fisher-Yates: pick `copies` distinct source positions.
    std::vector<std::size_t> positions(clean.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        positions[i] = i;
    }
    for (std::size_t i = 0; i < copies; ++i) {
        const std::size_t j = i + rng.index(positions.size() - i);
        std::swap(positions[i], positions[j]);
    }

    std::vector<dedup::Record> rows = clean;
    std::vector<std::pair<std::size_t, std::size_t>> links; // (source row, copy row)
    for (std::size_t i = 0; i < copies; ++i) {
        const std::size_t source = positions[i];
        dedup::Record copy = clean[source];
        std::size_t budget = 1 + rng.index(max_edits);
        while (budget > 0) {
            budget -= apply_edit(copy, budget, rng);
        }
        links.emplace_back(source, rows.size());
        rows.push_back(std::move(copy));
    }

    // Shuffle rows, then reassign ids by final position.
    std::vector<std::size_t> perm(rows.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        perm[i] = i;
    }
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.index(i)]);
    }
    std::vector<std::size_t> new_id(rows.size());
    out.records.resize(rows.size());
    for (std::size_t target = 0; target < perm.size(); ++target) {
        new_id[perm[target]] = target;
        out.records[target] = std::move(rows[perm[target]]);
        out.records[target].id = target;
    }
    for (const auto& [source, copy] : links) {
        out.truth.add(new_id[source], new_id[copy]);
    }
    return out;
}

std::vector<std::string> synthetic_schema() {
    return {"given_name", "surname", "street", "city"};
}

std::vector<dedup::Record> make_clean_records(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<dedup::Record> records;
    records.reserve(n);
    std::set<std::vector<std::string>> seen;
    while (records.size() < n) {
        dedup::Record r;
        r.id = records.size();
        const std::string number = std::to_string(1 + rng.index(9999));
        r.fields = {
            kGivenNames[rng.index(std::size(kGivenNames))],
            kSurnames[rng.index(std::size(kSurnames))],
            number + " " + kStreets[rng.index(std::size(kStreets))],
            kCities[rng.index(std::size(kCities))],
        };
        if (seen.insert(r.fields).second) {
            records.push_back(std::move(r));
        }
    }
    return records;
}

MetricsReport score_run(const std::vector<dedup::CandidatePair>& decisions,
                        const GroundTruth& truth) {
    MetricsReport report;
    for (const auto& pair : decisions) {
        if (pair.decision == dedup::Decision::Pending) {
            throw StateError("metrics: pending decision for pair (" +
                             std::to_string(pair.left) + ", " +
                             std::to_string(pair.right) + ")");
        }
        if (pair.decision == dedup::Decision::Duplicate) {
            ++report.identified;
            if (truth.contains(pair.left, pair.right)) {
                ++report.correctly_identified;
            } else {
                ++report.wrongly_identified;
            }
        }
    }
    report.recall_eq1 = recall_eq1(report.correctly_identified, report.identified);
    report.fp_error_eq2 = fp_error_eq2(report.wrongly_identified, report.identified);
    auto [precision, recall] = conventional_metrics(decisions, truth);
    report.conventional_precision = precision;
    report.conventional_recall = recall;
    return report;
}

} // namespace obh::eval
