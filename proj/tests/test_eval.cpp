#include <cmath>
#include <set>

#include <doctest.h>

#include "obh/dedup.hpp"
#include "obh/errors.hpp"
#include "obh/eval.hpp"
#include "obh/rng.hpp"
#include "support.hpp"

using namespace obh;
using namespace obh::eval;

namespace {

dedup::CandidatePair decided(std::size_t l, std::size_t r, dedup::Decision d) {
    auto p = dedup::make_pair(l, r);
    p.score = 0.0;
    p.decision = d;
    return p;
}

} // namespace

TEST_CASE("recall_eq1 and fp_error_eq2: frozen substitutions") {
    CHECK(*recall_eq1(8, 10) == doctest::Approx(0.8));
    CHECK(*recall_eq1(10, 10) == 1.0);
    CHECK_FALSE(recall_eq1(0, 0).has_value());

    CHECK(*fp_error_eq2(2, 10) == doctest::Approx(0.2));
    CHECK(*fp_error_eq2(0, 10) == 0.0);
    CHECK_FALSE(fp_error_eq2(0, 0).has_value());

    // complement: correctly=8, wrongly=2, identified=10
    CHECK(*recall_eq1(8, 10) + *fp_error_eq2(2, 10) == doctest::Approx(1.0));

    CHECK_THROWS_AS(recall_eq1(3, 2), StateError);
}

TEST_CASE("conventional_metrics: boundary behavior") {
    GroundTruth truth;
    truth.add(0, 1);
    truth.add(2, 3);

    SUBCASE("predictions equal truth") {
        std::vector<dedup::CandidatePair> decisions = {
            decided(0, 1, dedup::Decision::Duplicate),
            decided(2, 3, dedup::Decision::Duplicate),
        };
        const auto [precision, recall] = conventional_metrics(decisions, truth);
        CHECK(*precision == 1.0);
        CHECK(*recall == 1.0);
    }

    SUBCASE("no predictions, non-empty truth") {
        std::vector<dedup::CandidatePair> decisions = {
            decided(0, 1, dedup::Decision::NonDuplicate)};
        const auto [precision, recall] = conventional_metrics(decisions, truth);
        CHECK_FALSE(precision.has_value());
        CHECK(*recall == 0.0);
    }

    SUBCASE("half of truth, no false positives") {
        std::vector<dedup::CandidatePair> decisions = {
            decided(0, 1, dedup::Decision::Duplicate)};
        const auto [precision, recall] = conventional_metrics(decisions, truth);
        CHECK(*precision == 1.0);
        CHECK(*recall == 0.5);
    }
}

TEST_CASE("ground truth: canonical form") {
    GroundTruth truth;
    truth.add(5, 2);
    CHECK(truth.contains(2, 5));
    CHECK(truth.contains(5, 2));
    CHECK(truth.size() == 1);
    CHECK_THROWS_AS(truth.add(3, 3), ConfigError);
}

TEST_CASE("brute_force_oracle: enumeration and guard") {
    dedup::MatchPolicy policy;
    policy.weights = {1.0};

    std::vector<dedup::Record> records;
    for (std::size_t i = 0; i < 4; ++i) {
        dedup::Record r;
        r.id = i;
        r.fields = {std::string(3, static_cast<char>('a' + i))};
        records.push_back(r);
    }

    SUBCASE("n=4 scores all 6 pairs") {
        const auto pairs = brute_force_oracle(records, policy);
        CHECK(pairs.size() == 6);
        for (const auto& p : pairs) {
            CHECK(p.score.has_value());
            CHECK(p.decision != dedup::Decision::Pending);
        }
    }

    SUBCASE("n=0 yields nothing") {
        CHECK(brute_force_oracle({}, policy).empty());
    }

    SUBCASE("guard refuses oversized inputs") {
        std::vector<dedup::Record> big(5001);
        for (std::size_t i = 0; i < big.size(); ++i) {
            big[i].id = i;
            big[i].fields = {"x"};
        }
        CHECK_THROWS_AS(brute_force_oracle(big, policy), ConfigError);
    }
}

TEST_CASE("full window equals the all-pairs oracle") {
    Rng rng(71);
    dedup::KeySpec spec;
    spec.fields_used = {0};
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 2 + rng.index(30);
        std::vector<dedup::Record> records;
        for (std::size_t i = 0; i < n; ++i) {
            dedup::Record r;
            r.id = i;
            std::string word;
            for (int j = 0; j < 5; ++j) {
                word.push_back(static_cast<char>('a' + rng.index(4)));
            }
            r.fields = {word};
            records.push_back(dedup::normalize(r));
        }
        dedup::MatchPolicy policy;
        policy.weights = {1.0};
        policy.theta_low = rng.uniform(0.0, 0.5);
        policy.theta_high = policy.theta_low + rng.uniform(0.0, 0.5);

        auto windowed = dedup::sort_and_window(records, spec, n);
        dedup::score_pairs(windowed, records, policy);
        const auto oracle = brute_force_oracle(records, policy);

        REQUIRE(windowed.size() == oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(windowed[i].left == oracle[i].left);
            CHECK(windowed[i].right == oracle[i].right);
            CHECK(windowed[i].decision == oracle[i].decision);
        }
    }
}

TEST_CASE("inject_duplicates: counting, identity, edit budget") {
    const auto clean = make_clean_records(20, 99);

    SUBCASE("counting") {
        const auto data = inject_duplicates(clean, 0.5, 3, 7);
        CHECK(data.records.size() == 30);
        CHECK(data.truth.size() == 10);
    }

    SUBCASE("n=4 with rate 0.5 injects 2") {
        const std::vector<dedup::Record> four(clean.begin(), clean.begin() + 4);
        const auto data = inject_duplicates(four, 0.5, 2, 7);
        CHECK(data.records.size() == 6);
        CHECK(data.truth.size() == 2);
    }

    SUBCASE("zero rate returns the input untouched") {
        const auto data = inject_duplicates(clean, 0.0, 3, 7);
        CHECK(data.truth.size() == 0);
        REQUIRE(data.records.size() == clean.size());
        for (std::size_t i = 0; i < clean.size(); ++i) {
            CHECK(data.records[i].fields == clean[i].fields);
        }
    }

    SUBCASE("every copy stays within max_edits of its source") {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            const std::size_t max_edits = 1 + seed;
            const auto data = inject_duplicates(clean, 0.4, max_edits, seed);
            for (const auto& [left, right] : data.truth.pairs) {
                const auto& a = data.records[left];
                const auto& b = data.records[right];
                REQUIRE(a.fields.size() == b.fields.size());
                std::size_t total = 0;
                for (std::size_t f = 0; f < a.fields.size(); ++f) {
                    total += obh::test::edit_distance_reference(a.fields[f], b.fields[f]);
                }
                CHECK(total <= max_edits);
            }
        }
    }

    SUBCASE("same seed, same dataset") {
        const auto a = inject_duplicates(clean, 0.3, 3, 5);
        const auto b = inject_duplicates(clean, 0.3, 3, 5);
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].fields == b.records[i].fields);
        }
        CHECK(a.truth.pairs == b.truth.pairs);
    }

    SUBCASE("empty input with positive rate is a configuration error") {
        CHECK_THROWS_AS(inject_duplicates({}, 0.5, 3, 7), ConfigError);
        CHECK_THROWS_AS(inject_duplicates(clean, 1.5, 3, 7), ConfigError);
        CHECK_THROWS_AS(inject_duplicates(clean, 0.5, 0, 7), ConfigError);
    }
}

TEST_CASE("make_clean_records: distinct, schema-shaped, deterministic") {
    const auto records = make_clean_records(50, 3);
    REQUIRE(records.size() == 50);
    std::set<std::vector<std::string>> seen;
    for (const auto& r : records) {
        CHECK(r.fields.size() == synthetic_schema().size());
        seen.insert(r.fields);
    }
    CHECK(seen.size() == 50);

    const auto again = make_clean_records(50, 3);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].fields == again[i].fields);
    }
}

TEST_CASE("score_run: frozen metric values") {
    GroundTruth truth;
    for (std::size_t i = 0; i < 10; ++i) {
        truth.add(2 * i, 2 * i + 1);
    }

    SUBCASE("decisions exactly equal truth") {
        std::vector<dedup::CandidatePair> decisions;
        for (const auto& [l, r] : truth.pairs) {
            decisions.push_back(decided(l, r, dedup::Decision::Duplicate));
        }
        const auto report = score_run(decisions, truth);
        CHECK(report.identified == 10);
        CHECK(*report.recall_eq1 == 1.0);
        CHECK(*report.fp_error_eq2 == 0.0);
        CHECK(*report.conventional_precision == 1.0);
        CHECK(*report.conventional_recall == 1.0);
    }

    SUBCASE("one spurious pair among ten") {
        std::vector<dedup::CandidatePair> decisions;
        std::size_t taken = 0;
        for (const auto& [l, r] : truth.pairs) {
            if (taken++ == 9) break;
            decisions.push_back(decided(l, r, dedup::Decision::Duplicate));
        }
        decisions.push_back(decided(100, 101, dedup::Decision::Duplicate));
        const auto report = score_run(decisions, truth);
        CHECK(report.identified == 10);
        CHECK(report.correctly_identified == 9);
        CHECK(report.wrongly_identified == 1);
        CHECK(*report.recall_eq1 == doctest::Approx(0.9));
        CHECK(*report.fp_error_eq2 == doctest::Approx(0.1));
    }

    SUBCASE("zero identified leaves the paper metrics undefined") {
        std::vector<dedup::CandidatePair> decisions = {
            decided(0, 1, dedup::Decision::NonDuplicate),
            decided(2, 3, dedup::Decision::Ambiguous),
        };
        const auto report = score_run(decisions, truth);
        CHECK(report.identified == 0);
        CHECK_FALSE(report.recall_eq1.has_value());
        CHECK_FALSE(report.fp_error_eq2.has_value());
        CHECK(*report.conventional_recall == 0.0);
    }

    SUBCASE("pending decisions are a state error") {
        std::vector<dedup::CandidatePair> decisions = {dedup::make_pair(0, 1)};
        CHECK_THROWS_AS(score_run(decisions, truth), StateError);
    }
}

TEST_CASE("metric complementarity holds under random configurations") {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        GroundTruth truth;
        const std::size_t truth_n = 1 + rng.index(20);
        for (std::size_t i = 0; i < truth_n; ++i) {
            truth.add(i, i + 100);
        }
        std::vector<dedup::CandidatePair> decisions;
        for (std::size_t i = 0; i < truth_n; ++i) {
            decisions.push_back(decided(i, i + 100, rng.uniform01() < 0.5
                                                        ? dedup::Decision::Duplicate
                                                        : dedup::Decision::NonDuplicate));
        }
        const std::size_t extra = rng.index(10);
        for (std::size_t i = 0; i < extra; ++i) {
            decisions.push_back(decided(1000 + i, 2000 + i, dedup::Decision::Duplicate));
        }
        const auto report = score_run(decisions, truth);
        CHECK(report.correctly_identified + report.wrongly_identified == report.identified);
        if (report.identified > 0) {
            CHECK(std::abs(*report.recall_eq1 + *report.fp_error_eq2 - 1.0) <= 1e-12);
        }
    }
}
