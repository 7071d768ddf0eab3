#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "obh/ais.hpp"
#include "obh/dedup.hpp"

namespace obh::jit {

// OMEGA3: confidently resolved output. OMEGA6: ambiguous backlog awaiting
// resolution. REJECTED: confident non-duplicate discard.
enum class FattyLabel { Omega3, Omega6, Rejected };

std::string_view label_name(FattyLabel label);
FattyLabel label_for(dedup::Decision decision);

// One raw input item pulled from a stream.
struct AminoAcidUnit {
    std::size_t source_offset = 0;
    dedup::Record payload;
};

// One generated item. The payload is either a passed-through record
// (identity pipeline) or a classified candidate pair (dedup pipeline).
struct FattyAcidUnit {
    std::optional<FattyLabel> label;
    std::string site_id; // empty until stored
    std::variant<dedup::Record, dedup::CandidatePair> payload;
};

struct StorageSite {
    std::string site_id;
    bool is_adipose = false;
    std::uint64_t capacity_threshold = 0;
    std::uint64_t current_size = 0;
};

class StorageRegistry {
public:
    void register_site(const std::string& site_id, bool is_adipose,
                       std::uint64_t capacity_threshold);
    const StorageSite& site(const std::string& site_id) const;
    const std::map<std::string, StorageSite>& sites() const { return sites_; }

    // Stamps the unit with the site and bumps the site size.
    void store(FattyAcidUnit& unit, const std::string& site_id);

    // Moves a stored unit between sites, keeping both sizes consistent.
    void move_unit(FattyAcidUnit& unit, const std::string& to_site);

    // Sites in lipotoxic state: non-adipose and current_size strictly above
    // capacity_threshold. Adipose sites are exempt at any size.
    std::vector<std::string> lipotoxic_sites() const;

    bool has_adipose() const;

private:
    StorageSite& site_mut(const std::string& site_id);
    std::map<std::string, StorageSite> sites_;
};

struct OmegaTally {
    std::uint64_t omega3 = 0;
    std::uint64_t omega6 = 0;
    std::uint64_t rejected = 0;
    std::uint64_t total() const { return omega3 + omega6 + rejected; }
};

// Counts units by their current label. Throws StateError on unlabeled units.
OmegaTally omega_accounting(const std::vector<FattyAcidUnit>& units);

struct TriggerConfig {
    // Empty means infinite: the omega-6 trigger never fires.
    std::optional<std::uint64_t> omega6_threshold;
};

enum class TriggerReason { None, Omega6, Lipotoxicity, Both };

std::string_view reason_name(TriggerReason reason);

struct TriggerDecision {
    TriggerReason reason = TriggerReason::None;
    std::vector<std::string> lipotoxic_sites;
};

// Both comparisons are strict: omega6 must be above the threshold, a site
// size must be above its capacity, to fire.
TriggerDecision should_trigger(const OmegaTally& tally, const TriggerConfig& config,
                               const std::vector<std::string>& lipotoxic_sites);

// Where each label is stored.
struct SiteRouting {
    std::string omega3_site;
    std::string omega6_site;
    std::string rejected_site;

    const std::string& site_for(FattyLabel label) const;
};

// Pull-based input. Implementations yield consecutive source offsets and
// throw InputError (carrying the offset) when the underlying stream breaks.
class AminoStream {
public:
    virtual ~AminoStream() = default;
    // Next batch; empty means the stream is exhausted.
    virtual std::vector<AminoAcidUnit> next_batch() = 0;
};

// In-memory stream over a record list. batch_size 0 delivers everything in
// one batch.
class VectorStream : public AminoStream {
public:
    VectorStream(std::vector<dedup::Record> records, std::size_t batch_size);
    std::vector<AminoAcidUnit> next_batch() override;

private:
    std::vector<dedup::Record> records_;
    std::size_t batch_size_;
    std::size_t offset_ = 0;
};

// Step-2 of the loop: one batch off the stream.
std::vector<AminoAcidUnit> ingest(AminoStream& stream);

// Mining stage: turns raw units into labeled fatty acids.
class FattyAcidGenerator {
public:
    virtual ~FattyAcidGenerator() = default;
    virtual std::vector<FattyAcidUnit> generate(const std::vector<AminoAcidUnit>& batch) = 0;
};

// Pass-through: every unit comes back OMEGA3, payload unchanged.
class IdentityGenerator : public FattyAcidGenerator {
public:
    std::vector<FattyAcidUnit> generate(const std::vector<AminoAcidUnit>& batch) override;
};

// Sorted-neighborhood dedup over each batch. Keeps the normalized records it
// has seen so the backlog can be rescored after a policy change.
class DedupGenerator : public FattyAcidGenerator {
public:
    DedupGenerator(dedup::KeySpec spec, std::size_t window, dedup::MatchPolicy policy);

    std::vector<FattyAcidUnit> generate(const std::vector<AminoAcidUnit>& batch) override;

    const dedup::MatchPolicy& policy() const { return policy_; }
    void set_policy(dedup::MatchPolicy policy);

    const std::vector<dedup::Record>& normalized_records() const { return normalized_; }

private:
    dedup::KeySpec spec_;
    std::size_t window_;
    dedup::MatchPolicy policy_;
    std::vector<dedup::Record> normalized_;
};

// Wraps generator.generate; anything it throws beyond our own error types
// surfaces as a RunError.
std::vector<FattyAcidUnit> generate_fatty_acids(const std::vector<AminoAcidUnit>& batch,
                                                FattyAcidGenerator& generator);

struct ImmuneContext {
    TriggerDecision decision;
    std::vector<FattyAcidUnit>* units = nullptr;
    StorageRegistry* registry = nullptr;
    SiteRouting routing;
    std::string compaction_site; // adipose target for evicted units
    DedupGenerator* dedup = nullptr;                      // null for non-dedup pipelines
    const dedup::CalibrationSet* calibration = nullptr;   // required to optimize
    ais::ClonalParams clonal;                             // seed already derived per invocation
};

struct ImmuneOutcome {
    std::optional<dedup::MatchPolicy> new_policy;
    std::uint64_t omega6_before = 0;
    std::uint64_t omega6_after = 0;
    std::size_t reclassified = 0;
    std::size_t compacted = 0;
    std::vector<std::string> warnings;
};

// Reclassifies the backlog under `policy` and moves resolved units to their
// label's site. Exposed separately so the resolution machinery is testable
// with a fixed policy.
std::size_t apply_policy_to_backlog(std::vector<FattyAcidUnit>& units,
                                    const DedupGenerator& dedup_gen,
                                    const dedup::MatchPolicy& policy,
                                    StorageRegistry& registry,
                                    const SiteRouting& routing);

// The immune response. With a pair backlog and a dedup context it runs the
// clonal selection optimizer over the calibration set, installs the best
// policy and reclassifies the backlog; for lipotoxic sites it then compacts
// by moving resolved units into the adipose target. Never increases omega6.
ImmuneOutcome trigger_immune_response(ImmuneContext& ctx);

struct CycleStats {
    std::uint64_t cycle = 0;
    std::size_t amino_in_batch = 0;     // raw units pulled off the stream
    std::size_t units_generated = 0;    // fatty acids minted this cycle
    std::uint64_t units_total_after = 0;
    OmegaTally tally_after;
    TriggerReason triggered = TriggerReason::None;
};

struct InvocationEntry {
    std::uint64_t cycle = 0;
    TriggerReason reason = TriggerReason::None;
    std::uint64_t omega6_before = 0;
    std::uint64_t omega6_after = 0;
};

struct RunReport {
    std::uint64_t cycles = 0;
    std::uint64_t total_units = 0;
    OmegaTally final_tally;
    std::uint64_t performance_omega3 = 0;
    std::vector<InvocationEntry> invocations;
    std::vector<CycleStats> cycle_stats;
    std::optional<dedup::MatchPolicy> final_policy;
    std::vector<std::string> warnings;
    std::vector<FattyAcidUnit> units; // all generated units, final labels
};

struct ControllerConfig {
    TriggerConfig trigger;
    SiteRouting routing;
    std::string compaction_site;
    ais::ClonalParams clonal; // per-invocation seeds are derived from `seed`
    std::uint64_t seed = 0;
};

// Steps 2..7 per batch until the stream is exhausted. Triggers are checked
// once per batch; the conservation invariant is verified at every cycle
// boundary.
RunReport run_cycle(AminoStream& stream, StorageRegistry& registry,
                    const ControllerConfig& config, FattyAcidGenerator& generator,
                    const dedup::CalibrationSet* calibration = nullptr);

} // namespace obh::jit
