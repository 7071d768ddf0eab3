#include "obh/controller.hpp"

#include <algorithm>

#include "obh/errors.hpp"
#include "obh/rng.hpp"

namespace obh::jit {

std::string_view label_name(FattyLabel label) {
    switch (label) {
    case FattyLabel::Omega3: return "OMEGA3";
    case FattyLabel::Omega6: return "OMEGA6";
    case FattyLabel::Rejected: return "REJECTED";
    }
    return "OMEGA6";
}

FattyLabel label_for(dedup::Decision decision) {
    switch (decision) {
    case dedup::Decision::Duplicate: return FattyLabel::Omega3;
    case dedup::Decision::Ambiguous: return FattyLabel::Omega6;
    case dedup::Decision::NonDuplicate: return FattyLabel::Rejected;
    case dedup::Decision::Pending: break;
    }
    throw StateError("controller: pending decision has no label");
}

std::string_view reason_name(TriggerReason reason) {
    switch (reason) {
    case TriggerReason::None: return "NONE";
    case TriggerReason::Omega6: return "OMEGA6";
    case TriggerReason::Lipotoxicity: return "LIPOTOXICITY";
    case TriggerReason::Both: return "OMEGA6+LIPOTOXICITY";
    }
    return "NONE";
}

void StorageRegistry::register_site(const std::string& site_id, bool is_adipose,
                                    std::uint64_t capacity_threshold) {
    StorageSite site;
    site.site_id = site_id;
    site.is_adipose = is_adipose;
    site.capacity_threshold = capacity_threshold;
    site.current_size = 0;
    if (!sites_.emplace(site_id, std::move(site)).second) {
        throw ConfigError("registry: site '" + site_id + "' is already registered");
    }
}

const StorageSite& StorageRegistry::site(const std::string& site_id) const {
    auto it = sites_.find(site_id);
    if (it == sites_.end()) {
        throw ConfigError("registry: unknown site '" + site_id + "'");
    }
    return it->second;
}

StorageSite& StorageRegistry::site_mut(const std::string& site_id) {
    auto it = sites_.find(site_id);
    if (it == sites_.end()) {
        throw ConfigError("registry: unknown site '" + site_id + "'");
    }
    return it->second;
}

void StorageRegistry::store(FattyAcidUnit& unit, const std::string& site_id) {
    StorageSite& target = site_mut(site_id);
    target.current_size += 1;
    unit.site_id = site_id;
}

void StorageRegistry::move_unit(FattyAcidUnit& unit, const std::string& to_site) {
    if (unit.site_id == to_site) {
        return;
    }
    StorageSite& from = site_mut(unit.site_id);
    StorageSite& to = site_mut(to_site);
    if (from.current_size == 0) {
        throw StateError("registry: moving a unit out of empty site '" + unit.site_id + "'");
    }
    from.current_size -= 1;
    to.current_size += 1;
    unit.site_id = to_site;
}

std::vector<std::string> StorageRegistry::lipotoxic_sites() const {
    std::vector<std::string> out;
    for (const auto& [id, site] : sites_) {
        if (!site.is_adipose && site.current_size > site.capacity_threshold) {
            out.push_back(id);
        }
    }
    return out;
}

bool StorageRegistry::has_adipose() const {
    for (const auto& [id, site] : sites_) {
        (void)id;
        if (site.is_adipose) {
            return true;
        }
    }
    return false;
}

OmegaTally omega_accounting(const std::vector<FattyAcidUnit>& units) {
    OmegaTally tally;
    for (const auto& unit : units) {
        if (!unit.label) {
            throw StateError("accounting: unlabeled fatty acid unit");
        }
        switch (*unit.label) {
        case FattyLabel::Omega3: tally.omega3 += 1; break;
        case FattyLabel::Omega6: tally.omega6 += 1; break;
        case FattyLabel::Rejected: tally.rejected += 1; break;
        }
    }
    return tally;
}

TriggerDecision should_trigger(const OmegaTally& tally, const TriggerConfig& config,
                               const std::vector<std::string>& lipotoxic_sites) {
    const bool omega6_fired =
        config.omega6_threshold.has_value() && tally.omega6 > *config.omega6_threshold;
    const bool lipo_fired = !lipotoxic_sites.empty();
    TriggerDecision decision;
    decision.lipotoxic_sites = lipotoxic_sites;
    if (omega6_fired && lipo_fired) {
        decision.reason = TriggerReason::Both;
    } else if (omega6_fired) {
        decision.reason = TriggerReason::Omega6;
    } else if (lipo_fired) {
        decision.reason = TriggerReason::Lipotoxicity;
    }
    return decision;
}

const std::string& SiteRouting::site_for(FattyLabel label) const {
    switch (label) {
    case FattyLabel::Omega3: return omega3_site;
    case FattyLabel::Omega6: return omega6_site;
    case FattyLabel::Rejected: return rejected_site;
    }
    return omega6_site;
}

VectorStream::VectorStream(std::vector<dedup::Record> records, std::size_t batch_size)
    : records_(std::move(records)),
      batch_size_(batch_size == 0 ? records_.size() : batch_size) {}

std::vector<AminoAcidUnit> VectorStream::next_batch() {
    std::vector<AminoAcidUnit> batch;
    const std::size_t end = std::min(offset_ + std::max<std::size_t>(batch_size_, 1),
                                     records_.size());
    batch.reserve(end - offset_);
    for (; offset_ < end; ++offset_) {
        batch.push_back(AminoAcidUnit{offset_, records_[offset_]});
    }
    return batch;
}

std::vector<AminoAcidUnit> ingest(AminoStream& stream) {
    return stream.next_batch();
}

std::vector<FattyAcidUnit> IdentityGenerator::generate(const std::vector<AminoAcidUnit>& batch) {
    std::vector<FattyAcidUnit> units;
    units.reserve(batch.size());
    for (const auto& amino : batch) {
        FattyAcidUnit unit;
        unit.label = FattyLabel::Omega3; // nothing mined, nothing ambiguous
        unit.payload = amino.payload;
        units.push_back(std::move(unit));
    }
    return units;
}

DedupGenerator::DedupGenerator(dedup::KeySpec spec, std::size_t window,
                               dedup::MatchPolicy policy)
    : spec_(std::move(spec)), window_(window), policy_(std::move(policy)) {
    if (window_ < 2) {
        throw ConfigError("window: size must be at least 2");
    }
    policy_.validate();
}

void DedupGenerator::set_policy(dedup::MatchPolicy policy) {
    policy.validate();
    policy_ = std::move(policy);
}

std::vector<FattyAcidUnit> DedupGenerator::generate(const std::vector<AminoAcidUnit>& batch) {
    std::vector<dedup::Record> batch_normalized;
    batch_normalized.reserve(batch.size());
    for (const auto& amino : batch) {
        batch_normalized.push_back(dedup::normalize(amino.payload));
    }
    auto pairs = dedup::sort_and_window(batch_normalized, spec_, window_);
    dedup::score_pairs(pairs, batch_normalized, policy_);

    for (auto& record : batch_normalized) {
        normalized_.push_back(std::move(record));
    }

    std::vector<FattyAcidUnit> units;
    units.reserve(pairs.size());
    for (auto& pair : pairs) {
        FattyAcidUnit unit;
        unit.label = label_for(pair.decision);
        unit.payload = pair;
        units.push_back(std::move(unit));
    }
    return units;
}

std::vector<FattyAcidUnit> generate_fatty_acids(const std::vector<AminoAcidUnit>& batch,
                                                FattyAcidGenerator& generator) {
    try {
        return generator.generate(batch);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw RunError(std::string("generator failed: ") + e.what());
    }
}

std::size_t apply_policy_to_backlog(std::vector<FattyAcidUnit>& units,
                                    const DedupGenerator& dedup_gen,
                                    const dedup::MatchPolicy& policy,
                                    StorageRegistry& registry,
                                    const SiteRouting& routing) {
    std::vector<std::size_t> backlog_idx;
    std::vector<dedup::CandidatePair> backlog;
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (units[i].label == FattyLabel::Omega6 &&
            std::holds_alternative<dedup::CandidatePair>(units[i].payload)) {
            backlog_idx.push_back(i);
            backlog.push_back(std::get<dedup::CandidatePair>(units[i].payload));
        }
    }
    const auto resolved = dedup::resolve_backlog(backlog, dedup_gen.normalized_records(), policy);
    std::size_t reclassified = 0;
    for (std::size_t i = 0; i < backlog_idx.size(); ++i) {
        FattyAcidUnit& unit = units[backlog_idx[i]];
        unit.payload = resolved[i];
        const FattyLabel new_label = label_for(resolved[i].decision);
        if (new_label != FattyLabel::Omega6) {
            unit.label = new_label;
            registry.move_unit(unit, routing.site_for(new_label));
            ++reclassified;
        }
    }
    return reclassified;
}

ImmuneOutcome trigger_immune_response(ImmuneContext& ctx) {
    if (ctx.decision.reason == TriggerReason::None) {
        throw StateError("immune: invoked without a firing trigger");
    }
    if (ctx.units == nullptr || ctx.registry == nullptr) {
        throw StateError("immune: context is missing units or registry");
    }

    ImmuneOutcome outcome;
    outcome.omega6_before = omega_accounting(*ctx.units).omega6;

    bool pair_backlog = false;
    for (const auto& unit : *ctx.units) {
        if (unit.label == FattyLabel::Omega6 &&
            std::holds_alternative<dedup::CandidatePair>(unit.payload)) {
            pair_backlog = true;
            break;
        }
    }

    if (pair_backlog && ctx.dedup != nullptr) {
        if (ctx.calibration == nullptr || ctx.calibration->size() == 0) {
            throw ConfigError("immune: a labeled calibration set is required to retune "
                              "the match policy (supply calibration_pairs or truth)");
        }
        const std::size_t field_count = ctx.calibration->field_count();
        const auto objective = dedup::policy_objective(field_count, *ctx.calibration);
        const auto result = ais::run(objective, ctx.clonal);
        dedup::MatchPolicy tuned = dedup::MatchPolicy::from_genome(result.best.genome);

        // Keep the stronger of current and tuned policy on the calibration
        // set, so a short optimizer run can never degrade the match policy.
        const double tuned_fit = dedup::policy_fitness(tuned, *ctx.calibration);
        const double current_fit = dedup::policy_fitness(ctx.dedup->policy(), *ctx.calibration);
        if (current_fit > tuned_fit) {
            tuned = ctx.dedup->policy();
        }

        ctx.dedup->set_policy(tuned);
        outcome.new_policy = tuned;
        outcome.reclassified = apply_policy_to_backlog(*ctx.units, *ctx.dedup, tuned,
                                                       *ctx.registry, ctx.routing);
    }

    // Lipotoxicity handling: evict resolved units from sites that are still
    // over capacity into the adipose compaction target.
    if (ctx.decision.reason == TriggerReason::Lipotoxicity ||
        ctx.decision.reason == TriggerReason::Both) {
        for (const auto& site_id : ctx.registry->lipotoxic_sites()) {
            if (ctx.compaction_site.empty()) {
                throw ConfigError("immune: no compaction site configured");
            }
            if (!ctx.registry->site(ctx.compaction_site).is_adipose) {
                throw ConfigError("immune: compaction site '" + ctx.compaction_site +
                                  "' is not adipose");
            }
            for (auto& unit : *ctx.units) {
                if (unit.site_id == site_id && unit.label != FattyLabel::Omega6) {
                    ctx.registry->move_unit(unit, ctx.compaction_site);
                    ++outcome.compacted;
                }
            }
            const StorageSite& after = ctx.registry->site(site_id);
            if (after.current_size > after.capacity_threshold) {
                outcome.warnings.push_back(
                    "site '" + site_id + "' is still lipotoxic after compaction (" +
                    std::to_string(after.current_size) + " > " +
                    std::to_string(after.capacity_threshold) + "); backlog could not be resolved");
            }
        }
    }

    outcome.omega6_after = omega_accounting(*ctx.units).omega6;
    if (outcome.omega6_after > outcome.omega6_before) {
        throw RunError("immune: handling increased the omega-6 backlog");
    }
    return outcome;
}

RunReport run_cycle(AminoStream& stream, StorageRegistry& registry,
                    const ControllerConfig& config, FattyAcidGenerator& generator,
                    const dedup::CalibrationSet* calibration) {
    if (!registry.has_adipose()) {
        throw ConfigError("controller: at least one adipose site is required");
    }
    registry.site(config.routing.omega3_site);
    registry.site(config.routing.omega6_site);
    registry.site(config.routing.rejected_site);

    RunReport report;
    std::vector<FattyAcidUnit>& units = report.units;
    std::uint64_t invocation_index = 0;

    while (true) {
        auto batch = ingest(stream);
        if (batch.empty()) {
            break;
        }
        report.cycles += 1;

        auto fresh = generate_fatty_acids(batch, generator);
        for (auto& unit : fresh) {
            if (!unit.label) {
                throw StateError("controller: generator produced an unlabeled unit");
            }
            registry.store(unit, config.routing.site_for(*unit.label));
            units.push_back(std::move(unit));
        }

        OmegaTally tally = omega_accounting(units);
        if (tally.total() != units.size()) {
            throw RunError("controller: omega conservation violated");
        }

        auto lipotoxic = registry.lipotoxic_sites();
        const TriggerDecision decision = should_trigger(tally, config.trigger, lipotoxic);

        if (decision.reason != TriggerReason::None) {
            ImmuneContext ctx;
            ctx.decision = decision;
            ctx.units = &units;
            ctx.registry = &registry;
            ctx.routing = config.routing;
            ctx.compaction_site = config.compaction_site;
            ctx.dedup = dynamic_cast<DedupGenerator*>(&generator);
            ctx.calibration = calibration;
            ctx.clonal = config.clonal;
            ctx.clonal.seed = derive_seed(config.seed, invocation_index);
            invocation_index += 1;

            const ImmuneOutcome outcome = trigger_immune_response(ctx);
            report.invocations.push_back(
                {report.cycles, decision.reason, outcome.omega6_before, outcome.omega6_after});
            for (const auto& warning : outcome.warnings) {
                report.warnings.push_back(warning);
            }
            tally = omega_accounting(units);
            if (tally.total() != units.size()) {
                throw RunError("controller: omega conservation violated after immune response");
            }
        }

        CycleStats stats;
        stats.cycle = report.cycles;
        stats.amino_in_batch = batch.size();
        stats.units_generated = fresh.size();
        stats.units_total_after = units.size();
        stats.tally_after = tally;
        stats.triggered = decision.reason;
        report.cycle_stats.push_back(stats);
    }

    report.total_units = units.size();
    report.final_tally = omega_accounting(units);
    report.performance_omega3 = report.final_tally.omega3;
    if (auto* dedup_gen = dynamic_cast<DedupGenerator*>(&generator)) {
        report.final_policy = dedup_gen->policy();
    }
    return report;
}

} // namespace obh::jit
