#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "obh/ais.hpp"
#include "obh/controller.hpp"
#include "obh/dedup.hpp"

namespace obh::cli {

struct SiteConfig {
    std::string id;
    bool adipose = false;
    std::uint64_t capacity_threshold = 0;
};

enum class GeneratorKind { Identity, Dedup };

// The fully resolved run configuration. parse_config fills every optional
// with its documented default, so a serialized RunConfig echoes the complete
// effective configuration.
struct RunConfig {
    std::string input_path;
    std::vector<std::string> schema;
    GeneratorKind generator = GeneratorKind::Dedup;

    dedup::KeySpec key;                    // fields_used resolved to indices
    std::vector<std::string> key_fields;   // same, by name (for the echo)
    std::size_t window = 10;
    dedup::MatchPolicy policy;

    jit::TriggerConfig trigger;
    std::vector<SiteConfig> sites;
    jit::SiteRouting routing;
    std::string compaction_site;

    ais::ClonalParams clonal;
    std::size_t batch_size = 0; // 0: single batch
    std::uint64_t seed = 0;

    std::optional<std::string> truth_path;
    std::optional<std::string> calibration_path;
    std::string output_path = "report.json";
};

// Strict JSON parsing: unknown keys are rejected (with a spelling suggestion
// when one is close), all invariants are validated, defaults are applied and
// echoed. The OBH_SEED environment variable, when set, overrides the seed.
RunConfig parse_config(const std::filesystem::path& file);
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir);

std::string config_echo_json(const RunConfig& config); // full effective config

// Comma-separated file with a header row naming every schema field (any
// column order). record_id is the data row index.
std::vector<dedup::Record> read_records(const std::filesystem::path& path,
                                        const std::vector<std::string>& schema);

void write_records(const std::filesystem::path& path,
                   const std::vector<std::string>& schema,
                   const std::vector<dedup::Record>& records);

struct TruthRow {
    std::size_t left = 0;
    std::size_t right = 0;
};

std::vector<TruthRow> read_truth(const std::filesystem::path& path);
void write_truth(const std::filesystem::path& path, const std::vector<TruthRow>& rows);

std::vector<dedup::LabeledPair> read_labeled_pairs(const std::filesystem::path& path);

} // namespace obh::cli
