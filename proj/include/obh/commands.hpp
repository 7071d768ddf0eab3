#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "obh/config.hpp"
#include "obh/controller.hpp"
#include "obh/eval.hpp"

namespace obh::cli {

struct CleanResult {
    jit::RunReport report;
    std::optional<eval::MetricsReport> metrics;
    std::string report_json; // exactly what was written to the output file
    std::string summary;     // human-readable table
};

// Full pipeline: read records, run the controller, score against the truth
// set when one is configured, write the JSON report.
CleanResult command_clean(const RunConfig& config);

struct GenerateResult {
    std::filesystem::path data_path;
    std::filesystem::path truth_path;
    std::size_t rows_written = 0;
    std::size_t truth_pairs = 0;
};

// Synthesizes n clean records, injects duplicates, writes the dirty CSV and
// the truth file (<out stem>.truth.csv next to it).
GenerateResult command_generate(std::size_t n, double dup_rate, std::size_t max_edits,
                                std::uint64_t seed, const std::filesystem::path& out_path);

struct OptimizeResult {
    ais::RunResult run;
    std::filesystem::path history_path;
};

// Runs the clonal selection optimizer on a named benchmark and writes the
// (generation, best_fitness) history as CSV.
OptimizeResult command_optimize(const std::string& benchmark, std::size_t dims,
                                std::size_t generations, std::uint64_t seed,
                                const std::filesystem::path& out_path);

// Concatenates the metric rows of several run reports into one CSV table.
std::string command_report_merge(const std::vector<std::filesystem::path>& reports,
                                 const std::filesystem::path& out_path);

// Shared formatting: shortest round-trip decimal representation.
std::string format_double(double value);

} // namespace obh::cli
