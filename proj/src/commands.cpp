#include "obh/commands.hpp"

#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "obh/benchmarks.hpp"
#include "obh/errors.hpp"
#include "obh/rng.hpp"

namespace obh::cli {

namespace {

using nlohmann::json;

json metric_json(const std::optional<double>& value) {
    return value ? json(*value) : json(nullptr);
}

json metrics_to_json(const eval::MetricsReport& m) {
    json out;
    out["identified"] = m.identified;
    out["correctly_identified"] = m.correctly_identified;
    out["wrongly_identified"] = m.wrongly_identified;
    out["recall_eq1"] = metric_json(m.recall_eq1);
    out["fp_error_eq2"] = metric_json(m.fp_error_eq2);
    out["conventional_precision"] = metric_json(m.conventional_precision);
    out["conventional_recall"] = metric_json(m.conventional_recall);
    return out;
}

json policy_to_json(const dedup::MatchPolicy& policy) {
    return {{"weights", policy.weights},
            {"theta_low", policy.theta_low},
            {"theta_high", policy.theta_high}};
}

eval::GroundTruth load_truth(const std::string& path) {
    eval::GroundTruth truth;
    for (const auto& row : read_truth(path)) {
        truth.add(row.left, row.right);
    }
    return truth;
}

// Calibration pairs: explicit labeled file when given, otherwise derived from
// the truth set (window pairs labeled by membership, plus every truth pair).
std::vector<dedup::LabeledPair> build_calibration_pairs(
    const RunConfig& config, const std::vector<dedup::Record>& normalized,
    const std::optional<eval::GroundTruth>& truth) {
    if (config.calibration_path) {
        return read_labeled_pairs(*config.calibration_path);
    }
    if (!truth) {
        return {};
    }
    std::vector<dedup::LabeledPair> pairs;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& pair : dedup::sort_and_window(normalized, config.key, config.window)) {
        pairs.push_back({pair.left, pair.right, truth->contains(pair.left, pair.right)});
        seen.emplace(pair.left, pair.right);
    }
    for (const auto& [left, right] : truth->pairs) {
        if (!seen.count({left, right})) {
            pairs.push_back({left, right, true});
        }
    }
    return pairs;
}

std::string human_metric(const std::optional<double>& value) {
    return value ? format_double(*value) : "undefined";
}

} // namespace

std::string format_double(double value) {
    return json(value).dump();
}

CleanResult command_clean(const RunConfig& config) {
    const auto records = read_records(config.input_path, config.schema);

    jit::StorageRegistry registry;
    for (const auto& site : config.sites) {
        registry.register_site(site.id, site.adipose, site.capacity_threshold);
    }

    std::unique_ptr<jit::FattyAcidGenerator> generator;
    if (config.generator == GeneratorKind::Identity) {
        generator = std::make_unique<jit::IdentityGenerator>();
    } else {
        generator = std::make_unique<jit::DedupGenerator>(config.key, config.window,
                                                          config.policy);
    }

    std::optional<eval::GroundTruth> truth;
    if (config.truth_path) {
        truth = load_truth(*config.truth_path);
    }

    std::vector<dedup::Record> normalized;
    normalized.reserve(records.size());
    for (const auto& record : records) {
        normalized.push_back(dedup::normalize(record));
    }

    dedup::CalibrationSet calibration;
    bool have_calibration = false;
    if (config.generator == GeneratorKind::Dedup) {
        const auto pairs = build_calibration_pairs(config, normalized, truth);
        if (!pairs.empty()) {
            calibration = dedup::CalibrationSet::build(normalized, pairs);
            have_calibration = true;
        }
    }

    jit::ControllerConfig controller_config;
    controller_config.trigger = config.trigger;
    controller_config.routing = config.routing;
    controller_config.compaction_site = config.compaction_site;
    controller_config.clonal = config.clonal;
    controller_config.seed = config.seed;

    jit::VectorStream stream(records, config.batch_size);
    CleanResult result;
    result.report = jit::run_cycle(stream, registry, controller_config, *generator,
                                   have_calibration ? &calibration : nullptr);

    if (truth) {
        std::vector<dedup::CandidatePair> decisions;
        for (const auto& unit : result.report.units) {
            if (const auto* pair = std::get_if<dedup::CandidatePair>(&unit.payload)) {
                decisions.push_back(*pair);
            }
        }
        result.metrics = eval::score_run(decisions, *truth);
    }

    json doc;
    doc["config"] = json::parse(config_echo_json(config));
    doc["seed"] = config.seed;
    doc["cycles"] = result.report.cycles;
    doc["total_units"] = result.report.total_units;
    doc["tally"] = {{"omega3", result.report.final_tally.omega3},
                    {"omega6", result.report.final_tally.omega6},
                    {"rejected", result.report.final_tally.rejected}};
    doc["performance_omega3"] = result.report.performance_omega3;
    json invocations = json::array();
    for (const auto& entry : result.report.invocations) {
        invocations.push_back({{"cycle", entry.cycle},
                               {"reason", std::string(jit::reason_name(entry.reason))},
                               {"omega6_before", entry.omega6_before},
                               {"omega6_after", entry.omega6_after}});
    }
    doc["invocations"] = invocations;
    json cycles = json::array();
    for (const auto& stats : result.report.cycle_stats) {
        cycles.push_back({{"cycle", stats.cycle},
                          {"amino_in_batch", stats.amino_in_batch},
                          {"units_generated", stats.units_generated},
                          {"units_total_after", stats.units_total_after},
                          {"tally_after",
                           {{"omega3", stats.tally_after.omega3},
                            {"omega6", stats.tally_after.omega6},
                            {"rejected", stats.tally_after.rejected}}},
                          {"triggered", std::string(jit::reason_name(stats.triggered))}});
    }
    doc["cycle_stats"] = cycles;
    doc["final_policy"] = result.report.final_policy
                              ? policy_to_json(*result.report.final_policy)
                              : json(nullptr);
    json site_state = json::array();
    for (const auto& [id, site] : registry.sites()) {
        site_state.push_back({{"id", id},
                              {"adipose", site.is_adipose},
                              {"capacity_threshold", site.capacity_threshold},
                              {"current_size", site.current_size}});
    }
    doc["sites"] = site_state;
    doc["metrics"] = result.metrics ? metrics_to_json(*result.metrics) : json(nullptr);
    doc["warnings"] = result.report.warnings;

    result.report_json = doc.dump(2);
    result.report_json.push_back('\n');

    std::ofstream out(config.output_path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write report to '" + config.output_path + "'");
    }
    out << result.report_json;
    out.close();

    std::ostringstream summary;
    summary << "clean summary\n";
    summary << "  input              " << config.input_path << "\n";
    summary << "  records            " << records.size() << "\n";
    summary << "  cycles             " << result.report.cycles << "\n";
    summary << "  units generated    " << result.report.total_units << "\n";
    summary << "  omega3             " << result.report.final_tally.omega3 << "\n";
    summary << "  omega6 backlog     " << result.report.final_tally.omega6 << "\n";
    summary << "  rejected           " << result.report.final_tally.rejected << "\n";
    summary << "  performance        " << result.report.performance_omega3 << "\n";
    summary << "  immune invocations " << result.report.invocations.size() << "\n";
    for (const auto& entry : result.report.invocations) {
        summary << "    cycle " << entry.cycle << ": " << jit::reason_name(entry.reason)
                << " (omega6 " << entry.omega6_before << " -> " << entry.omega6_after << ")\n";
    }
    if (result.metrics) {
        summary << "  recall_eq1         " << human_metric(result.metrics->recall_eq1) << "\n";
        summary << "  fp_error_eq2       " << human_metric(result.metrics->fp_error_eq2) << "\n";
        summary << "  precision          " << human_metric(result.metrics->conventional_precision)
                << "\n";
        summary << "  recall             " << human_metric(result.metrics->conventional_recall)
                << "\n";
    }
    for (const auto& warning : result.report.warnings) {
        summary << "  warning: " << warning << "\n";
    }
    summary << "  report             " << config.output_path << "\n";
    result.summary = summary.str();
    return result;
}

GenerateResult command_generate(std::size_t n, double dup_rate, std::size_t max_edits,
                                std::uint64_t seed, const std::filesystem::path& out_path) {
    if (n == 0) {
        throw ConfigError("generate: n must be positive");
    }
    const auto clean = eval::make_clean_records(n, seed);
    const auto data = eval::inject_duplicates(clean, dup_rate, max_edits, derive_seed(seed, 1));

    GenerateResult result;
    result.data_path = out_path;
    result.truth_path = out_path.parent_path() / (out_path.stem().string() + ".truth.csv");

    write_records(result.data_path, eval::synthetic_schema(), data.records);
    std::vector<TruthRow> rows;
    rows.reserve(data.truth.size());
    for (const auto& [left, right] : data.truth.pairs) {
        rows.push_back({left, right});
    }
    write_truth(result.truth_path, rows);

    result.rows_written = data.records.size();
    result.truth_pairs = rows.size();
    return result;
}

OptimizeResult command_optimize(const std::string& benchmark, std::size_t dims,
                                std::size_t generations, std::uint64_t seed,
                                const std::filesystem::path& out_path) {
    if (dims == 0) {
        throw ConfigError("optimize: dims must be positive");
    }
    if (generations == 0) {
        throw ConfigError("optimize: generations must be positive");
    }
    ais::Objective objective;
    if (benchmark == "sphere") {
        objective = ais::negated_sphere(dims);
    } else if (benchmark == "ackley") {
        objective = ais::negated_ackley(dims);
    } else {
        throw ConfigError("optimize: unknown benchmark '" + benchmark +
                          "' (available: sphere, ackley)");
    }

    ais::ClonalParams params;
    params.population_size = 50;
    params.select_count = 10;
    params.clone_factor = 1.0;
    params.mutation_base = 0.3;
    params.replace_count = 5;
    params.max_generations = generations;
    params.seed = seed;

    OptimizeResult result;
    result.run = ais::run(objective, params);
    result.history_path = out_path;

    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write history to '" + out_path.string() + "'");
    }
    out << "generation,best_fitness\n";
    for (const auto& point : result.run.history) {
        out << point.generation << ',' << format_double(point.best_fitness) << '\n';
    }
    return result;
}

std::string command_report_merge(const std::vector<std::filesystem::path>& reports,
                                 const std::filesystem::path& out_path) {
    if (reports.empty()) {
        throw ConfigError("report-merge: no report files given");
    }
    std::ostringstream table;
    table << "report,seed,cycles,total_units,omega3,omega6,rejected,invocations,"
             "performance_omega3,recall_eq1,fp_error_eq2,precision,recall\n";
    for (const auto& path : reports) {
        std::ifstream in(path);
        if (!in) {
            throw InputError("cannot open report '" + path.string() + "'");
        }
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw InputError("'" + path.string() + "' is not a run report: " + e.what());
        }
        auto metric_cell = [&](const char* key) -> std::string {
            if (!doc.contains("metrics") || doc["metrics"].is_null()) {
                return "undefined";
            }
            const json& value = doc["metrics"][key];
            return value.is_null() ? "undefined" : value.dump();
        };
        try {
            table << path.filename().string() << ',' << doc.at("seed").dump() << ','
                  << doc.at("cycles").dump() << ',' << doc.at("total_units").dump() << ','
                  << doc.at("tally").at("omega3").dump() << ','
                  << doc.at("tally").at("omega6").dump() << ','
                  << doc.at("tally").at("rejected").dump() << ','
                  << doc.at("invocations").size() << ','
                  << doc.at("performance_omega3").dump() << ',' << metric_cell("recall_eq1")
                  << ',' << metric_cell("fp_error_eq2") << ','
                  << metric_cell("conventional_precision") << ','
                  << metric_cell("conventional_recall") << '\n';
        } catch (const json::exception& e) {
            throw InputError("'" + path.string() + "' is missing report fields: " + e.what());
        }
    }
    const std::string text = table.str();
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write merged table to '" + out_path.string() + "'");
    }
    out << text;
    return text;
}

} // namespace obh::cli
