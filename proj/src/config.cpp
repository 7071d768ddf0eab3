#include "obh/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "obh/errors.hpp"

namespace obh::cli {

namespace {

using nlohmann::json;

std::string maybe_suggest(const std::string& unknown,
                          const std::vector<std::string>& known) {
    std::string best;
    std::size_t best_dist = 3; // suggest only near misses
    for (const auto& candidate : known) {
        const std::size_t dist = dedup::edit_distance(unknown, candidate);
        if (dist < best_dist) {
            best_dist = dist;
            best = candidate;
        }
    }
    if (best.empty()) {
        return "";
    }
    return " (did you mean '" + best + "'?)";
}

void require_keys(const json& obj, const std::string& where,
                  const std::vector<std::string>& allowed) {
    if (!obj.is_object()) {
        throw ConfigError("config: '" + where + "' must be an object");
    }
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ConfigError("config: unknown key '" + item.key() + "' in " + where +
                              maybe_suggest(item.key(), allowed));
        }
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

std::string get_string(const json& value, const std::string& key) {
    if (!value.is_string()) {
        throw ConfigError("config: '" + key + "' must be a string");
    }
    return value.get<std::string>();
}

std::uint64_t get_count(const json& value, const std::string& key) {
    if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
        throw ConfigError("config: '" + key + "' must be a non-negative integer");
    }
    return value.get<std::uint64_t>();
}

double get_number(const json& value, const std::string& key) {
    if (!value.is_number()) {
        throw ConfigError("config: '" + key + "' must be a number");
    }
    return value.get<double>();
}

std::string resolve_path(const std::string& given, const std::filesystem::path& base_dir) {
    std::filesystem::path p(given);
    if (p.is_absolute()) {
        return p.lexically_normal().string();
    }
    return (base_dir / p).lexically_normal().string();
}

std::vector<std::string> known_top_keys() {
    return {"input",  "schema",          "generator",  "key",    "window",
            "policy", "trigger",         "sites",      "routing", "compaction_site",
            "clonal", "batch_size",      "seed",       "truth",  "calibration_pairs",
            "output"};
}

// --- CSV ------------------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string current;
    bool in_quotes = false;
    std::size_t i = 0;
    while (i < line.size()) {
        const char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            current.push_back(ch);
            ++i;
            continue;
        }
        if (ch == '"') {
            if (!current.empty()) {
                throw InputError("line " + std::to_string(line_no) +
                                 ": stray quote inside an unquoted field");
            }
            in_quotes = true;
            ++i;
            continue;
        }
        if (ch == ',') {
            fields.push_back(std::move(current));
            current.clear();
            ++i;
            continue;
        }
        current.push_back(ch);
        ++i;
    }
    if (in_quotes) {
        throw InputError("line " + std::to_string(line_no) + ": unterminated quoted field");
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') {
            out += "\"\"";
        } else {
            out.push_back(ch);
        }
    }
    out.push_back('"');
    return out;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() && rows.empty()) {
            throw InputError("line 1: empty header row in '" + path.string() + "'");
        }
        if (line.empty()) {
            continue; // tolerate a trailing blank line
        }
        rows.push_back(split_csv_line(line, line_no));
    }
    if (rows.empty()) {
        throw InputError("'" + path.string() + "' has no header row");
    }
    return rows;
}

std::size_t parse_id(const std::string& text, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const unsigned long long value = std::stoull(text, &pos);
        if (pos != text.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
        throw InputError("line " + std::to_string(line_no) + ": '" + text +
                         "' is not a record id");
    }
}

} // namespace

RunConfig parse_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("config: cannot open '" + file.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), file.has_parent_path() ? file.parent_path()
                                                                  : std::filesystem::path("."));
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    require_keys(doc, "the configuration", known_top_keys());

    RunConfig config;

    const json* input = find(doc, "input");
    if (input == nullptr) {
        throw ConfigError("config: required key 'input' is missing");
    }
    config.input_path = resolve_path(get_string(*input, "input"), base_dir);

    const json* schema = find(doc, "schema");
    if (schema == nullptr || !schema->is_array() || schema->empty()) {
        throw ConfigError("config: 'schema' must be a non-empty array of field names");
    }
    for (const auto& field : *schema) {
        config.schema.push_back(get_string(field, "schema"));
    }
    for (std::size_t i = 0; i < config.schema.size(); ++i) {
        for (std::size_t j = i + 1; j < config.schema.size(); ++j) {
            if (config.schema[i] == config.schema[j]) {
                throw ConfigError("config: schema field '" + config.schema[i] + "' repeats");
            }
        }
    }

    if (const json* generator = find(doc, "generator")) {
        const std::string name = get_string(*generator, "generator");
        if (name == "identity") {
            config.generator = GeneratorKind::Identity;
        } else if (name == "dedup") {
            config.generator = GeneratorKind::Dedup;
        } else {
            throw ConfigError("config: 'generator' must be \"identity\" or \"dedup\", got \"" +
                              name + "\"");
        }
    }

    auto field_index = [&](const std::string& name) {
        auto it = std::find(config.schema.begin(), config.schema.end(), name);
        if (it == config.schema.end()) {
            throw ConfigError("config: key field '" + name + "' is not in the schema" +
                              maybe_suggest(name, config.schema));
        }
        return static_cast<std::size_t>(it - config.schema.begin());
    };

    config.key.token_count = 3;
    config.key.prefix_len = 4;
    if (const json* key = find(doc, "key")) {
        require_keys(*key, "'key'", {"token_count", "prefix_len", "fields_used"});
        if (const json* v = find(*key, "token_count")) {
            config.key.token_count = get_count(*v, "key.token_count");
        }
        if (const json* v = find(*key, "prefix_len")) {
            config.key.prefix_len = get_count(*v, "key.prefix_len");
        }
        if (const json* v = find(*key, "fields_used")) {
            if (!v->is_array() || v->empty()) {
                throw ConfigError("config: 'key.fields_used' must be a non-empty array");
            }
            for (const auto& name : *v) {
                config.key_fields.push_back(get_string(name, "key.fields_used"));
            }
        }
    }
    if (config.key_fields.empty()) {
        config.key_fields = config.schema;
    }
    for (const auto& name : config.key_fields) {
        config.key.fields_used.push_back(field_index(name));
    }
    config.key.validate(config.schema.size());

    if (const json* window = find(doc, "window")) {
        config.window = get_count(*window, "window");
    }
    if (config.window < 2) {
        throw ConfigError("config: 'window' must be at least 2");
    }

    config.policy.weights.assign(config.schema.size(), 1.0 / static_cast<double>(config.schema.size()));
    config.policy.theta_low = 0.6;
    config.policy.theta_high = 0.85;
    if (const json* policy = find(doc, "policy")) {
        require_keys(*policy, "'policy'", {"weights", "theta_low", "theta_high"});
        if (const json* v = find(*policy, "weights")) {
            if (!v->is_array() || v->size() != config.schema.size()) {
                throw ConfigError("config: 'policy.weights' needs one weight per schema field (" +
                                  std::to_string(config.schema.size()) + ")");
            }
            double sum = 0.0;
            config.policy.weights.clear();
            for (const auto& w : *v) {
                const double value = get_number(w, "policy.weights");
                if (value < 0.0) {
                    throw ConfigError("config: 'policy.weights' must be non-negative");
                }
                sum += value;
                config.policy.weights.push_back(value);
            }
            if (sum <= 0.0) {
                throw ConfigError("config: 'policy.weights' must not all be zero");
            }
            for (double& w : config.policy.weights) {
                w /= sum;
            }
        }
        if (const json* v = find(*policy, "theta_low")) {
            config.policy.theta_low = get_number(*v, "policy.theta_low");
        }
        if (const json* v = find(*policy, "theta_high")) {
            config.policy.theta_high = get_number(*v, "policy.theta_high");
        }
    }
    if (config.policy.theta_low > config.policy.theta_high) {
        std::ostringstream os;
        os << "config: 'policy.theta_low' (" << config.policy.theta_low
           << ") exceeds 'policy.theta_high' (" << config.policy.theta_high << ")";
        throw ConfigError(os.str());
    }
    config.policy.validate();

    if (const json* trigger = find(doc, "trigger")) {
        require_keys(*trigger, "'trigger'", {"omega6_threshold"});
        if (const json* v = find(*trigger, "omega6_threshold")) {
            if (!v->is_null()) {
                config.trigger.omega6_threshold = get_count(*v, "trigger.omega6_threshold");
            }
        }
    }

    if (const json* sites = find(doc, "sites")) {
        if (!sites->is_array() || sites->empty()) {
            throw ConfigError("config: 'sites' must be a non-empty array");
        }
        for (const auto& entry : *sites) {
            require_keys(entry, "'sites'", {"id", "adipose", "capacity_threshold"});
            SiteConfig site;
            const json* id = find(entry, "id");
            if (id == nullptr) {
                throw ConfigError("config: every site needs an 'id'");
            }
            site.id = get_string(*id, "sites.id");
            if (const json* v = find(entry, "adipose")) {
                if (!v->is_boolean()) {
                    throw ConfigError("config: 'sites.adipose' must be a boolean");
                }
                site.adipose = v->get<bool>();
            }
            if (const json* v = find(entry, "capacity_threshold")) {
                site.capacity_threshold = get_count(*v, "sites.capacity_threshold");
            }
            config.sites.push_back(std::move(site));
        }
    } else {
        config.sites.push_back({"warehouse", true, 0});
        config.sites.push_back({"staging", false, 1000});
    }
    for (std::size_t i = 0; i < config.sites.size(); ++i) {
        for (std::size_t j = i + 1; j < config.sites.size(); ++j) {
            if (config.sites[i].id == config.sites[j].id) {
                throw ConfigError("config: site '" + config.sites[i].id + "' repeats");
            }
        }
    }

    auto site_exists = [&](const std::string& id, const std::string& key) {
        for (const auto& site : config.sites) {
            if (site.id == id) {
                return;
            }
        }
        std::vector<std::string> ids;
        for (const auto& site : config.sites) {
            ids.push_back(site.id);
        }
        throw ConfigError("config: '" + key + "' references unknown site '" + id + "'" +
                          maybe_suggest(id, ids));
    };

    const std::string default_adipose = [&]() -> std::string {
        for (const auto& site : config.sites) {
            if (site.adipose) {
                return site.id;
            }
        }
        throw ConfigError("config: at least one adipose site is required");
    }();
    const std::string default_nonadipose = [&]() -> std::string {
        for (const auto& site : config.sites) {
            if (!site.adipose) {
                return site.id;
            }
        }
        return default_adipose;
    }();

    config.routing.omega3_site = default_adipose;
    config.routing.omega6_site = default_nonadipose;
    config.routing.rejected_site = default_adipose;
    if (const json* routing = find(doc, "routing")) {
        require_keys(*routing, "'routing'", {"omega3", "omega6", "rejected"});
        if (const json* v = find(*routing, "omega3")) {
            config.routing.omega3_site = get_string(*v, "routing.omega3");
        }
        if (const json* v = find(*routing, "omega6")) {
            config.routing.omega6_site = get_string(*v, "routing.omega6");
        }
        if (const json* v = find(*routing, "rejected")) {
            config.routing.rejected_site = get_string(*v, "routing.rejected");
        }
    }
    site_exists(config.routing.omega3_site, "routing.omega3");
    site_exists(config.routing.omega6_site, "routing.omega6");
    site_exists(config.routing.rejected_site, "routing.rejected");

    config.compaction_site = default_adipose;
    if (const json* v = find(doc, "compaction_site")) {
        config.compaction_site = get_string(*v, "compaction_site");
    }
    site_exists(config.compaction_site, "compaction_site");
    for (const auto& site : config.sites) {
        if (site.id == config.compaction_site && !site.adipose) {
            throw ConfigError("config: 'compaction_site' must name an adipose site");
        }
    }

    config.clonal.population_size = 30;
    config.clonal.select_count = 5;
    config.clonal.clone_factor = 1.0;
    config.clonal.mutation_base = 0.2;
    config.clonal.replace_count = 3;
    config.clonal.max_generations = 40;
    if (const json* clonal = find(doc, "clonal")) {
        require_keys(*clonal, "'clonal'",
                     {"population_size", "select_count", "clone_factor", "mutation_base",
                      "replace_count", "max_generations"});
        if (const json* v = find(*clonal, "population_size")) {
            config.clonal.population_size = get_count(*v, "clonal.population_size");
        }
        if (const json* v = find(*clonal, "select_count")) {
            config.clonal.select_count = get_count(*v, "clonal.select_count");
        }
        if (const json* v = find(*clonal, "clone_factor")) {
            config.clonal.clone_factor = get_number(*v, "clonal.clone_factor");
        }
        if (const json* v = find(*clonal, "mutation_base")) {
            config.clonal.mutation_base = get_number(*v, "clonal.mutation_base");
        }
        if (const json* v = find(*clonal, "replace_count")) {
            config.clonal.replace_count = get_count(*v, "clonal.replace_count");
        }
        if (const json* v = find(*clonal, "max_generations")) {
            config.clonal.max_generations = get_count(*v, "clonal.max_generations");
        }
    }
    config.clonal.validate();

    if (const json* v = find(doc, "batch_size")) {
        config.batch_size = get_count(*v, "batch_size");
    }
    if (const json* v = find(doc, "seed")) {
        config.seed = get_count(*v, "seed");
    }
    if (const char* env_seed = std::getenv("OBH_SEED")) {
        try {
            std::size_t pos = 0;
            config.seed = std::stoull(env_seed, &pos);
            if (pos != std::string(env_seed).size()) {
                throw std::invalid_argument("trailing characters");
            }
        } catch (const std::exception&) {
            throw ConfigError(std::string("config: OBH_SEED ('") + env_seed +
                              "') is not a 64-bit unsigned integer");
        }
    }

    if (const json* v = find(doc, "truth")) {
        if (!v->is_null()) {
            config.truth_path = resolve_path(get_string(*v, "truth"), base_dir);
        }
    }
    if (const json* v = find(doc, "calibration_pairs")) {
        if (!v->is_null()) {
            config.calibration_path = resolve_path(get_string(*v, "calibration_pairs"), base_dir);
        }
    }
    if (const json* v = find(doc, "output")) {
        config.output_path = resolve_path(get_string(*v, "output"), base_dir);
    } else {
        config.output_path = resolve_path("report.json", base_dir);
    }

    return config;
}

std::string config_echo_json(const RunConfig& config) {
    json echo;
    echo["input"] = config.input_path;
    echo["schema"] = config.schema;
    echo["generator"] = config.generator == GeneratorKind::Identity ? "identity" : "dedup";
    echo["key"] = {{"token_count", config.key.token_count},
                   {"prefix_len", config.key.prefix_len},
                   {"fields_used", config.key_fields}};
    echo["window"] = config.window;
    echo["policy"] = {{"weights", config.policy.weights},
                      {"theta_low", config.policy.theta_low},
                      {"theta_high", config.policy.theta_high}};
    if (config.trigger.omega6_threshold) {
        echo["trigger"] = {{"omega6_threshold", *config.trigger.omega6_threshold}};
    } else {
        echo["trigger"] = {{"omega6_threshold", nullptr}};
    }
    json sites = json::array();
    for (const auto& site : config.sites) {
        sites.push_back({{"id", site.id},
                         {"adipose", site.adipose},
                         {"capacity_threshold", site.capacity_threshold}});
    }
    echo["sites"] = sites;
    echo["routing"] = {{"omega3", config.routing.omega3_site},
                       {"omega6", config.routing.omega6_site},
                       {"rejected", config.routing.rejected_site}};
    echo["compaction_site"] = config.compaction_site;
    echo["clonal"] = {{"population_size", config.clonal.population_size},
                      {"select_count", config.clonal.select_count},
                      {"clone_factor", config.clonal.clone_factor},
                      {"mutation_base", config.clonal.mutation_base},
                      {"replace_count", config.clonal.replace_count},
                      {"max_generations", config.clonal.max_generations}};
    echo["batch_size"] = config.batch_size;
    echo["seed"] = config.seed;
    echo["truth"] = config.truth_path ? json(*config.truth_path) : json(nullptr);
    echo["calibration_pairs"] =
        config.calibration_path ? json(*config.calibration_path) : json(nullptr);
    echo["output"] = config.output_path;
    return echo.dump();
}

std::vector<dedup::Record> read_records(const std::filesystem::path& path,
                                        const std::vector<std::string>& schema) {
    const auto rows = read_csv(path);
    const auto& header = rows.front();

    std::vector<std::size_t> column_of(schema.size());
    for (std::size_t s = 0; s < schema.size(); ++s) {
        auto it = std::find(header.begin(), header.end(), schema[s]);
        if (it == header.end()) {
            throw InputError("'" + path.string() + "': header is missing schema field '" +
                             schema[s] + "'");
        }
        column_of[s] = static_cast<std::size_t>(it - header.begin());
    }
    for (const auto& column : header) {
        if (std::find(schema.begin(), schema.end(), column) == schema.end()) {
            throw InputError("'" + path.string() + "': header column '" + column +
                             "' is not in the schema");
        }
    }

    std::vector<dedup::Record> records;
    records.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size()) {
            throw InputError("line " + std::to_string(r + 1) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(rows[r].size()));
        }
        dedup::Record record;
        record.id = records.size();
        record.fields.reserve(schema.size());
        for (std::size_t s = 0; s < schema.size(); ++s) {
            record.fields.push_back(rows[r][column_of[s]]);
        }
        records.push_back(std::move(record));
    }
    return records;
}

void write_records(const std::filesystem::path& path,
                   const std::vector<std::string>& schema,
                   const std::vector<dedup::Record>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    for (std::size_t s = 0; s < schema.size(); ++s) {
        if (s > 0) out << ',';
        out << csv_escape(schema[s]);
    }
    out << '\n';
    for (const auto& record : records) {
        if (record.fields.size() != schema.size()) {
            throw StateError("write_records: record " + std::to_string(record.id) +
                             " does not match the schema arity");
        }
        for (std::size_t s = 0; s < schema.size(); ++s) {
            if (s > 0) out << ',';
            out << csv_escape(record.fields[s]);
        }
        out << '\n';
    }
}

std::vector<TruthRow> read_truth(const std::filesystem::path& path) {
    const auto rows = read_csv(path);
    if (rows.front() != std::vector<std::string>{"left_id", "right_id"}) {
        throw InputError("'" + path.string() + "': expected header 'left_id,right_id'");
    }
    std::vector<TruthRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 2) {
            throw InputError("line " + std::to_string(r + 1) + ": expected 2 fields");
        }
        out.push_back({parse_id(rows[r][0], r + 1), parse_id(rows[r][1], r + 1)});
    }
    return out;
}

void write_truth(const std::filesystem::path& path, const std::vector<TruthRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out << "left_id,right_id\n";
    for (const auto& row : rows) {
        out << row.left << ',' << row.right << '\n';
    }
}

std::vector<dedup::LabeledPair> read_labeled_pairs(const std::filesystem::path& path) {
    const auto rows = read_csv(path);
    if (rows.front() != std::vector<std::string>{"left_id", "right_id", "is_duplicate"}) {
        throw InputError("'" + path.string() +
                         "': expected header 'left_id,right_id,is_duplicate'");
    }
    std::vector<dedup::LabeledPair> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 3) {
            throw InputError("line " + std::to_string(r + 1) + ": expected 3 fields");
        }
        dedup::LabeledPair pair;
        pair.left = parse_id(rows[r][0], r + 1);
        pair.right = parse_id(rows[r][1], r + 1);
        if (rows[r][2] == "1") {
            pair.is_duplicate = true;
        } else if (rows[r][2] == "0") {
            pair.is_duplicate = false;
        } else {
            throw InputError("line " + std::to_string(r + 1) +
                             ": 'is_duplicate' must be 0 or 1, got '" + rows[r][2] + "'");
        }
        out.push_back(pair);
    }
    return out;
}

} // namespace obh::cli
