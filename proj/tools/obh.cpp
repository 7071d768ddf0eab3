#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "obh/commands.hpp"
#include "obh/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"obh - just-in-time immune-triggered data cleaning"};
    app.require_subcommand(1);

    std::string config_path;
    auto* clean = app.add_subcommand("clean", "run the dedup pipeline over a CSV input");
    clean->add_option("--config", config_path, "run configuration (JSON)")->required();

    std::size_t gen_n = 100;
    double gen_rate = 0.3;
    std::size_t gen_edits = 3;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    auto* generate = app.add_subcommand("generate", "write a synthetic dirty dataset + truth file");
    generate->add_option("--n", gen_n, "number of clean records")->required();
    generate->add_option("--dup-rate", gen_rate, "fraction of records to duplicate")->required();
    generate->add_option("--max-edits", gen_edits, "max character edits per duplicate")->required();
    generate->add_option("--seed", gen_seed, "generator seed")->required();
    generate->add_option("--out", gen_out, "output CSV path")->required();

    std::string opt_benchmark;
    std::size_t opt_dims = 5;
    std::size_t opt_generations = 200;
    std::uint64_t opt_seed = 0;
    std::string opt_out;
    auto* optimize = app.add_subcommand("optimize", "run the clonal optimizer on a benchmark");
    optimize->add_option("--benchmark", opt_benchmark, "sphere or ackley")->required();
    optimize->add_option("--dims", opt_dims, "genome dimensions")->required();
    optimize->add_option("--generations", opt_generations, "generation count")->required();
    optimize->add_option("--seed", opt_seed, "run seed")->required();
    optimize->add_option("--out", opt_out, "history CSV path")->required();

    std::vector<std::string> merge_inputs;
    std::string merge_out;
    auto* merge = app.add_subcommand("report-merge", "merge report metrics into one CSV table");
    merge->add_option("reports", merge_inputs, "run report JSON files")->required();
    merge->add_option("--out", merge_out, "merged CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (clean->parsed()) {
            const auto config = obh::cli::parse_config(config_path);
            const auto result = obh::cli::command_clean(config);
            std::cout << result.summary;
        } else if (generate->parsed()) {
            const auto result =
                obh::cli::command_generate(gen_n, gen_rate, gen_edits, gen_seed, gen_out);
            std::cout << "wrote " << result.rows_written << " rows to "
                      << result.data_path.string() << "\n"
                      << "wrote " << result.truth_pairs << " truth pairs to "
                      << result.truth_path.string() << "\n";
        } else if (optimize->parsed()) {
            const auto result = obh::cli::command_optimize(opt_benchmark, opt_dims,
                                                           opt_generations, opt_seed, opt_out);
            std::cout << "best fitness " << obh::cli::format_double(*result.run.best.fitness)
                      << " after " << result.run.history.size() << " generations ("
                      << result.run.evaluations << " evaluations)\n"
                      << "history written to " << result.history_path.string() << "\n";
        } else if (merge->parsed()) {
            std::vector<std::filesystem::path> paths(merge_inputs.begin(), merge_inputs.end());
            obh::cli::command_report_merge(paths, merge_out);
            std::cout << "merged " << paths.size() << " reports into " << merge_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return obh::exit_code_for(e);
    }
    return 0;
}
