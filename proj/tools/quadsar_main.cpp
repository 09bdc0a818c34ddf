// quadsar: deterministic quadcopter search-and-rescue simulator CLI.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "sar/output.hpp"
#include "sar/runner.hpp"

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("QUADSAR_OUT")) return env;
    return "out";
}

void add_common(CLI::App* cmd, sar::RunOptions& opts, std::optional<std::uint64_t>& seed) {
    cmd->add_option("--config", opts.config_path, "config JSON file (defaults when omitted)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "override sim.seed");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--override", opts.overrides, "dot-path override KEY=VALUE (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadcopter search-and-rescue simulator"};
    app.require_subcommand(1);

    sar::RunOptions opts;
    opts.out_dir = default_out_dir();
    std::optional<std::uint64_t> seed;

    auto* run_cmd = app.add_subcommand("run", "run one simulation and write its artifacts");
    add_common(run_cmd, opts, seed);

    auto* sweep_cmd = app.add_subcommand("sweep", "run one simulation per parameter value");
    std::string sweep_param;
    std::vector<std::string> sweep_values;
    add_common(sweep_cmd, opts, seed);
    sweep_cmd->add_option("--param", sweep_param, "config dot-path to vary")->required();
    sweep_cmd->add_option("--values", sweep_values, "values to sweep over")->required();

    auto* eval_cmd = app.add_subcommand("eval", "re-score an existing detections.jsonl");
    std::string eval_log;
    add_common(eval_cmd, opts, seed);
    eval_cmd->add_option("--log", eval_log, "detections.jsonl to score")
        ->required()
        ->check(CLI::ExistingFile);

    app.add_subcommand("schema", "print the config schema and output file formats");

    CLI11_PARSE(app, argc, argv);
    opts.seed = seed;

    try {
        if (run_cmd->parsed()) {
            const sar::RunResult res = sar::run_simulation(opts);
            std::cout << res.metrics_json.dump(2) << "\n";
        } else if (sweep_cmd->parsed()) {
            sar::run_sweep(opts, sweep_param, sweep_values);
            std::cout << "wrote " << opts.out_dir << "/sweep.csv\n";
        } else if (eval_cmd->parsed()) {
            std::cout << sar::run_eval(eval_log, opts).dump(2) << "\n";
        } else {
            std::cout << sar::schema_text();
        }
    } catch (const sar::SimAbort& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
