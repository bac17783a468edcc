// Batch front-end: reads a key=value config, runs one experiment kind and
// writes its CSV dataset(s). See README.md for the config keys.

#include "vfc/config.hpp"
#include "vfc/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

int run_cli(const std::string& config_path, const std::string& experiment,
            const std::string& out_dir, uint64_t seed, bool seed_given,
            const std::string& solver_report_path, const std::string& table_dump_path) {
    vfc::SystemConfig config;
    vfc::ExperimentSpec spec;
    if (!config_path.empty()) vfc::apply_config_file(config_path, config, spec);
    if (!experiment.empty()) spec.kind = vfc::experiment_kind_from(experiment);
    if (!out_dir.empty()) spec.out_dir = out_dir;
    if (seed_given) spec.seed = seed;

    config.validate();
    for (const std::string& warning :
         vfc::income_warnings(config, vfc::build_rate_table(config)))
        std::cerr << "warning: " << warning << '\n';

    const auto files = vfc::run(spec, config);
    for (const std::string& f : files) std::cout << f << '\n';

    if (!solver_report_path.empty() || !table_dump_path.empty()) {
        const vfc::TransitionTable table = vfc::build_model(config);
        if (!table_dump_path.empty()) {
            std::ofstream out(table_dump_path);
            vfc::write_table_dump(table, out);
            std::cout << table_dump_path << '\n';
        }
        if (!solver_report_path.empty()) {
            const vfc::SolverParams params = vfc::solver_params_for(table);
            const vfc::NormalizedModel model = vfc::normalize(table, params);
            const vfc::Solution solution = vfc::value_iteration(model, params);
            const vfc::Policy policy = vfc::extract_policy(model, solution.values);
            std::ofstream out(solver_report_path);
            vfc::write_solver_report(table, model, solution, policy, out);
            std::cout << solver_report_path << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"802.11p vehicular fog offloading planner: model, solver, "
                 "simulator and experiment datasets"};

    std::string config_path, experiment, out_dir = ".";
    std::string solver_report_path, table_dump_path;
    uint64_t seed = 1;

    app.add_option("--config", config_path, "key = value configuration file")
        ->check(CLI::ExistingFile);
    app.add_option("--experiment", experiment,
                   "arrival-rate | delay | policy-mix | reward-compare | "
                   "feasibility | simulate");
    app.add_option("--out", out_dir, "output directory for CSV files");
    const auto seed_opt = app.add_option("--seed", seed, "simulation seed");
    app.add_option("--solver-report", solver_report_path,
                   "also write the solver report for the configured k_max");
    app.add_option("--table-dump", table_dump_path,
                   "also write the transition-table dump for the configured k_max");

    CLI11_PARSE(app, argc, argv);

    try {
        return run_cli(config_path, experiment, out_dir, seed, seed_opt->count() > 0,
                       solver_report_path, table_dump_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
