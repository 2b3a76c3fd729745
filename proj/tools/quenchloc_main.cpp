// SPDX-License-Identifier: Apache-2.0
//
// quenchloc: second-sound quench localization toolkit.
//
// Stages: simulate -> indicator -> invert (-> triangulate), or `pipeline`
// for all of them. Intermediate artifacts are always written so stages can
// be rerun independently. `oracle` runs the brute-force verification
// suites.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "quenchloc/pipeline.hpp"
#include "quenchloc/version.hpp"

namespace {

// exit codes: 0 ok, 1 usage, 2 validation, 3 numerical failure
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
    std::string scenario_path;
    std::string out_dir = ".";
    double tau_min = 0.0, tau_max = 0.0;
    int tau_count = 0;
    std::string model = "slope-log";
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_scenario = true) {
    auto* s = cmd->add_option("--scenario", args.scenario_path, "scenario JSON file");
    if (needs_scenario) s->required();
    cmd->add_option("--out", args.out_dir, "artifact directory");
    cmd->add_option("--tau-min", args.tau_min, "override ladder tau_min");
    cmd->add_option("--tau-max", args.tau_max, "override ladder tau_max");
    cmd->add_option("--tau-count", args.tau_count, "override ladder point count");
    cmd->add_option("--model", args.model, "distance fit model: slope-log | pure-slope")
        ->check(CLI::IsMember({"slope-log", "pure-slope"}));
    cmd->add_flag("--quiet", args.quiet, "suppress progress output");
}

quench::pipeline::Options make_options(const CommonArgs& args) {
    quench::pipeline::Options opt;
    opt.out_dir = args.out_dir;
    opt.quiet = args.quiet;
    opt.model = args.model == "pure-slope" ? quench::inversion::FitModel::pure_slope
                                           : quench::inversion::FitModel::slope_log;
    if (args.tau_min > 0.0 || args.tau_max > 0.0 || args.tau_count > 0) {
        if (!(args.tau_min > 0.0 && args.tau_max >= args.tau_min && args.tau_count >= 1))
            throw quench::scenario::ScenarioError(
                "ladder override needs --tau-min, --tau-max and --tau-count together");
        opt.ladder_override =
            quench::indicator::LadderSpec{args.tau_min, args.tau_max, args.tau_count};
    }
    return opt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"second-sound quench localization toolkit"};
    app.set_version_flag("--version", quench::kVersion);
    app.require_subcommand(1);

    CommonArgs args;
    std::string indicator_side = "measurement";
    std::string oracle_which = "all";

    auto* sim = app.add_subcommand("simulate", "synthesize detector measurements");
    add_common(sim, args);
    auto* ind = app.add_subcommand("indicator", "compute indicator curves");
    add_common(ind, args);
    ind->add_option("--side", indicator_side, "measurement | gamma")
        ->check(CLI::IsMember({"measurement", "gamma"}));
    auto* inv = app.add_subcommand("invert", "distances, presence, size bound, triangulation");
    add_common(inv, args);
    auto* tri = app.add_subcommand("triangulate", "triangulate from an existing report");
    add_common(tri, args);
    auto* pipe = app.add_subcommand("pipeline", "simulate + indicator + invert");
    add_common(pipe, args);
    auto* orc = app.add_subcommand("oracle", "run brute-force verification suites");
    orc->add_option("suite", oracle_which, "potentials | asymptotics | all");
    std::string oracle_out;
    orc->add_option("--out", oracle_out, "also write the result tables as CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (orc->parsed()) {
            return quench::pipeline::run_oracle(oracle_which, std::cout, oracle_out)
                       ? kExitOk
                       : kExitNumerical;
        }
        const auto sc = quench::scenario::load_scenario(args.scenario_path);
        const auto opt = make_options(args);
        if (sim->parsed()) {
            quench::pipeline::run_simulate(sc, opt);
        } else if (ind->parsed()) {
            quench::pipeline::run_indicator(sc, opt, indicator_side == "gamma");
        } else if (inv->parsed()) {
            quench::pipeline::run_invert(sc, opt);
        } else if (tri->parsed()) {
            quench::pipeline::run_triangulate(sc, opt);
        } else if (pipe->parsed()) {
            quench::pipeline::run_simulate(sc, opt);
            quench::pipeline::run_indicator(sc, opt, false);
            quench::pipeline::run_invert(sc, opt);
        }
        return kExitOk;
    } catch (const quench::scenario::ScenarioError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
