// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_PIPELINE_HPP
#define QUENCHLOC_PIPELINE_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "quenchloc/inversion.hpp"
#include "quenchloc/scenario.hpp"

namespace quench::pipeline {

struct Options {
    std::string out_dir = ".";
    std::optional<indicator::LadderSpec> ladder_override;
    inversion::FitModel model = inversion::FitModel::slope_log;
    bool quiet = false;
};

// Builds the discrete source of a scenario (empty when the scenario has no
// patch or mu == 0 with no amplitude).
forward::DiscreteSource build_source(const scenario::Scenario& sc, double d_guess);

// Per-detector measurement stems written by `simulate` (det0, det1, ...).
std::vector<std::string> run_simulate(const scenario::Scenario& sc, const Options& opt);

// Indicator curves from measurement files (side = measurement) or from the
// scenario's boundary profiles (side = gamma). Writes det<i>_curve_<side>.csv
// and returns the curves.
std::vector<indicator::IndicatorCurve> run_indicator(const scenario::Scenario& sc,
                                                     const Options& opt, bool gamma_side);

// Full inversion from the measurement files in out_dir: curves, distance
// fits, presence verdicts, size bounds, triangulation (>= 3 detectors and a
// mesh). Writes report.json and the intermediate curve CSVs.
inversion::LocalizationReport run_invert(const scenario::Scenario& sc, const Options& opt);

// Standalone triangulation from an existing report.json + scenario mesh.
inversion::TriangulationResult run_triangulate(const scenario::Scenario& sc, const Options& opt);

// Brute-force oracle suites; prints one pass/fail row per check to `os`.
// When csv_dir is nonempty, the rows (and the rate ladders behind them)
// are also written there as CSV. Returns true when every check passed.
bool run_oracle(const std::string& which, std::ostream& os, const std::string& csv_dir = "");

}  // namespace quench::pipeline

#endif
