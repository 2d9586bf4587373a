#pragma once

#include "amfem/adapt.hpp"
#include "amfem/cli/config.hpp"
#include "amfem/cli/rates.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace amfem::cli {

struct ExperimentResult {
    nlohmann::json report;
    /// False when a verification check failed.
    bool passed = true;
};

/// Runs the configured subcommand and writes its outputs to config.out:
///   run, uniform: history.csv, history.json, indicators_<k>.csv, report.json
///   verify:       report.json
///   rates:        rates.json (reads config.history_path())
/// Every JSON output embeds the configuration.
ExperimentResult run_experiment(const RunConfig& config);

/// Rate fits of eta^2 + osc^2 and of the energy error over a history.
nlohmann::json rates_report(const std::vector<HistoryRow>& rows);

/// Full per-iteration history as JSON (NaN written as null).
nlohmann::json history_json(const AfemHistory& history);

}  // namespace amfem::cli
