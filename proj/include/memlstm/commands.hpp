#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "memlstm/config.hpp"

namespace memlstm {

// Shared row format for prediction CSVs (written by simulate, read back by
// compare). Columns: index,target_norm,prediction_norm,target,prediction.
struct PredictionRow {
    int index = 0;
    double target_norm = 0.0;
    double prediction_norm = 0.0;
    double target = 0.0;
    double prediction = 0.0;
};

void write_predictions_csv(const std::vector<PredictionRow>& rows,
                           const std::filesystem::path& path);
std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path);

// Common options that apply to every subcommand.
struct ReportOptions {
    bool no_timestamp = false;
};

// Trains on the configured dataset and writes <out>/weights.json plus
// <out>/train_report.json; prints the final metrics.
int cmd_train(const RunConfig& cfg, const ReportOptions& opt, std::ostream& out);

// Runs the analog pipeline over the test rows with the given weights. Writes
// software_predictions.csv, analog_predictions.csv, and simulate_report.json
// under <out>. n_seeds > 1 turns on a Monte Carlo over variation seeds and
// reports mean/std RMSE.
int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& weights_path, int n_seeds,
                 const ReportOptions& opt, std::ostream& out);

// Joins two prediction CSVs on index and writes comparison.csv
// (index,target,software,analog) plus compare_report.json with both metric
// pairs.
int cmd_compare(const RunConfig& cfg, const std::filesystem::path& software_csv,
                const std::filesystem::path& analog_csv, const ReportOptions& opt,
                std::ostream& out);

// Sweeps one non-ideality knob over explicit values, running seeded trials
// per value. parameter is one of sigma_rel, levels, droop_rate,
// gain_error_rel. Writes sweep.csv: parameter,value,mean_rmse,std_rmse,trials.
int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& weights_path,
              const std::string& parameter, const std::vector<std::string>& values, int trials,
              const ReportOptions& opt, std::ostream& out);

// Transfer-curve sweeps for the three analog blocks, one CSV each under
// <out>/curves.
int cmd_dump_curves(const RunConfig& cfg, std::ostream& out);

// Programs the weights onto both arrays and dumps their conductance grids as
// CSV under <out>.
int cmd_dump_crossbar(const RunConfig& cfg, const std::filesystem::path& weights_path,
                      std::ostream& out);

// Per-trial RMSE of the analog pipeline on the test set. Trial t runs with
// variation seed mix_seed(cfg.variation.seed, t) when n_seeds > 1; a single
// trial uses cfg.variation.seed as-is.
std::vector<double> monte_carlo_rmse(const RunConfig& cfg, const WeightSet& w, int n_seeds);

} // namespace memlstm
