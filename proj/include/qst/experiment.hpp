#pragma once

// Parameter sweeps over (n, M, rbar, init) with per-seed result rows,
// median summaries and SVG plots. Every cell is a pure function of
// (spec, cell coordinates), so cells can run in any order on any thread.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qst/estimator.hpp"

namespace qst {

struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<int> n_values;
  std::vector<long long> shots;
  std::vector<int> rbar;
  std::vector<InitMode> inits;
  std::string algorithm = "pgd";  // pgd | psgd
  int seeds = 5;
  std::uint64_t base_seed = 0;
  std::string povm = "local-sic";   // or a local POVM JSON file, repeated on every site
  std::string sampler = "auto";     // auto | enumerate | sequential
  int purity_rank = 10;             // K_l of the ground-truth generator
  bool fixed_step = false;          // fixed-step presets instead of decaying ones
  bool gamma = false;               // beam-search gamma of each truth
  int gamma_beam = 64;
  nlohmann::json overrides = nlohmann::json::object();  // EstimatorConfig fields

  static ExperimentSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
  /// Hash of everything that affects numeric results.
  std::string hash() const;
};

struct Cell {
  int n = 0;
  long long shots = 0;
  int rbar = 1;
  InitMode init = InitMode::random;
  int seed = 0;
  std::string key(const std::string& algorithm) const;
};

struct ResultRow {
  Cell cell;
  std::string algorithm;
  double final_error = 0;
  double final_loss = 0;
  double init_error = 0;
  int iterations = 0;
  bool converged = false;
  std::string reason;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0;
};

struct SummaryRow {
  int n = 0;
  long long shots = 0;
  int rbar = 1;
  InitMode init = InitMode::random;
  int runs = 0;
  int not_converged = 0;
  double median_error = 0;
  double median_init_error = 0;
  double median_loss = 0;
  double median_iterations = 0;
  double median_gamma = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentOptions {
  std::filesystem::path out;  // empty: keep everything in memory
  int threads = 1;
  bool plots = true;
  bool write_traces = true;
  std::function<void(const ResultRow&)> on_row;
};

std::vector<Cell> enumerate_cells(const ExperimentSpec& spec);

struct CellSeeds {
  std::uint64_t truth, record, init, batch;
};
/// Truth seeds ignore M and init, so one draw is shared across M-sweeps.
CellSeeds cell_seeds(const ExperimentSpec& spec, const Cell& cell);

/// Estimator configuration used for a cell: preset, then spec overrides.
EstimatorConfig cell_config(const ExperimentSpec& spec, const Cell& cell);

ResultRow run_cell(const ExperimentSpec& spec, const Cell& cell, Estimate* estimate = nullptr);

/// Runs every cell not already completed under options.out and returns all
/// rows in cell order.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const ExperimentOptions& options);

double median(std::vector<double> values);
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

std::string results_csv(const std::vector<ResultRow>& rows, const std::string& spec_hash, std::uint64_t seed);
std::string summary_csv(const std::vector<SummaryRow>& rows, const std::string& spec_hash, std::uint64_t seed);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};
/// Static line plot; log axes plot log10 of the data with decade ticks.
std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<PlotSeries>& series, bool log_x, bool log_y,
                          const std::string& provenance_note);

/// QST_THREADS when set, else the hardware concurrency.
int default_threads();

}  // namespace qst
