#pragma once

// Monte Carlo sweeps over SNR or noise spread.
//
// The source weights are drawn once from the master seed and held fixed;
// each (trial, value) pair gets its own noise realization seeded by
// seed_schedule. Every algorithm sees the same realization.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdoa/inference.hpp"
#include "gdoa/model.hpp"

namespace gdoa {

enum class SweepAxis { SnrDb, DeltaNuDb };

struct SweepConfig {
  ScenarioConfig base;
  SweepAxis axis = SweepAxis::SnrDb;
  std::vector<double> values;
  int trials = 50;
  std::vector<std::string> algorithms{"MVALSE", "MVHN-S", "MVHN-A", "MVHN"};
  bool include_crb = true;
  int N = 0; // component budget; 0 means M
  InferenceOptions options;
  std::string output_path;

  int budget() const { return N > 0 ? N : base.M; }
  ScenarioConfig scenario_at(std::size_t value_index) const;
  void validate() const;
};

SweepConfig sweep_from_json(const nlohmann::json& j);

// Injective in (trial_index, value_index) for indices below 2^32.
std::uint64_t seed_schedule(std::uint64_t master_seed, std::uint64_t trial_index,
                            std::uint64_t value_index);

struct TrialRecord {
  std::size_t value_index = 0;
  int trial = 0;
  std::string algorithm;
  std::uint64_t seed = 0;
  int K_hat = 0;
  bool order_correct = false;
  double nmse_linear = 0.0;
  std::optional<double> freq_sq_error;
  double runtime_s = 0.0;
};

struct ResultRow {
  std::string algorithm;
  double value = 0.0;
  int trials = 0;
  double mean_nmse_db = 0.0;             // 10 log10 of the mean linear NMSE
  double p_order = 0.0;
  std::optional<double> mean_freq_mse_db; // over gated trials only
  int gated_trials = 0;
  std::optional<double> crb_db;           // 10 log10 of the mean CRB trace
  double mean_runtime_s = 0.0;
};

struct ResultTable {
  SweepAxis axis = SweepAxis::SnrDb;
  std::vector<ResultRow> rows; // value-major, algorithms in config order
  std::vector<TrialRecord> trials;
  std::vector<double> crb_traces; // per (value, trial), empty without CRB

  // With `timing` false the runtime column is omitted so that the output
  // depends on the seed alone.
  std::string to_csv(bool timing = false) const;
  std::string trial_log_csv(bool timing = false) const;
};

ResultTable aggregate(const SweepConfig& config, std::vector<TrialRecord> trials,
                      std::vector<double> crb_traces);

// workers = 0 picks GDOA_WORKERS, then the hardware concurrency.
ResultTable run_sweep(const SweepConfig& config, int workers = 0);

int resolve_workers(int requested);

// One CBF trial: strongest K peaks on the default grid, least-squares
// weights at those angles.
struct CbfFit {
  std::vector<double> omegas;
  CMatrix signal;
};
CbfFit cbf_fit(const SnapshotMatrix& Y, int K);

} // namespace gdoa
