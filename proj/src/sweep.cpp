#include "gdoa/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "gdoa/baselines.hpp"
#include "gdoa/crb.hpp"
#include "gdoa/errors.hpp"
#include "gdoa/io.hpp"
#include "gdoa/metrics.hpp"
#include "gdoa/rng.hpp"

namespace gdoa {
namespace {

using nlohmann::json;

bool is_cbf(const std::string& algo) { return algo == "CBF"; }

double to_db(double linear) { return linear > 0.0 ? 10.0 * std::log10(linear) : kExactDb; }

std::string axis_name(SweepAxis a) { return a == SweepAxis::SnrDb ? "snr_db" : "delta_nu_db"; }

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

struct TrialOutput {
  std::vector<TrialRecord> records;
  double crb_trace = std::numeric_limits<double>::quiet_NaN();
};

TrialOutput run_trial(const SweepConfig& config, std::size_t v, int t, const CMatrix& weights,
                      const CMatrix& clean) {
  const ScenarioConfig scenario = config.scenario_at(v);
  const std::uint64_t seed = seed_schedule(scenario.seed, static_cast<std::uint64_t>(t), v);
  Rng rng(seed);
  const Measurement meas = synthesize_measurement(scenario, clean, rng);
  const int N = config.budget();

  TrialOutput out;
  for (const auto& algo : config.algorithms) {
    TrialRecord rec;
    rec.value_index = v;
    rec.trial = t;
    rec.algorithm = algo;
    rec.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> omegas;
    CMatrix signal;
    if (is_cbf(algo)) {
      CbfFit fit = cbf_fit(meas.snapshots, scenario.K());
      omegas = std::move(fit.omegas);
      signal = std::move(fit.signal);
    } else {
      EstimationResult r = run(meas.snapshots, N, parse_noise_case(algo), config.options);
      omegas = std::move(r.omegas);
      signal = std::move(r.signal);
    }
    rec.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const TrialOutcome o = evaluate_trial(signal, clean, omegas, scenario.true_omegas, N);
    rec.K_hat = static_cast<int>(omegas.size());
    rec.order_correct = o.order_correct;
    rec.nmse_linear = o.nmse_linear;
    rec.freq_sq_error = o.freq_sq_error;
    out.records.push_back(std::move(rec));
  }

  if (config.include_crb && scenario.K() > 0 && (meas.noise_variances.array() > 0.0).all()) {
    try {
      const auto params = CrbParameterization::from_weights(scenario.true_omegas, weights);
      out.crb_trace = crb_frequencies(params, meas.noise_variances).trace();
    } catch (const RankError&) {
    }
  }
  return out;
}

} // namespace

ScenarioConfig SweepConfig::scenario_at(std::size_t value_index) const {
  ScenarioConfig c = base;
  const double v = values.at(value_index);
  if (axis == SweepAxis::SnrDb)
    c.snr_db = v;
  else
    c.delta_nu_db = v;
  return c;
}

void SweepConfig::validate() const {
  if (values.empty()) throw ConfigError("sweep: no sweep values");
  if (trials < 1) throw ConfigError("sweep: trials must be positive");
  if (algorithms.empty()) throw ConfigError("sweep: no algorithms");
  if (N < 0 || budget() > base.M || budget() < 1)
    throw ConfigError("sweep: component budget must satisfy 1 <= N <= M");
  if (base.K() < 1) throw ConfigError("sweep: at least one true frequency is required");
  for (const auto& a : algorithms)
    if (!is_cbf(a)) parse_noise_case(a);
  for (std::size_t v = 0; v < values.size(); ++v) scenario_at(v).validate();
}

SweepConfig sweep_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("sweep config must be a JSON object");
  SweepConfig c;
  if (!j.contains("base")) throw ParseError("missing key 'base'");
  c.base = scenario_from_json(j.at("base"));
  try {
    const std::string axis = j.at("sweep_axis").get<std::string>();
    if (axis == "snr_db")
      c.axis = SweepAxis::SnrDb;
    else if (axis == "delta_nu_db")
      c.axis = SweepAxis::DeltaNuDb;
    else
      throw ParseError("bad value for key 'sweep_axis'");
    c.values = j.at("values").get<std::vector<double>>();
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    if (j.contains("algorithms")) c.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    if (j.contains("include_crb")) c.include_crb = j.at("include_crb").get<bool>();
    if (j.contains("N")) c.N = j.at("N").get<int>();
    if (j.contains("max_iterations")) c.options.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("tolerance")) c.options.tolerance = j.at("tolerance").get<double>();
    if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
  } catch (const json::out_of_range& e) {
    throw ParseError(std::string("sweep config: ") + e.what());
  } catch (const json::type_error& e) {
    throw ParseError(std::string("sweep config: ") + e.what());
  }
  return c;
}

std::uint64_t seed_schedule(std::uint64_t master_seed, std::uint64_t trial_index,
                            std::uint64_t value_index) {
  const std::uint64_t key = (value_index << 32) | (trial_index & 0xFFFFFFFFULL);
  return splitmix64_mix(master_seed ^ splitmix64_mix(key));
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GDOA_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

CbfFit cbf_fit(const SnapshotMatrix& Y, int K) {
  CbfFit fit;
  for (double theta : cbf_doa_estimates(Y, AngularGrid::uniform(), K))
    fit.omegas.push_back(theta_to_omega(theta));
  if (fit.omegas.empty()) {
    fit.signal = CMatrix::Zero(Y.M(), Y.L());
    return fit;
  }
  const CMatrix A = steering_matrix(fit.omegas, Y.M());
  fit.signal = A * A.completeOrthogonalDecomposition().solve(Y.data);
  return fit;
}

ResultTable aggregate(const SweepConfig& config, std::vector<TrialRecord> trials,
                      std::vector<double> crb_traces) {
  ResultTable table;
  table.axis = config.axis;
  const std::size_t A = config.algorithms.size();
  const auto T = static_cast<std::size_t>(config.trials);
  for (std::size_t v = 0; v < config.values.size(); ++v) {
    std::optional<double> crb_db;
    if (config.include_crb) {
      double sum = 0.0;
      int count = 0;
      for (std::size_t t = 0; t < T; ++t) {
        const double c = crb_traces.at(v * T + t);
        if (std::isfinite(c)) {
          sum += c;
          ++count;
        }
      }
      if (count > 0) crb_db = to_db(sum / count);
    }
    for (std::size_t a = 0; a < A; ++a) {
      ResultRow row;
      row.algorithm = config.algorithms[a];
      row.value = config.values[v];
      row.trials = config.trials;
      double nmse = 0.0, freq = 0.0, runtime = 0.0;
      int correct = 0;
      for (std::size_t t = 0; t < T; ++t) {
        const TrialRecord& r = trials.at((v * T + t) * A + a);
        nmse += r.nmse_linear;
        runtime += r.runtime_s;
        if (r.order_correct) ++correct;
        if (r.freq_sq_error) {
          freq += *r.freq_sq_error;
          ++row.gated_trials;
        }
      }
      row.mean_nmse_db = to_db(nmse / static_cast<double>(T));
      row.p_order = static_cast<double>(correct) / static_cast<double>(T);
      if (row.gated_trials > 0) row.mean_freq_mse_db = to_db(freq / row.gated_trials);
      row.crb_db = crb_db;
      row.mean_runtime_s = runtime / static_cast<double>(T);
      table.rows.push_back(std::move(row));
    }
  }
  table.trials = std::move(trials);
  table.crb_traces = std::move(crb_traces);
  return table;
}

ResultTable run_sweep(const SweepConfig& config, int workers) {
  config.validate();
  Rng scene_rng(config.base.seed);
  const CMatrix weights = draw_weights(config.base.K(), config.base.L,
                                       config.base.amplitude_law, scene_rng);
  const CMatrix clean = steering_matrix(config.base.true_omegas, config.base.M) * weights;

  const std::size_t V = config.values.size();
  const auto T = static_cast<std::size_t>(config.trials);
  std::vector<TrialOutput> outputs(V * T);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t job = next++; job < V * T; job = next++) {
      try {
        outputs[job] = run_trial(config, job / T, static_cast<int>(job % T), weights, clean);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = V * T;
      }
    }
  };
  const int n = std::min<int>(resolve_workers(workers), static_cast<int>(V * T));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<TrialRecord> records;
  std::vector<double> crb;
  for (auto& o : outputs) {
    for (auto& r : o.records) records.push_back(std::move(r));
    crb.push_back(o.crb_trace);
  }
  return aggregate(config, std::move(records), std::move(crb));
}

std::string ResultTable::to_csv(bool timing) const {
  std::string s = fmt::format("algorithm,{},trials,mean_nmse_db,p_order,mean_freq_mse_db,"
                              "gated_trials,crb_db",
                              axis_name(axis));
  s += timing ? ",mean_runtime_s\n" : "\n";
  for (const auto& r : rows) {
    s += fmt::format("{},{},{},{},{},{},{},{}", r.algorithm, format_double(r.value), r.trials,
                     format_double(r.mean_nmse_db), format_double(r.p_order),
                     optional_field(r.mean_freq_mse_db), r.gated_trials,
                     optional_field(r.crb_db));
    s += timing ? "," + format_double(r.mean_runtime_s) + "\n" : "\n";
  }
  return s;
}

std::string ResultTable::trial_log_csv(bool timing) const {
  std::string s = "value_index,trial,algorithm,seed,K_hat,order_correct,nmse_linear,"
                  "freq_sq_error,crb_trace";
  s += timing ? ",runtime_s\n" : "\n";
  const std::size_t per_job =
      trials.empty() || crb_traces.empty() ? 0 : trials.size() / crb_traces.size();
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const TrialRecord& r = trials[i];
    std::optional<double> crb;
    if (per_job > 0 && std::isfinite(crb_traces[i / per_job])) crb = crb_traces[i / per_job];
    s += fmt::format("{},{},{},{},{},{},{},{},{}", r.value_index, r.trial, r.algorithm, r.seed,
                     r.K_hat, r.order_correct ? 1 : 0, format_double(r.nmse_linear),
                     optional_field(r.freq_sq_error), optional_field(crb));
    s += timing ? "," + format_double(r.runtime_s) + "\n" : "\n";
  }
  return s;
}

} // namespace gdoa
