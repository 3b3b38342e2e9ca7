// Command-line front end: synth, estimate, cbf, crb, mc.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gdoa/baselines.hpp"
#include "gdoa/crb.hpp"
#include "gdoa/errors.hpp"
#include "gdoa/inference.hpp"
#include "gdoa/io.hpp"
#include "gdoa/rng.hpp"
#include "gdoa/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string input;
  std::string algo;
  std::string noise_case;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int workers = 0;
  int N = 0;
  std::string out;
  std::string per_trial_log;
  bool binary = false;
  bool timing = false;
  int points = 361;
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    gdoa::save_text(path, text);
}

int cmd_synth(const Options& o) {
  gdoa::ScenarioConfig config = gdoa::scenario_from_json(gdoa::load_json(o.config));
  if (o.seed) config.seed = *o.seed;
  config.validate();
  if (o.out.empty()) throw gdoa::ConfigError("synth: --out prefix is required");
  gdoa::Rng rng(config.seed);
  const auto result = gdoa::synthesize_scene(config, rng);
  gdoa::save_text(o.out + ".scene.json", gdoa::scene_to_json(config, result.scene).dump(2) + "\n");
  gdoa::save_snapshots(o.out + (o.binary ? ".bin" : ".snap"),
                       {result.snapshots, config.noise_case}, o.binary);
  return 0;
}

gdoa::NoiseCase case_for(const Options& o, const gdoa::SnapshotFile& f) {
  if (!o.algo.empty()) return gdoa::parse_noise_case(o.algo);
  if (!o.noise_case.empty()) return gdoa::parse_noise_case(o.noise_case);
  if (f.noise_case) return *f.noise_case;
  throw gdoa::ConfigError("estimate: give --algo or --case (the snapshot file has no case tag)");
}

int cmd_estimate(const Options& o) {
  const gdoa::SnapshotFile f = gdoa::load_snapshots(o.input);
  gdoa::InferenceOptions opts;
  const int N = o.N > 0 ? o.N : f.snapshots.M();
  const auto result = gdoa::run(f.snapshots, N, case_for(o, f), opts);
  write_output(o.out, gdoa::result_to_json(result).dump(2) + "\n");
  return 0;
}

int cmd_cbf(const Options& o) {
  const gdoa::SnapshotFile f = gdoa::load_snapshots(o.input);
  const auto grid = gdoa::AngularGrid::uniform(o.points);
  const gdoa::RVector p = gdoa::cbf_spectrum(f.snapshots, grid, true);
  std::string s = "theta_deg,power_db\n";
  for (std::size_t i = 0; i < grid.thetas.size(); ++i)
    s += gdoa::format_double(grid.thetas[i]) + "," +
         gdoa::format_double(p(static_cast<Eigen::Index>(i))) + "\n";
  write_output(o.out, s);
  return 0;
}

int cmd_crb(const Options& o) {
  const gdoa::SceneFile f = gdoa::scene_from_json(gdoa::load_json(o.config));
  const auto params = gdoa::CrbParameterization::from_weights(f.scene.omegas, f.scene.weights);
  const gdoa::RMatrix crb = gdoa::crb_frequencies(params, f.scene.noise_variances);
  json j;
  json rows = json::array();
  for (Eigen::Index r = 0; r < crb.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < crb.cols(); ++c) row.push_back(crb(r, c));
    rows.push_back(row);
  }
  j["omegas"] = f.scene.omegas;
  j["crb"] = rows;
  j["trace"] = crb.trace();
  j["trace_db"] = gdoa::crb_trace_db(crb);
  write_output(o.out, j.dump(2) + "\n");
  return 0;
}

int cmd_mc(const Options& o) {
  gdoa::SweepConfig config = gdoa::sweep_from_json(gdoa::load_json(o.config));
  if (o.seed) config.base.seed = *o.seed;
  if (o.trials) config.trials = *o.trials;
  if (!o.algo.empty()) config.algorithms = {o.algo};
  if (o.N > 0) config.N = o.N;
  const gdoa::ResultTable table = gdoa::run_sweep(config, o.workers);
  const std::string out = !o.out.empty() ? o.out : config.output_path;
  write_output(out, table.to_csv(o.timing));
  if (!o.per_trial_log.empty()) gdoa::save_text(o.per_trial_log, table.trial_log_csv(o.timing));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gridless DOA estimation toolkit"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  int trials = 0;

  auto* synth = app.add_subcommand("synth", "Draw a scene and its snapshots from a scenario config");
  synth->add_option("--config", o.config, "Scenario config (JSON)")->required();
  synth->add_option("--seed", seed, "Override the config seed");
  synth->add_option("--out", o.out, "Output prefix (writes PREFIX.scene.json and PREFIX.snap)")
      ->required();
  synth->add_flag("--binary", o.binary, "Write snapshots in the binary format (PREFIX.bin)");

  auto* estimate = app.add_subcommand("estimate", "Run one estimator on a snapshot file");
  estimate->add_option("input", o.input, "Snapshot file")->required();
  estimate->add_option("--algo", o.algo, "MVALSE, MVHN-S, MVHN-A or MVHN");
  estimate->add_option("--case", o.noise_case, "Noise case I-IV (alternative to --algo)");
  estimate->add_option("--N", o.N, "Component budget (default M)");
  estimate->add_option("--out", o.out, "Result file (default stdout)");

  auto* cbf = app.add_subcommand("cbf", "Conventional beamformer power spectrum");
  cbf->add_option("input", o.input, "Snapshot file")->required();
  cbf->add_option("--points", o.points, "Grid points over [-90, 90] degrees");
  cbf->add_option("--out", o.out, "CSV output (default stdout)");

  auto* crb = app.add_subcommand("crb", "Frequency Cramer-Rao bound of a scene");
  crb->add_option("--config", o.config, "Scene file written by synth")->required();
  crb->add_option("--out", o.out, "JSON output (default stdout)");

  auto* mc = app.add_subcommand("mc", "Monte Carlo sweep");
  mc->add_option("--config", o.config, "Sweep config (JSON)")->required();
  mc->add_option("--algo", o.algo, "Run only this algorithm");
  mc->add_option("--seed", seed, "Override the master seed");
  mc->add_option("--trials", trials, "Override the trial count");
  mc->add_option("--workers", o.workers, "Worker threads (default GDOA_WORKERS or all cores)");
  mc->add_option("--N", o.N, "Component budget (default M)");
  mc->add_option("--out", o.out, "Result table (default output_path, else stdout)");
  mc->add_option("--per-trial-log", o.per_trial_log, "Write the per-trial log CSV here");
  mc->add_flag("--timing", o.timing, "Add runtime columns (output is then not reproducible)");

  CLI11_PARSE(app, argc, argv);
  for (auto* sub : {synth, mc}) {
    if (sub->parsed() && sub->count("--seed")) o.seed = seed;
  }
  if (mc->parsed() && mc->count("--trials")) o.trials = trials;

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (estimate->parsed()) return cmd_estimate(o);
    if (cbf->parsed()) return cmd_cbf(o);
    if (crb->parsed()) return cmd_crb(o);
    if (mc->parsed()) return cmd_mc(o);
  } catch (const std::exception& e) {
    std::cerr << "gdoa: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
