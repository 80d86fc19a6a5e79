// qdroute: simulate quickdraw sensor logs and cluster climbs by route.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "qdroute/error.hpp"
#include "qdroute/features.hpp"
#include "qdroute/ingest.hpp"
#include "qdroute/pipeline.hpp"
#include "qdroute/simulate.hpp"

namespace fs = std::filesystem;
using namespace qdroute;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> events, truth, features, out_dir, rand;
  std::optional<int> ie, restarts, n_init, pca_dims, clusters;
  std::optional<double> gap;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_features, select;
  bool no_figures = false;
  bool serial = false;
};

void add_input_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "YAML file with line, sensor and pipeline sections");
  cmd->add_option("--events", o.events, "sample-event file");
  cmd->add_option("--truth", o.truth, "truth file from `simulate` (route per climb)");
  cmd->add_option("--ie", o.ie, "number of quickdraw positions");
  cmd->add_option("--gap", o.gap, "silence in seconds that separates climbs");
  cmd->add_flag("--serial", o.serial, "run every kernel single-threaded");
}

void add_cluster_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--features", o.features, "feature matrix from `features` instead of --events");
  cmd->add_option("--rand", o.rand, "adjusted | unadjusted")->check(CLI::IsMember({"adjusted", "unadjusted"}));
  cmd->add_option("--restarts", o.restarts, "K-Means restarts per evaluation");
  cmd->add_option("--seed", o.seed, "first restart seed");
  cmd->add_option("--n-init", o.n_init, "Lloyd runs per restart, best inertia kept");
  cmd->add_option("--max-features", o.max_features, "largest feature count in the sweep (0 = all)");
  cmd->add_option("--pca-dims", o.pca_dims, "PCA dimensions for the reduced clustering");
  cmd->add_option("--clusters", o.clusters, "cluster count (default: number of routes)");
}

report::PipelineConfig build_config(const Overrides& o) {
  report::PipelineConfig cfg;
  if (!o.config.empty()) report::load_pipeline_config(o.config, cfg);
  if (o.events) cfg.events_path = *o.events;
  if (o.truth) cfg.truth_path = *o.truth;
  if (o.features) cfg.features_path = *o.features;
  if (o.out_dir) cfg.output_dir = *o.out_dir;
  if (o.rand) cfg.rand_variant = report::parse_rand_variant(*o.rand);
  if (o.ie) cfg.ie = *o.ie;
  if (o.gap) cfg.gap_s = *o.gap;
  if (o.restarts) cfg.restarts = *o.restarts;
  if (o.seed) cfg.seed0 = *o.seed;
  if (o.n_init) cfg.n_init = *o.n_init;
  if (o.max_features) cfg.sweep_max = *o.max_features;
  if (o.select) cfg.fixed_features = *o.select;
  if (o.pca_dims) cfg.pca_dims = *o.pca_dims;
  if (o.clusters) cfg.clusters = *o.clusters;
  if (o.no_figures) cfg.write_figures = false;
  cfg.validate();
  return cfg;
}

Execution exec_of(const Overrides& o) { return o.serial ? Execution::Serial : Execution::Parallel; }

// Writes through a temporary file so a failure never leaves a partial output.
template <class F>
void write_file(const std::string& path, F&& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    return;
  }
  const std::string tmp = path + ".partial";
  try {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    body(out);
    out.close();
    if (!out) throw ValidationError("write failed for " + path);
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

std::vector<ingest::ClimbRecord> load_climbs(const report::PipelineConfig& cfg) {
  if (cfg.events_path.empty()) throw ConfigError("no events file given (--events)");
  ingest::LineConfig line{cfg.ie, {}};
  if (!cfg.truth_path.empty()) {
    for (const auto& t : sim::load_truth(cfg.truth_path)) line.route_labels.push_back(t.route);
  }
  const auto log = ingest::load_events(cfg.events_path, cfg.ie);
  for (const auto& w : log.warnings) std::cerr << "warning: " << w << '\n';
  return ingest::segment_climbs(log.events, line, cfg.gap_s);
}

int cmd_simulate(const std::string& config, const std::string& out_path, const std::string& truth_path,
                 std::optional<std::uint64_t> seed, bool serial) {
  auto cfg = sim::load_simulation_config(config);
  if (seed) cfg.seed = *seed;
  const auto result = sim::simulate(cfg, serial ? Execution::Serial : Execution::Parallel);
  write_file(out_path, [&](std::ostream& out) { ingest::write_events(out, result.merged()); });
  if (!truth_path.empty()) {
    write_file(truth_path, [&](std::ostream& out) { sim::write_truth(out, result.truth); });
  }
  std::ostream& log = out_path.empty() || out_path == "-" ? std::cerr : std::cout;
  log << "climbs\t" << result.truth.size() << '\n';
  log << "position\tevents\n";
  for (std::size_t p = 0; p < result.streams.size(); ++p) {
    log << p + 1 << '\t' << result.streams[p].size() << '\n';
  }
  return 0;
}

int cmd_ingest(const Overrides& o, const std::string& out_path) {
  const auto cfg = build_config(o);
  const auto climbs = load_climbs(cfg);
  write_file(out_path, [&](std::ostream& out) {
    out << "climb_id\troute\tstart\tend\tflagged";
    for (int p = 1; p <= cfg.ie; ++p) out << "\tclip_" << p;
    out << '\n';
    for (const auto& c : climbs) {
      out << c.climb_id << '\t' << c.ground_truth_route.value_or("") << '\t' << report::fmt(c.start)
          << '\t' << report::fmt(c.end) << '\t' << c.flagged.size();
      for (int p = 1; p <= cfg.ie; ++p) {
        const auto& w = c.window(p);
        out << '\t' << (w.present ? report::fmt(w.clip_time) : "");
      }
      out << '\n';
    }
  });
  return 0;
}

int cmd_features(const Overrides& o, const std::string& out_path) {
  const auto cfg = build_config(o);
  const auto climbs = load_climbs(cfg);
  features::FeatureOptions fopts;
  fopts.sensor = cfg.sensor;
  const auto m = features::build_feature_matrix(climbs, {cfg.ie, {}}, fopts, exec_of(o));
  write_file(out_path, [&](std::ostream& out) { features::write_feature_matrix(out, m); });
  return 0;
}

int cmd_sweep(const Overrides& o, const std::string& out_path) {
  auto cfg = build_config(o);
  cfg.fixed_features.reset();
  const auto outputs = report::run_pipeline(cfg, exec_of(o));
  write_file(out_path, [&](std::ostream& out) {
    report::write_sweep_table(out, outputs.report);
    out << "chosen_k\t" << outputs.report.chosen_k << '\n';
  });
  return 0;
}

int cmd_report(const Overrides& o) {
  const auto cfg = build_config(o);
  if (cfg.output_dir.empty()) throw ConfigError("no output directory given (--out-dir)");
  const auto outputs = report::run_pipeline(cfg, exec_of(o));
  report::write_outputs(cfg, outputs);
  const auto& r = outputs.report;
  std::cout << "climbs\t" << r.n_climbs << "\nchosen_k\t" << r.chosen_k << "\nrand_min\t"
            << report::fmt(r.final_stats.min) << "\nmisassigned\t" << r.misassigned
            << "\npca_misassigned\t" << r.misassigned_pca << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster quickdraw accelerometer logs by climbing route"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string sim_config, sim_out, sim_truth;
  std::optional<std::uint64_t> sim_seed;
  bool sim_serial = false;
  auto* simulate = app.add_subcommand("simulate", "generate a sample-event file from a YAML profile");
  simulate->add_option("--config", sim_config, "simulation YAML")->required();
  simulate->add_option("--out", sim_out, "events file (default stdout)");
  simulate->add_option("--truth-out", sim_truth, "truth file with route and onsets per climb");
  simulate->add_option("--seed", sim_seed, "override the config seed");
  simulate->add_flag("--serial", sim_serial, "simulate positions single-threaded");

  Overrides ing;
  std::string ing_out;
  auto* ingest_cmd = app.add_subcommand("ingest", "segment an events file into climbs");
  add_input_options(ingest_cmd, ing);
  ingest_cmd->add_option("--out", ing_out, "climb summary TSV (default stdout)");

  Overrides feat;
  std::string feat_out;
  auto* features_cmd = app.add_subcommand("features", "assemble the per-climb feature matrix");
  add_input_options(features_cmd, feat);
  features_cmd->add_option("--out", feat_out, "feature matrix TSV (default stdout)");

  Overrides swp;
  std::string swp_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "rand index against the number of selected features");
  add_input_options(sweep_cmd, swp);
  add_cluster_options(sweep_cmd, swp);
  sweep_cmd->add_option("--out", swp_out, "sweep table TSV (default stdout)");

  Overrides clu;
  auto* cluster_cmd = app.add_subcommand("cluster", "cluster with a fixed number of selected features");
  add_input_options(cluster_cmd, clu);
  add_cluster_options(cluster_cmd, clu);
  cluster_cmd->add_option("--select", clu.select, "number of top-scored features")->required();
  cluster_cmd->add_option("--out-dir", clu.out_dir, "output directory")->required();
  cluster_cmd->add_flag("--no-figures", clu.no_figures, "skip the SVG figures");

  Overrides rep;
  auto* report_cmd = app.add_subcommand("report", "full pipeline: sweep, clustering, PCA, GMM, figures");
  report_cmd->alias("pipeline");
  add_input_options(report_cmd, rep);
  add_cluster_options(report_cmd, rep);
  report_cmd->add_option("--out-dir", rep.out_dir, "output directory");
  report_cmd->add_flag("--no-figures", rep.no_figures, "skip the SVG figures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code_for(ErrorKind::Validation);
  }

  try {
    if (*simulate) return cmd_simulate(sim_config, sim_out, sim_truth, sim_seed, sim_serial);
    if (*ingest_cmd) return cmd_ingest(ing, ing_out);
    if (*features_cmd) return cmd_features(feat, feat_out);
    if (*sweep_cmd) return cmd_sweep(swp, swp_out);
    if (*cluster_cmd) return cmd_report(clu);
    if (*report_cmd) return cmd_report(rep);
  } catch (const Error& e) {
    std::cerr << "qdroute: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "qdroute: " << e.what() << '\n';
    return exit_code_for(ErrorKind::Validation);
  }
  return 0;
}
