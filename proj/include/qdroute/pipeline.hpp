#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdroute/evaluation.hpp"
#include "qdroute/features.hpp"
#include "qdroute/gmm.hpp"
#include "qdroute/ingest.hpp"
#include "qdroute/pca.hpp"
#include "qdroute/preprocess.hpp"
#include "qdroute/sensor.hpp"
#include "qdroute/silhouette.hpp"

namespace qdroute::report {

struct PipelineConfig {
  std::string events_path;
  std::string truth_path;
  std::string features_path;
  std::string output_dir;

  int ie = 8;
  double gap_s = ingest::kDefaultGapSeconds;
  sensor::SensorConfig sensor;

  cluster::RandVariant rand_variant = cluster::RandVariant::Adjusted;
  int restarts = 100;
  std::uint64_t seed0 = 0;
  int n_init = 10;
  std::size_t sweep_max = 0;  ///< 0 = every column
  std::optional<std::size_t> fixed_features;  ///< skip the sweep and use this many
  int pca_dims = 2;
  int clusters = 0;           ///< 0 = number of distinct truth labels
  cluster::GmmOptions gmm;
  bool write_figures = true;

  void validate() const;
  cluster::RestartOptions restart_options(cluster::RandVariant variant) const;
};

cluster::RandVariant parse_rand_variant(const std::string& name);

/// Reads `line` (ie, gap_s), `sensor` and `pipeline` sections of a YAML
/// file into `cfg`, leaving unset fields alone. The same file can drive
/// the simulator. Errors carry "file:line".
void parse_pipeline_config(const std::string& text, const std::string& source,
                           PipelineConfig& cfg);
void load_pipeline_config(const std::string& path, PipelineConfig& cfg);

struct ClimbRow {
  int climb_id = 0;
  std::string truth;
  int predicted = 0;      ///< full selected features, aligned to truth ids
  int predicted_pca = 0;  ///< 2-D PCA features, aligned to truth ids
  double pca_x = 0.0;
  double pca_y = 0.0;
  double silhouette = 0.0;
  int gmm_component = 0;
};

struct GmmComponent {
  double weight = 0.0;
  double mean_x = 0.0, mean_y = 0.0;
  double cov_xx = 0.0, cov_xy = 0.0, cov_yy = 0.0;
};

struct SweepRow {
  std::size_t n_features = 0;
  cluster::RandStats shown;     ///< in the requested rand variant
  cluster::RandStats adjusted;  ///< drives the feature-count choice
};

struct ClusterReport {
  std::size_t n_climbs = 0;
  int n_clusters = 0;
  std::vector<std::string> label_names;  ///< truth id -> route name
  cluster::RandVariant rand_variant = cluster::RandVariant::Adjusted;
  int restarts = 0;
  std::uint64_t seed0 = 0;
  int n_init = 0;
  bool labels_used_for_selection = true;

  std::vector<SweepRow> sweep;
  std::size_t chosen_k = 0;
  std::vector<preprocess::FeatureScore> selected;
  cluster::RandStats final_stats;  ///< requested variant at chosen_k
  int misassigned = 0;
  int misassigned_pca = 0;
  cluster::RandStats pca_stats;

  int pca_dims = 0;
  std::vector<double> pca_explained_variance;
  std::vector<std::array<double, 2>> kmeans_pca_centers;  ///< aligned to truth ids
  std::vector<GmmComponent> gmm;
  double gmm_log_likelihood = 0.0;
  std::vector<double> silhouette_mean_by_cluster;
  double silhouette_mean = 0.0;
  std::vector<std::vector<double>> silhouette_profiles;  ///< per aligned cluster id

  std::vector<ClimbRow> climbs;
};

/// Scaling, selection, sweep, final clustering, PCA, GMM and silhouette on
/// an assembled feature matrix with ground-truth labels.
/// The fitted scaler is stored in `scaler_out` when given.
ClusterReport analyze(const features::FeatureMatrix& matrix, const PipelineConfig& cfg,
                      Execution exec = Execution::Parallel,
                      preprocess::QuantileScaler* scaler_out = nullptr);

/// Reads events (or a feature matrix when features_path is set), segments,
/// assembles features and runs analyze(). Errors are rethrown with the
/// failing stage name prepended, keeping their kind.
struct PipelineOutputs {
  std::vector<ingest::ClimbRecord> climbs;
  features::FeatureMatrix features;
  preprocess::QuantileScaler scaler;
  ClusterReport report;
};
PipelineOutputs run_pipeline(const PipelineConfig& cfg, Execution exec = Execution::Parallel);

/// Formats a number the way the report file and the figures print it.
std::string fmt(double v);
const char* variant_name(cluster::RandVariant v);

void write_report(std::ostream& out, const ClusterReport& report);
void write_sweep_table(std::ostream& out, const ClusterReport& report);

/// SVG figures keyed by file name ("sweep.svg", "assignments.svg",
/// "pca.svg", "silhouette.svg"). Every plotted value is also in the report.
std::map<std::string, std::string> render_figures(const ClusterReport& report);

/// Writes report.tsv, sweep.tsv, features.tsv, scaler.txt and the figures
/// into cfg.output_dir. Removes whatever it wrote if a write fails.
void write_outputs(const PipelineConfig& cfg, const PipelineOutputs& outputs);

}  // namespace qdroute::report
