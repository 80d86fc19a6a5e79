#include "qdroute/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "qdroute/error.hpp"
#include "qdroute/rand_index.hpp"
#include "qdroute/simulate.hpp"

namespace qdroute::report {

namespace fs = std::filesystem;

void PipelineConfig::validate() const {
  if (ie < 5) throw ConfigError("pipeline: ie must be >= 5");
  if (!(gap_s > 0.0)) throw ConfigError("pipeline: gap_s must be > 0");
  if (restarts < 1) throw ConfigError("pipeline: restarts must be >= 1");
  if (n_init < 1) throw ConfigError("pipeline: n_init must be >= 1");
  if (pca_dims < 1) throw ConfigError("pipeline: pca_dims must be >= 1");
  if (clusters < 0) throw ConfigError("pipeline: clusters must be >= 0");
  if (fixed_features && *fixed_features == 0) {
    throw ConfigError("pipeline: selected feature count must be >= 1");
  }
  if (gmm.max_iter < 1 || !(gmm.tol > 0.0) || !(gmm.reg >= 0.0)) {
    throw ConfigError("pipeline: invalid GMM options");
  }
  sensor.validate();
}

cluster::RestartOptions PipelineConfig::restart_options(cluster::RandVariant variant) const {
  cluster::RestartOptions opts;
  opts.restarts = restarts;
  opts.seed0 = seed0;
  opts.n_init = n_init;
  opts.variant = variant;
  return opts;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const char* variant_name(cluster::RandVariant v) {
  return v == cluster::RandVariant::Adjusted ? "adjusted" : "unadjusted";
}

namespace {

template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Validation, std::string(name) + ": " + e.what());
  }
}

// Maps raw cluster ids to aligned ids using one pass over paired labels.
std::map<int, int> id_map(const std::vector<int>& raw, const std::vector<int>& aligned) {
  std::map<int, int> m;
  for (std::size_t i = 0; i < raw.size(); ++i) m.emplace(raw[i], aligned[i]);
  return m;
}

}  // namespace

ClusterReport analyze(const features::FeatureMatrix& matrix, const PipelineConfig& cfg,
                      Execution exec, preprocess::QuantileScaler* scaler_out) {
  cfg.validate();
  if (matrix.rows() < 2) throw ValidationError("need at least 2 climbs");
  if (!matrix.has_labels()) {
    throw ValidationError("ground-truth route labels are required for feature selection");
  }
  ClusterReport rep;
  rep.n_climbs = matrix.rows();
  rep.rand_variant = cfg.rand_variant;
  rep.restarts = cfg.restarts;
  rep.seed0 = cfg.seed0;
  rep.n_init = cfg.n_init;

  int n_groups = 0;
  const auto truth = preprocess::encode_labels(matrix.labels, &n_groups);
  rep.label_names.resize(static_cast<std::size_t>(n_groups));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    rep.label_names[static_cast<std::size_t>(truth[i])] = matrix.labels[i];
  }
  const int k = cfg.clusters > 0 ? cfg.clusters : n_groups;
  rep.n_clusters = k;

  const auto names = matrix.column_names();
  auto scaler = stage("preprocess", [&] { return preprocess::fit_quantile(matrix.values, names); });
  const Matrix scaled = stage("preprocess", [&] { return preprocess::transform(scaler, matrix.values, exec); });
  const auto scores = stage("preprocess", [&] {
    return preprocess::score_features(scaled, names, matrix.labels, exec);
  });
  if (scaler_out) *scaler_out = std::move(scaler);

  const auto shown_opts = cfg.restart_options(cfg.rand_variant);
  if (cfg.fixed_features) {
    if (*cfg.fixed_features > scores.size()) {
      throw ValidationError("select: asked for " + std::to_string(*cfg.fixed_features) +
                            " features, matrix has " + std::to_string(scores.size()));
    }
    rep.chosen_k = *cfg.fixed_features;
  } else {
    const auto curve = stage("sweep", [&] {
      return cluster::sweep_feature_count(scaled, truth, scores, k, shown_opts, cfg.sweep_max, exec);
    });
    for (const auto& e : curve.entries) rep.sweep.push_back({e.n_features, e.stats, e.adjusted});
    rep.chosen_k = curve.chosen_k;
  }

  const auto order = preprocess::select_k_best_indices(scores, rep.chosen_k);
  for (auto idx : order) rep.selected.push_back(scores[idx]);
  const Matrix selected = preprocess::take_columns(scaled, order);

  std::vector<int> predicted;
  stage("cluster", [&] {
    const auto runs = cluster::repeated_kmeans_runs(selected, truth, k, shown_opts, exec);
    rep.final_stats = runs.stats;
    predicted = cluster::align_labels(truth, runs.runs[runs.best_run].assignments);
    rep.misassigned = cluster::count_misassigned(truth, predicted);
  });

  const auto n = static_cast<int>(selected.rows());
  const int dims = std::min({cfg.pca_dims, static_cast<int>(selected.cols()), n - 1});
  rep.pca_dims = dims;
  const Matrix projected = stage("pca", [&] {
    const auto model = cluster::pca_fit(selected, dims);
    for (Eigen::Index i = 0; i < model.explained_variance.size(); ++i) {
      rep.pca_explained_variance.push_back(model.explained_variance(i));
    }
    return cluster::pca_project(model, selected);
  });
  auto coord = [&](Eigen::Index i, Eigen::Index j) {
    return j < projected.cols() ? projected(i, j) : 0.0;
  };

  std::vector<int> predicted_pca;
  stage("pca-cluster", [&] {
    const auto runs = cluster::repeated_kmeans_runs(projected, truth, k, shown_opts, exec);
    rep.pca_stats = runs.stats;
    const auto& best = runs.runs[runs.best_run];
    predicted_pca = cluster::align_labels(truth, best.assignments);
    rep.misassigned_pca = cluster::count_misassigned(truth, predicted_pca);
    const auto ids = id_map(best.assignments, predicted_pca);
    int top = 0;
    for (const auto& [raw, id] : ids) top = std::max(top, id);
    rep.kmeans_pca_centers.assign(static_cast<std::size_t>(top) + 1, {0.0, 0.0});
    for (const auto& [raw, id] : ids) {
      const auto r = static_cast<Eigen::Index>(raw);
      rep.kmeans_pca_centers[static_cast<std::size_t>(id)] = {
          best.centers(r, 0), best.centers.cols() > 1 ? best.centers(r, 1) : 0.0};
    }
  });

  cluster::GmmOptions gopts = cfg.gmm;
  const auto mix = stage("gmm", [&] { return cluster::gmm_em(projected, k, cfg.seed0, gopts); });
  rep.gmm_log_likelihood = mix.log_likelihood;
  for (int c = 0; c < k; ++c) {
    GmmComponent g;
    g.weight = mix.weights(c);
    g.mean_x = mix.means(c, 0);
    g.cov_xx = mix.covariances[static_cast<std::size_t>(c)](0, 0);
    if (projected.cols() > 1) {
      g.mean_y = mix.means(c, 1);
      g.cov_xy = mix.covariances[static_cast<std::size_t>(c)](0, 1);
      g.cov_yy = mix.covariances[static_cast<std::size_t>(c)](1, 1);
    }
    rep.gmm.push_back(g);
  }
  const auto gmm_hard = mix.hard_assignments();

  const auto sil = stage("silhouette", [&] { return cluster::silhouette(projected, predicted_pca, exec); });
  rep.silhouette_mean = sil.mean;
  const int top_id = sil.cluster_ids.empty() ? -1 : sil.cluster_ids.back();
  rep.silhouette_profiles.assign(static_cast<std::size_t>(top_id + 1), {});
  rep.silhouette_mean_by_cluster.assign(static_cast<std::size_t>(top_id + 1), 0.0);
  for (std::size_t c = 0; c < sil.cluster_ids.size(); ++c) {
    const auto id = static_cast<std::size_t>(sil.cluster_ids[c]);
    rep.silhouette_profiles[id] = sil.profiles[c];
    double sum = 0.0;
    for (double v : sil.profiles[c]) sum += v;
    rep.silhouette_mean_by_cluster[id] = sum / static_cast<double>(sil.profiles[c].size());
  }

  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    ClimbRow row;
    row.climb_id = matrix.climb_ids[i];
    row.truth = matrix.labels[i];
    row.predicted = predicted[i];
    row.predicted_pca = predicted_pca[i];
    row.pca_x = coord(r, 0);
    row.pca_y = coord(r, 1);
    row.silhouette = sil.scores[i];
    row.gmm_component = gmm_hard[i];
    rep.climbs.push_back(row);
  }
  return rep;
}

PipelineOutputs run_pipeline(const PipelineConfig& cfg, Execution exec) {
  cfg.validate();
  PipelineOutputs out;
  std::vector<std::string> truth_labels;
  if (!cfg.truth_path.empty()) {
    stage("truth", [&] {
      for (const auto& t : sim::load_truth(cfg.truth_path)) truth_labels.push_back(t.route);
    });
  }
  ingest::LineConfig line{cfg.ie, truth_labels};

  if (!cfg.features_path.empty()) {
    out.features = stage("features", [&] { return features::load_feature_matrix(cfg.features_path); });
    if (!truth_labels.empty()) {
      if (truth_labels.size() != out.features.rows()) {
        throw ValidationError("features: truth file has " + std::to_string(truth_labels.size()) +
                              " climbs, matrix has " + std::to_string(out.features.rows()));
      }
      out.features.labels = truth_labels;
    }
  } else {
    if (cfg.events_path.empty()) throw ConfigError("ingest: no events file given");
    out.climbs = stage("ingest", [&] {
      const auto log = ingest::load_events(cfg.events_path, cfg.ie);
      return ingest::segment_climbs(log.events, line, cfg.gap_s);
    });
    features::FeatureOptions fopts;
    fopts.sensor = cfg.sensor;
    out.features = stage("features", [&] {
      return features::build_feature_matrix(out.climbs, line, fopts, exec);
    });
  }
  out.report = analyze(out.features, cfg, exec, &out.scaler);
  return out;
}

namespace {

std::string label_name(const ClusterReport& rep, int id) {
  if (id >= 0 && static_cast<std::size_t>(id) < rep.label_names.size()) {
    return rep.label_names[static_cast<std::size_t>(id)];
  }
  return "cluster" + std::to_string(id);
}

}  // namespace

void write_sweep_table(std::ostream& out, const ClusterReport& rep) {
  out << "[sweep]\n";
  out << "n_features\trand_min\trand_mean\trand_max\tadjusted_min\n";
  for (const auto& row : rep.sweep) {
    out << row.n_features << '\t' << fmt(row.shown.min) << '\t' << fmt(row.shown.mean) << '\t'
        << fmt(row.shown.max) << '\t' << fmt(row.adjusted.min) << '\n';
  }
}

void write_report(std::ostream& out, const ClusterReport& rep) {
  out << "# qdroute cluster report 1\n";
  out << "[summary]\n";
  out << "n_climbs\t" << rep.n_climbs << '\n';
  out << "n_clusters\t" << rep.n_clusters << '\n';
  out << "rand_variant\t" << variant_name(rep.rand_variant) << '\n';
  out << "restarts\t" << rep.restarts << '\n';
  out << "seed0\t" << rep.seed0 << '\n';
  out << "n_init\t" << rep.n_init << '\n';
  out << "labels_used_for_selection\tyes\n";
  out << "chosen_k\t" << rep.chosen_k << '\n';
  out << "rand_min\t" << fmt(rep.final_stats.min) << '\n';
  out << "rand_mean\t" << fmt(rep.final_stats.mean) << '\n';
  out << "rand_max\t" << fmt(rep.final_stats.max) << '\n';
  out << "misassigned\t" << rep.misassigned << '\n';
  out << "pca_dims\t" << rep.pca_dims << '\n';
  for (std::size_t i = 0; i < rep.pca_explained_variance.size(); ++i) {
    out << "pca_explained_variance_" << i + 1 << '\t' << fmt(rep.pca_explained_variance[i]) << '\n';
  }
  out << "pca_rand_min\t" << fmt(rep.pca_stats.min) << '\n';
  out << "pca_rand_mean\t" << fmt(rep.pca_stats.mean) << '\n';
  out << "pca_rand_max\t" << fmt(rep.pca_stats.max) << '\n';
  out << "pca_misassigned\t" << rep.misassigned_pca << '\n';
  out << "gmm_log_likelihood\t" << fmt(rep.gmm_log_likelihood) << '\n';
  out << "silhouette_mean\t" << fmt(rep.silhouette_mean) << '\n';

  out << "[selected]\n";
  out << "rank\tfeature\tf_score\n";
  for (std::size_t i = 0; i < rep.selected.size(); ++i) {
    out << i + 1 << '\t' << rep.selected[i].column << '\t' << fmt(rep.selected[i].f) << '\n';
  }

  out << "[climbs]\n";
  out << "climb_id\ttruth\tpredicted\tpredicted_pca\tpca_x\tpca_y\tsilhouette\tgmm_component\n";
  for (const auto& c : rep.climbs) {
    out << c.climb_id << '\t' << c.truth << '\t' << label_name(rep, c.predicted) << '\t'
        << label_name(rep, c.predicted_pca) << '\t' << fmt(c.pca_x) << '\t' << fmt(c.pca_y) << '\t'
        << fmt(c.silhouette) << '\t' << c.gmm_component << '\n';
  }

  write_sweep_table(out, rep);

  out << "[kmeans_pca_centers]\n";
  out << "cluster\tpca_x\tpca_y\n";
  for (std::size_t c = 0; c < rep.kmeans_pca_centers.size(); ++c) {
    out << label_name(rep, static_cast<int>(c)) << '\t' << fmt(rep.kmeans_pca_centers[c][0]) << '\t'
        << fmt(rep.kmeans_pca_centers[c][1]) << '\n';
  }

  out << "[gmm]\n";
  out << "component\tweight\tmean_x\tmean_y\tcov_xx\tcov_xy\tcov_yy\n";
  for (std::size_t c = 0; c < rep.gmm.size(); ++c) {
    const auto& g = rep.gmm[c];
    out << c << '\t' << fmt(g.weight) << '\t' << fmt(g.mean_x) << '\t' << fmt(g.mean_y) << '\t'
        << fmt(g.cov_xx) << '\t' << fmt(g.cov_xy) << '\t' << fmt(g.cov_yy) << '\n';
  }

  out << "[silhouette]\n";
  out << "cluster\tsize\tmean\n";
  for (std::size_t c = 0; c < rep.silhouette_profiles.size(); ++c) {
    if (rep.silhouette_profiles[c].empty()) continue;
    out << label_name(rep, static_cast<int>(c)) << '\t' << rep.silhouette_profiles[c].size() << '\t'
        << fmt(rep.silhouette_mean_by_cluster[c]) << '\n';
  }
}

void write_outputs(const PipelineConfig& cfg, const PipelineOutputs& outputs) {
  if (cfg.output_dir.empty()) throw ConfigError("output: no output directory given");
  const fs::path dir(cfg.output_dir);
  std::vector<fs::path> written;
  auto put = [&](const std::string& name, const std::string& body) {
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("output: cannot write " + path.string());
    written.push_back(path);
    f << body;
    f.close();
    if (!f) throw ValidationError("output: write failed for " + path.string());
  };
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("output: cannot create " + dir.string() + ": " + ec.message());

    std::ostringstream report;
    write_report(report, outputs.report);
    put("report.tsv", report.str());

    std::ostringstream sweep;
    write_sweep_table(sweep, outputs.report);
    put("sweep.tsv", sweep.str());

    std::ostringstream feats;
    features::write_feature_matrix(feats, outputs.features);
    put("features.tsv", feats.str());

    std::ostringstream scaler;
    preprocess::write_scaler(scaler, outputs.scaler);
    put("scaler.txt", scaler.str());

    if (cfg.write_figures) {
      for (const auto& [name, svg] : render_figures(outputs.report)) put(name, svg);
    }
  } catch (...) {
    for (const auto& p : written) {
      std::error_code ignored;
      fs::remove(p, ignored);
    }
    throw;
  }
}

}  // namespace qdroute::report
