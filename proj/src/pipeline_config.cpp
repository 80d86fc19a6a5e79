#include <fstream>
#include <sstream>

#include "qdroute/error.hpp"
#include "qdroute/pipeline.hpp"
#include "qdroute/simulate.hpp"
#include "yaml_util.hpp"

namespace qdroute::report {

using detail::fail_at;
using detail::read_opt;
using detail::scalar;

cluster::RandVariant parse_rand_variant(const std::string& name) {
  if (name == "adjusted") return cluster::RandVariant::Adjusted;
  if (name == "unadjusted") return cluster::RandVariant::Unadjusted;
  throw ConfigError("rand variant must be 'adjusted' or 'unadjusted', got '" + name + "'");
}

void parse_pipeline_config(const std::string& text, const std::string& src, PipelineConfig& cfg) {
  const auto sim = sim::parse_simulation_config(text, src);
  cfg.ie = sim.line.ie;
  cfg.gap_s = sim.line.gap_s;
  cfg.sensor = sim.sensor;

  const YAML::Node root = YAML::Load(text);
  const auto p = root["pipeline"];
  if (!p) return;
  if (!p.IsMap()) fail_at(src, p, "'pipeline' must be a mapping");
  read_opt(src, p, "restarts", cfg.restarts);
  read_opt(src, p, "seed", cfg.seed0);
  read_opt(src, p, "n_init", cfg.n_init);
  read_opt(src, p, "sweep_max", cfg.sweep_max);
  read_opt(src, p, "pca_dims", cfg.pca_dims);
  read_opt(src, p, "clusters", cfg.clusters);
  read_opt(src, p, "figures", cfg.write_figures);
  read_opt(src, p, "gmm_max_iter", cfg.gmm.max_iter);
  read_opt(src, p, "gmm_tol", cfg.gmm.tol);
  read_opt(src, p, "gmm_reg", cfg.gmm.reg);
  if (const auto f = p["features"]) cfg.fixed_features = scalar<std::size_t>(src, f, "features");
  if (const auto r = p["rand"]) {
    try {
      cfg.rand_variant = parse_rand_variant(scalar<std::string>(src, r, "rand"));
    } catch (const ConfigError& e) {
      fail_at(src, r, e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail_at(src, p, e.what());
  }
}

void load_pipeline_config(const std::string& path, PipelineConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  parse_pipeline_config(text.str(), path, cfg);
}

}  // namespace qdroute::report
