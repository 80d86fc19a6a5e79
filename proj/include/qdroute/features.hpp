#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdroute/ingest.hpp"
#include "qdroute/matrix.hpp"
#include "qdroute/parallel.hpp"
#include "qdroute/sensor.hpp"
#include "qdroute/stats.hpp"

namespace qdroute::features {

enum class Source { X, Y, Z, G, Cross, Temporal };

/// Provenance of one feature column. Temporal columns carry position 0.
struct FeatureName {
  int position = 0;
  Source source = Source::Temporal;
  std::string statistic;

  /// "p5.Y.max", "p5.cross.r_xy", "t.dtl.2_5", ...
  std::string str() const;
  static FeatureName parse(const std::string& text);

  friend bool operator==(const FeatureName&, const FeatureName&) = default;
};

/// Per-axis accelerations (g) of one window plus their magnitudes.
struct AxisSets {
  std::vector<double> x, y, z, g;
  std::size_t size() const { return x.size(); }
};

AxisSets axis_sets(const ingest::PositionWindow& window, const sensor::SensorConfig& cfg);

/// Clip-time deltas of one climb. short_deltas[k] is the time from position
/// k+2 to k+3, long_deltas[k] the time from position 2 to position k+4.
struct TemporalSet {
  std::vector<double> short_deltas;
  std::vector<double> long_deltas;
  double climb_duration = 0.0;  ///< position 2 to position ie-1
  double short_min = 0.0;
  double short_max = 0.0;
  double short_mean = 0.0;
  double short_std = 0.0;  ///< population
};

/// Throws MissingClipError naming the first position without a clip.
TemporalSet temporal_features(const ingest::ClimbRecord& climb, int ie);

struct FeatureOptions {
  sensor::SensorConfig sensor;
  double peak_prominence_g = kDefaultPeakProminence;
};

/// Column layout for a line: positions 2..ie-1, each with 13 statistics for
/// X, Y, Z and G then 3 cross correlations, followed by the temporal block.
std::vector<FeatureName> feature_layout(int ie);

struct FeatureVector {
  int climb_id = 0;
  std::optional<std::string> label;
  std::vector<FeatureName> names;
  std::vector<double> values;
};

FeatureVector assemble(const ingest::ClimbRecord& climb, const ingest::LineConfig& line,
                       const FeatureOptions& opts = {});

struct FeatureMatrix {
  std::vector<FeatureName> columns;
  std::vector<int> climb_ids;
  std::vector<std::string> labels;  ///< empty string when unknown
  Matrix values;                    ///< rows = climbs

  std::size_t rows() const { return climb_ids.size(); }
  std::size_t cols() const { return columns.size(); }
  bool has_labels() const;
  std::vector<std::string> column_names() const;
};

/// Assembles every climb (one OpenMP task per climb in parallel mode).
FeatureMatrix build_feature_matrix(const std::vector<ingest::ClimbRecord>& climbs,
                                   const ingest::LineConfig& line,
                                   const FeatureOptions& opts = {},
                                   Execution exec = Execution::Parallel);

/// Tab-separated: header "climb_id route <names...>", one row per climb,
/// empty route field when unknown. Values use round-trip precision.
void write_feature_matrix(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_feature_matrix(std::istream& in);
FeatureMatrix load_feature_matrix(const std::string& path);

}  // namespace qdroute::features
