#include "qdroute/features.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qdroute/error.hpp"

namespace qdroute::features {

namespace {

const char* source_tag(Source s) {
  switch (s) {
    case Source::X: return "X";
    case Source::Y: return "Y";
    case Source::Z: return "Z";
    case Source::G: return "G";
    case Source::Cross: return "cross";
    case Source::Temporal: return "t";
  }
  return "?";
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}


}  // namespace

std::string FeatureName::str() const {
  if (source == Source::Temporal) return "t." + statistic;
  return "p" + std::to_string(position) + "." + source_tag(source) + "." + statistic;
}

FeatureName FeatureName::parse(const std::string& text) {
  FeatureName f;
  if (text.rfind("t.", 0) == 0 && text.size() > 2) {
    f.statistic = text.substr(2);
    return f;
  }
  const auto d1 = text.find('.');
  const auto d2 = d1 == std::string::npos ? d1 : text.find('.', d1 + 1);
  if (text.empty() || text[0] != 'p' || d2 == std::string::npos) {
    throw ValidationError("bad feature name '" + text + "'");
  }
  const auto pos_str = text.substr(1, d1 - 1);
  auto [ptr, ec] = std::from_chars(pos_str.data(), pos_str.data() + pos_str.size(), f.position);
  if (ec != std::errc() || ptr != pos_str.data() + pos_str.size() || f.position < 1) {
    throw ValidationError("bad feature name '" + text + "'");
  }
  const auto src = text.substr(d1 + 1, d2 - d1 - 1);
  if (src == "X") f.source = Source::X;
  else if (src == "Y") f.source = Source::Y;
  else if (src == "Z") f.source = Source::Z;
  else if (src == "G") f.source = Source::G;
  else if (src == "cross") f.source = Source::Cross;
  else throw ValidationError("bad feature source in '" + text + "'");
  f.statistic = text.substr(d2 + 1);
  return f;
}

AxisSets axis_sets(const ingest::PositionWindow& window, const sensor::SensorConfig& cfg) {
  AxisSets s;
  for (const auto& e : window.samples) {
    const double x = sensor::counts_to_g(e.counts[0], cfg);
    const double y = sensor::counts_to_g(e.counts[1], cfg);
    const double z = sensor::counts_to_g(e.counts[2], cfg);
    s.x.push_back(x);
    s.y.push_back(y);
    s.z.push_back(z);
    s.g.push_back(magnitude(x, y, z));
  }
  return s;
}

TemporalSet temporal_features(const ingest::ClimbRecord& climb, int ie) {
  if (ie < 5) throw ValidationError("temporal_features: ie must be >= 5");
  std::vector<double> clip(static_cast<std::size_t>(ie) + 1, 0.0);
  for (int p = 2; p <= ie - 1; ++p) clip[static_cast<std::size_t>(p)] = climb.clip_time(p);

  TemporalSet t;
  for (int i = 2; i <= ie - 2; ++i) {
    t.short_deltas.push_back(clip[static_cast<std::size_t>(i + 1)] - clip[static_cast<std::size_t>(i)]);
  }
  for (int j = 4; j <= ie - 2; ++j) {
    t.long_deltas.push_back(clip[static_cast<std::size_t>(j)] - clip[2]);
  }
  t.climb_duration = clip[static_cast<std::size_t>(ie - 1)] - clip[2];

  const auto st = stat_features(t.short_deltas);
  t.short_min = st.min;
  t.short_max = st.max;
  t.short_mean = st.mean;
  t.short_std = st.std;
  return t;
}

std::vector<FeatureName> feature_layout(int ie) {
  std::vector<FeatureName> names;
  for (int p = 2; p <= ie - 1; ++p) {
    for (Source s : {Source::X, Source::Y, Source::Z, Source::G}) {
      for (auto stat : kStatisticNames) names.push_back({p, s, std::string(stat)});
    }
    for (const char* r : {"r_xy", "r_xz", "r_yz"}) names.push_back({p, Source::Cross, r});
  }
  for (int i = 2; i <= ie - 2; ++i) {
    names.push_back({0, Source::Temporal, "dts." + std::to_string(i) + "_" + std::to_string(i + 1)});
  }
  for (int j = 4; j <= ie - 2; ++j) {
    names.push_back({0, Source::Temporal, "dtl.2_" + std::to_string(j)});
  }
  names.push_back({0, Source::Temporal, "dtc.2_" + std::to_string(ie - 1)});
  for (const char* s : {"dts.min", "dts.max", "dts.mean", "dts.std"}) {
    names.push_back({0, Source::Temporal, s});
  }
  return names;
}

FeatureVector assemble(const ingest::ClimbRecord& climb, const ingest::LineConfig& line,
                       const FeatureOptions& opts) {
  line.validate();
  FeatureVector fv;
  fv.climb_id = climb.climb_id;
  fv.label = climb.ground_truth_route;
  fv.names = feature_layout(line.ie);
  fv.values.reserve(fv.names.size());

  for (int p = 2; p <= line.ie - 1; ++p) {
    const auto& w = climb.window(p);
    if (!w.present || w.samples.empty()) {
      throw MissingClipError(p, "climb " + std::to_string(climb.climb_id) +
                                    ": no samples for position " + std::to_string(p));
    }
    const auto sets = axis_sets(w, opts.sensor);
    for (const auto* series : {&sets.x, &sets.y, &sets.z, &sets.g}) {
      const auto v = stat_features(*series, opts.peak_prominence_g).values();
      fv.values.insert(fv.values.end(), v.begin(), v.end());
    }
    // A single-sample window has zero variance on every axis.
    const auto r = sets.size() >= 2 ? cross_correlations(sets.x, sets.y, sets.z) : Correlations{};
    fv.values.insert(fv.values.end(), {r.xy, r.xz, r.yz});
  }

  const auto t = temporal_features(climb, line.ie);
  fv.values.insert(fv.values.end(), t.short_deltas.begin(), t.short_deltas.end());
  fv.values.insert(fv.values.end(), t.long_deltas.begin(), t.long_deltas.end());
  fv.values.push_back(t.climb_duration);
  fv.values.insert(fv.values.end(), {t.short_min, t.short_max, t.short_mean, t.short_std});

  if (fv.values.size() != fv.names.size()) {
    throw NumericError("assemble: produced " + std::to_string(fv.values.size()) +
                       " values for " + std::to_string(fv.names.size()) + " columns");
  }
  return fv;
}

bool FeatureMatrix::has_labels() const {
  if (labels.empty()) return false;
  for (const auto& l : labels) {
    if (l.empty()) return false;
  }
  return true;
}

std::vector<std::string> FeatureMatrix::column_names() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.str());
  return out;
}

FeatureMatrix build_feature_matrix(const std::vector<ingest::ClimbRecord>& climbs,
                                   const ingest::LineConfig& line, const FeatureOptions& opts,
                                   Execution exec) {
  line.validate();
  FeatureMatrix m;
  m.columns = feature_layout(line.ie);
  m.values.resize(static_cast<Eigen::Index>(climbs.size()), static_cast<Eigen::Index>(m.columns.size()));
  m.climb_ids.resize(climbs.size());
  m.labels.resize(climbs.size());

  parallel_for(climbs.size(), exec, [&](std::size_t c) {
    const auto fv = assemble(climbs[c], line, opts);
    for (std::size_t j = 0; j < fv.values.size(); ++j) {
      m.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = fv.values[j];
    }
    m.climb_ids[c] = fv.climb_id;
    m.labels[c] = fv.label.value_or("");
  });
  return m;
}

void write_feature_matrix(std::ostream& out, const FeatureMatrix& m) {
  out << "climb_id\troute";
  for (const auto& c : m.columns) out << '\t' << c.str();
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << m.climb_ids[r] << '\t' << (r < m.labels.size() ? m.labels[r] : "");
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const int n = std::snprintf(buf, sizeof buf, "\t%.17g",
                                  m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      out.write(buf, n);
    }
    out << '\n';
  }
}

FeatureMatrix read_feature_matrix(std::istream& in) {
  FeatureMatrix m;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("feature matrix: empty input");
  const auto header = split_tabs(line);
  if (header.size() < 3 || header[0] != "climb_id" || header[1] != "route") {
    throw ValidationError("feature matrix: header must start with climb_id<TAB>route");
  }
  for (std::size_t i = 2; i < header.size(); ++i) m.columns.push_back(FeatureName::parse(header[i]));

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw ValidationError("feature matrix line " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    int id = 0;
    auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), id);
    if (ec != std::errc()) {
      throw ValidationError("feature matrix line " + std::to_string(lineno) + ": bad climb_id");
    }
    m.climb_ids.push_back(id);
    m.labels.push_back(fields[1]);
    std::vector<double> row;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      double v = 0.0;
      auto [q, ec2] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
      if (ec2 != std::errc() || q != fields[i].data() + fields[i].size()) {
        throw ValidationError("feature matrix line " + std::to_string(lineno) + ": bad value '" +
                              fields[i] + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

FeatureMatrix load_feature_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open feature matrix");
  return read_feature_matrix(in);
}

}  // namespace qdroute::features
