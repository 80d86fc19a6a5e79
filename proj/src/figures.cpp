#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "qdroute/pipeline.hpp"

namespace qdroute::report {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

const char* colour(int id) {
  constexpr int n = sizeof kPalette / sizeof kPalette[0];
  return kPalette[((id % n) + n) % n];
}

// Geometry is written with fixed precision; it is layout, not data.
std::string px(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << (std::abs(v) < 0.005 ? 0.0 : v);
  return s.str();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Scale {
  double d0, d1, r0, r1;
  double operator()(double v) const {
    if (d1 == d0) return (r0 + r1) / 2.0;
    return r0 + (v - d0) / (d1 - d0) * (r1 - r0);
  }
};

Scale padded(double lo, double hi, double r0, double r1) {
  double span = hi - lo;
  if (span <= 0.0) span = std::max(1.0, std::abs(lo));
  return {lo - 0.05 * span, hi + 0.05 * span, r0, r1};
}

class Svg {
 public:
  Svg(const std::string& title) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(kWidth) << "\" height=\""
         << px(kHeight) << "\" viewBox=\"0 0 " << px(kWidth) << ' ' << px(kHeight) << "\">\n";
    out_ << "<rect x=\"0\" y=\"0\" width=\"" << px(kWidth) << "\" height=\"" << px(kHeight)
         << "\" fill=\"white\"/>\n";
    text(kWidth / 2.0, 22.0, title, "middle", 15);
  }

  void raw(const std::string& s) { out_ << s; }

  void text(double x, double y, const std::string& s, const char* anchor = "start", int size = 11,
            double rotate = 0.0) {
    out_ << "<text x=\"" << px(x) << "\" y=\"" << px(y) << "\" font-family=\"sans-serif\" font-size=\""
         << size << "\" text-anchor=\"" << anchor << '"';
    if (rotate != 0.0) out_ << " transform=\"rotate(" << px(rotate) << ' ' << px(x) << ' ' << px(y) << ")\"";
    out_ << '>' << escape(s) << "</text>\n";
  }

  void line(double x0, double y0, double x1, double y1, const char* stroke, double width = 1.0,
            const char* dash = nullptr) {
    out_ << "<line x1=\"" << px(x0) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(x1) << "\" y2=\""
         << px(y1) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << px(width) << '"';
    if (dash) out_ << " stroke-dasharray=\"" << dash << '"';
    out_ << "/>\n";
  }

  void frame() {
    line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, "black");
    line(kLeft, kTop, kLeft, kHeight - kBottom, "black");
  }

  void axis_titles(const std::string& x, const std::string& y) {
    text((kLeft + kWidth - kRight) / 2.0, kHeight - 12.0, x, "middle", 12);
    text(18.0, (kTop + kHeight - kBottom) / 2.0, y, "middle", 12, -90.0);
  }

  std::string done() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

std::string sweep_figure(const ClusterReport& rep) {
  Svg svg(std::string("Rand index (") + variant_name(rep.rand_variant) +
          ") against selected features");
  svg.frame();
  svg.axis_titles("number of selected features", "rand index");
  if (rep.sweep.empty()) return svg.done();

  double lo = 0.0;
  double hi = 0.0;
  for (const auto& e : rep.sweep) {
    lo = std::min(lo, e.shown.min);
    hi = std::max(hi, e.shown.max);
  }
  const Scale y = padded(lo, hi, kHeight - kBottom, kTop);
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(rep.sweep.size());
  auto xc = [&](std::size_t i) { return kLeft + slot * (static_cast<double>(i) + 0.5); };
  const double base = y(0.0);

  std::ostringstream bars, maxline, minline, marks;
  for (std::size_t i = 0; i < rep.sweep.size(); ++i) {
    const auto& e = rep.sweep[i];
    const double top = std::min(base, y(e.shown.mean));
    const double h = std::abs(y(e.shown.mean) - base);
    bars << "<rect class=\"mean\" x=\"" << px(xc(i) - slot * 0.4) << "\" y=\"" << px(top)
         << "\" width=\"" << px(slot * 0.8) << "\" height=\"" << px(h)
         << "\" fill=\"#b0b0b0\" data-n-features=\"" << e.n_features << "\" data-value=\""
         << fmt(e.shown.mean) << "\"/>\n";
    maxline << (i ? " " : "") << px(xc(i)) << ',' << px(y(e.shown.max));
    minline << (i ? " " : "") << px(xc(i)) << ',' << px(y(e.shown.min));
    marks << "<circle class=\"max\" cx=\"" << px(xc(i)) << "\" cy=\"" << px(y(e.shown.max))
          << "\" r=\"2.5\" fill=\"#1f77b4\" data-value=\"" << fmt(e.shown.max) << "\"/>\n";
    marks << "<circle class=\"min\" cx=\"" << px(xc(i)) << "\" cy=\"" << px(y(e.shown.min))
          << "\" r=\"2.5\" fill=\"black\" data-value=\"" << fmt(e.shown.min) << "\"/>\n";
  }
  svg.raw(bars.str());
  svg.raw("<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" + maxline.str() + "\"/>\n");
  svg.raw("<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"" + minline.str() + "\"/>\n");
  svg.raw(marks.str());

  const std::size_t step = std::max<std::size_t>(1, rep.sweep.size() / 15);
  for (std::size_t i = 0; i < rep.sweep.size(); i += step) {
    svg.text(xc(i), kHeight - kBottom + 14.0, std::to_string(rep.sweep[i].n_features), "middle", 9);
  }
  // Marks the chosen count.
  for (std::size_t i = 0; i < rep.sweep.size(); ++i) {
    if (rep.sweep[i].n_features == rep.chosen_k) {
      svg.line(xc(i), kTop, xc(i), kHeight - kBottom, "#d62728", 1.0, "4 3");
      svg.text(xc(i) + 4.0, kTop + 10.0, std::to_string(rep.chosen_k), "start", 10);
    }
  }
  return svg.done();
}

std::string assignment_figure(const ClusterReport& rep) {
  Svg svg("Ground truth (circles) and K-Means prediction (crosses)");
  svg.frame();
  svg.axis_titles("climb", "route");
  std::vector<const ClimbRow*> rows;
  for (const auto& c : rep.climbs) rows.push_back(&c);
  const std::map<std::string, int> truth_id = [&] {
    std::map<std::string, int> m;
    for (std::size_t i = 0; i < rep.label_names.size(); ++i) m[rep.label_names[i]] = static_cast<int>(i);
    return m;
  }();
  std::stable_sort(rows.begin(), rows.end(), [&](const ClimbRow* a, const ClimbRow* b) {
    return truth_id.at(a->truth) < truth_id.at(b->truth);
  });
  int top = static_cast<int>(rep.label_names.size()) - 1;
  for (const auto* c : rows) top = std::max(top, c->predicted);
  const Scale y{-0.5, static_cast<double>(top) + 0.5, kHeight - kBottom, kTop};
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(1, rows.size()));

  for (int id = 0; id <= top; ++id) {
    const std::string name = static_cast<std::size_t>(id) < rep.label_names.size()
                                 ? rep.label_names[static_cast<std::size_t>(id)]
                                 : "cluster" + std::to_string(id);
    svg.text(kLeft - 6.0, y(id) + 4.0, name, "end", 10);
    svg.line(kLeft, y(id), kWidth - kRight, y(id), "#e0e0e0");
  }
  std::ostringstream marks;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& c = *rows[i];
    const double x = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double yt = y(truth_id.at(c.truth));
    const double yp = y(c.predicted);
    const bool wrong = truth_id.at(c.truth) != c.predicted;
    marks << "<circle class=\"truth\" cx=\"" << px(x) << "\" cy=\"" << px(yt)
          << "\" r=\"5\" fill=\"none\" stroke=\"" << colour(truth_id.at(c.truth))
          << "\" data-climb=\"" << c.climb_id << "\"/>\n";
    marks << "<path class=\"predicted\" d=\"M" << px(x - 4) << ',' << px(yp - 4) << " L" << px(x + 4)
          << ',' << px(yp + 4) << " M" << px(x - 4) << ',' << px(yp + 4) << " L" << px(x + 4) << ','
          << px(yp - 4) << "\" stroke=\"" << (wrong ? "#d62728" : "black")
          << "\" stroke-width=\"1.5\" data-climb=\"" << c.climb_id << "\"/>\n";
    svg.text(x, kHeight - kBottom + 14.0, std::to_string(c.climb_id), "middle", 8);
  }
  svg.raw(marks.str());
  return svg.done();
}

// Half-axes and rotation of the 1-sigma ellipse of a 2x2 covariance.
void ellipse_axes(const GmmComponent& g, double& rx, double& ry, double& angle_deg) {
  const double tr = g.cov_xx + g.cov_yy;
  const double det = g.cov_xx * g.cov_yy - g.cov_xy * g.cov_xy;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double l1 = tr / 2.0 + disc;
  const double l2 = tr / 2.0 - disc;
  rx = std::sqrt(std::max(0.0, l1));
  ry = std::sqrt(std::max(0.0, l2));
  double theta = 0.0;
  if (g.cov_xy != 0.0) {
    theta = std::atan2(l1 - g.cov_xx, g.cov_xy);
  } else if (g.cov_yy > g.cov_xx) {
    theta = std::numbers::pi / 2.0;
  }
  angle_deg = theta * 180.0 / std::numbers::pi;
}

std::string pca_figure(const ClusterReport& rep) {
  Svg svg("PCA projection: K-Means centers and GMM components");
  svg.frame();
  svg.axis_titles("first principal component", "second principal component");

  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  bool first = true;
  auto grow = [&](double x, double y) {
    if (first) {
      x0 = x1 = x;
      y0 = y1 = y;
      first = false;
    }
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  for (const auto& c : rep.climbs) grow(c.pca_x, c.pca_y);
  for (const auto& c : rep.kmeans_pca_centers) grow(c[0], c[1]);
  // Equal units on both axes so the ellipses keep their shape.
  const double w = kWidth - kLeft - kRight;
  const double h = kHeight - kTop - kBottom;
  const double span_x = std::max(x1 - x0, 1e-12) * 1.1;
  const double span_y = std::max(y1 - y0, 1e-12) * 1.1;
  const double unit = std::min(w / span_x, h / span_y);
  const double cx = (x0 + x1) / 2.0;
  const double cy = (y0 + y1) / 2.0;
  const Scale sx{cx - w / (2.0 * unit), cx + w / (2.0 * unit), kLeft, kWidth - kRight};
  const Scale sy{cy - h / (2.0 * unit), cy + h / (2.0 * unit), kHeight - kBottom, kTop};
  const double unit_x = unit;
  const double unit_y = unit;

  std::ostringstream body;
  body << "<g clip-path=\"url(#plot)\">\n";
  double wmax = 0.0;
  for (const auto& g : rep.gmm) wmax = std::max(wmax, g.weight);
  for (std::size_t c = 0; c < rep.gmm.size(); ++c) {
    const auto& g = rep.gmm[c];
    double rx = 0.0, ry = 0.0, ang = 0.0;
    ellipse_axes(g, rx, ry, ang);
    const double opacity = wmax > 0.0 ? 0.1 + 0.25 * g.weight / wmax : 0.2;
    for (int scale = 3; scale >= 1; --scale) {
      // Rotation is applied in data orientation; the y axis is flipped on screen.
      body << "<ellipse class=\"gmm\" cx=\"" << px(sx(g.mean_x)) << "\" cy=\"" << px(sy(g.mean_y))
           << "\" rx=\"" << px(scale * rx * unit_x) << "\" ry=\"" << px(scale * ry * unit_y)
           << "\" transform=\"rotate(" << px(-ang) << ' ' << px(sx(g.mean_x)) << ' '
           << px(sy(g.mean_y)) << ")\" fill=\"" << colour(static_cast<int>(c) + 4)
           << "\" fill-opacity=\"" << px(opacity) << "\" stroke=\"" << colour(static_cast<int>(c) + 4)
           << "\" data-component=\"" << c << "\" data-weight=\"" << fmt(g.weight) << "\"/>\n";
    }
  }
  body << "</g>\n";
  std::map<std::string, int> truth_id;
  for (std::size_t i = 0; i < rep.label_names.size(); ++i) truth_id[rep.label_names[i]] = static_cast<int>(i);
  for (const auto& c : rep.climbs) {
    const double x = sx(c.pca_x);
    const double y = sy(c.pca_y);
    const int shape = truth_id.at(c.truth) % 3;
    const char* fill = colour(c.predicted_pca);
    std::ostringstream attrs;
    attrs << " fill=\"" << fill << "\" data-climb=\"" << c.climb_id << "\" data-x=\"" << fmt(c.pca_x)
          << "\" data-y=\"" << fmt(c.pca_y) << "\"/>\n";
    if (shape == 0) {
      body << "<circle class=\"climb\" cx=\"" << px(x) << "\" cy=\"" << px(y) << "\" r=\"4\"" << attrs.str();
    } else if (shape == 1) {
      body << "<rect class=\"climb\" x=\"" << px(x - 4) << "\" y=\"" << px(y - 4)
           << "\" width=\"8\" height=\"8\"" << attrs.str();
    } else {
      body << "<path class=\"climb\" d=\"M" << px(x) << ',' << px(y - 5) << " L" << px(x + 5) << ','
           << px(y + 4) << " L" << px(x - 5) << ',' << px(y + 4) << " Z\"" << attrs.str();
    }
  }
  for (std::size_t c = 0; c < rep.kmeans_pca_centers.size(); ++c) {
    const double x = sx(rep.kmeans_pca_centers[c][0]);
    const double y = sy(rep.kmeans_pca_centers[c][1]);
    body << "<path class=\"center\" d=\"M" << px(x - 7) << ',' << px(y) << " L" << px(x + 7) << ','
         << px(y) << " M" << px(x) << ',' << px(y - 7) << " L" << px(x) << ',' << px(y + 7)
         << "\" stroke=\"black\" stroke-width=\"2.5\" data-x=\"" << fmt(rep.kmeans_pca_centers[c][0])
         << "\" data-y=\"" << fmt(rep.kmeans_pca_centers[c][1]) << "\"/>\n";
  }
  svg.raw("<defs><clipPath id=\"plot\"><rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" +
          px(kWidth - kLeft - kRight) + "\" height=\"" + px(kHeight - kTop - kBottom) +
          "\"/></clipPath></defs>\n");
  svg.raw(body.str());
  double ly = kTop + 4.0;
  for (std::size_t i = 0; i < rep.label_names.size(); ++i) {
    svg.text(kWidth - kRight - 4.0, ly + 10.0, rep.label_names[i], "end", 10);
    ly += 14.0;
  }
  return svg.done();
}

std::string silhouette_figure(const ClusterReport& rep) {
  Svg svg("Silhouette profile of the K-Means clusters in PCA space");
  svg.frame();
  svg.axis_titles("silhouette", "climbs grouped by cluster");
  std::size_t rows = 0;
  for (const auto& p : rep.silhouette_profiles) rows += p.empty() ? 0 : p.size() + 1;
  if (rows == 0) return svg.done();
  const Scale sx{-1.0, 1.0, kLeft, kWidth - kRight};
  const double band = (kHeight - kTop - kBottom) / static_cast<double>(rows);
  double y = kTop;
  std::ostringstream body;
  for (std::size_t c = 0; c < rep.silhouette_profiles.size(); ++c) {
    const auto& profile = rep.silhouette_profiles[c];
    if (profile.empty()) continue;
    const double start = y;
    for (double s : profile) {
      const double a = sx(std::min(0.0, s));
      const double b = sx(std::max(0.0, s));
      body << "<rect class=\"score\" x=\"" << px(a) << "\" y=\"" << px(y) << "\" width=\"" << px(b - a)
           << "\" height=\"" << px(band * 0.9) << "\" fill=\"" << colour(static_cast<int>(c))
           << "\" data-value=\"" << fmt(s) << "\"/>\n";
      y += band;
    }
    const std::string name = c < rep.label_names.size() ? rep.label_names[c] : "cluster" + std::to_string(c);
    svg.text(kLeft + 4.0, (start + y) / 2.0 + 4.0, name, "start", 10);
    y += band;
  }
  svg.raw(body.str());
  const double mx = sx(rep.silhouette_mean);
  svg.raw("<line class=\"mean\" x1=\"" + px(mx) + "\" y1=\"" + px(kTop) + "\" x2=\"" + px(mx) + "\" y2=\"" +
          px(kHeight - kBottom) + "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\" data-value=\"" +
          fmt(rep.silhouette_mean) + "\"/>\n");
  svg.line(sx(0.0), kTop, sx(0.0), kHeight - kBottom, "black");
  return svg.done();
}

}  // namespace

std::map<std::string, std::string> render_figures(const ClusterReport& report) {
  std::map<std::string, std::string> out;
  out["sweep.svg"] = sweep_figure(report);
  out["assignments.svg"] = assignment_figure(report);
  out["pca.svg"] = pca_figure(report);
  out["silhouette.svg"] = silhouette_figure(report);
  return out;
}

}  // namespace qdroute::report
