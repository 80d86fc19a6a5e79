#include "qdroute/simulate.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "qdroute/error.hpp"
#include "qdroute/rng.hpp"
#include "yaml_util.hpp"

namespace qdroute::sim {

namespace {

using detail::fail_at;
using detail::read_opt;
using detail::scalar;

// Scalar or list of n values.
std::vector<double> per_position(const std::string& src, const YAML::Node& node,
                                 const std::string& key, std::size_t n) {
  if (node.IsScalar()) return std::vector<double>(n, scalar<double>(src, node, key));
  if (!node.IsSequence() || node.size() != n) {
    fail_at(src, node, "'" + key + "' needs a scalar or " + std::to_string(n) + " values");
  }
  std::vector<double> out;
  for (const auto& v : node) out.push_back(scalar<double>(src, v, key));
  return out;
}

Vec3 triple(const std::string& src, const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence() || node.size() != 3) fail_at(src, node, "'" + key + "' needs 3 values");
  return {scalar<double>(src, node[0], key), scalar<double>(src, node[1], key),
          scalar<double>(src, node[2], key)};
}

std::vector<Vec3> per_position_dir(const std::string& src, const YAML::Node& node,
                                   std::size_t n) {
  if (node.IsSequence() && node.size() == 3 && node[0].IsScalar()) {
    return std::vector<Vec3>(n, triple(src, node, "direction"));
  }
  if (!node.IsSequence() || node.size() != n) {
    fail_at(src, node, "'direction' needs one triple or " + std::to_string(n) + " triples");
  }
  std::vector<Vec3> out;
  for (const auto& v : node) out.push_back(triple(src, v, "direction"));
  return out;
}

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (n == 0.0) return {0.0, 0.0, 0.0};
  return {v[0] / n, v[1] / n, v[2] / n};
}

struct Burst {
  long start_tick = 0;
  long end_tick = 0;
  double amplitude_g = 0.0;
  double frequency_hz = 0.0;
  double decay_s = 1.0;
  Vec3 direction{};
};

struct PlannedClimb {
  ClimbTruth truth;
  std::vector<Burst> bursts;  // index = position - 1
};

long ticks_per_sleep_sample(const sensor::SensorConfig& s) {
  const double ratio = s.active_rate_hz / s.sleep_rate_hz;
  const long r = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(r)) > 1e-9 || r < 1) {
    throw ConfigError("simulate: active_rate_hz must be an integer multiple of sleep_rate_hz");
  }
  return r;
}

std::vector<PlannedClimb> plan_climbs(const SimulationConfig& cfg) {
  const int ie = cfg.line.ie;
  const double tick_s = 1.0 / cfg.sensor.active_rate_hz;
  const long grid = ticks_per_sleep_sample(cfg.sensor);
  // Onsets sit on the shared sleep-mode sampling grid so wake-up latency is
  // exactly one averaging window.
  auto to_grid = [&](double t) {
    return std::lround(t / (tick_s * static_cast<double>(grid))) * grid;
  };

  std::vector<PlannedClimb> plan;
  double start = 0.0;
  int climb_id = 0;
  for (const auto& session : cfg.sessions) {
    for (std::size_t idx = 0; idx < session.order.size(); ++idx) {
      const auto& route = cfg.route(session.order[idx]);
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(climb_id), 0x5eed));
      std::normal_distribution<double> unit(0.0, 1.0);

      const double climb_index = static_cast<double>(idx);
      const double pace = session.pace * (1.0 + session.pace_drift * climb_index);
      const double strength =
          std::max(0.0, session.strength * (1.0 - session.fatigue * climb_index));
      const double var = session.variability;

      PlannedClimb climb;
      climb.truth.climb_id = climb_id + 1;
      climb.truth.route = route.name;
      climb.truth.session = session.name;
      climb.truth.climber = session.climber;

      std::vector<long> onset_ticks(static_cast<std::size_t>(ie));
      long tick = to_grid(start + cfg.line.lead_in_s);
      for (int p = 0; p < ie; ++p) {
        if (p > 0) {
          const double base = route.segment_s[static_cast<std::size_t>(p - 1)] * pace;
          double seg = base * (1.0 + route.segment_jitter * var * unit(rng));
          seg = std::max(seg, 0.1 * base);
          tick = std::max(tick + grid, to_grid(static_cast<double>(tick) * tick_s + seg));
        }
        onset_ticks[static_cast<std::size_t>(p)] = tick;
        climb.truth.onset_s.push_back(static_cast<double>(tick) * tick_s);
      }

      for (int p = 0; p < ie; ++p) {
        const auto i = static_cast<std::size_t>(p);
        Burst b;
        b.start_tick = onset_ticks[i];
        b.end_tick = b.start_tick + std::lround(route.duration_s[i] / tick_s);
        const double amp_noise = 1.0 + route.amplitude_jitter * var * unit(rng);
        b.amplitude_g = std::max(0.0, route.amplitude_g[i] * strength * amp_noise);
        b.frequency_hz = route.frequency_hz[i];
        b.decay_s = route.decay_s[i];
        Vec3 dir = route.direction[i];
        for (auto& c : dir) c += route.direction_jitter * var * unit(rng);
        b.direction = normalized(dir);
        climb.bursts.push_back(b);
      }
      start = climb.truth.onset_s.back() + cfg.line.rest_s;
      plan.push_back(std::move(climb));
      ++climb_id;
    }
  }
  return plan;
}

std::vector<sensor::SampleEvent> run_position(const SimulationConfig& cfg,
                                              const std::vector<PlannedClimb>& plan,
                                              int position) {
  const auto& scfg = cfg.sensor;
  const double tick_s = 1.0 / scfg.active_rate_hz;
  const long grid = ticks_per_sleep_sample(scfg);
  const auto idx = static_cast<std::size_t>(position - 1);

  std::vector<Burst> bursts;
  for (const auto& c : plan) bursts.push_back(c.bursts[idx]);

  long last_tick = 0;
  for (const auto& b : bursts) last_tick = std::max(last_tick, b.end_tick);
  const double tail_s = scfg.inactive_grace_s + scfg.sleep_after_s + 5.0;
  last_tick += std::lround(tail_s / tick_s) + 1;

  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(position), 0x401e));
  std::normal_distribution<double> noise(0.0, cfg.line.noise_g);

  sensor::SensorState state;
  state.position = position;
  sensor::CountTriple rest{};
  for (int a = 0; a < 3; ++a) rest[a] = sensor::g_to_counts(cfg.line.baseline_g[a], scfg);
  state.last_sent = rest;

  std::vector<sensor::SampleEvent> events;
  std::size_t next_burst = 0;
  long tick = 0;
  while (tick <= last_tick) {
    while (next_burst < bursts.size() && bursts[next_burst].end_tick <= tick) ++next_burst;
    Vec3 accel = cfg.line.baseline_g;
    for (std::size_t b = next_burst; b < bursts.size() && bursts[b].start_tick <= tick; ++b) {
      const auto& burst = bursts[b];
      if (tick >= burst.end_tick) continue;
      const double dt = static_cast<double>(tick - burst.start_tick) * tick_s;
      const double s = burst.amplitude_g * std::exp(-dt / burst.decay_s) *
                       std::cos(2.0 * std::numbers::pi * burst.frequency_hz * dt);
      for (int a = 0; a < 3; ++a) accel[a] += burst.direction[a] * s;
    }
    sensor::RawSample raw;
    raw.t = static_cast<double>(tick) * tick_s;
    for (int a = 0; a < 3; ++a) raw.counts[a] = sensor::g_to_counts(accel[a] + noise(rng), scfg);

    auto out = sensor::step(state, raw, scfg);
    events.insert(events.end(), out.begin(), out.end());

    if (state.mode == sensor::Mode::Active) {
      ++tick;
    } else {
      tick = (tick / grid + 1) * grid;
    }
  }
  auto rest_out = sensor::flush_and_sleep(state);
  events.insert(events.end(), rest_out.begin(), rest_out.end());
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.t < b.t; });
  return events;
}

}  // namespace

void RouteProfile::validate(int ie) const {
  const auto n = static_cast<std::size_t>(ie);
  auto need = [&](std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
      throw ConfigError("route '" + name + "': " + what + " has " + std::to_string(got) +
                        " entries, expected " + std::to_string(want));
    }
  };
  need(segment_s.size(), n - 1, "segment_s");
  need(amplitude_g.size(), n, "amplitude_g");
  need(frequency_hz.size(), n, "frequency_hz");
  need(decay_s.size(), n, "decay_s");
  need(duration_s.size(), n, "duration_s");
  need(direction.size(), n, "direction");
  for (std::size_t i = 0; i < segment_s.size(); ++i) {
    if (!(segment_s[i] > 0.0)) {
      throw ConfigError("route '" + name + "': clip times must increase; segment " +
                        std::to_string(i + 1) + "->" + std::to_string(i + 2) + " is " +
                        std::to_string(segment_s[i]) + " s");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (amplitude_g[i] < 0.0 || !(decay_s[i] > 0.0) || duration_s[i] < 0.0 ||
        frequency_hz[i] < 0.0) {
      throw ConfigError("route '" + name + "': invalid burst parameters at position " +
                        std::to_string(i + 1));
    }
  }
  if (segment_jitter < 0.0 || amplitude_jitter < 0.0 || direction_jitter < 0.0) {
    throw ConfigError("route '" + name + "': jitter must be >= 0");
  }
}

const RouteProfile& SimulationConfig::route(const std::string& name) const {
  for (const auto& r : routes) {
    if (r.name == name) return r;
  }
  throw ConfigError("unknown route '" + name + "'");
}

void SimulationConfig::validate() const {
  sensor.validate();
  ticks_per_sleep_sample(sensor);
  if (line.ie < 5) throw ConfigError("line: ie must be >= 5");
  if (!(line.gap_s > 0.0)) throw ConfigError("line: gap_s must be > 0");
  if (!(line.rest_s > line.gap_s)) {
    throw ConfigError("line: rest_s must exceed gap_s so climbs stay separable");
  }
  if (line.noise_g < 0.0) throw ConfigError("line: noise_g must be >= 0");
  for (const auto& r : routes) r.validate(line.ie);
  for (const auto& s : sessions) {
    for (const auto& name : s.order) route(name);
    if (!(s.pace > 0.0) || s.strength < 0.0) {
      throw ConfigError("session '" + s.name + "': pace must be > 0 and strength >= 0");
    }
  }
}

SimulationConfig parse_simulation_config(const std::string& text, const std::string& src) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(src + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  SimulationConfig cfg;
  if (!root.IsMap()) throw ConfigError(src + ": top level must be a mapping");

  if (const auto seed = root["seed"]) cfg.seed = scalar<std::uint64_t>(src, seed, "seed");

  if (const auto line = root["line"]) {
    read_opt(src, line, "ie", cfg.line.ie);
    read_opt(src, line, "gap_s", cfg.line.gap_s);
    read_opt(src, line, "rest_s", cfg.line.rest_s);
    read_opt(src, line, "lead_in_s", cfg.line.lead_in_s);
    read_opt(src, line, "noise_g", cfg.line.noise_g);
    if (const auto b = line["baseline_g"]) cfg.line.baseline_g = triple(src, b, "baseline_g");
  }
  if (cfg.line.ie < 5) fail_at(src, root["line"], "ie must be >= 5");

  if (const auto s = root["sensor"]) {
    auto& sc = cfg.sensor;
    read_opt(src, s, "full_scale_g", sc.full_scale_g);
    read_opt(src, s, "sleep_rate_hz", sc.sleep_rate_hz);
    read_opt(src, s, "active_rate_hz", sc.active_rate_hz);
    read_opt(src, s, "output_bits", sc.output_bits);
    read_opt(src, s, "change_threshold_counts", sc.change_threshold_counts);
    read_opt(src, s, "averaging_window", sc.averaging_window);
    read_opt(src, s, "inactive_grace_s", sc.inactive_grace_s);
    read_opt(src, s, "sleep_after_s", sc.sleep_after_s);
    read_opt(src, s, "group_size", sc.group_size);
  }

  const auto n = static_cast<std::size_t>(cfg.line.ie);
  const auto routes = root["routes"];
  if (routes && !routes.IsMap()) fail_at(src, routes, "'routes' must map names to profiles");
  if (routes) {
    for (const auto& kv : routes) {
      const auto& node = kv.second;
      RouteProfile r;
      r.name = scalar<std::string>(src, kv.first, "route name");
      auto required = [&](const char* key) {
        const auto v = node[key];
        if (!v) fail_at(src, node, "route '" + r.name + "' is missing '" + key + "'");
        return v;
      };
      r.segment_s = per_position(src, required("segment_s"), "segment_s", n - 1);
      r.amplitude_g = per_position(src, required("amplitude_g"), "amplitude_g", n);
      r.frequency_hz = node["frequency_hz"]
                           ? per_position(src, node["frequency_hz"], "frequency_hz", n)
                           : std::vector<double>(n, 1.5);
      r.decay_s = node["decay_s"] ? per_position(src, node["decay_s"], "decay_s", n)
                                  : std::vector<double>(n, 1.0);
      r.duration_s = node["duration_s"]
                         ? per_position(src, node["duration_s"], "duration_s", n)
                         : std::vector<double>(n, 5.0);
      r.direction = node["direction"] ? per_position_dir(src, node["direction"], n)
                                      : std::vector<Vec3>(n, Vec3{0.0, 0.0, 1.0});
      read_opt(src, node, "segment_jitter", r.segment_jitter);
      read_opt(src, node, "amplitude_jitter", r.amplitude_jitter);
      read_opt(src, node, "direction_jitter", r.direction_jitter);
      try {
        r.validate(cfg.line.ie);
      } catch (const ConfigError& e) {
        fail_at(src, node, e.what());
      }
      cfg.routes.push_back(std::move(r));
    }
  }

  if (const auto sessions = root["sessions"]) {
    if (!sessions.IsSequence()) fail_at(src, sessions, "'sessions' must be a list");
    for (const auto& node : sessions) {
      Session s;
      read_opt(src, node, "name", s.name);
      read_opt(src, node, "climber", s.climber);
      read_opt(src, node, "pace", s.pace);
      read_opt(src, node, "strength", s.strength);
      read_opt(src, node, "fatigue", s.fatigue);
      read_opt(src, node, "pace_drift", s.pace_drift);
      read_opt(src, node, "variability", s.variability);
      if (const auto order = node["order"]) {
        if (!order.IsSequence()) fail_at(src, order, "'order' must be a list of route names");
        for (const auto& r : order) {
          auto name = scalar<std::string>(src, r, "order");
          bool known = false;
          for (const auto& route : cfg.routes) known = known || route.name == name;
          if (!known) fail_at(src, r, "unknown route '" + name + "'");
          s.order.push_back(std::move(name));
        }
      }
      cfg.sessions.push_back(std::move(s));
    }
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(src + ": " + e.what());
  }
  return cfg;
}

SimulationConfig load_simulation_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_simulation_config(ss.str(), path);
}

std::vector<sensor::SampleEvent> SimulationResult::merged() const {
  std::vector<sensor::SampleEvent> all;
  for (const auto& s : streams) all.insert(all.end(), s.begin(), s.end());
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.t != b.t ? a.t < b.t : a.position < b.position;
  });
  return all;
}

SimulationResult simulate(const SimulationConfig& cfg, Execution exec) {
  cfg.validate();
  const auto plan = plan_climbs(cfg);
  SimulationResult result;
  result.streams.resize(static_cast<std::size_t>(cfg.line.ie));
  for (const auto& c : plan) result.truth.push_back(c.truth);
  if (plan.empty()) return result;
  parallel_for(result.streams.size(), exec, [&](std::size_t i) {
    result.streams[i] = run_position(cfg, plan, static_cast<int>(i) + 1);
  });
  return result;
}

SimulationResult simulate_line(const LineSetup& line, const sensor::SensorConfig& sensor,
                               const RouteProfile& route, std::uint64_t seed) {
  SimulationConfig cfg;
  cfg.line = line;
  cfg.sensor = sensor;
  cfg.routes = {route};
  cfg.seed = seed;
  Session s;
  s.name = "single";
  s.order = {route.name};
  cfg.sessions = {s};
  return simulate(cfg, Execution::Serial);
}

void write_truth(std::ostream& out, const std::vector<ClimbTruth>& truth) {
  out << "# climb_id\troute\tsession\tclimber\tonset_s per position\n";
  out << std::fixed << std::setprecision(3);
  for (const auto& c : truth) {
    out << c.climb_id << '\t' << c.route << '\t' << (c.session.empty() ? "-" : c.session)
        << '\t' << (c.climber.empty() ? "-" : c.climber);
    for (double t : c.onset_s) out << '\t' << t;
    out << '\n';
  }
}

std::vector<ClimbTruth> read_truth(std::istream& in) {
  std::vector<ClimbTruth> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ClimbTruth c;
    if (!(ss >> c.climb_id >> c.route >> c.session >> c.climber)) {
      throw ValidationError("truth line " + std::to_string(lineno) + ": malformed row");
    }
    if (c.session == "-") c.session.clear();
    if (c.climber == "-") c.climber.clear();
    double t;
    while (ss >> t) c.onset_s.push_back(t);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ClimbTruth> load_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open truth file");
  return read_truth(in);
}

}  // namespace qdroute::sim
