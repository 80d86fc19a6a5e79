#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qdroute/parallel.hpp"
#include "qdroute/sensor.hpp"

namespace qdroute::sim {

using Vec3 = std::array<double, 3>;

/// Physical layout of the simulated line and the climbing schedule.
struct LineSetup {
  int ie = 8;                 ///< index of the top quickdraw; positions are 1..ie
  double gap_s = 120.0;       ///< silence that separates climbs when re-segmenting
  double rest_s = 300.0;      ///< rest between the last clip of a climb and the next start
  double lead_in_s = 5.0;     ///< time from climb start to the first clip
  Vec3 baseline_g{0.0, -1.0, 0.0};  ///< gravity seen by a hanging quickdraw
  double noise_g = 0.02;      ///< per-axis Gaussian noise on every raw sample
};

/// Per-route movement model. Per-position vectors hold ie entries (index 0
/// is position 1); segment_s holds the ie-1 clip-to-clip durations.
struct RouteProfile {
  std::string name;
  std::vector<double> segment_s;
  std::vector<double> amplitude_g;
  std::vector<double> frequency_hz;
  std::vector<double> decay_s;
  std::vector<double> duration_s;
  std::vector<Vec3> direction;
  double segment_jitter = 0.05;    ///< relative sd of each segment duration
  double amplitude_jitter = 0.05;  ///< relative sd of each burst amplitude
  double direction_jitter = 0.0;   ///< sd added to each direction component

  void validate(int ie) const;
};

/// One block of consecutive climbs by the same climber, e.g. a day at the gym.
struct Session {
  std::string name;
  std::string climber;
  std::vector<std::string> order;  ///< route name per climb
  double pace = 1.0;         ///< multiplies segment durations
  double strength = 1.0;     ///< multiplies burst amplitudes
  double fatigue = 0.0;      ///< amplitude factor drops by this fraction per climb
  double pace_drift = 0.0;   ///< segment factor grows by this fraction per climb
  double variability = 1.0;  ///< multiplies every route jitter
};

struct SimulationConfig {
  LineSetup line;
  sensor::SensorConfig sensor;
  std::vector<RouteProfile> routes;
  std::vector<Session> sessions;
  std::uint64_t seed = 1;

  const RouteProfile& route(const std::string& name) const;
  void validate() const;
};

/// Ground truth for one generated climb.
struct ClimbTruth {
  int climb_id = 0;
  std::string route;
  std::string session;
  std::string climber;
  std::vector<double> onset_s;  ///< burst start per position 1..ie
};

struct SimulationResult {
  std::vector<std::vector<sensor::SampleEvent>> streams;  ///< index = position - 1
  std::vector<ClimbTruth> truth;

  /// All events ordered by (t, position).
  std::vector<sensor::SampleEvent> merged() const;
};

/// Parses the YAML simulation config. Errors are reported as
/// "<source>:<line>: message" ConfigErrors.
SimulationConfig parse_simulation_config(const std::string& text,
                                         const std::string& source = "<config>");
SimulationConfig load_simulation_config(const std::string& path);

SimulationResult simulate(const SimulationConfig& cfg,
                          Execution exec = Execution::Parallel);

/// Single climb of one route on a fresh line.
SimulationResult simulate_line(const LineSetup& line,
                               const sensor::SensorConfig& sensor,
                               const RouteProfile& route, std::uint64_t seed);

/// Truth file: one row per climb,
/// climb_id<TAB>route<TAB>session<TAB>climber<TAB>onset_1 ... onset_ie
void write_truth(std::ostream& out, const std::vector<ClimbTruth>& truth);
std::vector<ClimbTruth> read_truth(std::istream& in);
std::vector<ClimbTruth> load_truth(const std::string& path);

}  // namespace qdroute::sim
