#include "doctest.h"

#include <set>
#include <sstream>

#include "qdroute/error.hpp"
#include "qdroute/ingest.hpp"
#include "qdroute/simulate.hpp"

using namespace qdroute;
using namespace qdroute::sim;

namespace {

const char* kTwoRoutes = R"(seed: 3
line:
  ie: 8
routes:
  easy:
    segment_s: [6, 7, 8, 9, 10, 11, 12]
    amplitude_g: 0.7
  hard:
    segment_s: 9
    amplitude_g: [0.7, 0.7, 0.7, 0.7, 1.2, 0.7, 1.2, 0.7]
    direction: [1, 0, 1]
sessions:
  - name: s1
    climber: a
    order: [easy, hard, easy]
)";

std::string events_text(const SimulationResult& r) {
  std::ostringstream out;
  ingest::write_events(out, r.merged());
  return out.str();
}

std::string config_error(const std::string& yaml) {
  try {
    parse_simulation_config(yaml, "cfg.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config parsing fills per-position profiles") {
  const auto cfg = parse_simulation_config(kTwoRoutes, "cfg.yaml");
  CHECK(cfg.seed == 3);
  REQUIRE(cfg.routes.size() == 2);
  const auto& easy = cfg.route("easy");
  CHECK(easy.segment_s == std::vector<double>{6, 7, 8, 9, 10, 11, 12});
  CHECK(easy.amplitude_g == std::vector<double>(8, 0.7));
  const auto& hard = cfg.route("hard");
  CHECK(hard.segment_s == std::vector<double>(7, 9.0));
  CHECK(hard.amplitude_g[4] == 1.2);
  REQUIRE(cfg.sessions.size() == 1);
  CHECK(cfg.sessions[0].order.size() == 3);
  CHECK_THROWS_AS(cfg.route("missing"), ConfigError);
}

TEST_CASE("config errors name the file and line") {
  CHECK(config_error("line:\n  ie: [1, 2]\n").find("cfg.yaml:2") != std::string::npos);
  CHECK(config_error("routes:\n  r:\n    segment_s: [1, 2]\n    amplitude_g: 1\n")
            .find("cfg.yaml:3") != std::string::npos);
  CHECK(config_error("a: [1,\n").find("cfg.yaml:") != std::string::npos);
  CHECK(config_error("line:\n  ie: 4\n").find("ie") != std::string::npos);
  // Non-increasing clip times.
  CHECK(config_error("routes:\n  r:\n    segment_s: [5, 5, 0, 5, 5, 5, 5]\n    amplitude_g: 1\n")
            .find("clip times must increase") != std::string::npos);
  CHECK(config_error("routes:\n  r:\n    segment_s: 5\n    amplitude_g: 1\nsessions:\n"
                     "  - order: [nope]\n")
            .find("nope") != std::string::npos);
}

TEST_CASE("simulation is a pure function of config and seed") {
  auto cfg = parse_simulation_config(kTwoRoutes);
  const auto a = simulate(cfg, Execution::Parallel);
  const auto b = simulate(cfg, Execution::Parallel);
  const auto serial = simulate(cfg, Execution::Serial);
  CHECK(events_text(a) == events_text(b));
  CHECK(events_text(a) == events_text(serial));
  cfg.seed = 4;
  CHECK(events_text(simulate(cfg)) != events_text(a));
}

TEST_CASE("zero-climb profile produces no events") {
  auto cfg = parse_simulation_config(kTwoRoutes);
  cfg.sessions.clear();
  const auto r = simulate(cfg);
  CHECK(r.truth.empty());
  CHECK(r.merged().empty());
}

TEST_CASE("simulate_line: one climb, every position reports") {
  const auto cfg = parse_simulation_config(kTwoRoutes);
  const auto r = simulate_line(cfg.line, cfg.sensor, cfg.route("hard"), 9);
  REQUIRE(r.streams.size() == 8);
  for (const auto& s : r.streams) CHECK_FALSE(s.empty());
  std::ostringstream out;
  ingest::write_events(out, r.merged());
  std::istringstream in(out.str());
  const auto log = ingest::parse_events(in, 8);
  std::set<int> positions;
  for (const auto& e : log.events) positions.insert(e.position);
  CHECK(positions.size() == 8);
  // Streams are strictly increasing in time.
  for (const auto& s : r.streams) {
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].t > s[i - 1].t);
  }
}

TEST_CASE("segmented clip times match generator onsets plus one averaging window") {
  const auto cfg = parse_simulation_config(kTwoRoutes);
  const auto r = simulate(cfg);
  std::vector<std::string> labels;
  for (const auto& t : r.truth) labels.push_back(t.route);
  const auto climbs = ingest::segment_climbs(r.merged(), {8, labels}, cfg.line.gap_s);
  REQUIRE(climbs.size() == 3);
  const double latency = cfg.sensor.first_event_latency_s();
  const double sample = 1.0 / cfg.sensor.active_rate_hz;
  for (std::size_t c = 0; c < climbs.size(); ++c) {
    CHECK(climbs[c].ground_truth_route == r.truth[c].route);
    for (int p = 1; p <= 8; ++p) {
      const double onset = r.truth[c].onset_s[static_cast<std::size_t>(p - 1)];
      CHECK(std::abs(climbs[c].clip_time(p) - (onset + latency)) <= sample + 1e-9);
    }
  }
}

TEST_CASE("a position without motion leads to a missing-clip error") {
  auto cfg = parse_simulation_config(kTwoRoutes);
  for (auto& route : cfg.routes) route.amplitude_g[2] = 0.0;
  const auto r = simulate(cfg);
  CHECK(r.streams[2].empty());
  try {
    ingest::segment_climbs(r.merged(), {8, {}}, cfg.line.gap_s);
    FAIL("expected a missing-clip error");
  } catch (const MissingClipError& e) {
    CHECK(e.position() == 3);
  }
}

TEST_CASE("truth file round trip") {
  const auto r = simulate(parse_simulation_config(kTwoRoutes));
  auto truth = r.truth;
  truth[1].session.clear();
  std::stringstream buf;
  write_truth(buf, truth);
  const auto back = read_truth(buf);
  REQUIRE(back.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(back[i].climb_id == truth[i].climb_id);
    CHECK(back[i].route == truth[i].route);
    CHECK(back[i].session == truth[i].session);
    CHECK(back[i].climber == truth[i].climber);
    REQUIRE(back[i].onset_s.size() == truth[i].onset_s.size());
    for (std::size_t p = 0; p < truth[i].onset_s.size(); ++p) {
      CHECK(back[i].onset_s[p] == doctest::Approx(truth[i].onset_s[p]).epsilon(1e-9));
    }
  }
}

TEST_CASE("shipped 33-climb profile segments into 33 climbs") {
  const auto cfg = load_simulation_config(std::string(QDROUTE_SOURCE_DIR) + "/configs/mixed33.yaml");
  const auto r = simulate(cfg);
  CHECK(r.truth.size() == 33);
  const auto climbs = ingest::segment_climbs(r.merged(), {cfg.line.ie, {}}, cfg.line.gap_s);
  CHECK(climbs.size() == 33);
}
