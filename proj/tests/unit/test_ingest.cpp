#include "doctest.h"

#include <random>
#include <sstream>

#include "qdroute/error.hpp"
#include "qdroute/ingest.hpp"

using namespace qdroute;
using namespace qdroute::ingest;
using sensor::SampleEvent;

namespace {

EventLog parse(const std::string& text, std::optional<int> max_position = std::nullopt) {
  std::istringstream in(text);
  return parse_events(in, max_position);
}

SampleEvent ev(int p, double t, int x = 0) { return {p, t, {x, -63, 0}}; }

// One event per position at the given clip times, plus a second event a
// little later so windows hold more than the clip itself.
std::vector<SampleEvent> climb_events(const std::vector<double>& clips, double offset = 0.0) {
  std::vector<SampleEvent> out;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    out.push_back(ev(static_cast<int>(i) + 1, offset + clips[i]));
    out.push_back(ev(static_cast<int>(i) + 1, offset + clips[i] + 0.32, 20));
  }
  return out;
}

const std::vector<double> kClips{0, 10, 25, 45, 70, 100, 140, 190};

}  // namespace

TEST_CASE("parse: empty input and comments") {
  CHECK(parse("").events.empty());
  CHECK(parse("# header only\n\n   \n").events.empty());
  const auto log = parse("# position t x y z\n3\t1.250\t1\t-63\t4  # trailing\n");
  REQUIRE(log.events.size() == 1);
  CHECK(log.events[0] == SampleEvent{3, 1.25, {1, -63, 4}});
}

TEST_CASE("parse: malformed lines carry their line number") {
  auto message = [](const std::string& text) {
    try {
      parse(text, 8);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("1\t0.1\t0\t0\t0\n1\t0.2\t0\t0\n").find("line 2") != std::string::npos);
  CHECK(message("1\tabc\t0\t0\t0\n").find("line 1") != std::string::npos);
  CHECK(message("x\t0.1\t0\t0\t0\n").find("bad position") != std::string::npos);
  CHECK(message("\n\n9\t0.1\t0\t0\t0\n").find("line 3") != std::string::npos);
  CHECK(message("0\t0.1\t0\t0\t0\n").find("position") != std::string::npos);
}

TEST_CASE("parse: unknown positions and duplicate timestamps") {
  CHECK_THROWS_AS(parse("9\t0.1\t0\t0\t0\n", 8), ValidationError);
  CHECK_NOTHROW(parse("9\t0.1\t0\t0\t0\n"));
  CHECK_THROWS_AS(parse("2\t0.1\t0\t0\t0\n2\t0.1\t5\t0\t0\n"), ValidationError);
  // Same timestamp on different positions is fine.
  CHECK(parse("2\t0.1\t0\t0\t0\n3\t0.1\t5\t0\t0\n").events.size() == 2);
}

TEST_CASE("parse: out-of-order events are re-sorted with a warning") {
  const auto log = parse("2\t0.5\t0\t0\t0\n1\t0.3\t0\t0\t0\n2\t0.1\t1\t0\t0\n");
  REQUIRE(log.events.size() == 3);
  CHECK(log.events[0].position == 1);
  CHECK(log.events[1] == SampleEvent{2, 0.1, {1, 0, 0}});
  CHECK(log.events[2].t == 0.5);
  REQUIRE(log.warnings.size() == 1);
  CHECK(log.warnings[0].find("position 2") != std::string::npos);
  CHECK(parse("1\t0.1\t0\t0\t0\n1\t0.2\t0\t0\t0\n").warnings.empty());
}

TEST_CASE("write then parse reproduces millisecond events") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> c(-127, 127);
  std::vector<SampleEvent> events;
  for (int p = 1; p <= 8; ++p) {
    double t = 0.0;
    for (int i = 0; i < 50; ++i) {
      t += 0.02 * (1 + i % 7);
      events.push_back({p, std::round(t * 1000.0) / 1000.0, {c(rng), c(rng), c(rng)}});
    }
  }
  std::stringstream buf;
  write_events(buf, events);
  const auto log = parse_events(buf, 8);
  REQUIRE(log.events.size() == events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(log.events[i].position == events[i].position);
    CHECK(log.events[i].t == doctest::Approx(events[i].t).epsilon(1e-12));
    CHECK(log.events[i].counts == events[i].counts);
  }
}

TEST_CASE("segment: single climb windows follow the clip times") {
  const auto records = segment_climbs(climb_events(kClips), {8, {}}, 120.0);
  REQUIRE(records.size() == 1);
  const auto& r = records[0];
  CHECK(r.climb_id == 1);
  CHECK(r.start == 0.0);
  CHECK(r.end == doctest::Approx(190.32));
  for (int p = 1; p <= 8; ++p) {
    const auto& w = r.window(p);
    CHECK(w.present);
    CHECK(w.clip_time == kClips[static_cast<std::size_t>(p - 1)]);
    CHECK(w.samples.size() == 2);
    if (p < 8) {
      CHECK(w.window_end == kClips[static_cast<std::size_t>(p)]);
    } else {
      CHECK(w.window_end == doctest::Approx(190.32 + 120.0));
    }
  }
  CHECK(r.flagged.empty());
  CHECK_FALSE(r.ground_truth_route.has_value());
}

TEST_CASE("segment: silences of at least gap_s split climbs") {
  auto events = climb_events(kClips);
  const auto second = climb_events(kClips, 190.32 + 600.0);
  events.insert(events.end(), second.begin(), second.end());
  const auto records = segment_climbs(events, {8, {"6a+", "5c+"}}, 120.0);
  REQUIRE(records.size() == 2);
  CHECK(records[1].climb_id == 2);
  CHECK(records[1].clip_time(1) == doctest::Approx(790.32));
  CHECK(records[0].ground_truth_route == "6a+");
  CHECK(records[1].ground_truth_route == "5c+");

  // With a longer gap both ascents merge and the first clips win.
  const auto merged = segment_climbs(events, {8, {}}, 1000.0);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].clip_time(8) == 190.0);
  CHECK(merged[0].window(8).samples.size() == 4);
  CHECK_THROWS_AS(segment_climbs(events, {8, {"6a+"}}, 120.0), ValidationError);
}

TEST_CASE("segment: missing and misordered clips") {
  auto events = climb_events(kClips);
  std::erase_if(events, [](const SampleEvent& e) { return e.position == 3; });
  try {
    segment_climbs(events, {8, {}}, 120.0);
    FAIL("expected a missing-clip error");
  } catch (const MissingClipError& e) {
    CHECK(e.position() == 3);
  }

  // The first and last positions may be silent.
  auto ends_missing = climb_events(kClips);
  std::erase_if(ends_missing, [](const SampleEvent& e) { return e.position == 1 || e.position == 8; });
  const auto r = segment_climbs(ends_missing, {8, {}}, 120.0);
  REQUIRE(r.size() == 1);
  CHECK_FALSE(r[0].window(1).present);
  CHECK_FALSE(r[0].window(8).present);
  CHECK_THROWS_AS(r[0].clip_time(1), MissingClipError);

  auto swapped = kClips;
  std::swap(swapped[3], swapped[4]);
  try {
    segment_climbs(climb_events(swapped), {8, {}}, 120.0);
    FAIL("expected a misorder error");
  } catch (const MisorderError& e) {
    CHECK(e.position() >= 4);
  }
  CHECK_THROWS_AS(segment_climbs({}, {4, {}}, 120.0), ValidationError);
}

TEST_CASE("segment: partition, window bound and round trip on random climbs") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> seg(3.0, 15.0);
  std::uniform_int_distribution<int> extra(0, 12);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<SampleEvent> events;
    double start = 0.0;
    const int climbs = 1 + trial % 4;
    for (int c = 0; c < climbs; ++c) {
      double t = start;
      std::vector<double> clips;
      for (int p = 1; p <= 8; ++p) {
        clips.push_back(t);
        t += seg(rng);
      }
      for (int p = 1; p <= 8; ++p) {
        const double clip = clips[static_cast<std::size_t>(p - 1)];
        events.push_back(ev(p, clip));
        const int n = extra(rng);
        for (int k = 0; k < n; ++k) {
          // Some late events from a position spill past the next clip.
          events.push_back(ev(p, clip + 0.16 * (k + 1) + jitter(rng) * 0.01 * k, k));
        }
      }
      start = t + 400.0;
    }
    const auto records = segment_climbs(events, {8, {}}, 120.0);
    REQUIRE(records.size() == static_cast<std::size_t>(climbs));

    std::size_t assigned = 0;
    for (const auto& r : records) {
      assigned += r.flagged.size();
      for (int p = 1; p <= 8; ++p) {
        const auto& w = r.window(p);
        assigned += w.samples.size();
        for (const auto& s : w.samples) {
          CHECK(s.t >= w.clip_time);
          CHECK(s.t < w.window_end);
        }
        if (p < 8) CHECK(w.window_end == r.window(p + 1).clip_time);
      }
    }
    CHECK(assigned == events.size());

    const auto again = segment_climbs(concatenate(records), {8, {}}, 120.0);
    REQUIRE(again.size() == records.size());
    for (std::size_t c = 0; c < records.size(); ++c) {
      CHECK(again[c].start == records[c].start);
      CHECK(again[c].end == records[c].end);
      CHECK(again[c].flagged.size() == records[c].flagged.size());
      for (int p = 1; p <= 8; ++p) {
        CHECK(again[c].window(p).samples == records[c].window(p).samples);
        CHECK(again[c].window(p).clip_time == records[c].window(p).clip_time);
      }
    }
  }
}
