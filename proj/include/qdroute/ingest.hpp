#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdroute/sensor.hpp"

namespace qdroute::ingest {

using sensor::SampleEvent;

/// Line layout used by the analysis side.
struct LineConfig {
  int ie = 8;
  std::vector<std::string> route_labels;  ///< optional ground truth, one per climb

  void validate() const;
};

struct EventLog {
  std::vector<SampleEvent> events;    ///< grouped by position, each group sorted by t
  std::vector<std::string> warnings;  ///< e.g. re-sorted positions
};

/// Reads the tab-separated sample-event format
///   position<TAB>t_seconds<TAB>x<TAB>y<TAB>z
/// with '#' comments. Throws ValidationError (with line numbers) on malformed
/// lines, duplicate (position, t) pairs and positions above max_position.
EventLog parse_events(std::istream& in, std::optional<int> max_position = std::nullopt);
EventLog load_events(const std::string& path, std::optional<int> max_position = std::nullopt);

/// Writes events in the same format, millisecond timestamps.
void write_events(std::ostream& out, const std::vector<SampleEvent>& events);

struct PositionWindow {
  int position = 0;
  bool present = false;
  double clip_time = 0.0;            ///< first event of this position in the climb
  double window_end = 0.0;           ///< next position's clip, or the climb end for the last one
  std::vector<SampleEvent> samples;  ///< events in [clip_time, window_end)
  std::size_t count() const { return samples.size(); }
};

struct FlaggedEvent {
  SampleEvent event;
  std::string reason;
};

struct ClimbRecord {
  int climb_id = 0;
  double start = 0.0;  ///< first event of the climb
  double end = 0.0;    ///< last event of the climb
  std::vector<PositionWindow> windows;  ///< index = position - 1, size ie
  std::vector<FlaggedEvent> flagged;    ///< events outside their position's window
  std::optional<std::string> ground_truth_route;

  const PositionWindow& window(int position) const {
    return windows.at(static_cast<std::size_t>(position - 1));
  }
  double clip_time(int position) const;
};

constexpr double kDefaultGapSeconds = 120.0;

/// Splits the event log into climbs at global silences of at least gap_s
/// and builds each position's clip-to-next-clip window. Throws
/// MissingClipError when a position in 2..ie-1 has no event in a climb, and
/// MisorderError when clip times are not increasing with position.
std::vector<ClimbRecord> segment_climbs(const std::vector<SampleEvent>& events,
                                        const LineConfig& line,
                                        double gap_s = kDefaultGapSeconds);

/// All events of the records (windows and flagged), ordered by (t, position).
std::vector<SampleEvent> concatenate(const std::vector<ClimbRecord>& records);

}  // namespace qdroute::ingest
