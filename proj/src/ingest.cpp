#include "qdroute/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>

#include "qdroute/error.hpp"

namespace qdroute::ingest {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == '\t' || line[i] == ' ' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != '\t' && line[j] != ' ' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool by_time(const SampleEvent& a, const SampleEvent& b) {
  return a.t != b.t ? a.t < b.t : a.position < b.position;
}

}  // namespace

void LineConfig::validate() const {
  if (ie < 5) throw ValidationError("line: ie must be >= 5 (got " + std::to_string(ie) + ")");
}

EventLog parse_events(std::istream& in, std::optional<int> max_position) {
  struct Parsed {
    SampleEvent event;
    int line = 0;
  };
  std::map<int, std::vector<Parsed>> groups;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    const auto fields = split_fields(view);
    if (fields.empty()) continue;
    auto bad = [&](const std::string& why) {
      throw ValidationError("events line " + std::to_string(lineno) + ": " + why);
    };
    if (fields.size() != 5) bad("expected 5 fields, got " + std::to_string(fields.size()));
    SampleEvent e;
    if (!parse_number(fields[0], e.position)) bad("bad position '" + std::string(fields[0]) + "'");
    if (!parse_number(fields[1], e.t)) bad("bad timestamp '" + std::string(fields[1]) + "'");
    for (int a = 0; a < 3; ++a) {
      if (!parse_number(fields[static_cast<std::size_t>(a) + 2], e.counts[static_cast<std::size_t>(a)])) {
        bad("bad count '" + std::string(fields[static_cast<std::size_t>(a) + 2]) + "'");
      }
    }
    if (e.position < 1) bad("position must be >= 1");
    if (max_position && e.position > *max_position) {
      bad("unknown position " + std::to_string(e.position) + " > ie=" +
          std::to_string(*max_position));
    }
    groups[e.position].push_back({e, lineno});
  }

  EventLog log;
  for (auto& [position, group] : groups) {
    const bool sorted = std::is_sorted(group.begin(), group.end(), [](const auto& a, const auto& b) {
      return a.event.t < b.event.t;
    });
    if (!sorted) {
      std::stable_sort(group.begin(), group.end(),
                       [](const auto& a, const auto& b) { return a.event.t < b.event.t; });
      log.warnings.push_back("position " + std::to_string(position) +
                             ": events out of timestamp order, re-sorted");
    }
    for (std::size_t i = 1; i < group.size(); ++i) {
      if (group[i].event.t == group[i - 1].event.t) {
        throw ValidationError("events line " + std::to_string(group[i].line) +
                              ": duplicate timestamp for position " +
                              std::to_string(position) + " (also line " +
                              std::to_string(group[i - 1].line) + ")");
      }
    }
    for (const auto& p : group) log.events.push_back(p.event);
  }
  return log;
}

EventLog load_events(const std::string& path, std::optional<int> max_position) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open events file");
  return parse_events(in, max_position);
}

void write_events(std::ostream& out, const std::vector<SampleEvent>& events) {
  char buf[96];
  for (const auto& e : events) {
    const int n = std::snprintf(buf, sizeof buf, "%d\t%.3f\t%d\t%d\t%d\n", e.position, e.t,
                                e.counts[0], e.counts[1], e.counts[2]);
    out.write(buf, n);
  }
}

double ClimbRecord::clip_time(int position) const {
  const auto& w = window(position);
  if (!w.present) {
    throw MissingClipError(position, "climb " + std::to_string(climb_id) +
                                         ": no clip recorded for position " +
                                         std::to_string(position));
  }
  return w.clip_time;
}

std::vector<ClimbRecord> segment_climbs(const std::vector<SampleEvent>& events,
                                        const LineConfig& line, double gap_s) {
  line.validate();
  if (!(gap_s > 0.0)) throw ValidationError("segment: gap_s must be > 0");
  std::vector<SampleEvent> all = events;
  std::sort(all.begin(), all.end(), by_time);
  for (const auto& e : all) {
    if (e.position < 1 || e.position > line.ie) {
      throw ValidationError("segment: event position " + std::to_string(e.position) +
                            " outside 1.." + std::to_string(line.ie));
    }
  }

  std::vector<ClimbRecord> out;
  std::size_t begin = 0;
  while (begin < all.size()) {
    std::size_t end = begin + 1;
    while (end < all.size() && all[end].t - all[end - 1].t < gap_s) ++end;

    ClimbRecord rec;
    rec.climb_id = static_cast<int>(out.size()) + 1;
    rec.start = all[begin].t;
    rec.end = all[end - 1].t;
    rec.windows.resize(static_cast<std::size_t>(line.ie));
    std::vector<std::vector<SampleEvent>> per_pos(static_cast<std::size_t>(line.ie));
    for (std::size_t k = begin; k < end; ++k) {
      per_pos[static_cast<std::size_t>(all[k].position - 1)].push_back(all[k]);
    }
    for (int p = 1; p <= line.ie; ++p) {
      auto& w = rec.windows[static_cast<std::size_t>(p - 1)];
      w.position = p;
      const auto& evs = per_pos[static_cast<std::size_t>(p - 1)];
      w.present = !evs.empty();
      if (w.present) w.clip_time = evs.front().t;
    }
    for (int p = 2; p <= line.ie - 1; ++p) {
      if (!rec.windows[static_cast<std::size_t>(p - 1)].present) {
        throw MissingClipError(p, "climb " + std::to_string(rec.climb_id) + " starting at t=" +
                                      std::to_string(rec.start) + ": no events from position " +
                                      std::to_string(p));
      }
    }
    const PositionWindow* prev = nullptr;
    for (const auto& w : rec.windows) {
      if (!w.present) continue;
      if (prev && !(w.clip_time > prev->clip_time)) {
        throw MisorderError(w.position,
                            "climb " + std::to_string(rec.climb_id) + ": position " +
                                std::to_string(w.position) + " clipped at t=" +
                                std::to_string(w.clip_time) + " not after position " +
                                std::to_string(prev->position) + " at t=" +
                                std::to_string(prev->clip_time));
      }
      prev = &w;
    }
    for (int p = 1; p <= line.ie; ++p) {
      auto& w = rec.windows[static_cast<std::size_t>(p - 1)];
      if (!w.present) continue;
      w.window_end = rec.end + gap_s;
      for (int q = p + 1; q <= line.ie; ++q) {
        const auto& next = rec.windows[static_cast<std::size_t>(q - 1)];
        if (next.present) {
          w.window_end = next.clip_time;
          break;
        }
      }
      for (const auto& e : per_pos[static_cast<std::size_t>(p - 1)]) {
        if (e.t < w.window_end) {
          w.samples.push_back(e);
        } else {
          rec.flagged.push_back({e, "after next position's clip"});
        }
      }
    }
    out.push_back(std::move(rec));
    begin = end;
  }

  if (!line.route_labels.empty()) {
    if (line.route_labels.size() != out.size()) {
      throw ValidationError("segment: " + std::to_string(line.route_labels.size()) +
                            " route labels for " + std::to_string(out.size()) + " climbs");
    }
    for (std::size_t c = 0; c < out.size(); ++c) out[c].ground_truth_route = line.route_labels[c];
  }
  return out;
}

std::vector<SampleEvent> concatenate(const std::vector<ClimbRecord>& records) {
  std::vector<SampleEvent> all;
  for (const auto& r : records) {
    for (const auto& w : r.windows) all.insert(all.end(), w.samples.begin(), w.samples.end());
    for (const auto& f : r.flagged) all.push_back(f.event);
  }
  std::sort(all.begin(), all.end(), by_time);
  return all;
}

}  // namespace qdroute::ingest
