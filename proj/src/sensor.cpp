#include "qdroute/sensor.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "qdroute/error.hpp"

namespace qdroute::sensor {

void SensorConfig::validate() const {
  if (!(full_scale_g > 0.0)) throw ConfigError("sensor: full_scale_g must be > 0");
  if (!(sleep_rate_hz > 0.0) || !(sleep_rate_hz < active_rate_hz))
    throw ConfigError("sensor: require 0 < sleep_rate_hz < active_rate_hz");
  if (output_bits < 2 || output_bits > 16)
    throw ConfigError("sensor: output_bits must be in [2, 16]");
  if (change_threshold_counts < 0)
    throw ConfigError("sensor: change_threshold_counts must be >= 0");
  if (averaging_window < 1) throw ConfigError("sensor: averaging_window must be >= 1");
  if (group_size < 1) throw ConfigError("sensor: group_size must be >= 1");
  if (inactive_grace_s < 0.0 || sleep_after_s < 0.0)
    throw ConfigError("sensor: inactivity durations must be >= 0");
}

double counts_to_g(int counts, const SensorConfig& cfg) {
  const int limit = cfg.max_counts();
  if (std::abs(counts) > limit) {
    throw RangeError("counts " + std::to_string(counts) + " outside [-" +
                     std::to_string(limit) + ", " + std::to_string(limit) + "]");
  }
  return counts * cfg.full_scale_g / limit;
}

int g_to_counts(double accel_g, const SensorConfig& cfg) {
  const int limit = cfg.max_counts();
  if (std::isnan(accel_g)) return 0;
  const double scaled = accel_g * limit / cfg.full_scale_g;
  if (scaled >= limit) return limit;
  if (scaled <= -limit) return -limit;
  return static_cast<int>(std::lround(scaled));
}

bool change_gate(const std::optional<CountTriple>& last_sent,
                 const CountTriple& candidate, const SensorConfig& cfg) {
  if (!last_sent) return true;
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(candidate[axis] - (*last_sent)[axis]) >= cfg.change_threshold_counts) {
      return true;
    }
  }
  return false;
}

CountTriple average_counts(const std::vector<RawSample>& window) {
  CountTriple out{};
  const auto n = static_cast<long>(window.size());
  for (int axis = 0; axis < 3; ++axis) {
    long sum = 0;
    for (const auto& s : window) sum += s.counts[axis];
    // integer round-half-away-from-zero of sum / n
    const long mag = (2 * std::labs(sum) + n) / (2 * n);
    out[axis] = static_cast<int>(sum < 0 ? -mag : mag);
  }
  return out;
}

std::vector<SampleEvent> flush_and_sleep(SensorState& state) {
  std::vector<SampleEvent> out = std::move(state.pending_batch);
  state.pending_batch.clear();
  state.window_buffer.clear();
  state.mode = Mode::Sleep;
  state.below_threshold_since.reset();
  state.inactive_since.reset();
  return out;
}

std::vector<SampleEvent> step(SensorState& state, const RawSample& raw,
                              const SensorConfig& cfg) {
  if (state.last_t && raw.t < *state.last_t) {
    throw SequencingError("sensor " + std::to_string(state.position) +
                          ": sample at t=" + std::to_string(raw.t) +
                          " precedes already processed t=" + std::to_string(*state.last_t));
  }
  state.last_t = raw.t;

  if (state.mode == Mode::Sleep) {
    // The accelerometer compares its own output against the last value the
    // CPU sent; nothing is buffered until the CPU is woken.
    if (change_gate(state.last_sent, raw.counts, cfg)) {
      state.mode = Mode::Active;
      state.last_sent.reset();  // first averaged sample after wake is always sent
      state.below_threshold_since.reset();
      state.inactive_since.reset();
    }
    return {};
  }

  state.window_buffer.push_back(raw);
  if (static_cast<int>(state.window_buffer.size()) < cfg.averaging_window) return {};

  const SampleEvent averaged{state.position, state.window_buffer.back().t,
                             average_counts(state.window_buffer)};
  state.window_buffer.clear();

  std::vector<SampleEvent> out;
  if (change_gate(state.last_sent, averaged.counts, cfg)) {
    state.last_sent = averaged.counts;
    state.below_threshold_since.reset();
    state.inactive_since.reset();
    state.pending_batch.push_back(averaged);
    if (static_cast<int>(state.pending_batch.size()) >= cfg.group_size) {
      out = std::move(state.pending_batch);
      state.pending_batch.clear();
    }
    return out;
  }

  if (!state.below_threshold_since) {
    state.below_threshold_since = averaged.t;
  } else if (!state.inactive_since &&
             averaged.t - *state.below_threshold_since > cfg.inactive_grace_s) {
    state.inactive_since = averaged.t;
  }
  if (state.inactive_since && averaged.t - *state.inactive_since >= cfg.sleep_after_s) {
    out = flush_and_sleep(state);
  }
  return out;
}

}  // namespace qdroute::sensor
