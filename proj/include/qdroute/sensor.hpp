#pragma once

#include <array>
#include <optional>
#include <vector>

namespace qdroute::sensor {

/// Firmware constants of the smart quickdraw. Defaults are the values the
/// prototype ships with: +-2 g at 8 bits, 10/50 Hz sleep/active rates, a
/// 15-count change gate, 8-sample averaging and batches of two.
struct SensorConfig {
  double full_scale_g = 2.0;
  double sleep_rate_hz = 10.0;
  double active_rate_hz = 50.0;
  int output_bits = 8;
  int change_threshold_counts = 15;
  int averaging_window = 8;
  double inactive_grace_s = 0.8;
  double sleep_after_s = 20.0;
  int group_size = 2;

  /// Largest representable magnitude, 2^(bits-1) - 1.
  int max_counts() const { return (1 << (output_bits - 1)) - 1; }
  /// g per count.
  double resolution_g() const { return full_scale_g / max_counts(); }
  /// Delay between the waking raw sample and the first averaged sample.
  double first_event_latency_s() const { return averaging_window / active_rate_hz; }

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

using CountTriple = std::array<int, 3>;

struct RawSample {
  double t = 0.0;
  CountTriple counts{};
};

struct SampleEvent {
  int position = 0;
  double t = 0.0;
  CountTriple counts{};

  friend bool operator==(const SampleEvent&, const SampleEvent&) = default;
};

enum class Mode { Sleep, Active };

struct SensorState {
  int position = 1;
  Mode mode = Mode::Sleep;
  std::optional<CountTriple> last_sent;
  std::vector<RawSample> window_buffer;
  std::vector<SampleEvent> pending_batch;
  std::optional<double> below_threshold_since;
  std::optional<double> inactive_since;
  std::optional<double> last_t;
};

double counts_to_g(int counts, const SensorConfig& cfg);
int g_to_counts(double accel_g, const SensorConfig& cfg);

bool change_gate(const std::optional<CountTriple>& last_sent,
                 const CountTriple& candidate, const SensorConfig& cfg);

/// Per-axis mean of the window, rounded half away from zero.
CountTriple average_counts(const std::vector<RawSample>& window);

/// Advances the firmware automaton by one raw sample and returns the events
/// handed to the radio (possibly none). Throws SequencingError if raw.t is
/// earlier than a sample already processed.
std::vector<SampleEvent> step(SensorState& state, const RawSample& raw,
                              const SensorConfig& cfg);

/// Emits any held-back events and returns the sensor to Sleep.
std::vector<SampleEvent> flush_and_sleep(SensorState& state);

}  // namespace qdroute::sensor
