#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "hfclass/common.hpp"

namespace hfc {

/// Propagation scenarios. The enumerator value is the dataset scenario index.
enum class Scenario : std::uint8_t { none, good, moderate, bad, flutter, doppler };

inline constexpr int kScenarioCount = 6;

/// Watterson tap layout for one scenario.
struct ScenarioPreset {
  Scenario name;
  double differential_delay_s;
  double doppler_spread_hz;  // two-sigma width of the Gaussian Doppler spectrum
  int tap_count;
  double extra_freq_drift_hz;  // peak of the slow sinusoidal drift
};

const ScenarioPreset& scenario_preset(Scenario s);
std::span<const ScenarioPreset> all_scenarios();
std::string_view scenario_name(Scenario s);
std::optional<Scenario> scenario_from_name(std::string_view name);

inline constexpr double kMinSnrDb = -10.0;
inline constexpr double kMaxSnrDb = 25.0;
inline constexpr double kMaxFreqOffsetHz = 250.0;

struct ChannelConfig {
  ScenarioPreset scenario = scenario_preset(Scenario::none);
  double snr_db = kMaxSnrDb;
  double freq_offset_hz = 0.0;
  double phase_offset_rad = 0.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Complex Gaussian tap gain with a Gaussian Doppler spectrum of two-sigma
/// width `spread_hz` and unit mean power. Zero spread yields a constant
/// unit-magnitude gain with a seeded phase.
CVector fading_process(double spread_hz, Index length, std::uint64_t seed, double sample_rate = kSampleRate);

/// Sum of delayed, independently faded copies of the input (equal average
/// tap power), rescaled to unit mean power. Scenario `none` passes the input
/// through unchanged apart from that rescaling.
IqWaveform watterson_apply(const IqWaveform& iq, const ScenarioPreset& scenario, std::uint64_t seed);

/// Adds circular complex white Gaussian noise at `snr_db` relative to the
/// input's mean power, measured over the full sample band.
IqWaveform awgn(const IqWaveform& iq, double snr_db, std::uint64_t seed);

/// y[n] = x[n] * exp(j(2 pi df n / fs + phi)).
IqWaveform apply_offsets(const IqWaveform& iq, double freq_offset_hz, double phase_offset_rad);

/// Intermediate signals of the impairment chain.
struct ImpairTrace {
  IqWaveform faded;   // after fading and offsets, before noise
  IqWaveform output;  // final impaired waveform
};

/// watterson_apply -> apply_offsets -> awgn.
IqWaveform impair(const IqWaveform& iq, const ChannelConfig& config);
ImpairTrace impair_traced(const IqWaveform& iq, const ChannelConfig& config);

}  // namespace hfc
