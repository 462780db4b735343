#include "hfclass/channel.hpp"

#include <array>
#include <cmath>

#include "hfclass/dsp.hpp"
#include "hfclass/rng.hpp"

namespace hfc {

namespace {

constexpr std::array<ScenarioPreset, kScenarioCount> kScenarios{{
    {Scenario::none, 0.0, 0.0, 1, 0.0},
    {Scenario::good, 0.5e-3, 0.1, 2, 0.0},
    {Scenario::moderate, 1.0e-3, 0.5, 2, 0.0},
    {Scenario::bad, 2.0e-3, 1.0, 2, 0.0},
    {Scenario::flutter, 0.5e-3, 10.0, 2, 0.0},
    {Scenario::doppler, 0.0, 2.0, 1, 2.0},
}};

constexpr std::array<std::string_view, kScenarioCount> kScenarioNames{"none",    "good",    "moderate",
                                                                      "bad",     "flutter", "doppler"};

// The fading grid runs at this multiple of the Doppler spread before being
// interpolated to the output rate.
constexpr double kGridOversample = 32.0;
// Minimum grid length in Doppler coherence times, so short requests still
// see a properly shaped spectrum.
constexpr double kMinCoherenceTimes = 64.0;

Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

const ScenarioPreset& scenario_preset(Scenario s) { return kScenarios[static_cast<std::size_t>(s)]; }
std::span<const ScenarioPreset> all_scenarios() { return kScenarios; }
std::string_view scenario_name(Scenario s) { return kScenarioNames[static_cast<std::size_t>(s)]; }

std::optional<Scenario> scenario_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kScenarioNames.size(); ++i) {
    if (kScenarioNames[i] == name) return static_cast<Scenario>(i);
  }
  return std::nullopt;
}

void ChannelConfig::validate() const {
  if (!(snr_db >= kMinSnrDb && snr_db <= kMaxSnrDb)) {
    throw std::invalid_argument("SNR " + std::to_string(snr_db) + " dB outside [-10, 25]");
  }
  if (!(std::abs(freq_offset_hz) <= kMaxFreqOffsetHz)) {
    throw std::invalid_argument("frequency offset " + std::to_string(freq_offset_hz) + " Hz exceeds 250 Hz");
  }
  if (!(phase_offset_rad >= 0.0 && phase_offset_rad < kTwoPi)) {
    throw std::invalid_argument("phase offset must lie in [0, 2 pi)");
  }
  if (scenario.differential_delay_s < 0.0 || scenario.doppler_spread_hz < 0.0) {
    throw std::invalid_argument("scenario delay and spread must be non-negative");
  }
}

CVector fading_process(double spread_hz, Index length, std::uint64_t seed, double sample_rate) {
  if (spread_hz < 0.0) throw std::invalid_argument("Doppler spread must be non-negative");
  if (length <= 0) throw std::invalid_argument("fading length must be positive");
  Rng rng(seed);
  if (spread_hz == 0.0) return CVector::Constant(length, std::polar(1.0, rng.uniform(0.0, kTwoPi)));

  const double grid_rate = std::min(sample_rate, kGridOversample * spread_hz);
  const double step = grid_rate / sample_rate;  // grid samples per output sample
  const Index needed = static_cast<Index>(std::ceil(static_cast<double>(length) * step)) + 2;
  const Index grid_len =
      next_pow2(std::max(needed, static_cast<Index>(std::ceil(kMinCoherenceTimes * grid_rate / spread_hz))));

  // White complex Gaussian noise shaped in the frequency domain by the square
  // root of a Gaussian PSD with sigma = spread / 2.
  CVector noise(grid_len);
  for (Index i = 0; i < grid_len; ++i) noise[i] = rng.complex_normal();
  CVector spectrum = fft(noise);
  const double sigma = 0.5 * spread_hz;
  RVector psd(grid_len);
  for (Index k = 0; k < grid_len; ++k) {
    const double f = bin_frequency(k, grid_len, grid_rate);
    psd[k] = std::exp(-0.5 * f * f / (sigma * sigma));
  }
  psd *= static_cast<double>(grid_len) / psd.sum();
  spectrum.array() *= psd.array().sqrt();
  CVector grid = ifft(spectrum);
  normalize_power(grid);

  if (step == 1.0) return grid.head(length);
  // Cubic B-spline resampling. Linear interpolation leaves spectral images at
  // multiples of the grid rate that swamp a sub-hertz Doppler spectrum; the
  // B-spline response falls as sinc^4 and costs well under 1% of the power.
  auto at = [&](Index k) { return grid[(k % grid_len + grid_len) % grid_len]; };
  CVector out(length);
  for (Index n = 0; n < length; ++n) {
    const double pos = static_cast<double>(n) * step;
    const Index k = static_cast<Index>(pos);
    const double t = pos - static_cast<double>(k);
    const double t2 = t * t, t3 = t2 * t;
    const double w0 = (1.0 - t) * (1.0 - t) * (1.0 - t) / 6.0;
    const double w1 = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
    const double w2 = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
    const double w3 = t3 / 6.0;
    out[n] = w0 * at(k - 1) + w1 * at(k) + w2 * at(k + 1) + w3 * at(k + 2);
  }
  return out;
}

IqWaveform watterson_apply(const IqWaveform& iq, const ScenarioPreset& scenario, std::uint64_t seed) {
  if (iq.size() == 0) throw std::invalid_argument("watterson_apply needs a non-empty waveform");
  IqWaveform out{iq.samples, iq.sample_rate_hz};
  if (scenario.name != Scenario::none) {
    const Index n = iq.size();
    const Index delay = static_cast<Index>(std::llround(scenario.differential_delay_s * iq.sample_rate_hz));
    const double tap_scale = 1.0 / std::sqrt(static_cast<double>(scenario.tap_count));
    out.samples.setZero();
    for (int tap = 0; tap < scenario.tap_count; ++tap) {
      const CVector gain = fading_process(scenario.doppler_spread_hz, n, split_seed(seed, static_cast<std::uint64_t>(tap)),
                                          iq.sample_rate_hz);
      const Index d = tap * delay;
      for (Index i = d; i < n; ++i) out.samples[i] += tap_scale * gain[i] * iq.samples[i - d];
    }
    if (scenario.extra_freq_drift_hz > 0.0) {
      // One slow sinusoidal drift cycle across the waveform.
      Rng rng(split_seed(seed, 100));
      const double start = rng.uniform(0.0, kTwoPi);
      const double cycle = kTwoPi / static_cast<double>(n);
      double phase = 0.0;
      for (Index i = 0; i < n; ++i) {
        out.samples[i] *= std::polar(1.0, phase);
        const double f = scenario.extra_freq_drift_hz * std::sin(start + cycle * static_cast<double>(i));
        phase = std::remainder(phase + kTwoPi * f / iq.sample_rate_hz, kTwoPi);
      }
    }
  }
  normalize_power(out.samples);
  return out;
}

IqWaveform awgn(const IqWaveform& iq, double snr_db, std::uint64_t seed) {
  const double p = mean_power(iq.samples);
  if (!(p > 0.0)) throw std::invalid_argument("awgn: input has zero power, SNR is undefined");
  const double sigma = std::sqrt(p * std::pow(10.0, -snr_db / 10.0));
  Rng rng(seed);
  IqWaveform out{iq.samples, iq.sample_rate_hz};
  for (Index i = 0; i < out.size(); ++i) out.samples[i] += sigma * rng.complex_normal();
  return out;
}

IqWaveform apply_offsets(const IqWaveform& iq, double freq_offset_hz, double phase_offset_rad) {
  if (!(std::abs(freq_offset_hz) <= kMaxFreqOffsetHz)) {
    throw std::invalid_argument("frequency offset " + std::to_string(freq_offset_hz) + " Hz exceeds 250 Hz");
  }
  IqWaveform out{iq.samples, iq.sample_rate_hz};
  const double w = kTwoPi * freq_offset_hz / iq.sample_rate_hz;
  for (Index n = 0; n < out.size(); ++n) {
    out.samples[n] *= std::polar(1.0, std::remainder(w * static_cast<double>(n), kTwoPi) + phase_offset_rad);
  }
  return out;
}

ImpairTrace impair_traced(const IqWaveform& iq, const ChannelConfig& config) {
  config.validate();
  ImpairTrace trace;
  trace.faded = apply_offsets(watterson_apply(iq, config.scenario, split_seed(config.seed, 1)), config.freq_offset_hz,
                              config.phase_offset_rad);
  trace.output = awgn(trace.faded, config.snr_db, split_seed(config.seed, 2));
  return trace;
}

IqWaveform impair(const IqWaveform& iq, const ChannelConfig& config) { return impair_traced(iq, config).output; }

}  // namespace hfc
