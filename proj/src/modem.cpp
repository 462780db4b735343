#include "hfclass/modem.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <variant>

#include "hfclass/dsp.hpp"
#include "hfclass/rng.hpp"

namespace hfc {

namespace {

// Sample index at which symbol boundary `i` falls for a given symbol rate.
Index boundary(double i, double samples_per_symbol) {
  return static_cast<Index>(std::llround(i * samples_per_symbol));
}

double wrap_phase(double phase) { return std::remainder(phase, kTwoPi); }

// Weight moving from the previous constellation point to the next one across
// a symbol: reaches 1 on the last sample of the symbol.
double transition_weight(Index offset, Index length) {
  const double t = static_cast<double>(offset + 1) / static_cast<double>(length);
  return 0.5 * (1.0 - std::cos(kPi * t));
}

int parity(unsigned v) { return std::popcount(v) & 1; }

}  // namespace

std::vector<std::uint8_t> psk31_symbols(std::span<const std::uint8_t> varicode_bits) {
  std::vector<std::uint8_t> symbols;
  symbols.reserve(varicode_bits.size());
  for (auto b : varicode_bits) symbols.push_back(b ? 0 : 1);
  return symbols;
}

std::vector<std::uint8_t> qpsk31_symbols(std::span<const std::uint8_t> varicode_bits) {
  std::vector<std::uint8_t> symbols;
  symbols.reserve(varicode_bits.size());
  unsigned shift = 0;
  for (auto b : varicode_bits) {
    shift = ((shift << 1) | (b ? 1u : 0u)) & 0x1Fu;
    const int a = parity(shift & 0x19u);
    const int c = parity(shift & 0x17u);
    // Idle zeros map to continuous reversals, as in BPSK.
    symbols.push_back(static_cast<std::uint8_t>(((a << 1) | c) ^ 2));
  }
  return symbols;
}

IqWaveform psk_mod(std::span<const std::uint8_t> symbols, double baud, Constellation constellation) {
  if (symbols.empty()) throw std::invalid_argument("psk_mod needs at least one symbol");
  const double sps = kSampleRate / baud;
  const double step = constellation == Constellation::bpsk ? kPi : kPi / 2.0;
  const int order = constellation == Constellation::bpsk ? 2 : 4;
  IqWaveform out;
  out.samples.resize(boundary(static_cast<double>(symbols.size()), sps));
  Complex prev{1.0, 0.0};
  double phase = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] >= order) throw std::invalid_argument("PSK symbol out of range");
    phase = wrap_phase(phase + step * symbols[i]);
    const Complex next = std::polar(1.0, phase);
    const Index begin = boundary(static_cast<double>(i), sps);
    const Index end = boundary(static_cast<double>(i + 1), sps);
    for (Index n = begin; n < end; ++n) {
      const double w = transition_weight(n - begin, end - begin);
      out.samples[n] = prev * (1.0 - w) + next * w;
    }
    prev = next;
  }
  return out;
}

std::vector<FskBit> frame_async(std::span<const std::uint8_t> codes, int data_bits, double stop_bits) {
  std::vector<FskBit> bits;
  bits.reserve(codes.size() * static_cast<std::size_t>(data_bits + 2));
  for (auto code : codes) {
    bits.push_back({false, 1.0});
    for (int b = 0; b < data_bits; ++b) bits.push_back({((code >> b) & 1) != 0, 1.0});
    bits.push_back({true, stop_bits});
  }
  return bits;
}

std::vector<FskBit> frame_sync(std::span<const std::uint8_t> words, int bits_per_word) {
  std::vector<FskBit> bits;
  bits.reserve(words.size() * static_cast<std::size_t>(bits_per_word));
  for (auto w : words) {
    for (int b = bits_per_word - 1; b >= 0; --b) bits.push_back({((w >> b) & 1) != 0, 1.0});
  }
  return bits;
}

IqWaveform fsk_mod(std::span<const FskBit> bits, double baud, double shift_hz) {
  if (bits.empty()) throw std::invalid_argument("fsk_mod needs a non-empty frame stream");
  const double sps = kSampleRate / baud;
  double total = 0.0;
  for (const auto& b : bits) total += b.length;
  IqWaveform out;
  out.samples.resize(boundary(total, sps));
  std::size_t bit = 0;
  double bit_end = bits[0].length;
  double phase = 0.0;
  for (Index n = 0; n < out.size(); ++n) {
    while (bit + 1 < bits.size() && static_cast<double>(n) >= boundary(bit_end, sps)) {
      bit_end += bits[++bit].length;
    }
    out.samples[n] = std::polar(1.0, phase);
    const double f = bits[bit].mark ? 0.5 * shift_hz : -0.5 * shift_hz;
    phase = wrap_phase(phase + kTwoPi * f / kSampleRate);
  }
  return out;
}

std::vector<int> mfsk_tones(const encoding::SymbolStream& symbols, int tones, bool ifk) {
  std::vector<int> out;
  out.reserve(symbols.symbols.size());
  int prev = 0;
  for (std::size_t i = 0; i < symbols.symbols.size(); ++i) {
    const int s = symbols.symbols[i];
    if (s >= tones) {
      throw std::invalid_argument("MFSK symbol " + std::to_string(s) + " at index " + std::to_string(i) +
                                  " exceeds tone count " + std::to_string(tones));
    }
    prev = ifk ? (prev + 2 + s) % tones : s;
    out.push_back(prev);
  }
  return out;
}

IqWaveform mfsk_mod(const encoding::SymbolStream& symbols, double baud, int tones, double tone_spacing_hz,
                    bool ifk) {
  const auto tone_seq = mfsk_tones(symbols, tones, ifk);
  if (tone_seq.empty()) throw std::invalid_argument("mfsk_mod needs at least one symbol");
  const double sps = kSampleRate / baud;
  const double centre = 0.5 * (tones - 1);
  IqWaveform out;
  out.samples.resize(boundary(static_cast<double>(tone_seq.size()), sps));
  double phase = 0.0;
  for (std::size_t i = 0; i < tone_seq.size(); ++i) {
    const double f = (tone_seq[i] - centre) * tone_spacing_hz;
    const double dphi = kTwoPi * f / kSampleRate;
    for (Index n = boundary(static_cast<double>(i), sps); n < boundary(static_cast<double>(i + 1), sps); ++n) {
      out.samples[n] = std::polar(1.0, phase);
      phase = wrap_phase(phase + dphi);
    }
  }
  return out;
}

IqWaveform multicarrier_mod(std::span<const std::uint8_t> bits, int carriers, double baud_per_carrier,
                            double bandwidth_hz, std::uint64_t seed) {
  if (bits.empty()) throw std::invalid_argument("multicarrier_mod needs at least one bit");
  const double spacing = bandwidth_hz / carriers;
  const double sps = kSampleRate / baud_per_carrier;
  const std::size_t n_symbols = (bits.size() + static_cast<std::size_t>(carriers) - 1) / carriers;
  const Index length = boundary(static_cast<double>(n_symbols), sps);

  Rng rng(seed);
  IqWaveform out;
  out.samples = CVector::Zero(length);
  for (int k = 0; k < carriers; ++k) {
    const double f = (k - 0.5 * (carriers - 1)) * spacing;
    const Complex rot = std::polar(1.0, kTwoPi * f / kSampleRate);
    Complex osc = std::polar(1.0, rng.uniform(0.0, kTwoPi));
    double prev = 1.0;
    for (std::size_t s = 0; s < n_symbols; ++s) {
      const std::size_t idx = s * static_cast<std::size_t>(carriers) + static_cast<std::size_t>(k);
      const double next = (idx < bits.size() && bits[idx]) ? -prev : prev;
      const Index begin = boundary(static_cast<double>(s), sps);
      const Index end = boundary(static_cast<double>(s + 1), sps);
      for (Index n = begin; n < end; ++n) {
        const double w = transition_weight(n - begin, end - begin);
        out.samples[n] += (prev * (1.0 - w) + next * w) * osc;
        osc *= rot;
      }
      osc /= std::abs(osc);
      prev = next;
    }
  }
  return out;
}

IqWaveform ook_mod(const encoding::KeyingEnvelope& envelope, double edge_ms) {
  if (envelope.empty()) throw std::invalid_argument("ook_mod needs a non-empty envelope");
  const Index length = static_cast<Index>(std::llround(envelope.total_seconds() * kSampleRate));
  IqWaveform out;
  out.samples = CVector::Zero(length);
  const Index edge = static_cast<Index>(std::llround(edge_ms * 1e-3 * kSampleRate));
  double t = 0.0;
  for (const auto& seg : envelope.segments) {
    const Index begin = static_cast<Index>(std::llround(t * kSampleRate));
    t += seg.seconds;
    const Index end = std::min(length, static_cast<Index>(std::llround(t * kSampleRate)));
    if (!seg.on) continue;
    const Index len = end - begin;
    const Index e = std::min(edge, len / 2);
    for (Index i = 0; i < len; ++i) {
      double a = 1.0;
      if (i < e) {
        a = 0.5 * (1.0 - std::cos(kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(e)));
      } else if (i >= len - e) {
        a = 0.5 * (1.0 - std::cos(kPi * (static_cast<double>(len - i) - 0.5) / static_cast<double>(e)));
      }
      out.samples[begin + i] = a;
    }
  }
  return out;
}

IqWaveform ssb_mod(const RVector& audio, Sideband sideband) {
  if (audio.size() == 0 || audio.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("ssb_mod: silent audio cannot be normalized");
  }
  const RVector voice = band_limit(audio, 300.0, 2700.0);
  if (voice.cwiseAbs().maxCoeff() < 1e-12) {
    throw std::invalid_argument("ssb_mod: audio has no energy in the 300-2700 Hz voice band");
  }
  IqWaveform out;
  out.samples = analytic_signal(voice);
  if (sideband == Sideband::lower) out.samples = out.samples.conjugate();
  return out;
}

IqWaveform am_mod(const RVector& audio, double depth) {
  if (!(depth >= 0.3 && depth <= 0.9)) {
    throw std::invalid_argument("AM depth must lie in [0.3, 0.9], got " + std::to_string(depth));
  }
  RVector message = audio.size() > 0 ? band_limit(audio, 0.0, 2500.0) : audio;
  const double peak = message.size() > 0 ? message.cwiseAbs().maxCoeff() : 0.0;
  if (peak > 0.0) message /= peak;
  IqWaveform out;
  out.samples = (1.0 + depth * message.array()).matrix().cast<Complex>();
  return out;
}

IqWaveform fax_mod(const BinaryImage& image, double lpm) {
  if (image.size() == 0) throw std::invalid_argument("fax_mod needs a non-empty image");
  constexpr double kDeviation = 400.0;
  const Index line_samples = static_cast<Index>(std::llround(60.0 / lpm * kSampleRate));
  const Index cols = image.cols();
  IqWaveform out;
  out.samples.resize(image.rows() * line_samples);
  double phase = 0.0;
  for (Index r = 0; r < image.rows(); ++r) {
    for (Index i = 0; i < line_samples; ++i) {
      const Index c = i * cols / line_samples;
      out.samples[r * line_samples + i] = std::polar(1.0, phase);
      const double f = image(r, c) ? kDeviation : -kDeviation;
      phase = wrap_phase(phase + kTwoPi * f / kSampleRate);
    }
  }
  return out;
}

namespace {

// Pads an RTTY code stream with LTRS idle characters up to `count` codes.
std::vector<std::uint8_t> with_idle(std::vector<std::uint8_t> codes, std::size_t count) {
  while (codes.size() < count) codes.push_back(encoding::ita2::kLtrs);
  return codes;
}

RVector analog_audio(const ModulateOptions& options, double seconds, std::uint64_t seed) {
  Rng rng(seed);
  const Index n = static_cast<Index>(std::llround(seconds * kSampleRate));
  if (options.sources && !options.sources->audio.empty()) {
    const auto& clip = options.sources->audio[rng.below(options.sources->audio.size())];
    if (clip.size() >= n) {
      const Index start = static_cast<Index>(rng.below(static_cast<std::uint64_t>(clip.size() - n + 1)));
      RVector seg = clip.segment(start, n);
      if (seg.cwiseAbs().maxCoeff() > 0.0) return seg;
    }
  }
  const AudioKind kind = rng.uniform() < 0.5 ? AudioKind::speech : AudioKind::music;
  return synth_audio(kind, seconds, rng.next());
}

BinaryImage fax_source(const ModulateOptions& options, Index lines, std::uint64_t seed) {
  Rng rng(seed);
  BinaryImage image;
  if (options.sources && !options.sources->images.empty()) {
    image = options.sources->images[rng.below(options.sources->images.size())];
  } else {
    image = synth_fax_image(std::max<Index>(lines, 96), 1200, rng.next());
  }
  BinaryImage out(lines, image.cols());
  const Index start = static_cast<Index>(rng.below(static_cast<std::uint64_t>(image.rows())));
  for (Index r = 0; r < lines; ++r) out.row(r) = image.row((start + r) % image.rows());
  return out;
}

}  // namespace

IqWaveform modulate(const ModeSpec& mode, double seconds, std::uint64_t seed, const ModulateOptions& options) {
  if (!(seconds >= kMinModulateSeconds)) {
    throw std::invalid_argument("modulate: duration " + std::to_string(seconds) +
                                " s is shorter than the 0.5 s minimum");
  }
  const Index length = static_cast<Index>(std::llround(seconds * kSampleRate));
  const std::uint64_t payload_seed = split_seed(seed, 10);
  const std::uint64_t source_seed = split_seed(seed, 11);

  auto payload = [&] { return encoding::random_payload(mode, seconds, payload_seed, options.payload); };

  IqWaveform wave;
  switch (mode.family) {
    case Family::ook:
      wave = ook_mod(std::get<encoding::KeyingEnvelope>(payload()));
      break;
    case Family::psk:
      wave = psk_mod(psk31_symbols(std::get<encoding::Bits>(payload())), mode.baud, Constellation::bpsk);
      break;
    case Family::qpsk:
      wave = psk_mod(qpsk31_symbols(std::get<encoding::Bits>(payload())), mode.baud, Constellation::qpsk);
      break;
    case Family::fsk: {
      const auto stream = std::get<encoding::SymbolStream>(payload());
      std::vector<std::uint8_t> words(stream.symbols.begin(), stream.symbols.end());
      const auto bits = mode.id == ModeId::navtex
                            ? frame_sync(words, 7)
                            : frame_async(with_idle(std::move(words), encoding::required_symbols(mode, seconds)));
      wave = fsk_mod(bits, mode.baud, mode.shift_hz);
      break;
    }
    case Family::mfsk:
      wave = mfsk_mod(std::get<encoding::SymbolStream>(payload()), mode.baud, mode.tones, mode.tone_spacing_hz,
                      mode.ifk);
      break;
    case Family::multicarrier:
      wave = multicarrier_mod(std::get<encoding::Bits>(payload()), mode.carriers, mode.baud, mode.bandwidth_hz,
                              source_seed);
      break;
    case Family::ssb_usb:
    case Family::ssb_lsb:
      wave = ssb_mod(analog_audio(options, seconds, source_seed),
                     mode.family == Family::ssb_usb ? Sideband::upper : Sideband::lower);
      break;
    case Family::am: {
      Rng rng(split_seed(seed, 12));
      wave = am_mod(analog_audio(options, seconds, source_seed), rng.uniform(options.am_depth_min, options.am_depth_max));
      break;
    }
    case Family::fax: {
      const Index lines = static_cast<Index>(std::ceil(seconds / 0.5));
      wave = fax_mod(fax_source(options, lines, source_seed));
      break;
    }
  }
  if (wave.size() < length) {
    throw std::logic_error("synthesizer for " + std::string(mode.name) + " produced " +
                           std::to_string(wave.size()) + " of " + std::to_string(length) + " samples");
  }
  wave.samples.conservativeResize(length);
  normalize_power(wave.samples);
  return wave;
}

}  // namespace hfc
