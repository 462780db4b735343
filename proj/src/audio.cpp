#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hfclass/modem.hpp"
#include "hfclass/rng.hpp"

namespace hfc {

namespace {

// Blackman-windowed sinc low-pass, odd length, unity DC gain.
RVector lowpass_taps(double cutoff_hz, double sample_rate, Index taps) {
  RVector h(taps);
  const double fc = cutoff_hz / sample_rate;
  const Index mid = taps / 2;
  for (Index i = 0; i < taps; ++i) {
    const double m = static_cast<double>(i - mid);
    const double sinc = m == 0.0 ? 2.0 * fc : std::sin(kTwoPi * fc * m) / (kPi * m);
    const double w = 0.42 - 0.5 * std::cos(kTwoPi * i / (taps - 1)) + 0.08 * std::cos(2.0 * kTwoPi * i / (taps - 1));
    h[i] = sinc * w;
  }
  return h / h.sum();
}

// Centred ("same" length) convolution.
RVector filter_same(const RVector& x, const RVector& h) {
  const Index n = x.size();
  const Index taps = h.size();
  const Index mid = taps / 2;
  RVector y = RVector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Index lo = std::max<Index>(0, i + mid - n + 1);
    const Index hi = std::min<Index>(taps, i + mid + 1);
    double acc = 0.0;
    for (Index k = lo; k < hi; ++k) acc += h[k] * x[i + mid - k];
    y[i] = acc;
  }
  return y;
}

RVector finish_audio(const RVector& raw) {
  static const RVector taps = lowpass_taps(2600.0, kSampleRate, 255);
  RVector y = filter_same(raw, taps);
  const double peak = y.cwiseAbs().maxCoeff();
  if (peak > 0.0) y /= peak;
  return y;
}

// Two-pole resonator bank run in cascade over `x`.
void formant_filter(Eigen::Ref<RVector> x, const double (&freq)[3], const double (&bw)[3]) {
  for (int f = 0; f < 3; ++f) {
    const double r = std::exp(-kPi * bw[f] / kSampleRate);
    const double a1 = 2.0 * r * std::cos(kTwoPi * freq[f] / kSampleRate);
    const double a2 = -r * r;
    const double gain = 1.0 - r;
    double y1 = 0.0, y2 = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      const double y = gain * x[i] + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      x[i] = y;
    }
  }
}

double raised_edge(Index i, Index len, Index attack, Index release) {
  if (i < attack) return 0.5 * (1.0 - std::cos(kPi * (i + 0.5) / attack));
  if (i >= len - release) return 0.5 * (1.0 - std::cos(kPi * (len - i - 0.5) / release));
  return 1.0;
}

RVector synth_speech(Index n, Rng& rng) {
  RVector out = RVector::Zero(n);
  const double f0_base = rng.uniform(90.0, 220.0);
  const double vibrato_phase = rng.uniform(0.0, kTwoPi);
  auto seconds = [](double s) { return static_cast<Index>(std::llround(s * kSampleRate)); };
  Index t = 0;
  Index pause_deadline = seconds(rng.uniform(0.8, 2.4));
  double pulse_phase = 0.0;
  // Speech opens with a syllable and pauses never follow each other, so any
  // clip of half a second or more carries energy.
  bool after_pause = true;
  while (t < n) {
    const bool pause_due = t >= pause_deadline || rng.uniform() < 0.12;
    if (pause_due && !after_pause) {
      t += seconds(rng.uniform(0.15, 0.4));
      pause_deadline = t + seconds(rng.uniform(0.8, 2.4));
      after_pause = true;
      continue;
    }
    after_pause = false;
    const Index len = std::min(n - t, seconds(rng.uniform(0.12, 0.3)));
    const bool voiced = rng.uniform() < 0.8;
    const double freq[3] = {rng.uniform(300.0, 800.0), rng.uniform(900.0, 2200.0), rng.uniform(2300.0, 2550.0)};
    const double bw[3] = {rng.uniform(60.0, 120.0), rng.uniform(70.0, 140.0), rng.uniform(90.0, 160.0)};
    const double level = rng.uniform(0.4, 1.0);
    const double glide = rng.uniform(-0.15, 0.15);
    RVector seg = RVector::Zero(len);
    for (Index i = 0; i < len; ++i) {
      if (voiced) {
        const double tt = static_cast<double>(t + i) / kSampleRate;
        const double f0 = f0_base * (1.0 + 0.08 * std::sin(kTwoPi * 0.7 * tt + vibrato_phase)) *
                          (1.0 + glide * static_cast<double>(i) / static_cast<double>(len));
        pulse_phase += f0 / kSampleRate;
        if (pulse_phase >= 1.0) {
          pulse_phase -= 1.0;
          seg[i] = 1.0;
        }
      } else {
        seg[i] = 0.3 * rng.normal();
      }
    }
    formant_filter(seg, freq, bw);
    const Index edge = std::min(len / 2, seconds(0.03));
    for (Index i = 0; i < len; ++i) out[t + i] += level * seg[i] * raised_edge(i, len, edge, edge);
    t += len + seconds(rng.uniform(0.02, 0.06));
  }
  return out;
}

RVector synth_music(Index n, Rng& rng) {
  RVector out = RVector::Zero(n);
  static constexpr int kScale[] = {0, 2, 4, 5, 7, 9, 11};
  const int root = 45 + static_cast<int>(rng.below(12));
  Index t = 0;
  while (t < n) {
    const Index dur = static_cast<Index>(rng.uniform(0.15, 0.6) * kSampleRate);
    const Index ring = std::min(n - t, dur + dur / 2);
    const int voices = 1 + static_cast<int>(rng.below(3));
    const double decay = rng.uniform(0.2, 0.8) * kSampleRate;
    for (int v = 0; v < voices; ++v) {
      const int degree = static_cast<int>(rng.below(14));
      const int midi = root + 12 * (degree / 7) + kScale[degree % 7];
      const double f0 = 440.0 * std::pow(2.0, (midi - 69) / 12.0);
      const double tilt = rng.uniform(0.8, 1.8);
      const int harmonics = std::max(1, static_cast<int>(2550.0 / f0));
      const double amp = rng.uniform(0.3, 1.0);
      for (int h = 1; h <= harmonics; ++h) {
        const double a = amp / std::pow(static_cast<double>(h), tilt);
        const double ph = rng.uniform(0.0, kTwoPi);
        const double w = kTwoPi * f0 * h / kSampleRate;
        for (Index i = 0; i < ring; ++i) {
          const double env = std::min(1.0, static_cast<double>(i) / 60.0) * std::exp(-static_cast<double>(i) / decay);
          out[t + i] += a * env * std::sin(w * static_cast<double>(i) + ph);
        }
      }
    }
    if (rng.uniform() < 0.35) {
      // Percussive burst: one-pole low-passed noise with a fast decay.
      const double pole = rng.uniform(0.3, 0.9);
      const double level = rng.uniform(0.2, 0.6);
      double state = 0.0;
      for (Index i = 0; i < std::min<Index>(ring, 600); ++i) {
        state = pole * state + (1.0 - pole) * rng.normal();
        out[t + i] += level * state * std::exp(-static_cast<double>(i) / 150.0);
      }
    }
    t += dur;
  }
  return out;
}

}  // namespace

RVector synth_audio(AudioKind kind, double seconds, std::uint64_t seed) {
  if (!(seconds > 0.0)) throw std::invalid_argument("synth_audio duration must be positive");
  Rng rng(seed);
  const Index n = static_cast<Index>(std::llround(seconds * kSampleRate));
  return finish_audio(kind == AudioKind::speech ? synth_speech(n, rng) : synth_music(n, rng));
}

BinaryImage synth_fax_image(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  BinaryImage img = BinaryImage::Ones(rows, cols);
  auto uniform_index = [&](Index hi) { return static_cast<Index>(rng.below(static_cast<std::uint64_t>(std::max<Index>(hi, 1)))); };

  // Coastline / isobar style curves.
  const int curves = 3 + static_cast<int>(rng.below(5));
  for (int c = 0; c < curves; ++c) {
    const double base = rng.uniform(0.0, static_cast<double>(rows));
    const double amp = rng.uniform(5.0, 0.3 * static_cast<double>(rows));
    const double period = rng.uniform(0.2, 1.0) * static_cast<double>(cols);
    const double phase = rng.uniform(0.0, kTwoPi);
    for (Index x = 0; x < cols; ++x) {
      const double y = base + amp * std::sin(kTwoPi * static_cast<double>(x) / period + phase);
      for (Index dy = -1; dy <= 1; ++dy) {
        const Index r = static_cast<Index>(std::lround(y)) + dy;
        if (r >= 0 && r < rows) img(r, x) = 0;
      }
    }
  }

  // Latitude/longitude grid.
  const Index grid = 60 + uniform_index(80);
  for (Index r = 0; r < rows; r += grid) img.row(r).setZero();
  for (Index x = 0; x < cols; x += 2 * grid) img.col(x).setZero();

  // Ordered-dither gradient band.
  static constexpr int kBayer[4][4] = {{0, 8, 2, 10}, {12, 4, 14, 6}, {3, 11, 1, 9}, {15, 7, 13, 5}};
  const Index g0 = uniform_index(rows);
  const Index gh = std::min(rows - g0, 8 + uniform_index(rows / 3 + 1));
  const Index gx0 = uniform_index(cols / 2);
  const Index gw = cols / 3 + uniform_index(cols / 3);
  for (Index r = g0; r < g0 + gh; ++r) {
    for (Index x = gx0; x < std::min(cols, gx0 + gw); ++x) {
      const double level = static_cast<double>(x - gx0) / static_cast<double>(gw);
      // Dither cells are 2x2 pixels so the scan keeps a moderate transition rate.
      img(r, x) = level * 16.0 > kBayer[(r / 2) % 4][(x / 2) % 4] ? 1 : 0;
    }
  }

  // Text blocks: rows of blocky glyphs.
  const int blocks = 2 + static_cast<int>(rng.below(4));
  for (int b = 0; b < blocks; ++b) {
    const Index top = uniform_index(rows);
    const Index left = uniform_index(cols - 200);
    const Index lines = 1 + uniform_index(4);
    const Index chars = 10 + uniform_index(40);
    for (Index l = 0; l < lines; ++l) {
      for (Index ch = 0; ch < chars; ++ch) {
        if (rng.uniform() < 0.15) continue;  // word space
        const std::uint64_t glyph = rng.next();
        for (Index gy = 0; gy < 7; ++gy) {
          for (Index gx = 0; gx < 5; ++gx) {
            if (((glyph >> (gy * 5 + gx)) & 1u) == 0) continue;
            for (Index sy = 0; sy < 2; ++sy) {
              for (Index sx = 0; sx < 3; ++sx) {
                const Index r = top + l * 18 + gy * 2 + sy;
                const Index x = left + ch * 18 + gx * 3 + sx;
                if (r < rows && x < cols) img(r, x) = 0;
              }
            }
          }
        }
      }
    }
  }
  return img;
}

RVector load_pcm16(const std::filesystem::path& path, double file_rate_hz) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open audio file " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const Index n = static_cast<Index>(bytes.size() / 2);
  RVector x(n);
  for (Index i = 0; i < n; ++i) {
    const auto v = static_cast<std::int16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
    x[i] = static_cast<double>(v) / 32768.0;
  }
  if (file_rate_hz == kSampleRate || n == 0) return x;
  if (file_rate_hz > kSampleRate) x = filter_same(x, lowpass_taps(0.45 * kSampleRate, file_rate_hz, 255));
  const Index m = static_cast<Index>(std::floor(static_cast<double>(n - 1) * kSampleRate / file_rate_hz)) + 1;
  RVector y(m);
  for (Index i = 0; i < m; ++i) {
    const double pos = static_cast<double>(i) * file_rate_hz / kSampleRate;
    const Index k = std::min<Index>(static_cast<Index>(pos), n - 1);
    const double frac = pos - static_cast<double>(k);
    y[i] = k + 1 < n ? (1.0 - frac) * x[k] + frac * x[k + 1] : x[k];
  }
  return y;
}

BinaryImage load_pbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image file " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P4") throw std::runtime_error(path.string() + " is not a binary PBM (P4) image");
  auto next_int = [&] {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    long v = 0;
    in >> v;
    return v;
  };
  const long width = next_int();
  const long height = next_int();
  in.get();  // single whitespace before the raster
  if (width <= 0 || height <= 0) throw std::runtime_error(path.string() + ": invalid PBM dimensions");
  const long stride = (width + 7) / 8;
  std::vector<unsigned char> raster(static_cast<std::size_t>(stride * height));
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size())) {
    throw std::runtime_error(path.string() + ": truncated PBM raster");
  }
  BinaryImage img(height, width);
  for (long r = 0; r < height; ++r) {
    for (long c = 0; c < width; ++c) {
      const bool black = (raster[static_cast<std::size_t>(r * stride + c / 8)] >> (7 - c % 8)) & 1;
      img(r, c) = black ? 0 : 1;
    }
  }
  return img;
}

}  // namespace hfc
