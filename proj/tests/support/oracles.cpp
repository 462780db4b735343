#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <unsupported/Eigen/SpecialFunctions>

#include "hfclass/dsp.hpp"

namespace oracle {

double chi_square_sf(double x, double k) {
  Eigen::ArrayXd a(1), z(1);
  a << k / 2.0;
  z << x / 2.0;
  return Eigen::igammac(a, z)(0);
}

double chi_square_uniform_p(std::span<const std::size_t> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double expected = total / static_cast<double>(counts.size());
  double chi2 = 0.0;
  for (std::size_t c : counts) chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  return chi_square_sf(chi2, static_cast<double>(counts.size() - 1));
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double peak_frequency(const CVector& x) {
  const RVector p = hfc::power_spectrum(x, kAnalysisLength);
  Index k;
  p.maxCoeff(&k);
  return hfc::bin_frequency(k, kAnalysisLength);
}

std::vector<double> spectral_peaks(const RVector& power, double rel_threshold_db) {
  const Index n = power.size();
  const double floor = power.maxCoeff() * std::pow(10.0, rel_threshold_db / 10.0);
  std::vector<double> peaks;
  for (Index k = 0; k < n; ++k) {
    const double v = power[k];
    if (v < floor) continue;
    if (v >= power[(k + n - 1) % n] && v > power[(k + 1) % n]) peaks.push_back(hfc::bin_frequency(k, n));
  }
  std::sort(peaks.begin(), peaks.end());
  return peaks;
}

RVector welch_psd(const CVector& x, Index segment, Index hop) {
  RVector window(segment);
  for (Index i = 0; i < segment; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(hfc::kTwoPi * static_cast<double>(i) / static_cast<double>(segment)));
  }
  RVector sum = RVector::Zero(kAnalysisLength);
  int count = 0;
  for (Index start = 0; start + segment <= x.size(); start += hop, ++count) {
    const CVector piece = x.segment(start, segment).cwiseProduct(window.cast<hfc::Complex>());
    sum += hfc::power_spectrum(piece, kAnalysisLength);
  }
  return count > 0 ? RVector(sum / count) : sum;
}

double periodic_occupied_bandwidth(const CVector& period, double fraction) {
  const Index p = period.size();
  // Naive DFT: line k sits at k * fs / p, signed.
  std::vector<std::pair<double, double>> lines;
  for (Index k = -p / 2; k < p - p / 2; ++k) {
    hfc::Complex c = 0.0;
    for (Index i = 0; i < p; ++i) {
      c += period[i] * std::polar(1.0, -hfc::kTwoPi * static_cast<double>(k * i) / static_cast<double>(p));
    }
    lines.emplace_back(static_cast<double>(k) * hfc::kSampleRate / static_cast<double>(p), std::norm(c));
  }
  double total = 0.0;
  for (const auto& l : lines) total += l.second;
  const double tail = 0.5 * (1.0 - fraction) * total;
  double cum = 0.0, lo = 0.0, hi = 0.0;
  for (const auto& l : lines) {
    cum += l.second;
    if (cum > tail) {
      lo = l.first;
      break;
    }
  }
  cum = 0.0;
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    cum += it->second;
    if (cum > tail) {
      hi = it->first;
      break;
    }
  }
  return hi - lo;
}

double gaussian_width(const CVector& x) {
  const Index n = x.size();
  CVector windowed(n);
  for (Index i = 0; i < n; ++i) {
    windowed[i] = x[i] * 0.5 * (1.0 - std::cos(hfc::kTwoPi * static_cast<double>(i) / static_cast<double>(n)));
  }
  const RVector p = hfc::power_spectrum(windowed, n);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double f = hfc::bin_frequency(k, n);
    m0 += p[k];
    m1 += f * p[k];
    m2 += f * f * p[k];
  }
  const double mean = m1 / m0;
  return 2.0 * std::sqrt(m2 / m0 - mean * mean);
}

double power_at(const RVector& power, double f) {
  const Index n = power.size();
  const auto k = static_cast<Index>(std::llround(f / hfc::kSampleRate * static_cast<double>(n)));
  return power[(k % n + n) % n];
}

double negative_to_positive_db(const CVector& x) {
  const RVector p = hfc::power_spectrum(x, kAnalysisLength);
  double neg = 0.0, pos = 0.0;
  for (Index k = 1; k < kAnalysisLength; ++k) {
    const double f = hfc::bin_frequency(k, kAnalysisLength);
    if (f > 0) pos += p[k];
    if (f < 0) neg += p[k];
  }
  return 10.0 * std::log10(std::max(neg, 1e-300) / pos);
}

double energy_above_db(const RVector& x, double cutoff_hz) {
  const RVector p = hfc::power_spectrum(x.cast<hfc::Complex>(), kAnalysisLength);
  double above = 0.0;
  for (Index k = 0; k < kAnalysisLength; ++k) {
    if (std::abs(hfc::bin_frequency(k, kAnalysisLength)) > cutoff_hz) above += p[k];
  }
  return 10.0 * std::log10(std::max(above, 1e-300) / p.sum());
}

std::vector<std::uint8_t> psk_reversals(const CVector& x, double baud, std::size_t symbols) {
  const double sps = hfc::kSampleRate / baud;
  std::vector<std::uint8_t> out;
  hfc::Complex prev{1.0, 0.0};
  for (std::size_t k = 0; k < symbols; ++k) {
    const auto idx = static_cast<Index>(std::llround(static_cast<double>(k + 1) * sps)) - 1;
    const hfc::Complex z = x[idx];
    out.push_back(std::real(z * std::conj(prev)) < 0.0 ? 1 : 0);
    prev = z;
  }
  return out;
}

std::vector<bool> fsk_bits(const CVector& x, double baud, std::span<const double> bit_lengths) {
  const double sps = hfc::kSampleRate / baud;
  std::vector<bool> out;
  double start = 0.0;
  for (double len : bit_lengths) {
    const auto lo = static_cast<Index>(std::llround((start + 0.25 * len) * sps));
    const auto hi = static_cast<Index>(std::llround((start + 0.75 * len) * sps));
    double f = 0.0;
    for (Index n = std::max<Index>(lo, 1); n < hi; ++n) f += std::arg(x[n] * std::conj(x[n - 1]));
    out.push_back(f > 0.0);
    start += len;
  }
  return out;
}

std::vector<std::uint8_t> rtty_codes(const CVector& x, double baud, std::size_t characters) {
  std::vector<double> lengths;
  for (std::size_t c = 0; c < characters; ++c) {
    lengths.push_back(1.0);
    for (int b = 0; b < 5; ++b) lengths.push_back(1.0);
    lengths.push_back(1.5);
  }
  const auto bits = fsk_bits(x, baud, lengths);
  std::vector<std::uint8_t> codes;
  for (std::size_t c = 0; c < characters; ++c) {
    std::uint8_t code = 0;
    for (int b = 0; b < 5; ++b) code |= static_cast<std::uint8_t>(bits[c * 7 + 1 + b] ? 1 << b : 0);
    codes.push_back(code);
  }
  return codes;
}

std::vector<std::uint8_t> sync_words(const CVector& x, double baud, std::size_t words) {
  const std::vector<double> lengths(words * 7, 1.0);
  const auto bits = fsk_bits(x, baud, lengths);
  std::vector<std::uint8_t> out;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint8_t v = 0;
    for (int b = 0; b < 7; ++b) v = static_cast<std::uint8_t>((v << 1) | (bits[w * 7 + b] ? 1 : 0));
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint8_t> qpsk_steps(const CVector& x, double baud, std::size_t symbols) {
  const double sps = hfc::kSampleRate / baud;
  std::vector<std::uint8_t> out;
  hfc::Complex prev{1.0, 0.0};
  for (std::size_t k = 0; k < symbols; ++k) {
    const auto idx = static_cast<Index>(std::llround(static_cast<double>(k + 1) * sps)) - 1;
    const double dphi = std::arg(x[idx] * std::conj(prev));
    const long q = std::lround(dphi / (hfc::kPi / 2.0));
    out.push_back(static_cast<std::uint8_t>(((q % 4) + 4) % 4));
    prev = x[idx];
  }
  return out;
}

std::vector<std::uint8_t> qpsk31_viterbi(std::span<const std::uint8_t> steps) {
  constexpr int kStates = 16;
  constexpr int kInf = 1 << 28;
  auto expected = [](unsigned reg) {
    const int a = std::popcount(reg & 0x19u) & 1;
    const int c = std::popcount(reg & 0x17u) & 1;
    return static_cast<unsigned>(((a << 1) | c) ^ 2);
  };
  std::vector<int> metric(kStates, kInf);
  metric[0] = 0;
  std::vector<std::vector<std::uint8_t>> paths(kStates);
  for (auto step : steps) {
    std::vector<int> next(kStates, kInf);
    std::vector<std::vector<std::uint8_t>> next_paths(kStates);
    for (unsigned s = 0; s < kStates; ++s) {
      if (metric[s] >= kInf) continue;
      for (unsigned b = 0; b < 2; ++b) {
        const unsigned reg = ((s << 1) | b) & 0x1Fu;
        const int m = metric[s] + std::popcount(expected(reg) ^ step);
        const unsigned ns = reg & 0xFu;
        if (m < next[ns]) {
          next[ns] = m;
          next_paths[ns] = paths[s];
          next_paths[ns].push_back(static_cast<std::uint8_t>(b));
        }
      }
    }
    metric.swap(next);
    paths.swap(next_paths);
  }
  const auto best = std::min_element(metric.begin(), metric.end()) - metric.begin();
  return paths[static_cast<std::size_t>(best)];
}

std::vector<int> mfsk_tone_indices(const CVector& x, double baud, int tones, double spacing_hz, std::size_t symbols) {
  const double sps = hfc::kSampleRate / baud;
  std::vector<int> out;
  for (std::size_t s = 0; s < symbols; ++s) {
    const auto begin = static_cast<Index>(std::llround(static_cast<double>(s) * sps));
    const auto end = static_cast<Index>(std::llround(static_cast<double>(s + 1) * sps));
    int best = 0;
    double best_mag = -1.0;
    for (int t = 0; t < tones; ++t) {
      const double f = (t - 0.5 * (tones - 1)) * spacing_hz;
      hfc::Complex acc{0.0, 0.0};
      for (Index n = begin; n < end; ++n) acc += x[n] * std::polar(1.0, -hfc::kTwoPi * f * static_cast<double>(n) / hfc::kSampleRate);
      if (std::abs(acc) > best_mag) {
        best_mag = std::abs(acc);
        best = t;
      }
    }
    out.push_back(best);
  }
  return out;
}

std::vector<std::uint8_t> multicarrier_bits(const CVector& x, int carriers, double baud, double bandwidth_hz,
                                            std::size_t symbols) {
  // One 0.1 s symbol has fewer degrees of freedom than 64 carriers times two
  // amplitudes, so the fit is joint: unknown a(k, s) is carrier k's complex
  // amplitude at boundary s, shared by the symbols on either side.
  const double sps = hfc::kSampleRate / baud;
  const double spacing = bandwidth_hz / carriers;
  const Index c = carriers;
  const Index unknowns = c * static_cast<Index>(symbols + 1);
  Eigen::MatrixXcd normal = Eigen::MatrixXcd::Zero(unknowns, unknowns);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(unknowns);
  for (std::size_t s = 0; s < symbols; ++s) {
    const auto begin = static_cast<Index>(std::llround(static_cast<double>(s) * sps));
    const auto end = static_cast<Index>(std::llround(static_cast<double>(s + 1) * sps));
    const Index len = end - begin;
    Eigen::MatrixXcd basis(len, 2 * c);
    for (Index i = 0; i < len; ++i) {
      const double t = static_cast<double>(i + 1) / static_cast<double>(len);
      const double w = 0.5 * (1.0 - std::cos(hfc::kPi * t));
      for (Index k = 0; k < c; ++k) {
        const double f = (static_cast<double>(k) - 0.5 * static_cast<double>(c - 1)) * spacing;
        const hfc::Complex osc = std::polar(1.0, hfc::kTwoPi * f * static_cast<double>(begin + i) / hfc::kSampleRate);
        basis(i, k) = (1.0 - w) * osc;
        basis(i, c + k) = w * osc;
      }
    }
    const Index at = c * static_cast<Index>(s);
    normal.block(at, at, 2 * c, 2 * c) += basis.adjoint() * basis;
    rhs.segment(at, 2 * c) += basis.adjoint() * x.segment(begin, len);
  }
  const Eigen::VectorXcd a = normal.ldlt().solve(rhs);
  std::vector<std::uint8_t> out(symbols * static_cast<std::size_t>(carriers));
  for (std::size_t s = 0; s < symbols; ++s) {
    for (Index k = 0; k < c; ++k) {
      const hfc::Complex from = a[c * static_cast<Index>(s) + k];
      const hfc::Complex to = a[c * static_cast<Index>(s + 1) + k];
      out[s * static_cast<std::size_t>(carriers) + static_cast<std::size_t>(k)] = std::real(to * std::conj(from)) < 0.0;
    }
  }
  return out;
}

hfc::encoding::KeyingEnvelope ook_envelope(const CVector& x) {
  // 4 ms centred moving average of |x|, then a slicer with hysteresis so
  // noise on the slow keying edges cannot split a segment.
  constexpr Index kHalf = 12;
  const Index n = x.size();
  RVector mag(n + 1);
  mag[0] = 0.0;
  for (Index i = 0; i < n; ++i) mag[i + 1] = mag[i] + std::abs(x[i]);
  RVector env(n);
  for (Index i = 0; i < n; ++i) {
    const Index lo = std::max<Index>(0, i - kHalf);
    const Index hi = std::min(n, i + kHalf + 1);
    env[i] = (mag[hi] - mag[lo]) / static_cast<double>(hi - lo);
  }
  const double peak = env.maxCoeff();
  const double rise = 0.6 * peak, fall = 0.4 * peak;
  hfc::encoding::KeyingEnvelope out;
  bool level = env[0] > rise;
  Index run = 0;
  for (Index i = 0; i < n; ++i) {
    const bool on = level ? env[i] > fall : env[i] > rise;
    if (on != level) {
      out.segments.push_back({level, static_cast<double>(run) / hfc::kSampleRate});
      level = on;
      run = 0;
    }
    ++run;
  }
  out.segments.push_back({level, static_cast<double>(run) / hfc::kSampleRate});
  if (!out.segments.empty() && !out.segments.back().on) out.segments.pop_back();
  return out;
}

}  // namespace oracle
