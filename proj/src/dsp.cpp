#include "hfclass/dsp.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

namespace hfc {

bool normalize_power(CVector& x) {
  const double p = mean_power(x);
  if (!(p > 0.0)) return false;
  x /= std::sqrt(p);
  return true;
}

CVector fft(const CVector& x) {
  Eigen::FFT<double> engine;
  CVector out(x.size());
  engine.fwd(out, x);
  return out;
}

CVector ifft(const CVector& x) {
  Eigen::FFT<double> engine;
  CVector out(x.size());
  engine.inv(out, x);
  return out;
}

double bin_frequency(Index k, Index n, double sample_rate) {
  const Index signed_k = k <= n / 2 ? k : k - n;
  return static_cast<double>(signed_k) * sample_rate / static_cast<double>(n);
}

RVector band_limit(const RVector& x, double lo_hz, double hi_hz, double sample_rate) {
  CVector spectrum = fft(x.cast<Complex>());
  const Index n = spectrum.size();
  for (Index k = 0; k < n; ++k) {
    const double f = std::abs(bin_frequency(k, n, sample_rate));
    if (f < lo_hz || f > hi_hz) spectrum[k] = 0.0;
  }
  return ifft(spectrum).real();
}

CVector analytic_signal(const RVector& x) {
  CVector spectrum = fft(x.cast<Complex>());
  const Index n = spectrum.size();
  // Keep DC (and Nyquist for even n), double positive bins, drop negative ones.
  for (Index k = 1; k < n; ++k) {
    if (2 * k < n) {
      spectrum[k] *= 2.0;
    } else if (2 * k > n) {
      spectrum[k] = 0.0;
    }
  }
  return ifft(spectrum);
}

RVector power_spectrum(const CVector& x, Index nfft) {
  CVector padded = CVector::Zero(nfft);
  const Index n = std::min(nfft, x.size());
  padded.head(n) = x.head(n);
  return fft(padded).cwiseAbs2();
}

double occupied_bandwidth(const CVector& x, double fraction, Index nfft, double sample_rate) {
  const RVector p = power_spectrum(x, nfft);
  // Reorder bins from -fs/2 to +fs/2 and walk the cumulative distribution.
  RVector ordered(nfft);
  for (Index i = 0; i < nfft; ++i) ordered[i] = p[(i + nfft / 2 + (nfft % 2)) % nfft];
  const double total = ordered.sum();
  if (!(total > 0.0)) return 0.0;
  const double tail = 0.5 * (1.0 - fraction) * total;
  double acc = 0.0;
  Index lo = 0;
  while (lo < nfft && acc + ordered[lo] <= tail) acc += ordered[lo++];
  acc = 0.0;
  Index hi = nfft - 1;
  while (hi > 0 && acc + ordered[hi] <= tail) acc += ordered[hi--];
  return static_cast<double>(hi - lo + 1) * sample_rate / static_cast<double>(nfft);
}

}  // namespace hfc
