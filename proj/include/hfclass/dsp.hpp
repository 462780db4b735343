#pragma once

#include "hfclass/common.hpp"

namespace hfc {

CVector fft(const CVector& x);
/// Inverse transform, scaled so that ifft(fft(x)) == x.
CVector ifft(const CVector& x);

/// Signed frequency of bin k in an n-point transform.
double bin_frequency(Index k, Index n, double sample_rate = kSampleRate);

/// Zero-phase brick-wall band-pass (in the DFT domain) keeping lo_hz <= |f| <= hi_hz.
RVector band_limit(const RVector& x, double lo_hz, double hi_hz, double sample_rate = kSampleRate);

/// Analytic signal of a real sequence: negative-frequency content removed,
/// real part equal to the input.
CVector analytic_signal(const RVector& x);

/// |X[k]|^2 of x zero-padded (or truncated) to nfft points.
RVector power_spectrum(const CVector& x, Index nfft);

/// Width of the band holding `fraction` of the power, with equal tails cut
/// from both spectral edges.
double occupied_bandwidth(const CVector& x, double fraction = 0.99, Index nfft = 1 << 15,
                          double sample_rate = kSampleRate);

}  // namespace hfc
