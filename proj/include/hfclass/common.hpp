#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace hfc {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Baseband sample rate shared by every waveform in the pipeline.
inline constexpr double kSampleRate = 6000.0;

/// Complex baseband samples at a fixed rate.
struct IqWaveform {
  CVector samples;
  double sample_rate_hz = kSampleRate;

  Index size() const { return samples.size(); }
};

/// Error raised while decoding one of the binary file formats. Carries the
/// byte offset at which decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

template <typename Derived>
double mean_power(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) return 0.0;
  return static_cast<double>(x.squaredNorm()) / static_cast<double>(x.size());
}

/// Scales `x` to unit mean power. Returns false (leaving `x` untouched) when
/// the input carries no energy.
bool normalize_power(CVector& x);

}  // namespace hfc
