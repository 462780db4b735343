#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hfclass/dataset.hpp"
#include "hfclass/nn/model.hpp"

namespace hfc {

inline constexpr int kSnrBins = 7;
inline constexpr double kSnrBinWidthDb = 5.0;

/// Bin index of an SNR: bins are [-10, -5), [-5, 0), ..., [20, 25); the upper
/// limit of 25 dB falls into the last bin.
int snr_bin(double snr_db);
double snr_bin_center(int bin);

using ConfusionMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

struct SnrBinStats {
  double lo_db = 0.0;
  double hi_db = 0.0;
  double center_db = 0.0;
  double accuracy = 0.0;  // 0 when count is 0
  std::size_t count = 0;
};

struct EvalReport {
  double overall_accuracy = 0.0;
  std::size_t total = 0;
  std::vector<SnrBinStats> per_snr_bins;  // always kSnrBins entries
  ConfusionMatrix confusion;              // rows true, columns predicted
  std::vector<double> per_mode_recall;    // 0 for classes without records
};

/// Report from explicit labels, predictions and SNRs. Throws on empty input
/// or out-of-range classes.
EvalReport evaluate_predictions(std::span<const int> labels, std::span<const int> predictions,
                                std::span<const double> snr_db, int classes = kModeCount);

/// Infer-mode evaluation; predictions are row argmaxes with ties to the
/// lowest class index.
template <typename Scalar>
EvalReport evaluate(nn::Model<Scalar>& model, const Dataset& data, std::size_t batch_size = 256);

struct SnrCurveRow {
  double center_db;
  double accuracy;
  std::size_t count;
};

struct SnrCurve {
  std::vector<SnrCurveRow> rows;  // populated bins only
  std::vector<int> empty_bins;    // indices of omitted bins
};

SnrCurve accuracy_over_snr(const EvalReport& report);

struct RenderedReport {
  std::string confusion_csv;
  std::string snr_csv;
  std::string summary;
};

/// Throws std::invalid_argument when the manifest's mode list does not match
/// the confusion matrix size.
RenderedReport render_report(const EvalReport& report, const DatasetManifest& manifest);

/// Parses a rendered confusion CSV back into counts, optionally returning the
/// header names.
ConfusionMatrix parse_confusion_csv(const std::string& text, std::vector<std::string>* names = nullptr);

/// Writes confusion.csv, snr_curve.csv and summary.txt, creating `dir`.
void write_report(const RenderedReport& rendered, const std::filesystem::path& dir);

}  // namespace hfc
