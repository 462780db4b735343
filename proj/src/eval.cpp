#include "hfclass/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hfclass/nn/train.hpp"

namespace hfc {

int snr_bin(double snr_db) {
  const int bin = static_cast<int>(std::floor((snr_db - kMinSnrDb) / kSnrBinWidthDb));
  return std::clamp(bin, 0, kSnrBins - 1);
}

double snr_bin_center(int bin) { return kMinSnrDb + (bin + 0.5) * kSnrBinWidthDb; }

EvalReport evaluate_predictions(std::span<const int> labels, std::span<const int> predictions,
                                std::span<const double> snr_db, int classes) {
  if (labels.empty()) throw std::invalid_argument("cannot evaluate an empty dataset");
  if (labels.size() != predictions.size() || labels.size() != snr_db.size()) {
    throw std::invalid_argument("labels, predictions and SNRs differ in length");
  }
  EvalReport r;
  r.total = labels.size();
  r.confusion = ConfusionMatrix::Zero(classes, classes);
  std::vector<std::size_t> bin_correct(kSnrBins, 0);
  r.per_snr_bins.resize(kSnrBins);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = predictions[i];
    if (y < 0 || y >= classes || p < 0 || p >= classes) {
      throw std::invalid_argument("class index out of range at record " + std::to_string(i));
    }
    ++r.confusion(y, p);
    const int b = snr_bin(snr_db[i]);
    ++r.per_snr_bins[static_cast<std::size_t>(b)].count;
    if (y == p) ++bin_correct[static_cast<std::size_t>(b)];
  }
  for (int b = 0; b < kSnrBins; ++b) {
    auto& s = r.per_snr_bins[static_cast<std::size_t>(b)];
    s.lo_db = kMinSnrDb + b * kSnrBinWidthDb;
    s.hi_db = s.lo_db + kSnrBinWidthDb;
    s.center_db = snr_bin_center(b);
    if (s.count) s.accuracy = static_cast<double>(bin_correct[static_cast<std::size_t>(b)]) / static_cast<double>(s.count);
  }
  r.overall_accuracy = static_cast<double>(r.confusion.trace()) / static_cast<double>(r.total);
  r.per_mode_recall.assign(static_cast<std::size_t>(classes), 0.0);
  for (int c = 0; c < classes; ++c) {
    const long long row = r.confusion.row(c).sum();
    if (row) r.per_mode_recall[static_cast<std::size_t>(c)] = static_cast<double>(r.confusion(c, c)) / static_cast<double>(row);
  }
  return r;
}

template <typename Scalar>
EvalReport evaluate(nn::Model<Scalar>& model, const Dataset& data, std::size_t batch_size) {
  if (data.empty()) throw std::invalid_argument("cannot evaluate an empty dataset");
  const auto result = nn::evaluate_loss(model, data, batch_size);
  std::vector<int> labels;
  std::vector<double> snr;
  for (const auto& rec : data.records) {
    labels.push_back(rec.label);
    snr.push_back(rec.snr_db);
  }
  return evaluate_predictions(labels, result.predictions, snr, model.classes());
}

SnrCurve accuracy_over_snr(const EvalReport& report) {
  SnrCurve curve;
  for (int b = 0; b < static_cast<int>(report.per_snr_bins.size()); ++b) {
    const auto& s = report.per_snr_bins[static_cast<std::size_t>(b)];
    if (s.count == 0) {
      curve.empty_bins.push_back(b);
    } else {
      curve.rows.push_back({s.center_db, s.accuracy, s.count});
    }
  }
  return curve;
}

RenderedReport render_report(const EvalReport& report, const DatasetManifest& manifest) {
  const auto classes = static_cast<std::size_t>(report.confusion.rows());
  if (manifest.mode_names.size() != classes) {
    throw std::invalid_argument("manifest lists " + std::to_string(manifest.mode_names.size()) +
                                " modes but the report has " + std::to_string(classes) + " classes");
  }
  RenderedReport out;
  std::ostringstream c;
  c << "true\\predicted";
  for (const auto& name : manifest.mode_names) c << ',' << name;
  c << '\n';
  for (std::size_t i = 0; i < classes; ++i) {
    c << manifest.mode_names[i];
    for (std::size_t j = 0; j < classes; ++j) c << ',' << report.confusion(static_cast<Index>(i), static_cast<Index>(j));
    c << '\n';
  }
  out.confusion_csv = c.str();

  const SnrCurve curve = accuracy_over_snr(report);
  std::ostringstream s;
  s << "snr_bin_center_db,accuracy,count\n";
  char buf[128];
  for (const auto& row : curve.rows) {
    std::snprintf(buf, sizeof buf, "%.1f,%.6f,%zu\n", row.center_db, row.accuracy, row.count);
    s << buf;
  }
  out.snr_csv = s.str();

  std::ostringstream m;
  std::snprintf(buf, sizeof buf, "overall accuracy: %.1f%% (%lld of %zu)\n", 100.0 * report.overall_accuracy,
                static_cast<long long>(report.confusion.trace()), report.total);
  m << buf;
  if (!manifest.config_digest.empty()) m << "dataset config digest: " << manifest.config_digest << '\n';
  m << "accuracy by SNR:\n";
  for (const auto& row : curve.rows) {
    std::snprintf(buf, sizeof buf, "  %+6.1f dB  %5.1f%%  (%zu)\n", row.center_db, 100.0 * row.accuracy, row.count);
    m << buf;
  }
  for (int b : curve.empty_bins) {
    std::snprintf(buf, sizeof buf, "  %+6.1f dB  no records\n", snr_bin_center(b));
    m << buf;
  }
  m << "recall by mode:\n";
  for (std::size_t i = 0; i < classes; ++i) {
    const long long n = report.confusion.row(static_cast<Index>(i)).sum();
    if (n == 0) continue;
    std::snprintf(buf, sizeof buf, "  %-14s %5.1f%%  (%lld)\n", manifest.mode_names[i].c_str(),
                  100.0 * report.per_mode_recall[i], n);
    m << buf;
  }
  out.summary = m.str();
  return out;
}

ConfusionMatrix parse_confusion_csv(const std::string& text, std::vector<std::string>* names) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty confusion CSV");
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    std::getline(h, cell, ',');
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  const auto n = static_cast<Index>(header.size());
  ConfusionMatrix m = ConfusionMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::invalid_argument("confusion CSV has too few rows");
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    if (cell != header[static_cast<std::size_t>(i)]) {
      throw std::invalid_argument("row label '" + cell + "' does not match column '" + header[static_cast<std::size_t>(i)] + "'");
    }
    for (Index j = 0; j < n; ++j) {
      if (!std::getline(row, cell, ',')) throw std::invalid_argument("confusion CSV row too short");
      m(i, j) = std::stoll(cell);
    }
  }
  if (names) *names = std::move(header);
  return m;
}

void write_report(const RenderedReport& rendered, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << text;
  };
  write("confusion.csv", rendered.confusion_csv);
  write("snr_curve.csv", rendered.snr_csv);
  write("summary.txt", rendered.summary);
}

template EvalReport evaluate<float>(nn::Model<float>&, const Dataset&, std::size_t);
template EvalReport evaluate<double>(nn::Model<double>&, const Dataset&, std::size_t);

}  // namespace hfc
