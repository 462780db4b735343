#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hfclass/channel.hpp"
#include "hfclass/common.hpp"
#include "hfclass/modem.hpp"
#include "hfclass/modes.hpp"

namespace hfc {

inline constexpr Index kVectorLength = 2048;
inline constexpr std::uint16_t kDatasetVersion = 1;
inline constexpr std::array<char, 4> kDatasetMagic{'H', 'F', 'D', 'S'};
inline constexpr std::size_t kDatasetHeaderBytes = 4 + 2 + 8 + 4 + 4;
inline constexpr std::size_t kRecordBytes = 1 + 1 + 4 + 4 + 8 + 8 * kVectorLength;

using CVectorF = Eigen::VectorXcf;

/// One labeled 2048-sample IQ vector with its generation metadata.
struct IqVector {
  CVectorF samples = CVectorF::Zero(kVectorLength);
  std::uint8_t label = 0;
  std::uint8_t scenario = 0;
  float snr_db = 0.0F;
  float freq_offset_hz = 0.0F;
  std::uint64_t seed = 0;

  /// Bitwise equality, so NaN payloads and signed zeros compare exactly.
  bool operator==(const IqVector& other) const;
};

struct Dataset {
  std::uint32_t sample_rate_hz = static_cast<std::uint32_t>(kSampleRate);
  std::vector<IqVector> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

enum class Split { train, validation };

struct GenerationConfig {
  std::vector<ModeId> modes;  // empty means all 18
  std::size_t per_mode_count = 625;
  double split_ratio = 0.8;  // train share of each mode's vectors
  double snr_min_db = kMinSnrDb;
  double snr_max_db = kMaxSnrDb;
  std::vector<Scenario> scenarios;  // drawn uniformly; empty means all six
  double max_freq_offset_hz = kMaxFreqOffsetHz;
  double waveform_seconds = 0.6;
  int window_retries = 10;
  double morse_wpm_min = 15.0;
  double morse_wpm_max = 30.0;
  double am_depth_min = 0.3;
  double am_depth_max = 0.9;
  std::uint64_t master_seed = 1;
  // Optional analog sources: 16-bit mono PCM files and binary PBM images.
  std::vector<std::string> audio_files;
  double audio_file_rate_hz = kSampleRate;
  std::vector<std::string> image_files;

  std::vector<ModeId> active_modes() const;
  std::vector<Scenario> active_scenarios() const;
  std::size_t train_per_mode() const;
  std::size_t validation_per_mode() const;
  std::size_t split_count(Split split) const;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

/// Config files are JSON objects whose keys match the GenerationConfig field
/// names; modes and scenarios are given by name. Unknown keys are rejected.
GenerationConfig config_from_json(const std::string& text);
std::string config_to_json(const GenerationConfig& config);
/// FNV-1a 64 over the canonical JSON form, as 16 hex digits.
std::string config_digest(const GenerationConfig& config);
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

/// Generates record `index` of a split. Depends only on (config, split, index).
IqVector generate_record(const GenerationConfig& config, Split split, std::size_t index,
                         const SourceLibrary* sources = nullptr);

/// All records of one split, computed by `workers` threads (0 picks the
/// HFCLASS_WORKERS environment variable, else 1). Output is independent of
/// the worker count.
Dataset generate_split(const GenerationConfig& config, Split split, unsigned workers = 0,
                       const SourceLibrary* sources = nullptr);

struct GenerateResult {
  std::filesystem::path train_path;
  std::filesystem::path validation_path;
  std::filesystem::path manifest_path;
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
  std::string digest;
};

/// Loads the audio and image files named in the config.
SourceLibrary load_sources(const GenerationConfig& config);

/// Writes train.hfds, validation.hfds and manifest.json into `out_dir`,
/// streaming records in index order. Without `sources`, files named in the
/// config are loaded.
GenerateResult generate(const GenerationConfig& config, const std::filesystem::path& out_dir, unsigned workers = 0,
                        const SourceLibrary* sources = nullptr);

/// Worker count from HFCLASS_WORKERS, defaulting to 1.
unsigned default_workers();

std::vector<std::uint8_t> serialize(const Dataset& dataset);
void append_record(std::vector<std::uint8_t>& out, const IqVector& record);
std::vector<std::uint8_t> serialize_header(std::uint64_t record_count, std::uint32_t sample_rate_hz);

/// Throws FormatError with the byte offset of the first problem.
Dataset load(std::span<const std::uint8_t> bytes);
Dataset load_file(const std::filesystem::path& path);
void save_file(const Dataset& dataset, const std::filesystem::path& path);

/// Record indices grouped into batches after a Fisher-Yates shuffle seeded by
/// `shuffle_seed`. The last batch may be short.
std::vector<std::vector<std::size_t>> split_iter(std::size_t record_count, std::size_t batch_size,
                                                 std::uint64_t shuffle_seed);
std::vector<std::vector<std::size_t>> split_iter(const Dataset& dataset, std::size_t batch_size,
                                                 std::uint64_t shuffle_seed);

/// Manifest written next to the data files.
struct DatasetManifest {
  std::uint16_t format_version = kDatasetVersion;
  std::vector<std::string> mode_names;  // label order
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
  std::string config_digest;
  std::string config_json;
};

DatasetManifest make_manifest(const GenerationConfig& config);
std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);

/// Records per label.
std::array<std::size_t, kModeCount> label_histogram(const Dataset& dataset);

}  // namespace hfc
