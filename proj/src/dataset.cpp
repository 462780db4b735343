#include "hfclass/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "hfclass/rng.hpp"

namespace hfc {

static_assert(std::endian::native == std::endian::little, "dataset I/O assumes a little-endian host");

using nlohmann::json;

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

std::uint64_t split_stream(Split split) { return split == Split::train ? 1 : 2; }

bool all_zero(const CVector& x) { return (x.array() == Complex(0.0, 0.0)).all(); }

}  // namespace

bool IqVector::operator==(const IqVector& other) const {
  if (label != other.label || scenario != other.scenario || seed != other.seed) return false;
  if (std::bit_cast<std::uint32_t>(snr_db) != std::bit_cast<std::uint32_t>(other.snr_db)) return false;
  if (std::bit_cast<std::uint32_t>(freq_offset_hz) != std::bit_cast<std::uint32_t>(other.freq_offset_hz)) return false;
  if (samples.size() != other.samples.size()) return false;
  return std::memcmp(samples.data(), other.samples.data(), sizeof(std::complex<float>) * samples.size()) == 0;
}

// --- Config ------------------------------------------------------------------

std::vector<ModeId> GenerationConfig::active_modes() const {
  if (!modes.empty()) return modes;
  std::vector<ModeId> all;
  for (const auto& m : all_modes()) all.push_back(m.id);
  return all;
}

std::vector<Scenario> GenerationConfig::active_scenarios() const {
  if (!scenarios.empty()) return scenarios;
  std::vector<Scenario> all;
  for (const auto& s : all_scenarios()) all.push_back(s.name);
  return all;
}

std::size_t GenerationConfig::train_per_mode() const {
  return static_cast<std::size_t>(std::llround(static_cast<double>(per_mode_count) * split_ratio));
}

std::size_t GenerationConfig::validation_per_mode() const { return per_mode_count - train_per_mode(); }

std::size_t GenerationConfig::split_count(Split split) const {
  return active_modes().size() * (split == Split::train ? train_per_mode() : validation_per_mode());
}

void GenerationConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("config key '" + key + "': " + why);
  };
  if (per_mode_count == 0) fail("per_mode_count", "must be positive");
  if (!(split_ratio > 0.0 && split_ratio <= 1.0)) fail("split_ratio", "must lie in (0, 1]");
  if (!(snr_min_db >= kMinSnrDb && snr_max_db <= kMaxSnrDb && snr_min_db <= snr_max_db)) {
    fail("snr_min_db/snr_max_db", "must satisfy -10 <= min <= max <= 25");
  }
  if (!(max_freq_offset_hz >= 0.0 && max_freq_offset_hz <= kMaxFreqOffsetHz)) {
    fail("max_freq_offset_hz", "must lie in [0, 250]");
  }
  if (!(waveform_seconds * kSampleRate >= 1.5 * kVectorLength)) {
    fail("waveform_seconds", "waveform must hold at least 1.5 vector lengths (0.512 s)");
  }
  if (window_retries < 0) fail("window_retries", "must be non-negative");
  if (!(morse_wpm_min >= 5.0 && morse_wpm_max <= 60.0 && morse_wpm_min <= morse_wpm_max)) {
    fail("morse_wpm_min/morse_wpm_max", "must satisfy 5 <= min <= max <= 60");
  }
  if (!(am_depth_min >= 0.3 && am_depth_max <= 0.9 && am_depth_min <= am_depth_max)) {
    fail("am_depth_min/am_depth_max", "must satisfy 0.3 <= min <= max <= 0.9");
  }
  if (!(audio_file_rate_hz > 0.0)) fail("audio_file_rate_hz", "must be positive");
  auto ms = active_modes();
  std::sort(ms.begin(), ms.end());
  if (std::adjacent_find(ms.begin(), ms.end()) != ms.end()) fail("modes", "duplicate mode");
}

namespace {

json config_json(const GenerationConfig& c) {
  json modes = json::array();
  for (ModeId m : c.active_modes()) modes.push_back(std::string(mode_spec(m).name));
  json scenarios = json::array();
  for (Scenario s : c.active_scenarios()) scenarios.push_back(std::string(scenario_name(s)));
  return json{{"modes", modes},
              {"per_mode_count", c.per_mode_count},
              {"split_ratio", c.split_ratio},
              {"snr_min_db", c.snr_min_db},
              {"snr_max_db", c.snr_max_db},
              {"scenarios", scenarios},
              {"max_freq_offset_hz", c.max_freq_offset_hz},
              {"waveform_seconds", c.waveform_seconds},
              {"window_retries", c.window_retries},
              {"morse_wpm_min", c.morse_wpm_min},
              {"morse_wpm_max", c.morse_wpm_max},
              {"am_depth_min", c.am_depth_min},
              {"am_depth_max", c.am_depth_max},
              {"master_seed", c.master_seed},
              {"audio_files", c.audio_files},
              {"audio_file_rate_hz", c.audio_file_rate_hz},
              {"image_files", c.image_files}};
}

}  // namespace

GenerationConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  GenerationConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "modes") {
        c.modes.clear();
        for (const auto& name : value) {
          const auto id = mode_from_name(name.get<std::string>());
          if (!id) throw std::invalid_argument("unknown mode '" + name.get<std::string>() + "'");
          c.modes.push_back(*id);
        }
      } else if (key == "scenarios") {
        c.scenarios.clear();
        for (const auto& name : value) {
          const auto s = scenario_from_name(name.get<std::string>());
          if (!s) throw std::invalid_argument("unknown scenario '" + name.get<std::string>() + "'");
          c.scenarios.push_back(*s);
        }
      } else if (key == "per_mode_count") {
        c.per_mode_count = value.get<std::size_t>();
      } else if (key == "split_ratio") {
        c.split_ratio = value.get<double>();
      } else if (key == "snr_min_db") {
        c.snr_min_db = value.get<double>();
      } else if (key == "snr_max_db") {
        c.snr_max_db = value.get<double>();
      } else if (key == "max_freq_offset_hz") {
        c.max_freq_offset_hz = value.get<double>();
      } else if (key == "waveform_seconds") {
        c.waveform_seconds = value.get<double>();
      } else if (key == "window_retries") {
        c.window_retries = value.get<int>();
      } else if (key == "morse_wpm_min") {
        c.morse_wpm_min = value.get<double>();
      } else if (key == "morse_wpm_max") {
        c.morse_wpm_max = value.get<double>();
      } else if (key == "am_depth_min") {
        c.am_depth_min = value.get<double>();
      } else if (key == "am_depth_max") {
        c.am_depth_max = value.get<double>();
      } else if (key == "master_seed") {
        c.master_seed = value.get<std::uint64_t>();
      } else if (key == "audio_files") {
        c.audio_files = value.get<std::vector<std::string>>();
      } else if (key == "audio_file_rate_hz") {
        c.audio_file_rate_hz = value.get<double>();
      } else if (key == "image_files") {
        c.image_files = value.get<std::vector<std::string>>();
      } else {
        throw std::invalid_argument("unknown key");
      }
    } catch (const json::exception& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

std::string config_to_json(const GenerationConfig& config) { return config_json(config).dump(2); }

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_digest(const GenerationConfig& config) {
  const std::string canonical = config_json(config).dump();
  const std::uint64_t h =
      fnv1a64({reinterpret_cast<const std::uint8_t*>(canonical.data()), canonical.size()});
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- Generation --------------------------------------------------------------

IqVector generate_record(const GenerationConfig& config, Split split, std::size_t index,
                         const SourceLibrary* sources) {
  const auto modes = config.active_modes();
  const auto scenarios = config.active_scenarios();
  const std::uint64_t seed = split_seed(split_seed(config.master_seed, split_stream(split)), index);
  const ModeSpec& mode = mode_spec(modes[index % modes.size()]);

  Rng rng(seed);
  ChannelConfig channel;
  channel.snr_db = rng.uniform(config.snr_min_db, config.snr_max_db);
  channel.scenario = scenario_preset(scenarios[rng.below(scenarios.size())]);
  channel.freq_offset_hz = rng.uniform(-config.max_freq_offset_hz, config.max_freq_offset_hz);
  channel.phase_offset_rad = rng.uniform(0.0, kTwoPi);
  channel.seed = split_seed(seed, 2);

  ModulateOptions options;
  options.payload.region = split == Split::train ? encoding::TextRegion::train : encoding::TextRegion::validation;
  options.payload.morse_wpm_min = config.morse_wpm_min;
  options.payload.morse_wpm_max = config.morse_wpm_max;
  options.am_depth_min = config.am_depth_min;
  options.am_depth_max = config.am_depth_max;
  options.sources = sources;

  const IqWaveform wave = modulate(mode, config.waveform_seconds, split_seed(seed, 1), options);
  const ImpairTrace trace = impair_traced(wave, channel);

  const Index n = trace.output.size();
  Index offset = 0;
  for (int attempt = 0; attempt <= config.window_retries; ++attempt) {
    offset = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - kVectorLength + 1)));
    if (!all_zero(trace.faded.samples.segment(offset, kVectorLength))) break;
  }
  CVector window = trace.output.samples.segment(offset, kVectorLength);
  normalize_power(window);

  IqVector record;
  record.samples = window.cast<std::complex<float>>();
  record.label = static_cast<std::uint8_t>(label_of(mode.id));
  record.scenario = static_cast<std::uint8_t>(channel.scenario.name);
  record.snr_db = static_cast<float>(channel.snr_db);
  record.freq_offset_hz = static_cast<float>(channel.freq_offset_hz);
  record.seed = seed;
  return record;
}

unsigned default_workers() {
  if (const char* env = std::getenv("HFCLASS_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 256) return static_cast<unsigned>(v);
  }
  return 1;
}

namespace {

// Fills records[begin, end) using `workers` threads; each index is
// independent so the assignment of indices to threads does not matter.
void generate_range(const GenerationConfig& config, Split split, std::size_t begin, std::size_t end,
                    unsigned workers, const SourceLibrary* sources, std::vector<IqVector>& records) {
  const std::size_t count = end - begin;
  records.resize(count);
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) records[i] = generate_record(config, split, begin + i, sources);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) {
          records[i] = generate_record(config, split, begin + i, sources);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

constexpr std::size_t kChunk = 512;

}  // namespace

Dataset generate_split(const GenerationConfig& config, Split split, unsigned workers, const SourceLibrary* sources) {
  config.validate();
  if (workers == 0) workers = default_workers();
  Dataset out;
  const std::size_t total = config.split_count(split);
  out.records.reserve(total);
  std::vector<IqVector> chunk;
  for (std::size_t begin = 0; begin < total; begin += kChunk) {
    generate_range(config, split, begin, std::min(total, begin + kChunk), workers, sources, chunk);
    std::move(chunk.begin(), chunk.end(), std::back_inserter(out.records));
  }
  return out;
}

SourceLibrary load_sources(const GenerationConfig& config) {
  SourceLibrary lib;
  for (const auto& f : config.audio_files) lib.audio.push_back(load_pcm16(f, config.audio_file_rate_hz));
  for (const auto& f : config.image_files) lib.images.push_back(load_pbm(f));
  return lib;
}

GenerateResult generate(const GenerationConfig& config, const std::filesystem::path& out_dir, unsigned workers,
                        const SourceLibrary* sources) {
  config.validate();
  SourceLibrary loaded;
  if (!sources && (!config.audio_files.empty() || !config.image_files.empty())) {
    loaded = load_sources(config);
    sources = &loaded;
  }
  if (workers == 0) workers = default_workers();
  std::filesystem::create_directories(out_dir);
  GenerateResult result;
  result.train_path = out_dir / "train.hfds";
  result.validation_path = out_dir / "validation.hfds";
  result.manifest_path = out_dir / "manifest.json";
  result.train_count = config.split_count(Split::train);
  result.validation_count = config.split_count(Split::validation);
  result.digest = config_digest(config);

  for (Split split : {Split::train, Split::validation}) {
    const auto& path = split == Split::train ? result.train_path : result.validation_path;
    const std::size_t total = config.split_count(split);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    auto header = serialize_header(total, static_cast<std::uint32_t>(kSampleRate));
    f.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    std::vector<IqVector> chunk;
    std::vector<std::uint8_t> buf;
    for (std::size_t begin = 0; begin < total; begin += kChunk) {
      generate_range(config, split, begin, std::min(total, begin + kChunk), workers, sources, chunk);
      buf.clear();
      for (const auto& r : chunk) append_record(buf, r);
      f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    if (!f) throw std::runtime_error("write failed for " + path.string());
  }

  std::ofstream m(result.manifest_path, std::ios::trunc);
  if (!m) throw std::runtime_error("cannot write " + result.manifest_path.string());
  m << manifest_to_json(make_manifest(config)) << '\n';
  return result;
}

// --- Binary format -----------------------------------------------------------

std::vector<std::uint8_t> serialize_header(std::uint64_t record_count, std::uint32_t sample_rate_hz) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kDatasetMagic.begin(), kDatasetMagic.end());
  put(out, kDatasetVersion);
  put(out, record_count);
  put(out, sample_rate_hz);
  put(out, static_cast<std::uint32_t>(kVectorLength));
  return out;
}

void append_record(std::vector<std::uint8_t>& out, const IqVector& r) {
  if (r.samples.size() != kVectorLength) {
    throw std::invalid_argument("record holds " + std::to_string(r.samples.size()) + " samples, expected 2048");
  }
  if (r.label >= kModeCount) throw std::invalid_argument("record label out of range");
  if (r.scenario >= kScenarioCount) throw std::invalid_argument("record scenario out of range");
  out.reserve(out.size() + kRecordBytes);
  put(out, r.label);
  put(out, r.scenario);
  put(out, r.snr_db);
  put(out, r.freq_offset_hz);
  put(out, r.seed);
  const auto* p = reinterpret_cast<const std::uint8_t*>(r.samples.data());
  out.insert(out.end(), p, p + 8 * kVectorLength);
}

std::vector<std::uint8_t> serialize(const Dataset& dataset) {
  auto out = serialize_header(dataset.size(), dataset.sample_rate_hz);
  out.reserve(out.size() + dataset.size() * kRecordBytes);
  for (const auto& r : dataset.records) append_record(out, r);
  return out;
}

Dataset load(std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < kDatasetMagic.size(); ++i) {
    if (i >= bytes.size()) throw FormatError("truncated dataset header", i);
    if (bytes[i] != static_cast<std::uint8_t>(kDatasetMagic[i])) throw FormatError("bad dataset magic", i);
  }
  if (bytes.size() < kDatasetHeaderBytes) throw FormatError("truncated dataset header", bytes.size());
  std::size_t pos = 4;
  const auto version = get<std::uint16_t>(bytes, pos);
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version), 4);
  }
  const auto count = get<std::uint64_t>(bytes, pos);
  Dataset out;
  out.sample_rate_hz = get<std::uint32_t>(bytes, pos);
  const std::size_t length_pos = pos;
  const auto length = get<std::uint32_t>(bytes, pos);
  if (length != kVectorLength) {
    throw FormatError("vector length " + std::to_string(length) + " differs from 2048", length_pos);
  }
  const std::size_t available = (bytes.size() - kDatasetHeaderBytes) / kRecordBytes;
  if (count > available) {
    throw FormatError("truncated record " + std::to_string(available) + " of " + std::to_string(count),
                      bytes.size());
  }
  if (bytes.size() != kDatasetHeaderBytes + count * kRecordBytes) {
    throw FormatError("trailing bytes after last record", kDatasetHeaderBytes + count * kRecordBytes);
  }
  out.records.resize(count);
  for (auto& r : out.records) {
    const std::size_t start = pos;
    r.label = get<std::uint8_t>(bytes, pos);
    r.scenario = get<std::uint8_t>(bytes, pos);
    if (r.label >= kModeCount) throw FormatError("label out of range", start);
    if (r.scenario >= kScenarioCount) throw FormatError("scenario out of range", start + 1);
    r.snr_db = get<float>(bytes, pos);
    r.freq_offset_hz = get<float>(bytes, pos);
    r.seed = get<std::uint64_t>(bytes, pos);
    std::memcpy(r.samples.data(), bytes.data() + pos, 8 * kVectorLength);
    pos += 8 * kVectorLength;
  }
  return out;
}

Dataset load_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open dataset " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return load(bytes);
}

void save_file(const Dataset& dataset, const std::filesystem::path& path) {
  const auto bytes = serialize(dataset);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

// --- Batching ----------------------------------------------------------------

std::vector<std::vector<std::size_t>> split_iter(std::size_t record_count, std::size_t batch_size,
                                                 std::uint64_t shuffle_seed) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
  std::vector<std::size_t> order(record_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(shuffle_seed);
  for (std::size_t i = record_count; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t begin = 0; begin < record_count; begin += batch_size) {
    const std::size_t end = std::min(record_count, begin + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<std::vector<std::size_t>> split_iter(const Dataset& dataset, std::size_t batch_size,
                                                 std::uint64_t shuffle_seed) {
  return split_iter(dataset.size(), batch_size, shuffle_seed);
}

// --- Manifest ----------------------------------------------------------------

DatasetManifest make_manifest(const GenerationConfig& config) {
  DatasetManifest m;
  for (const auto& mode : all_modes()) m.mode_names.emplace_back(mode.name);
  m.train_count = config.split_count(Split::train);
  m.validation_count = config.split_count(Split::validation);
  m.config_digest = config_digest(config);
  m.config_json = config_json(config).dump();
  return m;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json j{{"format_version", m.format_version},
         {"sample_rate_hz", static_cast<int>(kSampleRate)},
         {"vector_length", kVectorLength},
         {"mode_names", m.mode_names},
         {"counts", {{"train", m.train_count}, {"validation", m.validation_count}}},
         {"config_digest", m.config_digest},
         {"config", m.config_json.empty() ? json::object() : json::parse(m.config_json)}};
  return j.dump(2);
}

DatasetManifest manifest_from_json(const std::string& text) {
  DatasetManifest m;
  try {
    const json j = json::parse(text);
    m.format_version = j.at("format_version").get<std::uint16_t>();
    m.mode_names = j.at("mode_names").get<std::vector<std::string>>();
    m.train_count = j.at("counts").at("train").get<std::size_t>();
    m.validation_count = j.at("counts").at("validation").get<std::size_t>();
    m.config_digest = j.at("config_digest").get<std::string>();
    if (j.contains("config")) m.config_json = j.at("config").dump();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::array<std::size_t, kModeCount> label_histogram(const Dataset& dataset) {
  std::array<std::size_t, kModeCount> h{};
  for (const auto& r : dataset.records) ++h.at(r.label);
  return h;
}

}  // namespace hfc
