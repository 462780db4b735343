#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "hfclass/dataset.hpp"
#include "hfclass/rng.hpp"
#include "oracles.hpp"

using namespace hfc;
namespace fs = std::filesystem;

namespace {

IqVector random_record(Rng& rng) {
  IqVector r;
  for (auto& v : r.samples) v = {static_cast<float>(rng.normal()), static_cast<float>(rng.normal())};
  r.label = static_cast<std::uint8_t>(rng.below(kModeCount));
  r.scenario = static_cast<std::uint8_t>(rng.below(kScenarioCount));
  r.snr_db = static_cast<float>(rng.uniform(-10.0, 25.0));
  r.freq_offset_hz = static_cast<float>(rng.uniform(-250.0, 250.0));
  r.seed = rng.next();
  return r;
}

GenerationConfig small_config() {
  GenerationConfig c;
  c.modes = {ModeId::morse, ModeId::psk31, ModeId::rtty45, ModeId::am};
  c.per_mode_count = 10;
  c.master_seed = 5;
  return c;
}

std::vector<std::uint8_t> file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hfclass_dataset_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("record layout constants") {
  CHECK(kDatasetHeaderBytes == 22);
  CHECK(kRecordBytes == 16402);
  const auto header = serialize_header(3, 6000);
  CHECK(header.size() == 22);
  CHECK(std::memcmp(header.data(), "HFDS", 4) == 0);
  CHECK(header[4] == 1);
  CHECK(header[5] == 0);
  CHECK(header[6] == 3);
  CHECK(header[14] == 0x70);  // 6000 = 0x1770
  CHECK(header[15] == 0x17);
  CHECK(header[18] == 0x00);  // 2048 = 0x0800
  CHECK(header[19] == 0x08);
}

TEST_CASE("serialize and load round trip bit-exactly") {
  Rng rng(3);
  Dataset d;
  for (int i = 0; i < 1000; ++i) d.records.push_back(random_record(rng));
  d.records[7].samples[3] = {std::numeric_limits<float>::quiet_NaN(), -0.0F};
  const auto bytes = serialize(d);
  CHECK(bytes.size() == kDatasetHeaderBytes + 1000 * kRecordBytes);
  const Dataset back = load(bytes);
  REQUIRE(back.size() == 1000);
  CHECK(back.records == d.records);
  CHECK(serialize(back) == bytes);
}

TEST_CASE("empty dataset is header only") {
  const auto bytes = serialize(Dataset{});
  CHECK(bytes.size() == kDatasetHeaderBytes);
  CHECK(load(bytes).empty());
}

TEST_CASE("malformed files report byte offsets") {
  Rng rng(4);
  Dataset d;
  for (int i = 0; i < 3; ++i) d.records.push_back(random_record(rng));
  const auto bytes = serialize(d);

  auto truncated = bytes;
  truncated.resize(kDatasetHeaderBytes + kRecordBytes + 100);
  try {
    load(truncated);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == truncated.size());
    CHECK(std::string(e.what()).find(std::to_string(truncated.size())) != std::string::npos);
  }

  auto bad_magic = bytes;
  bad_magic[2] = 'X';
  try {
    load(bad_magic);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 2);
  }

  auto bad_version = bytes;
  bad_version[4] = 9;
  try {
    load(bad_version);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 4);
  }

  auto bad_label = bytes;
  bad_label[kDatasetHeaderBytes + kRecordBytes] = 18;
  CHECK_THROWS_AS(load(bad_label), FormatError);
}

TEST_CASE("split_iter batches and shuffles") {
  const auto batches = split_iter(1800, 128, 1);
  REQUIRE(batches.size() == 15);
  for (std::size_t i = 0; i < 14; ++i) CHECK(batches[i].size() == 128);
  CHECK(batches.back().size() == 8);

  auto flatten = [](const std::vector<std::vector<std::size_t>>& b) {
    std::vector<std::size_t> out;
    for (const auto& x : b) out.insert(out.end(), x.begin(), x.end());
    return out;
  };
  const auto a = flatten(batches);
  const auto b = flatten(split_iter(1800, 128, 2));
  CHECK(a != b);
  CHECK(a == flatten(split_iter(1800, 128, 1)));
  auto sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  CHECK(sa == sb);
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i] == i);
  CHECK_THROWS(split_iter(10, 0, 1));
}

TEST_CASE("batch labels cover the dataset") {
  Rng rng(6);
  Dataset d;
  for (int i = 0; i < 300; ++i) d.records.push_back(random_record(rng));
  std::multiset<int> expected, seen;
  for (const auto& r : d.records) expected.insert(r.label);
  for (const auto& batch : split_iter(d, 64, 9)) {
    for (auto i : batch) seen.insert(d.records[i].label);
  }
  CHECK(seen == expected);
}

TEST_CASE("config JSON round trip and validation") {
  auto c = small_config();
  c.scenarios = {Scenario::none, Scenario::flutter};
  c.snr_min_db = 10.0;
  const auto text = config_to_json(c);
  const auto back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(config_digest(back) == config_digest(c));
  CHECK(config_digest(back).size() == 16);
  c.master_seed = 6;
  CHECK(config_digest(back) != config_digest(c));
  CHECK_THROWS(config_from_json(R"({"per_mode_count": 5, "colour": 1})"));
  CHECK_THROWS(config_from_json(R"({"modes": ["psk32"]})"));
  CHECK_THROWS(config_from_json(R"({"per_mode_count": 0})"));
  CHECK_THROWS(config_from_json(R"({"snr_min_db": -20})"));
  CHECK_THROWS(config_from_json("not json"));
  const auto minimal = config_from_json(R"({"modes": ["usb", "fax"], "per_mode_count": 10})");
  CHECK(minimal.active_modes() == std::vector<ModeId>{ModeId::usb, ModeId::fax});
  CHECK(minimal.split_count(Split::train) + minimal.split_count(Split::validation) == 20);
}

TEST_CASE("records depend only on seed and index") {
  const auto c = small_config();
  const auto serial = generate_split(c, Split::train, 1);
  const auto parallel = generate_split(c, Split::train, 3);
  CHECK(serial.records == parallel.records);
  CHECK(generate_record(c, Split::train, 5) == serial.records[5]);
  auto bigger = c;
  bigger.per_mode_count = 40;
  CHECK(generate_record(bigger, Split::train, 5) == serial.records[5]);
  CHECK(!(generate_record(c, Split::validation, 5) == serial.records[5]));
}

TEST_CASE("generated records are normalized, finite and balanced") {
  auto c = small_config();
  c.per_mode_count = 25;
  const auto d = generate_split(c, Split::train);
  REQUIRE(d.size() == 80);
  for (const auto& r : d.records) {
    CHECK(r.samples.allFinite());
    const double p = r.samples.cast<std::complex<double>>().squaredNorm() / kVectorLength;
    CHECK(std::abs(p - 1.0) < 1e-5);
    CHECK(r.snr_db >= -10.0F);
    CHECK(r.snr_db <= 25.0F);
    CHECK(std::abs(r.freq_offset_hz) <= 250.0F);
  }
  const auto hist = label_histogram(d);
  for (auto id : c.active_modes()) CHECK(hist[static_cast<std::size_t>(label_of(id))] == 20);
}

TEST_CASE("generate writes data files and manifest") {
  GenerationConfig c;
  c.per_mode_count = 100;
  c.master_seed = 17;
  const auto dir = scratch("full");
  const auto result = generate(c, dir);
  CHECK(result.train_count + result.validation_count == 1800);
  CHECK(result.train_count == 1440);
  const auto train = load_file(result.train_path);
  const auto val = load_file(result.validation_path);
  CHECK(train.size() + val.size() == 1800);

  std::ifstream mf(result.manifest_path);
  const std::string text{std::istreambuf_iterator<char>(mf), std::istreambuf_iterator<char>()};
  const auto manifest = manifest_from_json(text);
  CHECK(manifest.train_count == train.size());
  CHECK(manifest.validation_count == val.size());
  CHECK(manifest.mode_names.size() == 18);
  CHECK(manifest.mode_names[0] == "morse");
  CHECK(manifest.mode_names[17] == "fax");
  CHECK(manifest.config_digest == config_digest(c));
  CHECK(manifest_to_json(manifest) + "\n" == text);
  fs::remove_all(dir);
}

TEST_CASE("same master seed gives byte-identical files") {
  const auto c = small_config();
  const auto a = generate(c, scratch("a"), 1);
  const auto b = generate(c, scratch("b"), 2);
  CHECK(file_bytes(a.train_path) == file_bytes(b.train_path));
  CHECK(file_bytes(a.validation_path) == file_bytes(b.validation_path));
  CHECK(file_bytes(a.manifest_path) == file_bytes(b.manifest_path));
  fs::remove_all(a.train_path.parent_path());
  fs::remove_all(b.train_path.parent_path());
}

TEST_CASE("single scenario and SNR range are honoured") {
  auto c = small_config();
  c.scenarios = {Scenario::moderate};
  c.snr_min_db = 10.0;
  c.snr_max_db = 12.0;
  c.max_freq_offset_hz = 0.0;
  for (const auto& r : generate_split(c, Split::validation).records) {
    CHECK(r.scenario == static_cast<int>(Scenario::moderate));
    CHECK(r.snr_db >= 10.0F);
    CHECK(r.snr_db <= 12.0F);
    CHECK(r.freq_offset_hz == 0.0F);
  }
}

}  // TEST_SUITE
