#include "hfclass/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace hfc::nn {

namespace {

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  template <typename Scalar>
  void put_values(const Scalar* data, Index n) {
    put(static_cast<std::uint64_t>(n));
    const auto* p = reinterpret_cast<const std::uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + sizeof(Scalar) * static_cast<std::size_t>(n));
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  /// Reads a length-prefixed array stored with `width` bytes per value.
  template <typename Scalar>
  typename Tensor<Scalar>::Vector get_values(int width, Index expected, const char* what) {
    const std::size_t at = pos_;
    const auto n = get<std::uint64_t>(what);
    if (expected >= 0 && n != static_cast<std::uint64_t>(expected)) {
      throw FormatError(std::string(what) + ": stored " + std::to_string(n) + " values, model expects " +
                            std::to_string(expected),
                        at);
    }
    need(n * static_cast<std::size_t>(width), what);
    typename Tensor<Scalar>::Vector out(static_cast<Index>(n));
    for (Index i = 0; i < out.size(); ++i) {
      if (width == 4) {
        float f;
        std::memcpy(&f, bytes_.data() + pos_, 4);
        out[i] = static_cast<Scalar>(f);
      } else {
        double d;
        std::memcpy(&d, bytes_.data() + pos_, 8);
        out[i] = static_cast<Scalar>(d);
      }
      pos_ += static_cast<std::size_t>(width);
    }
    return out;
  }

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) throw FormatError(std::string("truncated checkpoint reading ") + what, bytes_.size());
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct Header {
  std::uint16_t version;
  int width;
  Arch arch;
  std::uint64_t seed;
  Shape sample_shape;
  std::vector<LayerSpec> specs;
};

Header read_header(Reader& r, std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < kCheckpointMagic.size(); ++i) {
    if (i >= bytes.size()) throw FormatError("truncated checkpoint header", i);
    if (bytes[i] != static_cast<std::uint8_t>(kCheckpointMagic[i])) throw FormatError("bad checkpoint magic", i);
  }
  for (std::size_t i = 0; i < kCheckpointMagic.size(); ++i) r.get<std::uint8_t>("magic");
  Header h;
  h.version = r.get<std::uint16_t>("version");
  if (h.version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(h.version), 4);
  }
  const std::size_t width_at = r.pos();
  h.width = r.get<std::uint8_t>("scalar width");
  if (h.width != 4 && h.width != 8) throw FormatError("scalar width must be 4 or 8", width_at);
  const std::size_t arch_at = r.pos();
  const auto arch = r.get<std::uint8_t>("architecture");
  if (arch > static_cast<std::uint8_t>(Arch::custom)) throw FormatError("unknown architecture id", arch_at);
  h.arch = static_cast<Arch>(arch);
  h.seed = r.get<std::uint64_t>("seed");
  const auto rank = r.get<std::uint32_t>("input rank");
  if (rank > 8) throw FormatError("implausible input rank", r.pos() - 4);
  for (std::uint32_t i = 0; i < rank; ++i) h.sample_shape.push_back(r.get<std::int64_t>("input shape"));
  const auto layers = r.get<std::uint32_t>("layer count");
  for (std::uint32_t i = 0; i < layers; ++i) {
    const std::size_t at = r.pos();
    LayerSpec s;
    const auto kind = r.get<std::uint8_t>("layer kind");
    if (kind > static_cast<std::uint8_t>(LayerKind::flatten)) throw FormatError("unknown layer kind", at);
    s.kind = static_cast<LayerKind>(kind);
    s.filters = r.get<std::int32_t>("layer table");
    s.kernel = r.get<std::int32_t>("layer table");
    s.stride = r.get<std::int32_t>("layer table");
    s.pool = r.get<std::int32_t>("layer table");
    s.units = r.get<std::int32_t>("layer table");
    s.rate = r.get<double>("layer table");
    s.n = r.get<std::int32_t>("layer table");
    h.specs.push_back(s);
  }
  return h;
}

template <typename Scalar>
Model<Scalar> build_from_header(const Header& h, std::size_t offset) {
  try {
    return Model<Scalar>(h.specs, h.sample_shape, h.seed, h.arch);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("layer table does not form a valid model: ") + e.what(), offset);
  }
}

}  // namespace

template <typename Scalar>
std::vector<std::uint8_t> serialize_checkpoint(Model<Scalar>& model, const TrainingState& state,
                                               Adam<Scalar>* optimizer) {
  Writer w;
  for (char c : kCheckpointMagic) w.put(static_cast<std::uint8_t>(c));
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint8_t>(sizeof(Scalar)));
  w.put(static_cast<std::uint8_t>(model.arch()));
  w.put(model.seed());
  w.put(static_cast<std::uint32_t>(model.sample_shape().size()));
  for (Index d : model.sample_shape()) w.put(static_cast<std::int64_t>(d));
  w.put(static_cast<std::uint32_t>(model.specs().size()));
  for (const auto& s : model.specs()) {
    w.put(static_cast<std::uint8_t>(s.kind));
    w.put(static_cast<std::int32_t>(s.filters));
    w.put(static_cast<std::int32_t>(s.kernel));
    w.put(static_cast<std::int32_t>(s.stride));
    w.put(static_cast<std::int32_t>(s.pool));
    w.put(static_cast<std::int32_t>(s.units));
    w.put(s.rate);
    w.put(static_cast<std::int32_t>(s.n));
  }
  const auto params = model.parameters();
  w.put(static_cast<std::uint32_t>(params.size()));
  for (auto* p : params) w.put_values(p->value.ptr(), p->value.size());
  const auto buffers = model.buffers();
  w.put(static_cast<std::uint32_t>(buffers.size()));
  for (auto* b : buffers) w.put_values(b->ptr(), b->size());
  w.put(static_cast<std::uint64_t>(state.step));
  w.put(static_cast<std::uint32_t>(state.epoch));
  w.put(state.lr);
  w.put(state.plateau_best);
  w.put(static_cast<std::uint32_t>(state.plateau_bad));
  w.put(static_cast<std::uint8_t>(optimizer ? 1 : 0));
  if (optimizer) {
    for (const auto& m : optimizer->moments()) {
      w.put_values(m.m.data(), m.m.size());
      w.put_values(m.v.data(), m.v.size());
    }
  }
  return std::move(w.bytes);
}

template <typename Scalar>
Checkpoint<Scalar> parse_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const Header h = read_header(r, bytes);
  Checkpoint<Scalar> ck{build_from_header<Scalar>(h, r.pos()), {}, std::nullopt};
  auto params = ck.model.parameters();
  const std::size_t count_at = r.pos();
  if (r.get<std::uint32_t>("parameter count") != params.size()) {
    throw FormatError("parameter tensor count does not match the layer table", count_at);
  }
  for (auto* p : params) p->value.data() = r.get_values<Scalar>(h.width, p->value.size(), "parameter values");
  auto buffers = ck.model.buffers();
  const std::size_t buf_at = r.pos();
  if (r.get<std::uint32_t>("buffer count") != buffers.size()) {
    throw FormatError("buffer count does not match the layer table", buf_at);
  }
  for (auto* b : buffers) b->data() = r.get_values<Scalar>(h.width, b->size(), "buffer values");
  ck.state.step = static_cast<std::int64_t>(r.get<std::uint64_t>("step counter"));
  ck.state.epoch = static_cast<int>(r.get<std::uint32_t>("epoch"));
  ck.state.lr = r.get<double>("learning rate");
  ck.state.plateau_best = r.get<double>("plateau best");
  ck.state.plateau_bad = static_cast<int>(r.get<std::uint32_t>("plateau count"));
  if (r.get<std::uint8_t>("moment flag")) {
    SavedMoments m;
    for (auto* p : params) {
      m.m.push_back(r.get_values<double>(h.width, p->value.size(), "Adam moments"));
      m.v.push_back(r.get_values<double>(h.width, p->value.size(), "Adam moments"));
    }
    ck.moments = std::move(m);
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint", r.pos());
  return ck;
}

template <typename Scalar>
void restore_moments(Adam<Scalar>& optimizer, const SavedMoments& moments) {
  auto& dst = optimizer.moments();
  if (dst.size() != moments.m.size()) throw std::invalid_argument("saved moments do not match the optimizer");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].m.size() != moments.m[i].size()) throw std::invalid_argument("saved moment sizes differ");
    dst[i].m = moments.m[i].template cast<Scalar>();
    dst[i].v = moments.v[i].template cast<Scalar>();
  }
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, Model<Scalar>& model, const TrainingState& state,
                     Adam<Scalar>* optimizer) {
  const auto bytes = serialize_checkpoint(model, state, optimizer);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint<Scalar>(read_file_bytes(path));
}

CheckpointSummary summarize_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const Header h = read_header(r, bytes);
  auto ck = parse_checkpoint<float>(bytes);
  CheckpointSummary s;
  s.version = h.version;
  s.scalar_bytes = h.width;
  s.arch = h.arch;
  s.sample_shape = h.sample_shape;
  s.specs = h.specs;
  for (std::size_t i = 0; i < ck.model.layer_count(); ++i) {
    s.layer_parameters.push_back(ck.model.layer(i).parameter_count());
  }
  s.total_parameters = ck.model.parameter_count();
  s.weighted_layers = ck.model.weighted_layer_count();
  s.state = ck.state;
  s.has_moments = ck.moments.has_value();
  return s;
}

#define HFC_INSTANTIATE(S)                                                                                      \
  template std::vector<std::uint8_t> serialize_checkpoint<S>(Model<S>&, const TrainingState&, Adam<S>*);        \
  template Checkpoint<S> parse_checkpoint<S>(std::span<const std::uint8_t>);                                    \
  template void save_checkpoint<S>(const std::filesystem::path&, Model<S>&, const TrainingState&, Adam<S>*);    \
  template Checkpoint<S> load_checkpoint<S>(const std::filesystem::path&);                                      \
  template void restore_moments<S>(Adam<S>&, const SavedMoments&);

HFC_INSTANTIATE(float)
HFC_INSTANTIATE(double)

}  // namespace hfc::nn
