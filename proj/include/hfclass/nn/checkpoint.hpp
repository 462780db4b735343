#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "hfclass/nn/model.hpp"
#include "hfclass/nn/train.hpp"

namespace hfc::nn {

inline constexpr std::array<char, 4> kCheckpointMagic{'H', 'F', 'N', 'N'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Optimizer moments in checkpoint precision (double), one pair per
/// parameter tensor.
struct SavedMoments {
  std::vector<Eigen::VectorXd> m;
  std::vector<Eigen::VectorXd> v;
};

template <typename Scalar>
struct Checkpoint {
  Model<Scalar> model;
  TrainingState state;
  std::optional<SavedMoments> moments;
};

/// Little-endian: magic, version, scalar width, arch, seed, input shape,
/// layer table, parameter tensors, batchnorm buffers, training state and
/// optional Adam moments. Values are stored at the model's precision.
template <typename Scalar>
std::vector<std::uint8_t> serialize_checkpoint(Model<Scalar>& model, const TrainingState& state,
                                               Adam<Scalar>* optimizer = nullptr);

/// Rebuilds the model from its layer table and loads the stored values,
/// converting precision if needed. Throws FormatError on malformed input.
template <typename Scalar>
Checkpoint<Scalar> parse_checkpoint(std::span<const std::uint8_t> bytes);

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, Model<Scalar>& model, const TrainingState& state,
                     Adam<Scalar>* optimizer = nullptr);
template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& path);

/// Copies saved moments into an optimizer built over the same model.
template <typename Scalar>
void restore_moments(Adam<Scalar>& optimizer, const SavedMoments& moments);

struct CheckpointSummary {
  std::uint16_t version = 0;
  int scalar_bytes = 0;
  Arch arch = Arch::custom;
  Shape sample_shape;
  std::vector<LayerSpec> specs;
  std::vector<Index> layer_parameters;  // per layer table entry
  Index total_parameters = 0;
  int weighted_layers = 0;
  TrainingState state;
  bool has_moments = false;
};

CheckpointSummary summarize_checkpoint(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace hfc::nn
