#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hfclass/common.hpp"

namespace hfc::nn {

using Shape = std::vector<Index>;

std::string shape_string(const Shape& shape);
Index shape_size(const Shape& shape);

/// Dense row-major array. Layer activations use (batch, channels, length) or
/// (batch, features).
template <typename Scalar>
class Tensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ColMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Tensor() = default;
  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(Vector::Zero(shape_size(shape_))) {}
  Tensor(Shape shape, Vector data);
  Tensor(std::initializer_list<Index> shape) : Tensor(Shape(shape)) {}

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index i) const { return shape_.at(static_cast<std::size_t>(i)); }
  Index size() const { return data_.size(); }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }
  Scalar* ptr() { return data_.data(); }
  const Scalar* ptr() const { return data_.data(); }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  /// Element (b, c, l) of a rank-3 tensor.
  Scalar& at(Index b, Index c, Index l) { return data_[(b * shape_[1] + c) * shape_[2] + l]; }
  Scalar at(Index b, Index c, Index l) const { return data_[(b * shape_[1] + c) * shape_[2] + l]; }
  /// Element (b, f) of a rank-2 tensor.
  Scalar& at(Index b, Index f) { return data_[b * shape_[1] + f]; }
  Scalar at(Index b, Index f) const { return data_[b * shape_[1] + f]; }

  /// Rank-2 view as a (rows, cols) row-major matrix.
  Eigen::Map<RowMatrix> matrix() { return {data_.data(), shape_[0], size() / shape_[0]}; }
  Eigen::Map<const RowMatrix> matrix() const { return {data_.data(), shape_[0], size() / shape_[0]}; }

  Tensor reshaped(Shape shape) const;
  void set_zero() { data_.setZero(); }
  bool all_finite() const { return data_.allFinite(); }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, data_.template cast<Other>());
  }

 private:
  Shape shape_;
  Vector data_;
};

/// Throws std::invalid_argument naming both shapes when they differ.
void expect_shape(const char* where, const Shape& expected, const Shape& actual);

}  // namespace hfc::nn
