#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pol/error.hpp"

namespace pol {

// Up to four extents, NCHW for activations.
class Shape {
 public:
  static constexpr std::size_t kMaxRank = 4;

  Shape() = default;
  Shape(std::initializer_list<std::size_t> extents);

  std::size_t rank() const noexcept { return rank_; }
  std::size_t operator[](std::size_t axis) const { return ext_.at(axis); }
  std::size_t numel() const noexcept;

  bool operator==(const Shape& other) const noexcept;
  bool operator!=(const Shape& other) const noexcept { return !(*this == other); }

  std::vector<std::size_t> to_vector() const { return {ext_.begin(), ext_.begin() + rank_}; }
  static Shape from_vector(const std::vector<std::size_t>& extents);
  std::string to_string() const;

 private:
  std::array<std::size_t, kMaxRank> ext_{};
  std::size_t rank_ = 0;
};

template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T(0));
  BasicTensor(Shape shape, std::vector<T> data);

  static BasicTensor zeros(Shape shape) { return BasicTensor(shape, T(0)); }
  static BasicTensor ones(Shape shape) { return BasicTensor(shape, T(1)); }
  static BasicTensor uniform(Shape shape, T lo, T hi, std::mt19937_64& rng);
  static BasicTensor normal(Shape shape, T mean, T stddev, std::mt19937_64& rng);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.rank(); }
  std::size_t dim(std::size_t axis) const { return shape_[axis]; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* ptr() noexcept { return data_.data(); }
  const T* ptr() const noexcept { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  // Scalar value of a single-element tensor.
  T item() const;

  BasicTensor reshaped(Shape shape) const;
  void fill(T value);
  bool all_finite() const noexcept;

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  bool operator==(const BasicTensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

template <typename T>
T max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
T dot(const BasicTensor<T>& a, const BasicTensor<T>& b);

void require_same_shape(const char* op, const Shape& a, const Shape& b);

}  // namespace pol
