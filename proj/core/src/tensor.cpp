#include "pol/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pol {

Shape::Shape(std::initializer_list<std::size_t> extents) {
  if (extents.size() > kMaxRank) {
    throw DimensionError("Shape", "rank", "at most 4 extents, got " + std::to_string(extents.size()));
  }
  std::size_t axis = 0;
  for (std::size_t e : extents) {
    if (e == 0) {
      throw DimensionError("Shape", "axis " + std::to_string(axis), "extent must be >= 1");
    }
    ext_[axis++] = e;
  }
  rank_ = extents.size();
}

Shape Shape::from_vector(const std::vector<std::size_t>& extents) {
  if (extents.size() > kMaxRank) {
    throw DimensionError("Shape", "rank", "at most 4 extents, got " + std::to_string(extents.size()));
  }
  Shape s;
  for (std::size_t axis = 0; axis < extents.size(); ++axis) {
    if (extents[axis] == 0) {
      throw DimensionError("Shape", "axis " + std::to_string(axis), "extent must be >= 1");
    }
    s.ext_[axis] = extents[axis];
  }
  s.rank_ = extents.size();
  return s;
}

std::size_t Shape::numel() const noexcept {
  if (rank_ == 0) return 0;
  std::size_t n = 1;
  for (std::size_t i = 0; i < rank_; ++i) n *= ext_[i];
  return n;
}

bool Shape::operator==(const Shape& other) const noexcept {
  if (rank_ != other.rank_) return false;
  for (std::size_t i = 0; i < rank_; ++i) {
    if (ext_[i] != other.ext_[i]) return false;
  }
  return true;
}

std::string Shape::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < rank_; ++i) {
    if (i) os << ',';
    os << ext_[i];
  }
  os << ')';
  return os.str();
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(shape), data_(shape.numel(), fill) {}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw DimensionError("Tensor", "data", "shape " + shape_.to_string() + " needs " +
                                               std::to_string(shape_.numel()) + " values, got " +
                                               std::to_string(data_.size()));
  }
}

template <typename T>
BasicTensor<T> BasicTensor<T>::uniform(Shape shape, T lo, T hi, std::mt19937_64& rng) {
  BasicTensor t(shape);
  std::uniform_real_distribution<double> dist(static_cast<double>(lo), static_cast<double>(hi));
  for (auto& v : t.data_) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::normal(Shape shape, T mean, T stddev, std::mt19937_64& rng) {
  BasicTensor t(shape);
  std::normal_distribution<double> dist(static_cast<double>(mean), static_cast<double>(stddev));
  for (auto& v : t.data_) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
T BasicTensor<T>::item() const {
  if (data_.size() != 1) {
    throw DimensionError("item", "numel", "expected a single element, got " + std::to_string(data_.size()));
  }
  return data_[0];
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const {
  if (shape.numel() != data_.size()) {
    throw DimensionError("reshape", "numel", shape_.to_string() + " -> " + shape.to_string());
  }
  return BasicTensor(shape, data_);
}

template <typename T>
void BasicTensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool BasicTensor<T>::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
T max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("max_abs_diff", a.shape(), b.shape());
  T m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <typename T>
T dot(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("dot", a.shape(), b.shape());
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return static_cast<T>(s);
}

void require_same_shape(const char* op, const Shape& a, const Shape& b) {
  if (a.rank() != b.rank()) {
    throw DimensionError(op, "rank", a.to_string() + " vs " + b.to_string());
  }
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (a[i] != b[i]) {
      throw DimensionError(op, "axis " + std::to_string(i), a.to_string() + " vs " + b.to_string());
    }
  }
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template float max_abs_diff(const Tensor&, const Tensor&);
template double max_abs_diff(const TensorD&, const TensorD&);
template float dot(const Tensor&, const Tensor&);
template double dot(const TensorD&, const TensorD&);

}  // namespace pol
