#include "socialgat/numcore/tensor.hpp"

#include <cmath>

#include "socialgat/errors.hpp"

namespace socialgat::num {

Shape::Shape(std::initializer_list<std::size_t> dims) {
  if (dims.size() > 2) throw ShapeError("tensors of rank > 2 are not supported");
  std::size_t i = 0;
  for (std::size_t d : dims) dims_[i++] = d;
  rank_ = dims.size();
}

std::size_t Shape::numel() const noexcept {
  std::size_t n = 1;
  for (std::size_t i = 0; i < rank_; ++i) n *= dims_[i];
  return n;
}

std::string Shape::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < rank_; ++i) {
    if (i) s += "x";
    s += std::to_string(dims_[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor data has " + std::to_string(data_.size()) +
                     " values but shape " + shape_.str() + " needs " +
                     std::to_string(shape_.numel()));
  }
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(Shape::vector(n), std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
  return Tensor(Shape::matrix(rows, cols), std::move(data));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_.str());
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.numel() != data_.size()) {
    throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
  }
  return Tensor(shape, data_);
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

void Tensor::axpy(double scale, const Tensor& other) {
  if (other.size() != size()) {
    throw ShapeError("axpy between " + shape_.str() + " and " + other.shape_.str());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

bool Tensor::all_finite() const noexcept {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace socialgat::num
