#include "scnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scnn/error.hpp"

namespace scnn {

std::string Shape4::to_string() const {
  std::ostringstream out;
  out << '(' << n << ", " << c << ", " << h << ", " << w << ')';
  return out.str();
}

Tensor4::Tensor4(Shape4 shape, float fill) : shape_(shape), data_(shape.size(), fill) {}

Tensor4::Tensor4(Shape4 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_.to_string());
  }
}

std::span<float> Tensor4::plane(std::size_t n, std::size_t c) {
  return std::span<float>(data_).subspan(index(n, c, 0, 0), shape_.plane());
}

std::span<const float> Tensor4::plane(std::size_t n, std::size_t c) const {
  return std::span<const float>(data_).subspan(index(n, c, 0, 0), shape_.plane());
}

void Tensor4::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor4::require_finite(std::string_view what) const {
  if (!all_finite(data_)) {
    throw NumericError(std::string(what) + ": non-finite value in tensor of shape " + shape_.to_string());
  }
}

bool all_finite(std::span<const float> values) {
  return std::all_of(values.begin(), values.end(), [](float v) { return std::isfinite(v); });
}

void require_same_shape(const Shape4& a, const Shape4& b, std::string_view context) {
  if (a != b) {
    throw ShapeError(std::string(context) + ": shape " + a.to_string() + " does not match " + b.to_string());
  }
}

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
  const Shape4& sa = a.shape();
  const Shape4& sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
    throw ShapeError("concat_channels: " + sa.to_string() + " and " + sb.to_string() +
                     " differ outside the channel dimension");
  }
  Tensor4 out({sa.n, sa.c + sb.c, sa.h, sa.w});
  const std::size_t plane = sa.plane();
  auto dst = out.data().begin();
  for (std::size_t n = 0; n < sa.n; ++n) {
    auto src_a = a.data().subspan(n * sa.c * plane, sa.c * plane);
    auto src_b = b.data().subspan(n * sb.c * plane, sb.c * plane);
    dst = std::copy(src_a.begin(), src_a.end(), dst);
    dst = std::copy(src_b.begin(), src_b.end(), dst);
  }
  return out;
}

Tensor4 batch_item(const Tensor4& t, std::size_t index) {
  const Shape4& s = t.shape();
  if (index >= s.n) {
    throw ShapeError("batch_item: index " + std::to_string(index) + " out of range for " + s.to_string());
  }
  const std::size_t item = s.c * s.plane();
  auto src = t.data().subspan(index * item, item);
  return Tensor4({1, s.c, s.h, s.w}, std::vector<float>(src.begin(), src.end()));
}

Tensor4 stack_batch(std::span<const Tensor4> items) {
  if (items.empty()) {
    throw ShapeError("stack_batch: no items");
  }
  const Shape4 first = items.front().shape();
  if (first.n != 1) {
    throw ShapeError("stack_batch: items must have batch size 1, got " + first.to_string());
  }
  std::vector<float> data;
  data.reserve(first.size() * items.size());
  for (const Tensor4& item : items) {
    require_same_shape(item.shape(), first, "stack_batch");
    data.insert(data.end(), item.data().begin(), item.data().end());
  }
  return Tensor4({items.size(), first.c, first.h, first.w}, std::move(data));
}

}  // namespace scnn
