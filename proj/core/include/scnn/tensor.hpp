#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scnn {

// (batch, channel, height, width)
struct Shape4 {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  [[nodiscard]] constexpr std::size_t size() const { return n * c * h * w; }
  [[nodiscard]] constexpr std::size_t plane() const { return h * w; }
  [[nodiscard]] std::string to_string() const;

  friend constexpr bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense rank-4 float array stored row-major in (n, c, h, w) order.
///
/// A Tensor4 is a plain value: copying it copies the data. Every public
/// operation in the library that produces a Tensor4 checks the result for
/// NaN/Inf and throws NumericError instead of returning it.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 shape, float fill = 0.0f);
  /// Throws ShapeError when data.size() != shape.size().
  Tensor4(Shape4 shape, std::vector<float> data);

  [[nodiscard]] const Shape4& shape() const { return shape_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::span<float> data() { return data_; }
  [[nodiscard]] std::span<const float> data() const { return data_; }
  [[nodiscard]] const std::vector<float>& vector() const { return data_; }

  [[nodiscard]] std::size_t index(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  float& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[index(n, c, h, w)];
  }
  float operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[index(n, c, h, w)];
  }

  // One (h, w) image plane.
  [[nodiscard]] std::span<float> plane(std::size_t n, std::size_t c);
  [[nodiscard]] std::span<const float> plane(std::size_t n, std::size_t c) const;

  void fill(float value);

  /// Throws NumericError naming `what` if any element is NaN or Inf.
  void require_finite(std::string_view what) const;

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_{};
  std::vector<float> data_;
};

[[nodiscard]] bool all_finite(std::span<const float> values);

/// Throws ShapeError with `context` when the shapes differ.
void require_same_shape(const Shape4& a, const Shape4& b, std::string_view context);

/// Stacks tensors along channels; batch and spatial dims must agree.
[[nodiscard]] Tensor4 concat_channels(const Tensor4& a, const Tensor4& b);

/// Copies batch entry `index` out as a (1, c, h, w) tensor.
[[nodiscard]] Tensor4 batch_item(const Tensor4& t, std::size_t index);

/// Stacks (1, c, h, w) tensors of equal shape along the batch dimension.
[[nodiscard]] Tensor4 stack_batch(std::span<const Tensor4> items);

}  // namespace scnn
