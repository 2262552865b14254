#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace heartsim {

/// Fixed-length transport delay on a uniform grid. After construction the
/// line is full of `fill`, so read() returns the value pushed `length()`
/// steps earlier (or `fill` during warm-up). length() == 0 is the identity.
template <typename T>
class DelayLine {
 public:
  DelayLine() = default;
  explicit DelayLine(std::size_t length, const T& fill = T{}) : buffer_(length, fill) {}

  [[nodiscard]] std::size_t length() const noexcept { return buffer_.size(); }

  /// Sample that leaves the line on the next push.
  [[nodiscard]] const T& oldest() const noexcept { return buffer_[head_]; }

  /// Returns the delayed sample for `input` and stores `input`.
  T push(const T& input) {
    if (buffer_.empty()) return input;
    T out = buffer_[head_];
    buffer_[head_] = input;
    if (++head_ == buffer_.size()) head_ = 0;
    return out;
  }

  void fill(const T& value) {
    std::fill(buffer_.begin(), buffer_.end(), value);
    head_ = 0;
  }

 private:
  std::vector<T> buffer_;
  std::size_t head_ = 0;
};

}  // namespace heartsim
