#pragma once
#ifdef __FAST_MATH__
#error fast math enabled, this would negate compensation.
#endif

#include <cmath>

namespace sharpq {

/// Neumaier (improved Kahan-Babuska) running sum. Also tracks the sum of
/// absolute values so callers can measure how much cancellation occurred.
template <typename T>
class NeumaierSum {
 public:
  void add(T x) {
    const T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
    abs_sum_ += std::abs(x);
  }

  NeumaierSum& operator+=(T x) {
    add(x);
    return *this;
  }

  T value() const { return sum_ + carry_; }
  T abs_sum() const { return abs_sum_; }

 private:
  T sum_{0};
  T carry_{0};
  T abs_sum_{0};
};

}  // namespace sharpq
