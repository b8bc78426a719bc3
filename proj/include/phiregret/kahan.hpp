#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace phiregret {

// Compensated (Kahan–Neumaier) accumulator for long regret sums.
class KahanSum {
 public:
  KahanSum() = default;
  explicit KahanSum(double initial) : sum_(initial) {}

  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  KahanSum& operator+=(double x) {
    add(x);
    return *this;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Elementwise compensated accumulation for matrices/vectors stored flat.
class KahanArray {
 public:
  KahanArray() = default;
  explicit KahanArray(std::size_t n) : sum_(n, 0.0), comp_(n, 0.0) {}

  std::size_t size() const { return sum_.size(); }

  void add(std::size_t i, double x) {
    const double t = sum_[i] + x;
    if (std::abs(sum_[i]) >= std::abs(x)) {
      comp_[i] += (sum_[i] - t) + x;
    } else {
      comp_[i] += (x - t) + sum_[i];
    }
    sum_[i] = t;
  }

  double value(std::size_t i) const { return sum_[i] + comp_[i]; }

  std::vector<double> values() const {
    std::vector<double> out(sum_.size());
    for (std::size_t i = 0; i < sum_.size(); ++i) out[i] = value(i);
    return out;
  }

 private:
  std::vector<double> sum_;
  std::vector<double> comp_;
};

}  // namespace phiregret
