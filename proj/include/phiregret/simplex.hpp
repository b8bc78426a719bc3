#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "phiregret/errors.hpp"

namespace phiregret {

inline constexpr double kProbEntrySlack = 1e-12;   // slack for computed entries
inline constexpr double kProbSumTol = 1e-9;        // simplex mass tolerance
inline constexpr double kRowCompareTol = 1e-12;    // row equality for computed matrices

// Point on the probability simplex. Immutable after construction; entries of
// computed vectors may dip to -1e-12 and are clamped on ingestion.
class ProbVector {
 public:
  static ProbVector validated(std::vector<double> entries) {
    double sum = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      double& x = entries[i];
      if (!(x >= -kProbEntrySlack)) {  // also rejects NaN
        throw InvariantViolationError("probability entry " + std::to_string(i) +
                                      " is " + std::to_string(x));
      }
      if (x < 0.0) x = 0.0;
      sum += x;
    }
    if (entries.empty() || std::abs(sum - 1.0) > kProbSumTol) {
      throw InvariantViolationError("probability mass sums to " +
                                    std::to_string(sum));
    }
    return ProbVector(std::move(entries));
  }

  static ProbVector uniform(std::size_t n) {
    return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static ProbVector basis(std::size_t n, std::size_t i) {
    std::vector<double> v(n, 0.0);
    v[i] = 1.0;
    return ProbVector(std::move(v));
  }

  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<double>& entries() const { return entries_; }
  std::span<const double> span() const { return entries_; }

 private:
  explicit ProbVector(std::vector<double> entries) : entries_(std::move(entries)) {}
  std::vector<double> entries_;
};

// Per-round loss vector; entries must lie in [-1, 1] exactly on ingestion.
class LossVector {
 public:
  static LossVector validated(std::vector<double> entries) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const double x = entries[i];
      if (!(std::abs(x) <= 1.0)) {
        throw InvariantViolationError("loss entry " + std::to_string(i) +
                                      " is " + std::to_string(x) +
                                      ", outside [-1, 1]");
      }
    }
    return LossVector(std::move(entries));
  }

  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<double>& entries() const { return entries_; }

 private:
  explicit LossVector(std::vector<double> entries) : entries_(std::move(entries)) {}
  std::vector<double> entries_;
};

// Dense square matrix, row-major. Used for improper predictions, gradients
// and as the backing store of StochasticMatrix. Desk scale (n <= 4096).
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
  Matrix(std::size_t n, std::vector<double> data) : n_(n), a_(std::move(data)) {
    if (a_.size() != n_ * n_) {
      throw DimensionMismatchError("matrix data size does not match dimension");
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  std::size_t size() const { return n_; }
  double& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::span<double> row(std::size_t i) { return {a_.data() + i * n_, n_}; }
  std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }
  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  // Image of a distribution under the row-stochastic action:
  // out_j = sum_i p_i * m_{i,j}.
  std::vector<double> apply_to_distribution(std::span<const double> p) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const double pi = p[i];
      if (pi == 0.0) continue;
      const double* r = a_.data() + i * n_;
      for (std::size_t j = 0; j < n_; ++j) out[j] += pi * r[j];
    }
    return out;
  }

  friend double frobenius_inner(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.a_.size(); ++k) s += a.a_[k] * b.a_[k];
    return s;
  }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

inline bool rows_equal(std::span<const double> a, std::span<const double> b,
                       double tol) {
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (tol == 0.0) {
      if (a[j] != b[j]) return false;
    } else if (std::abs(a[j] - b[j]) > tol) {
      return false;
    }
  }
  return true;
}

// Right stochastic matrix: every row is a point on the simplex.
class StochasticMatrix {
 public:
  static StochasticMatrix identity(std::size_t n) {
    return StochasticMatrix(Matrix::identity(n));
  }

  // Rows given explicitly as probability vectors (already validated).
  static StochasticMatrix from_rows(const std::vector<ProbVector>& rows) {
    Matrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) {
        throw DimensionMismatchError("stochastic matrix rows must have length n");
      }
      for (std::size_t j = 0; j < rows.size(); ++j) m.at(i, j) = rows[i][j];
    }
    return StochasticMatrix(std::move(m));
  }

  std::size_t size() const { return m_.size(); }
  double at(std::size_t i, std::size_t j) const { return m_.at(i, j); }
  std::span<const double> row(std::size_t i) const { return m_.row(i); }
  const Matrix& matrix() const { return m_; }

  std::vector<double> apply_to_distribution(std::span<const double> p) const {
    return m_.apply_to_distribution(p);
  }

  bool operator==(const StochasticMatrix& other) const = default;

 private:
  friend StochasticMatrix validate_stochastic(Matrix m, double tol);
  friend class PhiLearner;
  explicit StochasticMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

// Clamps entries in [-tol, 0) to zero and renormalizes rows whose sums are
// within tol of 1. Entries below -tol or row sums off by more than tol are
// hard errors. Renormalization is skipped when a row already sums to 1 at
// machine precision, which makes the operation idempotent bit-for-bit.
inline StochasticMatrix validate_stochastic(Matrix m, double tol) {
  const std::size_t n = m.size();
  const double machine_slack =
      4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = m.row(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double& x = row[j];
      if (!(x >= -tol)) {
        throw NegativeEntryError(i, j, x);
      }
      if (x < 0.0) x = 0.0;
      sum += x;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw RowSumMismatchError(i, sum);
    }
    if (std::abs(sum - 1.0) > machine_slack) {
      for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
    }
  }
  return StochasticMatrix(std::move(m));
}

// Frequency of the most frequent row. tol = 0 compares rows bitwise
// (constructed comparators); computed matrices should pass kRowCompareTol.
inline std::size_t uniformity(const StochasticMatrix& phi, double tol = 0.0) {
  const std::size_t n = phi.size();
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (rows_equal(phi.row(i), phi.row(k), tol)) ++count;
    }
    if (count > best) best = count;
  }
  return best;
}

// Number of indices i with row_i = e^(i).
inline std::size_t self_degree(const StochasticMatrix& phi, double tol = 0.0) {
  const std::size_t n = phi.size();
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool is_self = true;
    for (std::size_t j = 0; j < n; ++j) {
      const double want = (i == j) ? 1.0 : 0.0;
      if (tol == 0.0 ? phi.at(i, j) != want
                     : std::abs(phi.at(i, j) - want) > tol) {
        is_self = false;
        break;
      }
    }
    if (is_self) ++count;
  }
  return count;
}

// Number of adjacent row changes, rows compared entrywise within 1e-12.
inline std::size_t row_switch_count(const Matrix& m) {
  const std::size_t n = m.size();
  std::size_t switches = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!rows_equal(m.row(i), m.row(i + 1), kRowCompareTol)) ++switches;
  }
  return switches;
}

inline std::size_t row_switch_count(const StochasticMatrix& m) {
  return row_switch_count(m.matrix());
}

}  // namespace phiregret
