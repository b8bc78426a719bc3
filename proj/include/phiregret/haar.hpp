#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "phiregret/errors.hpp"
#include "phiregret/simplex.hpp"

namespace phiregret {

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline std::size_t log2_exact(std::size_t n) {
  std::size_t s = 0;
  while ((std::size_t{1} << s) < n) ++s;
  return s;
}

// One matrix feature: the identity, an all-ones column, or a dyadic
// sign-balanced column (wavelet). scale is 1-based in [1, S]; loc and col
// are 0-based.
struct FeatureId {
  enum class Kind { Identity, AllOnesColumn, Wavelet };

  Kind kind = Kind::Identity;
  std::size_t scale = 0;
  std::size_t loc = 0;
  std::size_t col = 0;

  static FeatureId identity() { return {}; }
  static FeatureId all_ones_column(std::size_t col) {
    return {Kind::AllOnesColumn, 0, 0, col};
  }
  static FeatureId wavelet(std::size_t scale, std::size_t loc, std::size_t col) {
    return {Kind::Wavelet, scale, loc, col};
  }

  bool operator==(const FeatureId&) const = default;

  std::string describe() const {
    switch (kind) {
      case Kind::Identity:
        return "identity";
      case Kind::AllOnesColumn:
        return "ones(col=" + std::to_string(col) + ")";
      case Kind::Wavelet:
        return "wavelet(s=" + std::to_string(scale) +
               ",l=" + std::to_string(loc) + ",col=" + std::to_string(col) + ")";
    }
    return {};
  }
};

struct IndexInterval {
  std::size_t lo;  // 0-based, inclusive
  std::size_t hi;  // exclusive
  std::size_t size() const { return hi - lo; }
  bool operator==(const IndexInterval&) const = default;
};

// Row support of a non-identity feature.
inline IndexInterval support(const FeatureId& f, std::size_t d_bar) {
  switch (f.kind) {
    case FeatureId::Kind::AllOnesColumn:
      return {0, d_bar};
    case FeatureId::Kind::Wavelet: {
      const std::size_t width = std::size_t{1} << f.scale;
      return {width * f.loc, width * (f.loc + 1)};
    }
    case FeatureId::Kind::Identity:
      break;
  }
  throw IdentityHasNoRowSupportError();
}

// <b, b>: support size for column features, d_bar for the identity.
inline double feature_self_inner(const FeatureId& f, std::size_t d_bar) {
  if (f.kind == FeatureId::Kind::Identity) return static_cast<double>(d_bar);
  return static_cast<double>(support(f, d_bar).size());
}

inline std::size_t feature_count(std::size_t d_bar) { return d_bar * d_bar + 1; }

// Position of a feature in the fixed enumeration order: identity, then
// all-ones columns by col, then wavelets by (scale desc, loc asc, col asc).
inline std::size_t feature_index(const FeatureId& f, std::size_t d_bar) {
  const std::size_t levels = log2_exact(d_bar);
  switch (f.kind) {
    case FeatureId::Kind::Identity:
      return 0;
    case FeatureId::Kind::AllOnesColumn:
      return 1 + f.col;
    case FeatureId::Kind::Wavelet: {
      const std::size_t before_scale =
          d_bar * ((std::size_t{1} << (levels - f.scale)) - 1);
      return 1 + d_bar + before_scale + f.loc * d_bar + f.col;
    }
  }
  return 0;
}

inline std::vector<FeatureId> enumerate_features(std::size_t d_bar) {
  if (!is_power_of_two(d_bar)) {
    throw NotPowerOfTwoError("feature set requires a dyadic dimension, got " +
                             std::to_string(d_bar));
  }
  const std::size_t levels = log2_exact(d_bar);
  std::vector<FeatureId> out;
  out.reserve(feature_count(d_bar));
  out.push_back(FeatureId::identity());
  for (std::size_t j = 0; j < d_bar; ++j) {
    out.push_back(FeatureId::all_ones_column(j));
  }
  for (std::size_t s = levels; s >= 1; --s) {
    const std::size_t locations = std::size_t{1} << (levels - s);
    for (std::size_t l = 0; l < locations; ++l) {
      for (std::size_t j = 0; j < d_bar; ++j) {
        out.push_back(FeatureId::wavelet(s, l, j));
      }
    }
  }
  return out;
}

// Dense realization of a feature; entries are exactly -1, 0 or 1.
inline Matrix feature_matrix(const FeatureId& f, std::size_t d_bar) {
  Matrix m(d_bar);
  switch (f.kind) {
    case FeatureId::Kind::Identity:
      return Matrix::identity(d_bar);
    case FeatureId::Kind::AllOnesColumn:
      for (std::size_t i = 0; i < d_bar; ++i) m.at(i, f.col) = 1.0;
      return m;
    case FeatureId::Kind::Wavelet: {
      const auto iv = support(f, d_bar);
      const std::size_t mid = iv.lo + iv.size() / 2;
      for (std::size_t i = iv.lo; i < mid; ++i) m.at(i, f.col) = 1.0;
      for (std::size_t i = mid; i < iv.hi; ++i) m.at(i, f.col) = -1.0;
      return m;
    }
  }
  return m;
}

// <m, b> exploiting support structure. Wavelet inner products are computed
// as (sum of first half) - (sum of second half); the two halves follow the
// same accumulation path, so equal rows cancel to an exact zero.
inline double feature_inner(const Matrix& m, const FeatureId& f) {
  const std::size_t n = m.size();
  switch (f.kind) {
    case FeatureId::Kind::Identity: {
      double tr = 0.0;
      for (std::size_t i = 0; i < n; ++i) tr += m.at(i, i);
      return tr;
    }
    case FeatureId::Kind::AllOnesColumn: {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += m.at(i, f.col);
      return s;
    }
    case FeatureId::Kind::Wavelet: {
      const auto iv = support(f, n);
      const std::size_t mid = iv.lo + iv.size() / 2;
      double plus = 0.0;
      double minus = 0.0;
      for (std::size_t i = iv.lo; i < mid; ++i) plus += m.at(i, f.col);
      for (std::size_t i = mid; i < iv.hi; ++i) minus += m.at(i, f.col);
      return plus - minus;
    }
  }
  return 0.0;
}

// Coefficients over the full feature set, stored densely in enumeration
// order. Behaves as a map FeatureId -> real.
class CoefficientVector {
 public:
  CoefficientVector() = default;
  explicit CoefficientVector(std::size_t d_bar)
      : d_bar_(d_bar), values_(feature_count(d_bar), 0.0) {}

  std::size_t d_bar() const { return d_bar_; }
  std::size_t size() const { return values_.size(); }

  double get(const FeatureId& f) const { return values_[feature_index(f, d_bar_)]; }
  void set(const FeatureId& f, double v) { values_[feature_index(f, d_bar_)] = v; }

  double& at_index(std::size_t i) { return values_[i]; }
  double at_index(std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t d_bar_ = 0;
  std::vector<double> values_;
};

// Raw inner products <m, b> for every feature at once. A bottom-up pyramid
// of dyadic block row-sums gives all scales in O(d_bar^2 log d_bar); block
// sums are built by balanced pairwise additions, so rows that are equal on a
// support cancel to exact zeros in the wavelet coefficients.
inline CoefficientVector inner_products_all(const Matrix& m) {
  const std::size_t n = m.size();
  if (!is_power_of_two(n)) {
    throw NotPowerOfTwoError("inner_products_all requires a dyadic dimension");
  }
  const std::size_t levels = log2_exact(n);
  CoefficientVector out(n);

  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i) tr += m.at(i, i);
  out.set(FeatureId::identity(), tr);

  std::vector<double> work(m.data());  // level-0 block sums: the rows themselves
  std::size_t blocks = n;
  for (std::size_t s = 1; s <= levels; ++s) {
    const std::size_t half = blocks / 2;
    for (std::size_t l = 0; l < half; ++l) {
      const double* row_a = work.data() + (2 * l) * n;
      const double* row_b = work.data() + (2 * l + 1) * n;
      const std::size_t base =
          feature_index(FeatureId::wavelet(s, l, 0), n);
      for (std::size_t j = 0; j < n; ++j) {
        out.at_index(base + j) = row_a[j] - row_b[j];
      }
      double* dst = work.data() + l * n;
      for (std::size_t j = 0; j < n; ++j) {
        dst[j] = row_a[j] + row_b[j];
      }
    }
    blocks = half;
  }
  // The surviving row holds full column sums: the all-ones column inners.
  for (std::size_t j = 0; j < n; ++j) {
    out.at_index(1 + j) = work[j];
  }
  return out;
}

enum class Rep { One, Two };

// Orthogonal expansion of a square dyadic matrix over the column features,
// with the identity coefficient pinned to 0 (Rep::One, expand phi itself) or
// 1 (Rep::Two, expand phi - I on top of the identity).
inline CoefficientVector analyze(const Matrix& phi_bar, Rep rep) {
  const std::size_t n = phi_bar.size();
  CoefficientVector out;
  if (rep == Rep::One) {
    out = inner_products_all(phi_bar);
    out.set(FeatureId::identity(), 0.0);
  } else {
    Matrix shifted = phi_bar;
    for (std::size_t i = 0; i < n; ++i) shifted.at(i, i) -= 1.0;
    out = inner_products_all(shifted);
    out.set(FeatureId::identity(), 1.0);
  }
  const std::size_t levels = log2_exact(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.at_index(1 + j) /= static_cast<double>(n);
  }
  for (std::size_t s = 1; s <= levels; ++s) {
    const double width = static_cast<double>(std::size_t{1} << s);
    const std::size_t locations = std::size_t{1} << (levels - s);
    const std::size_t base = feature_index(FeatureId::wavelet(s, 0, 0), n);
    for (std::size_t k = 0; k < locations * n; ++k) {
      out.at_index(base + k) /= width;
    }
  }
  return out;
}

// Sum of coeff * feature accumulated per scale: O(d_bar^2 log d_bar).
inline Matrix synthesize(const CoefficientVector& c, std::size_t d_bar) {
  if (!is_power_of_two(d_bar)) {
    throw NotPowerOfTwoError("synthesize requires a dyadic dimension");
  }
  if (c.d_bar() != d_bar) {
    throw DimensionMismatchError("coefficient vector built for a different size");
  }
  const std::size_t levels = log2_exact(d_bar);
  Matrix m(d_bar);

  const double c_id = c.at_index(0);
  if (c_id != 0.0) {
    for (std::size_t i = 0; i < d_bar; ++i) m.at(i, i) += c_id;
  }
  for (std::size_t i = 0; i < d_bar; ++i) {
    double* row = m.row(i).data();
    for (std::size_t j = 0; j < d_bar; ++j) {
      row[j] += c.at_index(1 + j);
    }
  }
  for (std::size_t s = 1; s <= levels; ++s) {
    const std::size_t width = std::size_t{1} << s;
    const std::size_t locations = d_bar >> s;
    const std::size_t base = feature_index(FeatureId::wavelet(s, 0, 0), d_bar);
    for (std::size_t l = 0; l < locations; ++l) {
      const std::size_t lo = l * width;
      const std::size_t mid = lo + width / 2;
      const double* coeff_row = &c.values()[base + l * d_bar];
      for (std::size_t i = lo; i < mid; ++i) {
        double* row = m.row(i).data();
        for (std::size_t j = 0; j < d_bar; ++j) row[j] += coeff_row[j];
      }
      for (std::size_t i = mid; i < lo + width; ++i) {
        double* row = m.row(i).data();
        for (std::size_t j = 0; j < d_bar; ++j) row[j] -= coeff_row[j];
      }
    }
  }
  return m;
}

}  // namespace phiregret
