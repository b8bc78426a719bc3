#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>

#include "phiregret/simplex.hpp"

namespace phiregret {

// Two-stage projection R^{n x n} -> R_+^{n x n} -> stochastic, with the
// matching two-stage gradient processing. phi_plus is the entrywise positive
// part; phi_proper rescales each row by its L1 norm, falling back to the
// uniform row when a row has no positive mass.
struct ProjectionRecord {
  Matrix phi_improper;
  Matrix phi_plus;
  StochasticMatrix phi_proper;
};

inline ProjectionRecord project(Matrix phi_improper) {
  const std::size_t n = phi_improper.size();
  Matrix plus(n);
  Matrix proper(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = phi_improper.row(i);
    auto plus_row = plus.row(i);
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      plus_row[j] = std::max(src[j], 0.0);
      norm += plus_row[j];
    }
    auto out_row = proper.row(i);
    if (norm == 0.0) {
      const double u = 1.0 / static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j) out_row[j] = u;
    } else {
      for (std::size_t j = 0; j < n; ++j) out_row[j] = plus_row[j] / norm;
    }
  }
  return ProjectionRecord{std::move(phi_improper), std::move(plus),
                          validate_stochastic(std::move(proper), 1e-9)};
}

// Stage 2 centers each gradient row against the proper prediction row;
// stage 1 keeps the centered entry where the improper prediction was not
// clipped (>= 0) and otherwise passes through only its negative part.
inline Matrix process_gradient(const Matrix& g_bar, const ProjectionRecord& rec) {
  const std::size_t n = g_bar.size();
  if (n != rec.phi_improper.size()) {
    throw DimensionMismatchError("gradient size does not match projection record");
  }
  Matrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g_row = g_bar.row(i);
    const auto proper_row = rec.phi_proper.row(i);
    const auto improper_row = rec.phi_improper.row(i);
    double center = 0.0;
    for (std::size_t j = 0; j < n; ++j) center += g_row[j] * proper_row[j];
    auto out_row = out.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double centered = g_row[j] - center;
      out_row[j] = improper_row[j] >= 0.0 ? centered : std::min(centered, 0.0);
    }
  }
  return out;
}

}  // namespace phiregret
