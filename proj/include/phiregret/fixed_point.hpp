#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "phiregret/errors.hpp"
#include "phiregret/simplex.hpp"

namespace phiregret {

struct FixedPointConfig {
  double tol = 1e-10;                 // L1 residual tolerance
  std::size_t max_power_iters = 0;    // 0 -> 10 * n * log(1/tol)

  std::size_t effective_max_iters(std::size_t n) const {
    if (max_power_iters > 0) return max_power_iters;
    return static_cast<std::size_t>(
        std::ceil(10.0 * static_cast<double>(n) * std::log(1.0 / tol)));
  }
};

namespace detail {

inline std::vector<double> transpose_apply(const StochasticMatrix& phi,
                                           const std::vector<double>& p) {
  return phi.apply_to_distribution(p);
}

inline double l1_residual(const StochasticMatrix& phi,
                          const std::vector<double>& p) {
  const auto image = transpose_apply(phi, p);
  double r = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) r += std::abs(p[i] - image[i]);
  return r;
}

// In-place LU with partial pivoting. Returns false on a (near-)singular
// pivot; perm records the row exchanges.
inline bool lu_factor(std::vector<double>& a, std::vector<std::size_t>& perm,
                      std::size_t n) {
  perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(a[k * n + k]);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double cand = std::abs(a[r * n + k]);
      if (cand > best) {
        best = cand;
        pivot = r;
      }
    }
    if (best < 1e-13) return false;
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[pivot * n + j]);
      std::swap(perm[k], perm[pivot]);
    }
    const double inv = 1.0 / a[k * n + k];
    for (std::size_t r = k + 1; r < n; ++r) {
      const double factor = a[r * n + k] * inv;
      a[r * n + k] = factor;
      if (factor == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) a[r * n + j] -= factor * a[k * n + j];
    }
  }
  return true;
}

inline void lu_solve(const std::vector<double>& lu,
                     const std::vector<std::size_t>& perm, std::size_t n,
                     const std::vector<double>& b, std::vector<double>& x) {
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu[i * n + j] * x[j];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu[i * n + j] * x[j];
    x[i] /= lu[i * n + i];
  }
}

// Dense solve of (phi^T - I) p = 0 with the last equation replaced by the
// normalization constraint, followed by iterative refinement. Refinement
// matters for near-reducible chains, where the raw solution can carry
// condition-number-sized error that clamping would turn into a visible
// residual.
inline bool solve_stationary_system(const StochasticMatrix& phi,
                                    std::vector<double>& p) {
  const std::size_t n = phi.size();
  std::vector<double> m(n * n);
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m[i * n + j] = phi.at(j, i) - (i == j ? 1.0 : 0.0);
    }
  }
  for (std::size_t j = 0; j < n; ++j) m[(n - 1) * n + j] = 1.0;
  b[n - 1] = 1.0;

  std::vector<double> lu = m;
  std::vector<std::size_t> perm;
  if (!lu_factor(lu, perm, n)) return false;

  lu_solve(lu, perm, n, b, p);
  std::vector<double> residual(n), correction(n);
  for (int pass = 0; pass < 3; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      double r = b[i];
      const double* row = m.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) r -= row[j] * p[j];
      residual[i] = r;
    }
    lu_solve(lu, perm, n, residual, correction);
    double step = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] += correction[i];
      step += std::abs(correction[i]);
    }
    if (step < 1e-14) break;
  }
  return true;
}

inline bool clamp_and_normalize(std::vector<double>& p) {
  double sum = 0.0;
  for (double& x : p) {
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (!(sum > 1e-12) || !std::isfinite(sum)) return false;
  for (double& x : p) x /= sum;
  return true;
}

}  // namespace detail

// Stationary distribution of the Markov chain induced by a right stochastic
// matrix: p with p = phi(p). Primary route is a dense pivoted linear solve;
// degenerate or reducible matrices fall back to damped power iteration
// p <- (p + phi(p)) / 2 from the uniform start, which converges for periodic
// chains as well. Any fixed point is acceptable when several exist; the
// output is deterministic for a given matrix.
inline ProbVector stationary_fixed_point(const StochasticMatrix& phi_bar,
                                         const FixedPointConfig& cfg = {}) {
  if (!(cfg.tol > 0.0)) {
    throw InvariantViolationError("fixed point tolerance must be positive");
  }
  const std::size_t n = phi_bar.size();
  std::vector<double> p;
  if (detail::solve_stationary_system(phi_bar, p) &&
      detail::clamp_and_normalize(p) &&
      detail::l1_residual(phi_bar, p) <= cfg.tol) {
    return ProbVector::validated(std::move(p));
  }

  p.assign(n, 1.0 / static_cast<double>(n));
  const std::size_t max_iters = cfg.effective_max_iters(n);
  for (std::size_t it = 0; it < max_iters; ++it) {
    const auto image = detail::transpose_apply(phi_bar, p);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += std::abs(p[i] - image[i]);
    if (residual <= cfg.tol) {
      detail::clamp_and_normalize(p);
      return ProbVector::validated(std::move(p));
    }
    for (std::size_t i = 0; i < n; ++i) p[i] = 0.5 * (p[i] + image[i]);
  }
  throw NoConvergenceError("fixed point iteration exceeded " +
                           std::to_string(max_iters) + " iterations");
}

}  // namespace phiregret
