#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phiregret/fixed_point.hpp"
#include "phiregret/rng.hpp"
#include "phiregret/simplex.hpp"

using namespace phiregret;

namespace {

StochasticMatrix random_stochastic(Rng& rng, std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = -std::log(1.0 - rng.next_unit());
      m.at(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) /= sum;
  }
  return validate_stochastic(std::move(m), 1e-9);
}

double residual(const StochasticMatrix& phi, const ProbVector& p) {
  const auto image = phi.apply_to_distribution(p.span());
  double r = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) r += std::abs(p[i] - image[i]);
  return r;
}

// Block-diagonal (reducible) matrix built from two random blocks.
StochasticMatrix reducible(Rng& rng, std::size_t half) {
  const auto a = random_stochastic(rng, half);
  const auto b = random_stochastic(rng, half);
  Matrix m(2 * half);
  for (std::size_t i = 0; i < half; ++i) {
    for (std::size_t j = 0; j < half; ++j) {
      m.at(i, j) = a.at(i, j);
      m.at(half + i, half + j) = b.at(i, j);
    }
  }
  return validate_stochastic(std::move(m), 1e-9);
}

// Permutation matrix for a single n-cycle: periodic chain.
StochasticMatrix cyclic(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, (i + 1) % n) = 1.0;
  return validate_stochastic(std::move(m), 1e-9);
}

}  // namespace

TEST_CASE("fixed point examples") {
  SUBCASE("constant-row matrix returns its row") {
    const std::vector<double> v = {0.2, 0.3, 0.5};
    auto rows = std::vector<ProbVector>(3, ProbVector::validated(v));
    const auto p = stationary_fixed_point(StochasticMatrix::from_rows(rows));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(p[i] == doctest::Approx(v[i]).epsilon(1e-12));
    }
  }
  SUBCASE("two-state swap has the unique stationary point (1/2, 1/2)") {
    const auto p = stationary_fixed_point(cyclic(2));
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("identity returns the uniform point") {
    const auto p = stationary_fixed_point(StochasticMatrix::identity(6));
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(p[i] == doctest::Approx(1.0 / 6).epsilon(1e-12));
    }
  }
  SUBCASE("single expert") {
    const auto p = stationary_fixed_point(StochasticMatrix::identity(1));
    CHECK(p[0] == 1.0);
  }
}

TEST_CASE("residuals stay below 1e-9 across sizes, incl. degenerate chains") {
  Rng rng(101);
  int checked = 0;
  for (std::size_t n : {2, 4, 8, 16, 64}) {
    for (int rep = 0; rep < 100; ++rep) {
      const auto phi = random_stochastic(rng, n);
      const auto p = stationary_fixed_point(phi);
      CHECK(residual(phi, p) <= 1e-9);
      ++checked;
    }
  }
  for (std::size_t half : {1, 2, 4, 8}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto phi = reducible(rng, half);
      const auto p = stationary_fixed_point(phi);
      CHECK(residual(phi, p) <= 1e-9);
      ++checked;
    }
  }
  for (std::size_t n : {2, 3, 4, 6, 8, 16}) {
    const auto phi = cyclic(n);
    const auto p = stationary_fixed_point(phi);
    CHECK(residual(phi, p) <= 1e-9);
    ++checked;
  }
  CHECK(checked >= 500);
}

TEST_CASE("fixed point turns the instantaneous regret into a matrix inner product") {
  Rng rng(103);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = std::size_t{1} << (1 + rng.next_below(4));
    const auto phi = random_stochastic(rng, n);
    const auto p = stationary_fixed_point(phi);

    const auto comparator = random_stochastic(rng, n);
    std::vector<double> l(n);
    for (double& x : l) x = rng.next_uniform(-1.0, 1.0);

    // <p - comparator(p), l>
    const auto moved = comparator.apply_to_distribution(p.span());
    double lhs = 0.0;
    for (std::size_t i = 0; i < n; ++i) lhs += (p[i] - moved[i]) * l[i];

    // <p (x) l, phi - comparator>
    double rhs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        rhs += p[i] * l[j] * (phi.at(i, j) - comparator.at(i, j));
      }
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    CHECK(std::abs(lhs - rhs) <= 1e-9);
  }
}

TEST_CASE("output is deterministic for a given matrix") {
  Rng rng(107);
  for (int rep = 0; rep < 20; ++rep) {
    const auto phi = random_stochastic(rng, 16);
    const auto a = stationary_fixed_point(phi);
    const auto b = stationary_fixed_point(phi);
    for (std::size_t i = 0; i < 16; ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(
      stationary_fixed_point(StochasticMatrix::identity(2), {-1.0, 0}),
      InvariantViolationError);
  // A tiny iteration budget on a matrix that needs the fallback.
  FixedPointConfig cfg;
  cfg.tol = 1e-14;
  cfg.max_power_iters = 1;
  Matrix slow(4);
  // Two absorbing states and two transient ones leaking extremely slowly.
  slow.at(0, 0) = 1.0;
  slow.at(1, 1) = 1.0;
  slow.at(2, 2) = 0.999999;
  slow.at(2, 0) = 0.000001;
  slow.at(3, 3) = 0.999999;
  slow.at(3, 1) = 0.000001;
  const auto phi = validate_stochastic(std::move(slow), 1e-9);
  CHECK_THROWS_AS(stationary_fixed_point(phi, cfg), NoConvergenceError);
}
