#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "phiregret/relabel.hpp"
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

// Random matrix whose rows are drawn from a small pool, so the most frequent
// row is heavily repeated.
StochasticMatrix mode_heavy_stochastic(Rng& rng, std::size_t n) {
  const std::size_t pool_size = 1 + rng.next_below(3);
  std::vector<ProbVector> pool;
  for (std::size_t k = 0; k < pool_size; ++k) {
    pool.push_back(ProbVector::basis(n, rng.next_below(n)));
  }
  std::vector<ProbVector> rows;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(pool[rng.next_below(pool_size)]);
  }
  return StochasticMatrix::from_rows(rows);
}

ProbVector random_simplex_point(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = -std::log(1.0 - rng.next_unit());
    sum += x;
  }
  for (double& x : v) x /= sum;
  return ProbVector::validated(std::move(v));
}

LossVector random_loss(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.next_uniform(-1.0, 1.0);
  return LossVector::validated(std::move(v));
}

double inner(std::span<const double> a, const LossVector& l) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * l[i];
  return s;
}

}  // namespace

TEST_CASE("default relabeling examples") {
  auto r4 = Relabeling::build_default(4);
  CHECK(r4.d_bar() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r4.block(i) == Relabeling::Interval{i, i + 1});
  }

  auto r3 = Relabeling::build_default(3);
  CHECK(r3.d_bar() == 4);
  CHECK(r3.block(0) == Relabeling::Interval{0, 2});
  CHECK(r3.block(1) == Relabeling::Interval{2, 3});
  CHECK(r3.block(2) == Relabeling::Interval{3, 4});

  auto r5 = Relabeling::build_default(5);
  CHECK(r5.d_bar() == 8);
  CHECK(r5.block(0) == Relabeling::Interval{0, 2});
  CHECK(r5.block(1) == Relabeling::Interval{2, 4});
  CHECK(r5.block(2) == Relabeling::Interval{4, 6});
  CHECK(r5.block(3) == Relabeling::Interval{6, 7});
  CHECK(r5.block(4) == Relabeling::Interval{7, 8});
}

TEST_CASE("structural invariants hold for every d in [1, 257]") {
  for (std::size_t d = 1; d <= 257; ++d) {
    auto r = Relabeling::build_default(d);
    CHECK((r.d_bar() & (r.d_bar() - 1)) == 0);
    CHECK(r.d_bar() >= d);
    CHECK((r.d_bar() < 2 * d || d == 1));
    std::size_t covered = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const auto& iv = r.block(i);
      CHECK(iv.size() >= 1);
      CHECK(iv.size() <= 2);
      for (std::size_t k = iv.lo; k < iv.hi; ++k) {
        CHECK(r.original_of(k) == i);
        ++covered;
      }
    }
    CHECK(covered == r.d_bar());
  }
}

TEST_CASE("user relabelings pass through the structural validator") {
  // Custom ordering for d=3: duplicate the last expert instead.
  auto r = Relabeling::validated(3, {{0, 1}, {1, 2}, {2, 4}});
  CHECK(r.block(2).size() == 2);
  CHECK(r.original_of(3) == 2);

  CHECK_THROWS_AS(Relabeling::validated(3, {{0, 2}, {1, 3}, {3, 4}}),
                  InvariantViolationError);  // overlap
  CHECK_THROWS_AS(Relabeling::validated(3, {{0, 1}, {1, 2}, {2, 3}}),
                  InvariantViolationError);  // uncovered slot
  CHECK_THROWS_AS(Relabeling::validated(2, {{0, 2}, {0, 0}}),
                  InvariantViolationError);  // empty block
  CHECK_THROWS_AS(Relabeling::validated(5, {{0, 3}, {3, 4}, {4, 6}, {6, 7}, {7, 8}}),
                  InvariantViolationError);  // block wider than 2
}

TEST_CASE("loss lifting examples") {
  auto r3 = Relabeling::build_default(3);
  auto lifted = lift_loss(LossVector::validated({0.3, -0.7, 1.0}), r3);
  CHECK(lifted[0] == 0.3);
  CHECK(lifted[1] == 0.3);
  CHECK(lifted[2] == -0.7);
  CHECK(lifted[3] == 1.0);

  auto r4 = Relabeling::build_default(4);
  auto same = lift_loss(LossVector::validated({0.1, 0.2, 0.3, 0.4}), r4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(same[i] == doctest::Approx(0.1 * (i + 1)));

  auto r2 = Relabeling::build_default(2);
  auto l2 = lift_loss(LossVector::validated({1.0, -1.0}), r2);
  CHECK(l2[0] == 1.0);
  CHECK(l2[1] == -1.0);
}

TEST_CASE("distribution collapse examples") {
  auto r3 = Relabeling::build_default(3);
  auto p = collapse_distribution(ProbVector::validated({0.1, 0.2, 0.3, 0.4}), r3);
  CHECK(p[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(p[1] == 0.3);
  CHECK(p[2] == 0.4);

  auto u = collapse_distribution(ProbVector::uniform(4), r3);
  CHECK(u[0] == 0.5);
  CHECK(u[1] == 0.25);
  CHECK(u[2] == 0.25);

  auto r4 = Relabeling::build_default(4);
  auto q = collapse_distribution(ProbVector::uniform(4), r4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(q[i] == 0.25);
}

TEST_CASE("uniform lift examples") {
  auto r3 = Relabeling::build_default(3);

  auto constant = StochasticMatrix::from_rows(
      std::vector<ProbVector>(3, ProbVector::basis(3, 0)));
  auto lifted = lift_comparator_uniform(constant, r3);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(lifted.at(i, 0) == 0.5);
    CHECK(lifted.at(i, 1) == 0.5);
    CHECK(lifted.at(i, 2) == 0.0);
    CHECK(lifted.at(i, 3) == 0.0);
  }

  auto r4 = Relabeling::build_default(4);
  Rng rng(3);
  auto phi = random_stochastic(rng, 4);
  CHECK(lift_comparator_uniform(phi, r4) == phi);

  auto id_lift = lift_comparator_uniform(StochasticMatrix::identity(3), r3);
  CHECK(id_lift.at(0, 0) == 0.5);
  CHECK(id_lift.at(0, 1) == 0.5);
  CHECK(id_lift.at(1, 0) == 0.5);
  CHECK(id_lift.at(1, 1) == 0.5);
  CHECK(id_lift.at(2, 2) == 1.0);
  CHECK(id_lift.at(3, 3) == 1.0);
}

TEST_CASE("self lift examples") {
  auto r3 = Relabeling::build_default(3);

  CHECK(lift_comparator_self(StochasticMatrix::identity(3), r3) ==
        StochasticMatrix::identity(4));

  auto phi = StochasticMatrix::from_rows(
      {ProbVector::basis(3, 1), ProbVector::basis(3, 1), ProbVector::basis(3, 2)});
  auto lifted = lift_comparator_self(phi, r3);
  CHECK(lifted == StochasticMatrix::from_rows(
                      {ProbVector::basis(4, 2), ProbVector::basis(4, 2),
                       ProbVector::basis(4, 2), ProbVector::basis(4, 3)}));

  auto r4 = Relabeling::build_default(4);
  Rng rng(5);
  auto same = random_stochastic(rng, 4);
  CHECK(lift_comparator_self(same, r4) == same);
}

TEST_CASE("both lifts preserve the transformed loss") {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 2 + rng.next_below(9);
    auto r = Relabeling::build_default(d);
    auto phi = random_stochastic(rng, d);
    auto p_bar = random_simplex_point(rng, r.d_bar());
    auto l = random_loss(rng, d);
    auto l_bar = lift_loss(l, r);
    auto p = collapse_distribution(p_bar, r);

    const double original =
        inner(phi.apply_to_distribution(p.span()), l);
    for (const auto& lifted :
         {lift_comparator_uniform(phi, r), lift_comparator_self(phi, r)}) {
      double moved = 0.0;
      const auto image = lifted.apply_to_distribution(p_bar.span());
      for (std::size_t j = 0; j < r.d_bar(); ++j) moved += image[j] * l_bar[j];
      CHECK(moved == doctest::Approx(original).epsilon(1e-9));
    }
    // The plain losses agree as well.
    double base = 0.0;
    for (std::size_t i = 0; i < d; ++i) base += p[i] * l[i];
    double base_bar = 0.0;
    for (std::size_t k = 0; k < r.d_bar(); ++k) base_bar += p_bar[k] * l_bar[k];
    CHECK(base == doctest::Approx(base_bar).epsilon(1e-9));
  }
}

TEST_CASE("uniform lift bounds the row switches by twice the non-modal rows") {
  Rng rng(13);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t d = 1 + rng.next_below(12);
    auto r = Relabeling::build_default(d);
    auto phi = rep % 2 == 0 ? mode_heavy_stochastic(rng, d)
                            : random_stochastic(rng, d);
    const auto lifted = lift_comparator_uniform(phi, r);
    const std::size_t unif = uniformity(phi, kRowCompareTol);
    CHECK(row_switch_count(lifted) <= 2 * (d - unif));
  }
}

TEST_CASE("self lift bounds the non-self rows by twice the original count") {
  Rng rng(17);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t d = 1 + rng.next_below(12);
    auto r = Relabeling::build_default(d);
    StochasticMatrix phi = [&] {
      if (rep % 2 == 0) {
        // Mostly-self matrix: a few rows rerouted to a random vertex.
        std::vector<ProbVector> rows;
        for (std::size_t i = 0; i < d; ++i) {
          if (rng.next_unit() < 0.3) {
            rows.push_back(ProbVector::basis(d, rng.next_below(d)));
          } else {
            rows.push_back(ProbVector::basis(d, i));
          }
        }
        return StochasticMatrix::from_rows(rows);
      }
      return random_stochastic(rng, d);
    }();
    const auto lifted = lift_comparator_self(phi, r);
    const std::size_t self = self_degree(phi, kRowCompareTol);
    CHECK(r.d_bar() - self_degree(lifted, kRowCompareTol) <= 2 * (d - self));
  }
}
