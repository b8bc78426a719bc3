#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phiregret/constraint.hpp"
#include "phiregret/haar.hpp"
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

std::vector<double> random_simplex_point(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = -std::log(1.0 - rng.next_unit());
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}

Matrix outer(const std::vector<double>& p, const std::vector<double>& l) {
  Matrix g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < l.size(); ++j) g.at(i, j) = p[i] * l[j];
  }
  return g;
}

}  // namespace

TEST_CASE("projection stage examples") {
  SUBCASE("mixed-sign row") {
    Matrix m(4);
    m.at(0, 0) = 0.5;
    m.at(0, 1) = -0.2;
    m.at(0, 2) = 0.3;
    const auto rec = project(std::move(m));
    CHECK(rec.phi_plus.at(0, 0) == 0.5);
    CHECK(rec.phi_plus.at(0, 1) == 0.0);
    CHECK(rec.phi_plus.at(0, 2) == 0.3);
    CHECK(rec.phi_proper.at(0, 0) == doctest::Approx(0.625));
    CHECK(rec.phi_proper.at(0, 1) == 0.0);
    CHECK(rec.phi_proper.at(0, 2) == doctest::Approx(0.375));
    CHECK(rec.phi_proper.at(0, 3) == 0.0);
  }
  SUBCASE("all-negative row falls back to uniform") {
    Matrix m(4);
    for (std::size_t j = 0; j < 4; ++j) m.at(0, j) = -static_cast<double>(j + 1);
    const auto rec = project(std::move(m));
    for (std::size_t j = 0; j < 4; ++j) CHECK(rec.phi_proper.at(0, j) == 0.25);
  }
  SUBCASE("stochastic input is a fixed point of the projection") {
    Rng rng(5);
    const auto phi = random_stochastic(rng, 8);
    const auto rec = project(phi.matrix());
    for (std::size_t k = 0; k < 64; ++k) {
      CHECK(rec.phi_proper.matrix().data()[k] ==
            doctest::Approx(phi.matrix().data()[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradient processing hand traces") {
  SUBCASE("centering adds the row inner product") {
    // p = e^(1), l = (1,-1,0,0), proper row 0 = e^(2): center = -1, no
    // clipping anywhere in row 0.
    Matrix improper(4);
    for (std::size_t j = 0; j < 4; ++j) improper.at(0, j) = 0.25;  // positive
    improper.at(0, 1) = 1.0;
    for (std::size_t i = 1; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) improper.at(i, j) = 0.25;
    }
    auto rec = project(std::move(improper));
    // Overwrite the proper matrix with the exact rows the trace wants.
    Matrix proper(4);
    proper.at(0, 1) = 1.0;
    for (std::size_t i = 1; i < 4; ++i) proper.at(i, i) = 1.0;
    rec.phi_proper = validate_stochastic(std::move(proper), 1e-9);

    const Matrix g = outer({1.0, 0.0, 0.0, 0.0}, {1.0, -1.0, 0.0, 0.0});
    const Matrix processed = process_gradient(g, rec);
    CHECK(processed.at(0, 0) == 2.0);
    CHECK(processed.at(0, 1) == 0.0);
    CHECK(processed.at(0, 2) == 1.0);
    CHECK(processed.at(0, 3) == 1.0);
    for (std::size_t i = 1; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) CHECK(processed.at(i, j) == 0.0);
    }
  }
  SUBCASE("zero gradient stays zero") {
    Matrix improper(3);
    improper.at(0, 0) = -1.0;
    const auto rec = project(std::move(improper));
    const Matrix processed = process_gradient(Matrix(3), rec);
    for (double x : processed.data()) CHECK(x == 0.0);
  }
  SUBCASE("clipped entries only pass negative feedback") {
    // One entry with improper < 0 and positive centered gradient: clipped to 0.
    Matrix improper(2);
    improper.at(0, 0) = -0.5;
    improper.at(0, 1) = 1.0;
    improper.at(1, 0) = 1.0;
    const auto rec = project(std::move(improper));
    Matrix g(2);
    g.at(0, 0) = 0.7;  // centered value stays positive: proper row = e^(2)
    g.at(0, 1) = 0.0;
    const Matrix processed = process_gradient(g, rec);
    CHECK(processed.at(0, 0) == 0.0);           // min(0.7 - 0, 0) after centering
    CHECK(processed.at(0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("entries at exactly zero keep the centered gradient") {
    // The keep branch applies whenever the improper entry was not clipped,
    // including entries equal to zero.
    Matrix improper(2);  // all zeros: nothing is clipped
    const auto rec = project(std::move(improper));
    for (std::size_t j = 0; j < 2; ++j) CHECK(rec.phi_proper.at(0, j) == 0.5);

    const Matrix g = outer({0.5, 0.5}, {1.0, -1.0});
    const Matrix processed = process_gradient(g, rec);
    // Row centers are zero, so the processed gradient equals g itself.
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(processed.at(i, 0) == 0.5);
      CHECK(processed.at(i, 1) == -0.5);
    }
    const double identity_feed =
        feature_inner(processed, FeatureId::identity());
    CHECK(identity_feed == 0.0);
    CHECK(std::abs(identity_feed) <= 2.0);
  }
}

TEST_CASE("projection preserves the regret ordering against any comparator") {
  Rng rng(17);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = std::size_t{1} << (1 + rng.next_below(4));
    Matrix improper(n);
    for (auto& x : improper.data()) x = rng.next_uniform(-2.0, 2.0);
    const auto rec = project(std::move(improper));

    const auto p = random_simplex_point(rng, n);
    std::vector<double> l(n);
    for (double& x : l) x = rng.next_uniform(-1.0, 1.0);
    const Matrix g = outer(p, l);
    const Matrix processed = process_gradient(g, rec);

    const auto comparator = random_stochastic(rng, n);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        lhs += g.at(i, j) * (rec.phi_proper.at(i, j) - comparator.at(i, j));
        rhs += processed.at(i, j) *
               (rec.phi_improper.at(i, j) - comparator.at(i, j));
      }
    }
    CHECK(lhs <= rhs + 1e-9);
  }
}

TEST_CASE("processed gradients meet the per-feature magnitude bounds") {
  Rng rng(19);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = std::size_t{1} << (1 + rng.next_below(4));
    Matrix improper(n);
    for (auto& x : improper.data()) x = rng.next_uniform(-2.0, 2.0);
    const auto rec = project(std::move(improper));

    const auto p = random_simplex_point(rng, n);
    std::vector<double> l(n);
    for (double& x : l) x = rng.next_uniform(-1.0, 1.0);
    const Matrix processed = process_gradient(outer(p, l), rec);

    const auto feed = inner_products_all(processed);
    for (const auto& f : enumerate_features(n)) {
      const double value = feed.get(f);
      if (f.kind == FeatureId::Kind::Identity) {
        CHECK(std::abs(value) <= 2.0 + 1e-12);
        continue;
      }
      const auto iv = support(f, n);
      double mass = 0.0;
      for (std::size_t i = iv.lo; i < iv.hi; ++i) mass += p[i];
      CHECK(std::abs(value) <= 2.0 * mass + 1e-12);
      CHECK(std::abs(value) <= 2.0 + 1e-12);
    }
  }
}
