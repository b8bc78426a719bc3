#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "phiregret/adversary.hpp"
#include "phiregret/baselines.hpp"
#include "phiregret/constraint.hpp"
#include "phiregret/fixed_point.hpp"
#include "phiregret/haar.hpp"
#include "phiregret/phi_learner.hpp"
#include "phiregret/regret.hpp"
#include "phiregret/relabel.hpp"
#include "phiregret/scalar_learner.hpp"
#include "phiregret/simplex.hpp"

// Full verification suite behind both the acceptance test binary and the
// `verify` CLI subcommand: structural property batteries plus the empirical
// scaling checks, with every tolerance pinned in code.

namespace phiregret::selfcheck {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

class Failures {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok) {
      ++failed_;
      if (first_.empty()) first_ = what;
    }
  }
  bool all_passed() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream os;
    os << (total_ - failed_) << "/" << total_ << " assertions";
    if (failed_ > 0) os << "; first failure: " << first_;
    return os.str();
  }

 private:
  std::int64_t total_ = 0;
  std::int64_t failed_ = 0;
  std::string first_;
};

inline StochasticMatrix random_stochastic(Rng& rng, std::size_t n) {
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

inline StochasticMatrix mode_heavy_stochastic(Rng& rng, std::size_t n) {
  const std::size_t pool_size = 1 + rng.next_below(3);
  std::vector<ProbVector> pool;
  for (std::size_t k = 0; k < pool_size; ++k) {
    pool.push_back(ProbVector::basis(n, rng.next_below(n)));
  }
  std::vector<ProbVector> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(pool[rng.next_below(pool_size)]);
  return StochasticMatrix::from_rows(rows);
}

inline std::vector<double> random_simplex_point(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = -std::log(1.0 - rng.next_unit());
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

template <typename... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Drives one learner/adversary pair, snapshotting the accumulator at the
// requested horizons (ascending). Returns one accumulator copy per horizon.
template <typename Learner>
std::vector<RegretAccumulator> drive_with_checkpoints(
    Learner& learner, Adversary& adversary, std::size_t d,
    const std::vector<std::int64_t>& horizons) {
  std::vector<RegretAccumulator> snapshots;
  RegretAccumulator stats(d);
  const std::int64_t final_t = horizons.back();
  std::size_t next = 0;
  for (std::int64_t t = 1; t <= final_t; ++t) {
    const auto p = learner.step_predict();
    const auto l = adversary.next(p);
    learner.step_update(l);
    stats.observe(p, l);
    while (next < horizons.size() && horizons[next] == t) {
      snapshots.push_back(stats);
      ++next;
    }
  }
  return snapshots;
}

inline double loglog_slope(const std::vector<double>& horizons,
                           const std::vector<double>& values) {
  const double n = static_cast<double>(horizons.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    const double x = std::log(horizons[k]);
    const double y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Shared scaling runs for the uniformity and self-map criteria: d = 32,
// T = 20000, segmented adversary with a single segment (one persistent
// best expert under noise), seeds {1, 2, 3}. A persistent target keeps the
// k = 1 calibration regret positive: no online play beats a constant
// signal in expectation, so the regret measures adaptation speed.
struct ScalingRuns {
  static constexpr std::size_t kD = 32;
  static constexpr std::int64_t kT = 20000;
  static constexpr std::size_t kSegments = 1;
  std::vector<RegretAccumulator> wavelet_stats;  // one per seed
  std::vector<RegretAccumulator> blum_mansour_stats;
  bool any_cap_hit = false;
  double seconds = 0.0;
};

inline const ScalingRuns& scaling_runs() {
  static const ScalingRuns runs = [] {
    ScalingRuns out;
    Timer timer;
    for (std::uint64_t seed : {1, 2, 3}) {
      {
        PhiLearner learner(ScalingRuns::kD);
        Adversary adv({AdversaryKind::Segmented, ScalingRuns::kSegments},
                      ScalingRuns::kD, ScalingRuns::kT, seed);
        auto snaps = drive_with_checkpoints(learner, adv, ScalingRuns::kD,
                                            {ScalingRuns::kT});
        out.wavelet_stats.push_back(std::move(snaps.back()));
        out.any_cap_hit = out.any_cap_hit || learner.exponent_cap_hits();
      }
      {
        BlumMansourLearner learner(ScalingRuns::kD);
        Adversary adv({AdversaryKind::Segmented, ScalingRuns::kSegments},
                      ScalingRuns::kD, ScalingRuns::kT, seed);
        auto snaps = drive_with_checkpoints(learner, adv, ScalingRuns::kD,
                                            {ScalingRuns::kT});
        out.blum_mansour_stats.push_back(std::move(snaps.back()));
      }
    }
    out.seconds = timer.seconds();
    return out;
  }();
  return runs;
}

inline double mean_block_regret(const std::vector<RegretAccumulator>& stats,
                                std::size_t k) {
  double sum = 0.0;
  for (const auto& s : stats) {
    sum += s.regret_vs(ComparatorSpec::block_constant(k).realize(s));
  }
  return sum / static_cast<double>(stats.size());
}

inline double mean_self_regret(const std::vector<RegretAccumulator>& stats,
                               std::size_t k) {
  double sum = 0.0;
  for (const auto& s : stats) {
    sum += s.regret_vs(ComparatorSpec::self_modified(k).realize(s));
  }
  return sum / static_cast<double>(stats.size());
}

}  // namespace detail

// Criterion 1: exact orthogonality of the non-identity features for every
// dyadic size up to 128, and analyze/synthesize round trips within 1e-10 on
// 1000 random stochastic matrices, all inside 10 seconds.
inline CheckResult check_feature_basis() {
  detail::Timer timer;
  detail::Failures f;

  for (std::size_t d_bar = 2; d_bar <= 128; d_bar *= 2) {
    // Column vectors pairwise orthogonal in integer arithmetic.
    std::vector<std::vector<long long>> columns;
    for (const auto& fid : enumerate_features(d_bar)) {
      if (fid.kind == FeatureId::Kind::Identity || fid.col != 0) continue;
      const Matrix dense = feature_matrix(fid, d_bar);
      std::vector<long long> col(d_bar);
      for (std::size_t i = 0; i < d_bar; ++i) {
        col[i] = static_cast<long long>(dense.at(i, 0));
      }
      columns.push_back(std::move(col));
    }
    f.expect(columns.size() == d_bar,
             "column vector count at d_bar=" + std::to_string(d_bar));
    for (std::size_t a = 0; a < columns.size(); ++a) {
      for (std::size_t b = a + 1; b < columns.size(); ++b) {
        long long inner = 0;
        for (std::size_t i = 0; i < d_bar; ++i) inner += columns[a][i] * columns[b][i];
        f.expect(inner == 0, "column vectors not orthogonal at d_bar=" +
                                 std::to_string(d_bar));
      }
    }
    // Every non-identity feature occupies exactly its own column, which
    // makes features with distinct columns orthogonal by disjoint support.
    for (const auto& fid : enumerate_features(d_bar)) {
      if (fid.kind == FeatureId::Kind::Identity) continue;
      const Matrix dense = feature_matrix(fid, d_bar);
      bool clean = true;
      for (std::size_t i = 0; i < d_bar && clean; ++i) {
        for (std::size_t j = 0; j < d_bar; ++j) {
          if (j != fid.col && dense.at(i, j) != 0.0) {
            clean = false;
            break;
          }
        }
      }
      f.expect(clean, "feature leaks outside its column at d_bar=" +
                          std::to_string(d_bar));
    }
  }

  // Dense pairwise cross-check at small sizes, every pair of features.
  for (std::size_t d_bar : {2, 4, 8}) {
    const auto features = enumerate_features(d_bar);
    std::vector<Matrix> dense;
    for (const auto& fid : features) dense.push_back(feature_matrix(fid, d_bar));
    for (std::size_t a = 1; a < features.size(); ++a) {
      for (std::size_t b = a + 1; b < features.size(); ++b) {
        long long inner = 0;
        for (std::size_t k = 0; k < d_bar * d_bar; ++k) {
          inner += static_cast<long long>(dense[a].data()[k]) *
                   static_cast<long long>(dense[b].data()[k]);
        }
        f.expect(inner == 0, "dense pair not orthogonal");
      }
    }
  }

  Rng rng(1001);
  const std::vector<std::size_t> sizes = {2, 4, 8, 16, 32, 64};
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t d_bar = sizes[rep % sizes.size()];
    const auto phi = detail::random_stochastic(rng, d_bar);
    const Rep rep_kind = rep % 2 == 0 ? Rep::One : Rep::Two;
    const Matrix back = synthesize(analyze(phi.matrix(), rep_kind), d_bar);
    double worst = 0.0;
    for (std::size_t k = 0; k < d_bar * d_bar; ++k) {
      worst = std::max(worst,
                       std::abs(back.data()[k] - phi.matrix().data()[k]));
    }
    f.expect(worst <= 1e-10, detail::format("round trip error %.3e", worst));
  }

  const double elapsed = timer.seconds();
  f.expect(elapsed < 10.0, "feature suite exceeded 10 s");
  return {"feature basis: orthogonality + round trip", f.all_passed(),
          f.summary() + detail::format(" (%.2f s)", elapsed), elapsed};
}

// Criterion 2: the structural property suites, each on >= 500 randomized
// instances with d_bar <= 64 and zero violations.
inline CheckResult check_structure_properties() {
  detail::Timer timer;
  detail::Failures f;
  Rng rng(2002);

  // Coefficient mass bounds: <= 1 under the direct expansion, <= 2 under
  // the identity-shifted one.
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t d_bar = std::size_t{1} << (1 + rng.next_below(6));
    const auto phi = detail::random_stochastic(rng, d_bar);
    for (Rep r : {Rep::One, Rep::Two}) {
      const auto coeffs = analyze(phi.matrix(), r);
      const double limit = r == Rep::One ? 1.0 : 2.0;
      const std::size_t levels = log2_exact(d_bar);
      double ones_mass = 0.0;
      for (std::size_t j = 0; j < d_bar; ++j) {
        ones_mass += std::abs(coeffs.get(FeatureId::all_ones_column(j)));
      }
      f.expect(ones_mass <= limit + 1e-12, "ones-column coefficient mass");
      for (std::size_t s = 1; s <= levels; ++s) {
        for (std::size_t l = 0; l < (d_bar >> s); ++l) {
          double mass = 0.0;
          for (std::size_t j = 0; j < d_bar; ++j) {
            mass += std::abs(coeffs.get(FeatureId::wavelet(s, l, j)));
          }
          f.expect(mass <= limit + 1e-12, "wavelet coefficient mass");
        }
      }
    }
  }

  // Constant-row blocks give exactly zero coefficients.
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t d_bar = std::size_t{1} << (2 + rng.next_below(5));
    const std::size_t half = d_bar / 2;
    // Rows constant on each half.
    Matrix m(d_bar);
    const auto top = detail::random_simplex_point(rng, d_bar);
    const auto bottom = detail::random_simplex_point(rng, d_bar);
    for (std::size_t i = 0; i < d_bar; ++i) {
      for (std::size_t j = 0; j < d_bar; ++j) {
        m.at(i, j) = i < half ? top[j] : bottom[j];
      }
    }
    const auto coeffs = analyze(m, Rep::One);
    const std::size_t levels = log2_exact(d_bar);
    for (std::size_t s = 1; s < levels; ++s) {  // strictly inside one half
      for (std::size_t l = 0; l < (d_bar >> s); ++l) {
        for (std::size_t j = 0; j < d_bar; ++j) {
          f.expect(coeffs.get(FeatureId::wavelet(s, l, j)) == 0.0,
                   "constant block coefficient not exactly zero");
        }
      }
    }
  }

  // Lifts preserve complexity.
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t d = 2 + rng.next_below(40);
    const auto r = Relabeling::build_default(d);
    const auto phi = rep % 2 == 0 ? detail::mode_heavy_stochastic(rng, d)
                                  : detail::random_stochastic(rng, d);
    const auto lifted_u = lift_comparator_uniform(phi, r);
    f.expect(row_switch_count(lifted_u) <=
                 2 * (d - uniformity(phi, kRowCompareTol)),
             "row-switch bound violated");
    const auto lifted_s = lift_comparator_self(phi, r);
    f.expect(r.d_bar() - self_degree(lifted_s, kRowCompareTol) <=
                 2 * (d - self_degree(phi, kRowCompareTol)),
             "self-degree bound violated");
  }

  // Projection wrapper inequality and processed-gradient magnitude bounds.
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = std::size_t{1} << (1 + rng.next_below(6));
    Matrix improper(n);
    for (auto& x : improper.data()) x = rng.next_uniform(-2.0, 2.0);
    const auto rec = project(std::move(improper));

    const auto p = detail::random_simplex_point(rng, n);
    std::vector<double> l(n);
    for (double& x : l) x = rng.next_uniform(-1.0, 1.0);
    Matrix g(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) g.at(i, j) = p[i] * l[j];
    }
    const Matrix processed = process_gradient(g, rec);

    const auto comparator = detail::random_stochastic(rng, n);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        lhs += g.at(i, j) * (rec.phi_proper.at(i, j) - comparator.at(i, j));
        rhs += processed.at(i, j) *
               (rec.phi_improper.at(i, j) - comparator.at(i, j));
      }
    }
    f.expect(lhs <= rhs + 1e-9, "wrapper inequality violated");

    const auto feed = inner_products_all(processed);
    f.expect(std::abs(feed.get(FeatureId::identity())) <= 2.0 + 1e-12,
             "identity gradient bound violated");
    const std::size_t levels = log2_exact(n);
    for (std::size_t j = 0; j < n; ++j) {
      f.expect(std::abs(feed.get(FeatureId::all_ones_column(j))) <= 2.0 + 1e-12,
               "ones gradient bound violated");
    }
    for (std::size_t s = 1; s <= levels; ++s) {
      const std::size_t width = std::size_t{1} << s;
      for (std::size_t l2 = 0; l2 < (n >> s); ++l2) {
        double mass = 0.0;
        for (std::size_t i = l2 * width; i < (l2 + 1) * width; ++i) mass += p[i];
        for (std::size_t j = 0; j < n; ++j) {
          f.expect(std::abs(feed.get(FeatureId::wavelet(s, l2, j))) <=
                       2.0 * mass + 1e-12,
                   "wavelet gradient bound violated");
        }
      }
    }
  }

  const double elapsed = timer.seconds();
  return {"structure properties: coefficients, lifts, wrapper, gradients",
          f.all_passed(), f.summary() + detail::format(" (%.2f s)", elapsed),
          elapsed};
}

// Criterion 3: scalar learner contract at slack 3 on the adversarial
// battery with the comparator grid, T = 1e5, within 30 seconds.
inline CheckResult check_scalar_contract() {
  detail::Timer timer;
  detail::Failures f;
  const double g = 2.0;
  const std::int64_t horizon = 100000;
  const std::vector<double> grid = {0.0,  0.01, -0.01, 0.1, -0.1,
                                    1.0,  -1.0, 10.0,  -10.0};

  Rng rng(3003);
  std::vector<std::pair<std::string, std::function<double(double, std::int64_t)>>>
      battery;
  battery.emplace_back("constant+", [g](double, std::int64_t) { return g; });
  battery.emplace_back("constant-", [g](double, std::int64_t) { return -g; });
  battery.emplace_back("alternating",
                       [g](double, std::int64_t t) { return t % 2 ? -g : g; });
  battery.emplace_back("random_sign", [g, &rng](double, std::int64_t) {
    return rng.next_unit() < 0.5 ? -g : g;
  });
  battery.emplace_back("sign_of_prediction",
                       [g](double x, std::int64_t) { return x >= 0.0 ? g : -g; });

  for (auto& [name, source] : battery) {
    ScalarLearner learner(1.0, g);
    std::vector<double> xs(horizon), cs(horizon);
    bool finite = true;
    for (std::int64_t t = 0; t < horizon; ++t) {
      const double x = learner.predict();
      finite = finite && std::isfinite(x);
      const double c = source(x, t);
      learner.update(c);
      xs[t] = x;
      cs[t] = c;
    }
    f.expect(finite, name + ": non-finite prediction");
    for (double u : grid) {
      // Extended precision: capped bets reach ~1e303 under constant
      // gradients and the true (hugely negative) sum overflows double.
      long double regret = 0.0L;
      for (std::int64_t t = 0; t < horizon; ++t) {
        regret += static_cast<long double>(cs[t]) *
                  (static_cast<long double>(xs[t]) - u);
      }
      f.expect(regret <= static_cast<long double>(
                             3.0 * learner.comparator_regret_bound(u)),
               name + detail::format(": contract violated at u=%g", u));
      if (u == 0.0) {
        f.expect(regret <= static_cast<long double>(
                               learner.comparator_regret_bound(0.0)),
                 name + ": wealth safety violated");
      }
    }
  }

  const double elapsed = timer.seconds();
  f.expect(elapsed < 30.0, "scalar battery exceeded 30 s");
  return {"scalar learner: slack-3 comparator contract", f.all_passed(),
          f.summary() + detail::format(" (%.2f s)", elapsed), elapsed};
}

// Criterion 4: fixed-point residuals on 1000 matrices including reducible
// and periodic constructions.
inline CheckResult check_fixed_point_residuals() {
  detail::Timer timer;
  detail::Failures f;
  Rng rng(4004);

  auto residual = [](const StochasticMatrix& phi, const ProbVector& p) {
    const auto image = phi.apply_to_distribution(p.span());
    double r = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) r += std::abs(p[i] - image[i]);
    return r;
  };

  int instances = 0;
  for (std::size_t n : {2, 4, 8, 16, 64}) {
    for (int rep = 0; rep < 170; ++rep) {
      const auto phi = detail::random_stochastic(rng, n);
      f.expect(residual(phi, stationary_fixed_point(phi)) <= 1e-9,
               "residual too large on a random matrix");
      ++instances;
    }
  }
  // Reducible block-diagonal chains.
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t half = 1 + rng.next_below(8);
    const auto a = detail::random_stochastic(rng, half);
    const auto b = detail::random_stochastic(rng, half);
    Matrix m(2 * half);
    for (std::size_t i = 0; i < half; ++i) {
      for (std::size_t j = 0; j < half; ++j) {
        m.at(i, j) = a.at(i, j);
        m.at(half + i, half + j) = b.at(i, j);
      }
    }
    const auto phi = validate_stochastic(std::move(m), 1e-9);
    f.expect(residual(phi, stationary_fixed_point(phi)) <= 1e-9,
             "residual too large on a reducible matrix");
    ++instances;
  }
  // Periodic cycles and random permutations.
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rng.next_below(15);
    Matrix m(n);
    // Random cyclic shift by a coprime-ish offset; always a permutation.
    const std::size_t shift = 1 + rng.next_below(n - 1);
    for (std::size_t i = 0; i < n; ++i) m.at(i, (i + shift) % n) = 1.0;
    const auto phi = validate_stochastic(std::move(m), 1e-9);
    f.expect(residual(phi, stationary_fixed_point(phi)) <= 1e-9,
             "residual too large on a periodic matrix");
    ++instances;
  }
  f.expect(instances >= 1000, "instance count");

  const double elapsed = timer.seconds();
  return {"fixed point: residuals on random/reducible/periodic chains",
          f.all_passed(), f.summary() + detail::format(" (%.2f s)", elapsed),
          elapsed};
}

// Criterion 5: uniformity-axis scaling at d = 32, T = 20000 under the
// segmented adversary; nested block comparators with k in {1,...,32}.
inline CheckResult check_uniformity_scaling() {
  detail::Timer timer;
  detail::Failures f;
  const auto& runs = detail::scaling_runs();
  const std::vector<std::size_t> ks = {1, 2, 4, 8, 16, 32};

  std::vector<double> regret;
  for (std::size_t k : ks) {
    regret.push_back(detail::mean_block_regret(runs.wavelet_stats, k));
  }

  // (a) non-decreasing in k up to 10% slack between adjacent values.
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    f.expect(regret[i + 1] >= regret[i] - 0.10 * std::abs(regret[i]),
             detail::format("monotonicity broken between k=%zu and k=%zu",
                            ks[i], ks[i + 1]));
  }

  // (b) shape bound with the constant calibrated once at k = 1 and a fixed
  // headroom factor of 5 afterwards.
  const double d = static_cast<double>(detail::ScalingRuns::kD);
  const double t_plus_d = static_cast<double>(detail::ScalingRuns::kT) + d;
  const double log_pow = std::pow(std::log(d), 1.5);
  const double calibrated = regret[0] / (std::sqrt(t_plus_d) * log_pow);
  f.expect(calibrated > 0.0, "calibration regret at k=1 is not positive");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double bound = 5.0 * calibrated *
                         std::sqrt(static_cast<double>(ks[i]) * t_plus_d) *
                         log_pow;
    f.expect(regret[i] <= bound,
             detail::format("shape bound broken at k=%zu: %.1f > %.1f", ks[i],
                            regret[i], bound));
  }

  // (c) adaptivity advantage at k = 1 against the swap-to-external baseline
  // on the same seeds.
  const double wavelet_k1 = regret[0];
  const double baseline_k1 =
      detail::mean_block_regret(runs.blum_mansour_stats, 1);
  f.expect(wavelet_k1 <= baseline_k1,
           detail::format("k=1 regret %.1f exceeds baseline %.1f", wavelet_k1,
                          baseline_k1));
  f.expect(!runs.any_cap_hit, "scalar exponent cap was reached");

  const double elapsed = timer.seconds();
  f.expect(runs.seconds < 300.0, "scaling runs exceeded 5 minutes");

  std::ostringstream detail_os;
  detail_os << "regret(k)=";
  for (double r : regret) detail_os << detail::format(" %.1f", r);
  detail_os << detail::format("; baseline k=1 %.1f", baseline_k1)
            << detail::format(" (%.2f s incl. shared runs)", elapsed);
  return {"uniformity-axis scaling", f.all_passed(),
          f.summary() + ";" + detail_os.str(), elapsed};
}

// Criterion 6: self-map-axis scaling on the same protocol with rerouted-row
// comparators, k in {1,...,16}.
inline CheckResult check_self_map_scaling() {
  detail::Timer timer;
  detail::Failures f;
  const auto& runs = detail::scaling_runs();
  const std::vector<std::size_t> ks = {1, 2, 4, 8, 16};

  std::vector<double> regret;
  for (std::size_t k : ks) {
    regret.push_back(detail::mean_self_regret(runs.wavelet_stats, k));
  }
  const double d = static_cast<double>(detail::ScalingRuns::kD);
  const double t_plus_d = static_cast<double>(detail::ScalingRuns::kT) + d;
  const double log_pow = std::pow(std::log(d), 1.5);
  const double calibrated = regret[0] / (std::sqrt(t_plus_d) * log_pow);
  f.expect(calibrated > 0.0, "calibration regret at k=1 is not positive");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double bound = 5.0 * calibrated *
                         std::sqrt(static_cast<double>(ks[i]) * t_plus_d) *
                         log_pow;
    f.expect(regret[i] <= bound,
             detail::format("shape bound broken at k=%zu: %.1f > %.1f", ks[i],
                            regret[i], bound));
  }

  const double elapsed = timer.seconds();
  std::ostringstream detail_os;
  detail_os << "regret(k)=";
  for (double r : regret) detail_os << detail::format(" %.1f", r);
  return {"self-map-axis scaling", f.all_passed(),
          f.summary() + ";" + detail_os.str() +
              detail::format(" (%.2f s)", elapsed),
          elapsed};
}

// Criterion 7: quantile regret at d = 64, T = 20000 under iid uniform
// losses, one constant calibrated at eps = 1/d.
inline CheckResult check_quantile_scaling() {
  detail::Timer timer;
  detail::Failures f;
  const std::size_t d = 64;
  const std::int64_t horizon = 20000;
  const std::vector<double> eps_grid = {1.0 / 64, 1.0 / 16, 1.0 / 4, 1.0 / 2};

  std::vector<double> mean_regret(eps_grid.size(), 0.0);
  bool cap_hit = false;
  const std::vector<std::uint64_t> seeds = {1, 2};
  for (std::uint64_t seed : seeds) {
    PhiLearner learner(d);
    Adversary adv({AdversaryKind::IidUniform, 1}, d, horizon, seed);
    auto snaps = detail::drive_with_checkpoints(learner, adv, d, {horizon});
    cap_hit = cap_hit || learner.exponent_cap_hits();
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
      mean_regret[i] += snaps.back().quantile_regret(eps_grid[i]);
    }
  }
  for (double& r : mean_regret) r /= static_cast<double>(seeds.size());

  const double t = static_cast<double>(horizon);
  const double calibrated =
      mean_regret[0] / std::sqrt(t * std::log(static_cast<double>(d)));
  f.expect(calibrated > 0.0, "calibration regret at eps=1/d is not positive");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double bound = calibrated * std::sqrt(t * std::log(1.0 / eps_grid[i]));
    // 1e-9 absolute slack covers the float round trip at the anchor itself.
    f.expect(mean_regret[i] <= bound + 1e-9,
             detail::format("quantile bound broken at eps=%g: %.1f > %.1f",
                            eps_grid[i], mean_regret[i], bound));
  }
  const double ratio = mean_regret.back() / mean_regret.front();
  const double ratio_limit =
      1.2 * std::sqrt(std::log(2.0) / std::log(64.0)) + 0.5;
  f.expect(ratio <= ratio_limit,
           detail::format("regret ratio %.3f exceeds %.3f", ratio, ratio_limit));
  f.expect(!cap_hit, "scalar exponent cap was reached");

  const double elapsed = timer.seconds();
  std::ostringstream detail_os;
  detail_os << "regret(eps)=";
  for (double r : mean_regret) detail_os << detail::format(" %.1f", r);
  detail_os << detail::format("; ratio %.3f <= %.3f", ratio, ratio_limit);
  return {"quantile scaling", f.all_passed(),
          f.summary() + ";" + detail_os.str() +
              detail::format(" (%.2f s)", elapsed),
          elapsed};
}

// Criterion 8: swap regret under the rotating trap grows like sqrt(T):
// fitted log-log slope within [0.4, 0.6] for d in {8, 32}.
inline CheckResult check_swap_slope() {
  detail::Timer timer;
  detail::Failures f;
  const std::vector<std::int64_t> horizons = {1000, 10000, 100000};

  for (std::size_t d : {8, 32}) {
    PhiLearner learner(d);
    Adversary adv({AdversaryKind::SwapTrap, 1}, d,
                  horizons.back(), 1);
    const auto snaps =
        detail::drive_with_checkpoints(learner, adv, d, horizons);
    std::vector<double> ts, regs;
    bool positive = true;
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      const double swap = snaps[i].swap_regret();
      positive = positive && swap > 0.0;
      ts.push_back(static_cast<double>(horizons[i]));
      regs.push_back(std::max(swap, 1e-9));
    }
    f.expect(positive, detail::format("swap regret not positive at d=%zu", d));
    const double slope = detail::loglog_slope(ts, regs);
    f.expect(slope >= 0.4 && slope <= 0.6,
             detail::format("slope %.3f outside [0.4, 0.6] at d=%zu", slope, d));
    f.expect(!learner.exponent_cap_hits(), "scalar exponent cap was reached");
  }

  const double elapsed = timer.seconds();
  return {"swap-regret growth under the rotating trap", f.all_passed(),
          f.summary() + detail::format(" (%.2f s)", elapsed), elapsed};
}

// Criterion 9: computational profile. The fixed point is the largest
// per-round component at d = 64; a T = 1e4 run finishes inside 3 minutes;
// the learner's memory accounting stays below 100 MB at d = 256.
inline CheckResult check_performance() {
  detail::Timer timer;
  detail::Failures f;

  PhiLearner learner(64);
  Adversary adv({AdversaryKind::IidUniform, 1}, 64, 10000, 1);
  (void)detail::drive_with_checkpoints(learner, adv, 64, {10000});
  const double elapsed_run = timer.seconds();
  f.expect(elapsed_run < 180.0,
           detail::format("d=64 T=1e4 run took %.1f s", elapsed_run));
  const auto& diag = learner.diagnostics();
  const std::int64_t runner_up = diag.largest_non_fixed_point_ns();
  f.expect(diag.fixed_point_ns >= runner_up,
           detail::format("fixed point is not the largest stage "
                          "(fp %lld vs %lld ns)",
                          static_cast<long long>(diag.fixed_point_ns),
                          static_cast<long long>(runner_up)));
  f.expect(!learner.exponent_cap_hits(), "scalar exponent cap was reached");

  PhiLearner big(256);
  Adversary big_adv({AdversaryKind::IidUniform, 1}, 256, 3, 1);
  (void)detail::drive_with_checkpoints(big, big_adv, 256, {3});
  const std::size_t bytes = big.approx_memory_bytes();
  f.expect(bytes < 100ull * 1024 * 1024,
           detail::format("d=256 memory accounting at %zu bytes", bytes));

  const double elapsed = timer.seconds();
  return {"performance: fixed-point dominance, wallclock, memory",
          f.all_passed(),
          f.summary() +
              detail::format("; run %.1f s, fp %.0f ms vs next stage %.0f ms "
                             "(predicts %.0f, synth %.0f, proj %.0f, grad "
                             "%.0f, feat %.0f, updates %.0f), mem %.1f MB",
                             elapsed_run,
                             static_cast<double>(diag.fixed_point_ns) / 1e6,
                             static_cast<double>(runner_up) / 1e6,
                             static_cast<double>(diag.scalar_predict_ns) / 1e6,
                             static_cast<double>(diag.synthesis_ns) / 1e6,
                             static_cast<double>(diag.projection_ns) / 1e6,
                             static_cast<double>(diag.gradient_ns) / 1e6,
                             static_cast<double>(diag.feature_extract_ns) / 1e6,
                             static_cast<double>(diag.scalar_update_ns) / 1e6,
                             static_cast<double>(bytes) / (1024.0 * 1024.0)),
          elapsed};
}

// Criterion 10: the argmin best-swap construction equals exhaustive
// enumeration over all d^d vertex maps on 200 random short traces.
inline CheckResult check_swap_oracle() {
  detail::Timer timer;
  detail::Failures f;
  Rng rng(10010);

  int checked = 0;
  for (std::size_t d = 2; d <= 4; ++d) {
    for (int rep = 0; rep < 70; ++rep) {
      Trace trace;
      trace.d = d;
      const std::size_t rounds = 1 + rng.next_below(8);
      for (std::size_t t = 0; t < rounds; ++t) {
        auto p = detail::random_simplex_point(rng, d);
        std::vector<double> l(d);
        for (double& x : l) x = rng.next_uniform(-1.0, 1.0);
        trace.append(ProbVector::validated(std::move(p)),
                     LossVector::validated(std::move(l)));
      }
      const auto fast = best_swap_comparator(trace);

      std::size_t total = 1;
      for (std::size_t i = 0; i < d; ++i) total *= d;
      double best_regret = -std::numeric_limits<double>::infinity();
      std::vector<std::size_t> best_map(d, 0);
      for (std::size_t code = 0; code < total; ++code) {
        std::vector<std::size_t> map(d);
        std::size_t rest = code;
        for (std::size_t i = 0; i < d; ++i) {
          map[i] = rest % d;
          rest /= d;
        }
        std::vector<ProbVector> rows;
        for (std::size_t i = 0; i < d; ++i) {
          rows.push_back(ProbVector::basis(d, map[i]));
        }
        const double reg = regret_of(trace, StochasticMatrix::from_rows(rows));
        if (reg > best_regret) {
          best_regret = reg;
          best_map = map;
        }
      }
      std::vector<ProbVector> rows;
      for (std::size_t i = 0; i < d; ++i) {
        rows.push_back(ProbVector::basis(d, best_map[i]));
      }
      f.expect(fast == StochasticMatrix::from_rows(rows),
               "argmin and exhaustive comparators differ");
      ++checked;
    }
  }
  f.expect(checked >= 200, "trace count");

  const double elapsed = timer.seconds();
  return {"best-swap comparator vs exhaustive enumeration", f.all_passed(),
          f.summary() + detail::format(" (%.2f s)", elapsed), elapsed};
}

inline std::vector<CheckResult> run_all() {
  std::vector<CheckResult> results;
  results.push_back(check_feature_basis());
  results.push_back(check_structure_properties());
  results.push_back(check_scalar_contract());
  results.push_back(check_fixed_point_residuals());
  results.push_back(check_uniformity_scaling());
  results.push_back(check_self_map_scaling());
  results.push_back(check_quantile_scaling());
  results.push_back(check_swap_slope());
  results.push_back(check_performance());
  results.push_back(check_swap_oracle());
  return results;
}

}  // namespace phiregret::selfcheck
