#pragma once

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "phiregret/constraint.hpp"
#include "phiregret/errors.hpp"
#include "phiregret/fixed_point.hpp"
#include "phiregret/haar.hpp"
#include "phiregret/kahan.hpp"
#include "phiregret/learner.hpp"
#include "phiregret/relabel.hpp"
#include "phiregret/scalar_learner.hpp"
#include "phiregret/simplex.hpp"

namespace phiregret {

// The assembled wavelet learner: one comparator-adaptive scalar learner per
// matrix feature, synthesis of the improper matrix prediction, two-stage
// projection, fixed point, collapse to the original expert set, and the
// matching gradient feedback. Single-threaded per instance (strict
// predict/update alternation); distinct instances are independent.
class PhiLearner : public OnlineLearner {
 public:
  // Accumulated internals used by the regret-identity tests and by the
  // performance instrumentation. Timing is split per pipeline stage.
  struct Diagnostics {
    KahanSum inner_gradient_prediction;  // sum_t <g_t, phi_t>
    KahanArray gradient_sum;             // sum_t g_t, flattened d_bar x d_bar
    std::int64_t rounds = 0;
    std::int64_t scalar_predict_ns = 0;  // querying every per-feature learner
    std::int64_t synthesis_ns = 0;       // assembling the improper matrix
    std::int64_t projection_ns = 0;      // two-stage projection + collapse
    std::int64_t fixed_point_ns = 0;     // stationary distribution solve
    std::int64_t gradient_ns = 0;        // outer product + gradient processing
    std::int64_t feature_extract_ns = 0; // per-feature inner products
    std::int64_t scalar_update_ns = 0;   // feeding every per-feature learner

    std::int64_t largest_non_fixed_point_ns() const {
      std::int64_t worst = scalar_predict_ns;
      for (std::int64_t v : {synthesis_ns, projection_ns, gradient_ns,
                             feature_extract_ns, scalar_update_ns}) {
        worst = std::max(worst, v);
      }
      return worst;
    }
  };

  PhiLearner(std::size_t d, Relabeling relabeling, FixedPointConfig fp_cfg = {})
      : d_(d),
        relabeling_(std::move(relabeling)),
        fp_cfg_(fp_cfg),
        features_(enumerate_features(relabeling_.d_bar())),
        coeffs_(relabeling_.d_bar()) {
    if (relabeling_.d() != d) {
      throw DimensionMismatchError("relabeling built for a different expert count");
    }
    learners_.reserve(features_.size());
    for (const FeatureId& f : features_) {
      learners_.emplace_back(epsilon_for(f), kLipschitz);
    }
    diagnostics_.gradient_sum =
        KahanArray(relabeling_.d_bar() * relabeling_.d_bar());
  }

  explicit PhiLearner(std::size_t d, FixedPointConfig fp_cfg = {})
      : PhiLearner(d, Relabeling::build_default(d), fp_cfg) {}

  // Hyperparameter schedule per feature. j's block width enters through the
  // relabeling; d is the original expert count, d_bar the augmented one.
  double epsilon_for(const FeatureId& f) const {
    if (f.kind == FeatureId::Kind::Identity) return 1.0;
    const double d_sq = static_cast<double>(d_) * static_cast<double>(d_);
    const double block =
        static_cast<double>(relabeling_.block_size_of_slot(f.col));
    if (f.kind == FeatureId::Kind::AllOnesColumn) {
      return static_cast<double>(relabeling_.d_bar()) / (d_sq * block);
    }
    return 1.0 / (d_sq * block);
  }

  ProbVector step_predict() override {
    if (awaiting_update_) {
      throw OutOfOrderCallError("step_predict called twice without an update");
    }
    const auto t0 = Clock::now();
    for (std::size_t k = 0; k < learners_.size(); ++k) {
      coeffs_.at_index(k) = learners_[k].predict();
    }
    const auto t1 = Clock::now();
    Matrix improper = synthesize(coeffs_, relabeling_.d_bar());
    const auto t2 = Clock::now();
    record_ = project(std::move(improper));
    const auto t3 = Clock::now();
    p_bar_ = stationary_fixed_point(record_->phi_proper, fp_cfg_);
    const auto t4 = Clock::now();
    ProbVector p = collapse_distribution(*p_bar_, relabeling_);
    const auto t5 = Clock::now();

    diagnostics_.scalar_predict_ns += ns(t0, t1);
    diagnostics_.synthesis_ns += ns(t1, t2);
    diagnostics_.projection_ns += ns(t2, t3) + ns(t4, t5);
    diagnostics_.fixed_point_ns += ns(t3, t4);
    awaiting_update_ = true;
    return p;
  }

  void step_update(const LossVector& l) override {
    if (!awaiting_update_) {
      throw OutOfOrderCallError("step_update called before step_predict");
    }
    if (l.size() != d_) {
      throw DimensionMismatchError("loss length does not match expert count");
    }
    const auto t0 = Clock::now();
    const std::size_t n = relabeling_.d_bar();
    const LossVector lifted = lift_loss(l, relabeling_);
    const ProbVector& p_bar = *p_bar_;

    Matrix gradient(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double pi = p_bar[i];
      auto row = gradient.row(i);
      for (std::size_t j = 0; j < n; ++j) row[j] = pi * lifted[j];
    }
    const Matrix processed = process_gradient(gradient, *record_);
    const auto t1 = Clock::now();
    const CoefficientVector feed = inner_products_all(processed);
    const auto t2 = Clock::now();
    for (std::size_t k = 0; k < learners_.size(); ++k) {
      assert(std::abs(feed.at_index(k)) <= kLipschitz + 1e-9);
      learners_[k].update(feed.at_index(k));
    }
    const auto t3 = Clock::now();

    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto g_row = gradient.row(i);
      const auto phi_row = record_->phi_proper.row(i);
      for (std::size_t j = 0; j < n; ++j) inner += g_row[j] * phi_row[j];
    }
    diagnostics_.inner_gradient_prediction += inner;
    for (std::size_t k = 0; k < n * n; ++k) {
      diagnostics_.gradient_sum.add(k, gradient.data()[k]);
    }
    ++diagnostics_.rounds;
    diagnostics_.gradient_ns += ns(t0, t1);
    diagnostics_.feature_extract_ns += ns(t1, t2);
    diagnostics_.scalar_update_ns += ns(t2, t3);
    awaiting_update_ = false;
  }

  std::size_t d() const { return d_; }
  std::size_t d_bar() const { return relabeling_.d_bar(); }
  const Relabeling& relabeling() const { return relabeling_; }
  const std::vector<FeatureId>& features() const { return features_; }
  const Diagnostics& diagnostics() const { return diagnostics_; }

  // Cached intermediates of the round in flight (predict done, update
  // pending); null otherwise or before the first round.
  const ProjectionRecord* last_projection() const {
    return record_ ? &*record_ : nullptr;
  }
  const ProbVector* last_augmented_play() const {
    return p_bar_ ? &*p_bar_ : nullptr;
  }

  bool exponent_cap_hits() const {
    for (const auto& lrn : learners_) {
      if (lrn.exponent_cap_hit()) return true;
    }
    return false;
  }

  std::size_t approx_memory_bytes() const {
    const std::size_t n = relabeling_.d_bar();
    std::size_t bytes = 0;
    bytes += features_.capacity() * sizeof(FeatureId);
    bytes += learners_.capacity() * sizeof(ScalarLearner);
    bytes += coeffs_.size() * sizeof(double);
    bytes += 3 * n * n * sizeof(double);  // projection record
    bytes += 2 * n * n * sizeof(double);  // gradient-sum accumulator
    bytes += n * n * sizeof(double);      // transient gradient matrices
    bytes += 4 * n * sizeof(double);
    return bytes;
  }

  static constexpr double kLipschitz = 2.0;

 private:
  using Clock = std::chrono::steady_clock;
  static std::int64_t ns(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count();
  }

  std::size_t d_;
  Relabeling relabeling_;
  FixedPointConfig fp_cfg_;
  std::vector<FeatureId> features_;
  std::vector<ScalarLearner> learners_;
  CoefficientVector coeffs_;
  std::optional<ProjectionRecord> record_;
  std::optional<ProbVector> p_bar_;
  bool awaiting_update_ = false;
  Diagnostics diagnostics_;
};

}  // namespace phiregret
