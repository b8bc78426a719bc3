#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "phiregret/errors.hpp"
#include "phiregret/fixed_point.hpp"
#include "phiregret/learner.hpp"
#include "phiregret/simplex.hpp"

namespace phiregret {

namespace detail {

// Stable softmax of -eta * losses, in the log domain.
inline std::vector<double> gibbs_distribution(const std::vector<double>& losses,
                                              double eta) {
  std::vector<double> w(losses.size());
  double max_w = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < losses.size(); ++i) {
    w[i] = -eta * losses[i];
    if (w[i] > max_w) max_w = w[i];
  }
  double sum = 0.0;
  for (double& x : w) {
    x = std::exp(x - max_w);
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

inline double anytime_eta(std::size_t num_experts, std::int64_t round) {
  if (num_experts <= 1) return 0.0;
  return std::sqrt(std::log(static_cast<double>(num_experts)) /
                   static_cast<double>(round));
}

}  // namespace detail

// Multiplicative weights over the d experts with the anytime learning rate
// eta_t = sqrt(log d / t). Log-domain arithmetic; no overflow for any
// horizon of practical size.
class MwuLearner : public OnlineLearner {
 public:
  explicit MwuLearner(std::size_t d) : d_(d), cumulative_(d, 0.0) {}

  ProbVector step_predict() override {
    if (awaiting_update_) {
      throw OutOfOrderCallError("step_predict called twice without an update");
    }
    awaiting_update_ = true;
    ++round_;
    return distribution_for_eta(detail::anytime_eta(d_, round_));
  }

  void step_update(const LossVector& l) override {
    if (!awaiting_update_) {
      throw OutOfOrderCallError("step_update called before step_predict");
    }
    if (l.size() != d_) throw DimensionMismatchError("loss length mismatch");
    for (std::size_t i = 0; i < d_; ++i) cumulative_[i] += l[i];
    awaiting_update_ = false;
  }

  // Exposed so the exponential-weights formula can be checked directly.
  ProbVector distribution_for_eta(double eta) const {
    return ProbVector::validated(detail::gibbs_distribution(cumulative_, eta));
  }

  const std::vector<double>& cumulative_losses() const { return cumulative_; }

 private:
  std::size_t d_;
  std::vector<double> cumulative_;
  std::int64_t round_ = 0;
  bool awaiting_update_ = false;
};

// Swap-to-external reduction: one multiplicative-weights learner per row,
// row i fed the scaled loss p_{t,i} * l_t; the play is a fixed point of the
// stacked row distributions.
class BlumMansourLearner : public OnlineLearner {
 public:
  explicit BlumMansourLearner(std::size_t d, FixedPointConfig fp_cfg = {})
      : d_(d), fp_cfg_(fp_cfg), row_losses_(d, std::vector<double>(d, 0.0)) {}

  ProbVector step_predict() override {
    if (awaiting_update_) {
      throw OutOfOrderCallError("step_predict called twice without an update");
    }
    ++round_;
    const double eta = detail::anytime_eta(d_, round_);
    Matrix q(d_);
    for (std::size_t i = 0; i < d_; ++i) {
      const auto row = detail::gibbs_distribution(row_losses_[i], eta);
      for (std::size_t j = 0; j < d_; ++j) q.at(i, j) = row[j];
    }
    auto stacked = validate_stochastic(std::move(q), 1e-9);
    ProbVector p = stationary_fixed_point(stacked, fp_cfg_);
    last_play_ = p.entries();
    awaiting_update_ = true;
    return p;
  }

  void step_update(const LossVector& l) override {
    if (!awaiting_update_) {
      throw OutOfOrderCallError("step_update called before step_predict");
    }
    if (l.size() != d_) throw DimensionMismatchError("loss length mismatch");
    for (std::size_t i = 0; i < d_; ++i) {
      const double pi = last_play_[i];
      for (std::size_t j = 0; j < d_; ++j) row_losses_[i][j] += pi * l[j];
    }
    awaiting_update_ = false;
  }

 private:
  std::size_t d_;
  FixedPointConfig fp_cfg_;
  std::vector<std::vector<double>> row_losses_;
  std::vector<double> last_play_;
  std::int64_t round_ = 0;
  bool awaiting_update_ = false;
};

// Meta multiplicative weights over the d(d-1) single-pair modification
// rules; the play is a fixed point of the induced stochastic matrix. The
// modified losses live in [-1, 1] like the expert losses, so the same
// anytime learning rate applies with N = d(d-1).
class InternalMwuLearner : public OnlineLearner {
 public:
  explicit InternalMwuLearner(std::size_t d, FixedPointConfig fp_cfg = {})
      : d_(d), fp_cfg_(fp_cfg), rule_losses_(d * (d - 1), 0.0) {
    if (d < 2) {
      throw InvariantViolationError("pairwise modification rules need d >= 2");
    }
  }

  ProbVector step_predict() override {
    if (awaiting_update_) {
      throw OutOfOrderCallError("step_predict called twice without an update");
    }
    ++round_;
    const double eta = detail::anytime_eta(rule_losses_.size(), round_);
    const auto q = detail::gibbs_distribution(rule_losses_, eta);

    // Q = sum_{i->j} q_{i->j} * (identity with row i replaced by e^(j)).
    Matrix m(d_);
    std::vector<double> moved(d_, 0.0);
    std::size_t r = 0;
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) {
        if (i == j) continue;
        m.at(i, j) += q[r];
        moved[i] += q[r];
        ++r;
      }
    }
    for (std::size_t i = 0; i < d_; ++i) m.at(i, i) += 1.0 - moved[i];
    auto stacked = validate_stochastic(std::move(m), 1e-9);
    ProbVector p = stationary_fixed_point(stacked, fp_cfg_);
    last_play_ = p.entries();
    awaiting_update_ = true;
    return p;
  }

  void step_update(const LossVector& l) override {
    if (!awaiting_update_) {
      throw OutOfOrderCallError("step_update called before step_predict");
    }
    if (l.size() != d_) throw DimensionMismatchError("loss length mismatch");
    double play_loss = 0.0;
    for (std::size_t i = 0; i < d_; ++i) play_loss += last_play_[i] * l[i];
    std::size_t r = 0;
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) {
        if (i == j) continue;
        rule_losses_[r] += play_loss + last_play_[i] * (l[j] - l[i]);
        ++r;
      }
    }
    awaiting_update_ = false;
  }

 private:
  std::size_t d_;
  FixedPointConfig fp_cfg_;
  std::vector<double> rule_losses_;
  std::vector<double> last_play_;
  std::int64_t round_ = 0;
  bool awaiting_update_ = false;
};

}  // namespace phiregret
