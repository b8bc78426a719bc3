#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "phiregret/errors.hpp"
#include "phiregret/simplex.hpp"

namespace phiregret {

// Embedding of d experts into d_bar = 2^ceil(log2 d) augmented slots via
// disjoint blocks of 1-2 consecutive indices. Immutable after construction.
class Relabeling {
 public:
  struct Interval {
    std::size_t lo;  // first augmented index (0-based)
    std::size_t hi;  // one past the last
    std::size_t size() const { return hi - lo; }
    bool operator==(const Interval&) const = default;
  };

  // Duplicates the first (d_bar - d) experts, each placed next to itself,
  // preserving the original ordering.
  static Relabeling build_default(std::size_t d) {
    if (d < 1) throw InvariantViolationError("expert count must be positive");
    std::size_t levels = 0;
    std::size_t d_bar = 1;
    while (d_bar < d) {
      d_bar <<= 1;
      ++levels;
    }
    const std::size_t duplicated = d_bar - d;
    std::vector<Interval> forward(d);
    std::size_t next = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t width = i < duplicated ? 2 : 1;
      forward[i] = {next, next + width};
      next += width;
    }
    return Relabeling(d, d_bar, levels, std::move(forward));
  }

  // Structural validator for user-supplied relabelings: blocks must be
  // consecutive, of size 1-2, disjoint, and cover [0, d_bar).
  static Relabeling validated(std::size_t d, std::vector<Interval> forward) {
    if (forward.size() != d) {
      throw InvariantViolationError("relabeling must define one block per expert");
    }
    std::size_t d_bar = 1;
    std::size_t levels = 0;
    while (d_bar < d) {
      d_bar <<= 1;
      ++levels;
    }
    std::vector<bool> covered(d_bar, false);
    for (std::size_t i = 0; i < d; ++i) {
      const Interval& iv = forward[i];
      if (iv.hi <= iv.lo || iv.size() > 2 || iv.hi > d_bar) {
        throw InvariantViolationError("relabeling block " + std::to_string(i) +
                                      " is not a 1-2 wide interval in range");
      }
      for (std::size_t k = iv.lo; k < iv.hi; ++k) {
        if (covered[k]) {
          throw InvariantViolationError("relabeling blocks overlap at slot " +
                                        std::to_string(k));
        }
        covered[k] = true;
      }
    }
    for (std::size_t k = 0; k < d_bar; ++k) {
      if (!covered[k]) {
        throw InvariantViolationError("relabeling leaves slot " +
                                      std::to_string(k) + " uncovered");
      }
    }
    return Relabeling(d, d_bar, levels, std::move(forward));
  }

  std::size_t d() const { return d_; }
  std::size_t d_bar() const { return d_bar_; }
  std::size_t levels() const { return levels_; }  // S = ceil(log2 d)
  const Interval& block(std::size_t expert) const { return forward_[expert]; }
  std::size_t original_of(std::size_t slot) const { return inverse_[slot]; }
  std::size_t block_size_of_slot(std::size_t slot) const {
    return forward_[inverse_[slot]].size();
  }

 private:
  Relabeling(std::size_t d, std::size_t d_bar, std::size_t levels,
             std::vector<Interval> forward)
      : d_(d), d_bar_(d_bar), levels_(levels), forward_(std::move(forward)),
        inverse_(d_bar) {
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t k = forward_[i].lo; k < forward_[i].hi; ++k) {
        inverse_[k] = i;
      }
    }
  }

  std::size_t d_;
  std::size_t d_bar_;
  std::size_t levels_;
  std::vector<Interval> forward_;
  std::vector<std::size_t> inverse_;
};

// Augmented loss: slot k receives the loss of its original expert.
inline LossVector lift_loss(const LossVector& l, const Relabeling& r) {
  if (l.size() != r.d()) {
    throw DimensionMismatchError("loss length does not match expert count");
  }
  std::vector<double> out(r.d_bar());
  for (std::size_t k = 0; k < r.d_bar(); ++k) out[k] = l[r.original_of(k)];
  return LossVector::validated(std::move(out));
}

// Collapse of an augmented distribution: expert i receives the total mass of
// its block. Preserves <p, l> = <p_bar, lift_loss(l)>.
inline ProbVector collapse_distribution(const ProbVector& p_bar,
                                        const Relabeling& r) {
  if (p_bar.size() != r.d_bar()) {
    throw DimensionMismatchError("distribution length does not match d_bar");
  }
  std::vector<double> out(r.d(), 0.0);
  for (std::size_t i = 0; i < r.d(); ++i) {
    const auto& iv = r.block(i);
    for (std::size_t k = iv.lo; k < iv.hi; ++k) out[i] += p_bar[k];
  }
  return ProbVector::validated(std::move(out));
}

// Row-variation-preserving lift: entry (i, j) copies the original entry
// scaled down by the width of j's block. Rows inside one block are equal, so
// adjacent-row switches at most double relative to the original row changes.
inline StochasticMatrix lift_comparator_uniform(const StochasticMatrix& phi,
                                                const Relabeling& r) {
  if (phi.size() != r.d()) {
    throw DimensionMismatchError("comparator size does not match expert count");
  }
  Matrix out(r.d_bar());
  for (std::size_t i = 0; i < r.d_bar(); ++i) {
    const std::size_t oi = r.original_of(i);
    for (std::size_t j = 0; j < r.d_bar(); ++j) {
      const std::size_t oj = r.original_of(j);
      out.at(i, j) = phi.at(oi, oj) /
                     static_cast<double>(r.block_size_of_slot(j));
    }
  }
  return validate_stochastic(std::move(out), 1e-9);
}

// Self-degree-preserving lift: the diagonal keeps the original diagonal
// entry; off-diagonal mass is routed to the first slot of each foreign
// block; everything else is zero. Row sums must land exactly on 1 by
// construction; any mismatch is a hard error, not renormalized.
inline StochasticMatrix lift_comparator_self(const StochasticMatrix& phi,
                                             const Relabeling& r) {
  if (phi.size() != r.d()) {
    throw DimensionMismatchError("comparator size does not match expert count");
  }
  const std::size_t d_bar = r.d_bar();
  std::vector<bool> is_block_head(d_bar, false);
  for (std::size_t k = 0; k < r.d(); ++k) is_block_head[r.block(k).lo] = true;

  Matrix out(d_bar);
  for (std::size_t i = 0; i < d_bar; ++i) {
    const std::size_t oi = r.original_of(i);
    const auto& own = r.block(oi);
    double sum = 0.0;
    for (std::size_t j = 0; j < d_bar; ++j) {
      double value = 0.0;
      if (j == i) {
        value = phi.at(oi, oi);
      } else if (is_block_head[j] && !(j >= own.lo && j < own.hi)) {
        value = phi.at(oi, r.original_of(j));
      }
      out.at(i, j) = value;
      sum += value;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvariantViolationError(
          "self lift produced row " + std::to_string(i) + " with mass " +
          std::to_string(sum));
    }
  }
  return validate_stochastic(std::move(out), 1e-9);
}

}  // namespace phiregret
