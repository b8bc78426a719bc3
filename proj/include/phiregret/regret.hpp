#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "phiregret/errors.hpp"
#include "phiregret/kahan.hpp"
#include "phiregret/rng.hpp"
#include "phiregret/simplex.hpp"

namespace phiregret {

// Full interaction transcript. Large runs can rely on RegretAccumulator
// instead; the trace is the ground-truth record the oracles work from.
struct Trace {
  std::size_t d = 0;
  std::uint64_t seed = 0;
  std::string algorithm;
  std::vector<ProbVector> plays;
  std::vector<LossVector> losses;

  std::size_t rounds() const { return plays.size(); }

  void append(ProbVector p, LossVector l) {
    if (p.size() != d || l.size() != d) {
      throw DimensionMismatchError("trace round has wrong dimension");
    }
    plays.push_back(std::move(p));
    losses.push_back(std::move(l));
  }
};

// reg_T(phi) = sum_t <p_t, l_t> - sum_t <phi(p_t), l_t>, compensated.
inline double regret_of(const Trace& trace, const StochasticMatrix& phi) {
  if (phi.size() != trace.d) {
    throw DimensionMismatchError("comparator dimension does not match trace");
  }
  KahanSum total;
  for (std::size_t t = 0; t < trace.rounds(); ++t) {
    const auto& p = trace.plays[t];
    const auto& l = trace.losses[t];
    double play_loss = 0.0;
    for (std::size_t i = 0; i < trace.d; ++i) play_loss += p[i] * l[i];
    const auto moved = phi.apply_to_distribution(p.span());
    double moved_loss = 0.0;
    for (std::size_t j = 0; j < trace.d; ++j) moved_loss += moved[j] * l[j];
    total += play_loss - moved_loss;
  }
  return total.value();
}

namespace detail {

// Row-wise argmin of the play/loss cross moment, ties to the smallest
// column: the vertex comparator maximizing reg_T over all of S(d).
inline StochasticMatrix best_swap_from_moment(const Matrix& moment) {
  const std::size_t d = moment.size();
  std::vector<ProbVector> rows;
  rows.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (moment.at(i, j) < moment.at(i, best)) best = j;
    }
    rows.push_back(ProbVector::basis(d, best));
  }
  return StochasticMatrix::from_rows(rows);
}

}  // namespace detail

// Streaming sufficient statistics: the cross moment M = sum_t p_t (x) l_t,
// cumulative expert losses and the algorithm's loss. Every fixed-comparator
// regret is linear in these, so checkpoint regrets come out exactly without
// replaying the trace.
class RegretAccumulator {
 public:
  explicit RegretAccumulator(std::size_t d)
      : d_(d), moment_(d * d), cumulative_(d) {}

  void observe(const ProbVector& p, const LossVector& l) {
    if (p.size() != d_ || l.size() != d_) {
      throw DimensionMismatchError("observation has wrong dimension");
    }
    double play_loss = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      const double pi = p[i];
      play_loss += pi * l[i];
      for (std::size_t j = 0; j < d_; ++j) moment_.add(i * d_ + j, pi * l[j]);
    }
    for (std::size_t j = 0; j < d_; ++j) cumulative_.add(j, l[j]);
    algorithm_loss_ += play_loss;
    ++rounds_;
  }

  std::size_t d() const { return d_; }
  std::int64_t rounds() const { return rounds_; }
  double algorithm_loss() const { return algorithm_loss_.value(); }

  Matrix cross_moment() const {
    Matrix m(d_);
    for (std::size_t k = 0; k < d_ * d_; ++k) m.data()[k] = moment_.value(k);
    return m;
  }

  std::vector<double> cumulative_losses() const { return cumulative_.values(); }

  double regret_vs(const StochasticMatrix& phi) const {
    if (phi.size() != d_) {
      throw DimensionMismatchError("comparator dimension mismatch");
    }
    double moved = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) {
        moved += phi.at(i, j) * moment_.value(i * d_ + j);
      }
    }
    return algorithm_loss() - moved;
  }

  double external_regret() const {
    double best = cumulative_.value(0);
    for (std::size_t j = 1; j < d_; ++j) best = std::min(best, cumulative_.value(j));
    return algorithm_loss() - best;
  }

  double internal_regret() const {
    double best = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) {
        if (i == j) continue;
        best = std::max(best,
                        moment_.value(i * d_ + i) - moment_.value(i * d_ + j));
      }
    }
    return best;
  }

  double swap_regret() const { return regret_vs(best_swap()); }

  StochasticMatrix best_swap() const {
    return detail::best_swap_from_moment(cross_moment());
  }

  // Loss gap to the ceil(eps * d)-th best expert in hindsight, sort ties
  // broken by expert index.
  double quantile_regret(double eps) const {
    const double lo = 1.0 / static_cast<double>(d_);
    if (!(eps >= lo - 1e-12) || !(eps <= 1.0 + 1e-12)) {
      throw EpsOutOfRangeError("quantile level " + std::to_string(eps) +
                               " outside [1/d, 1]");
    }
    std::vector<std::size_t> order(d_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto cum = cumulative_.values();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (cum[a] != cum[b]) return cum[a] < cum[b];
      return a < b;
    });
    auto rank = static_cast<std::size_t>(
        std::ceil(eps * static_cast<double>(d_) - 1e-12));
    rank = std::clamp<std::size_t>(rank, 1, d_);
    return algorithm_loss() - cum[order[rank - 1]];
  }

 private:
  std::size_t d_;
  KahanArray moment_;
  KahanArray cumulative_;
  KahanSum algorithm_loss_;
  std::int64_t rounds_ = 0;
};

inline RegretAccumulator accumulate(const Trace& trace) {
  RegretAccumulator acc(trace.d);
  for (std::size_t t = 0; t < trace.rounds(); ++t) {
    acc.observe(trace.plays[t], trace.losses[t]);
  }
  return acc;
}

inline StochasticMatrix best_swap_comparator(const Trace& trace) {
  if (trace.rounds() == 0) {
    throw InvariantViolationError("best-swap comparator needs at least one round");
  }
  return accumulate(trace).best_swap();
}

inline double quantile_regret(const Trace& trace, double eps) {
  return accumulate(trace).quantile_regret(eps);
}

// Comparator construction recipes. Hindsight variants are realized from the
// accumulated cross moment; explicit rows/targets make the comparator fixed.
struct ComparatorSpec {
  enum class Kind {
    Constant,
    BlockConstant,
    SelfModified,
    RandomStochastic,
    BestSwapInHindsight
  };

  Kind kind = Kind::BestSwapInHindsight;
  std::vector<double> constant_u;                        // Constant
  std::size_t blocks = 0;                                // BlockConstant
  std::vector<std::vector<double>> block_rows;           // optional, size = blocks
  std::size_t modified = 0;                              // SelfModified
  std::vector<std::pair<std::size_t, std::size_t>> targets;  // optional (i -> j)
  std::uint64_t seed = 0;                                // RandomStochastic

  static ComparatorSpec constant(std::vector<double> u) {
    ComparatorSpec s;
    s.kind = Kind::Constant;
    s.constant_u = std::move(u);
    return s;
  }
  static ComparatorSpec block_constant(std::size_t blocks) {
    ComparatorSpec s;
    s.kind = Kind::BlockConstant;
    s.blocks = blocks;
    return s;
  }
  static ComparatorSpec self_modified(std::size_t modified) {
    ComparatorSpec s;
    s.kind = Kind::SelfModified;
    s.modified = modified;
    return s;
  }
  static ComparatorSpec random_stochastic(std::uint64_t seed) {
    ComparatorSpec s;
    s.kind = Kind::RandomStochastic;
    s.seed = seed;
    return s;
  }
  static ComparatorSpec best_swap() { return ComparatorSpec{}; }

  std::string kind_name() const {
    switch (kind) {
      case Kind::Constant:
        return "constant";
      case Kind::BlockConstant:
        return "block_constant";
      case Kind::SelfModified:
        return "self_modified";
      case Kind::RandomStochastic:
        return "random_stochastic";
      case Kind::BestSwapInHindsight:
        return "best_swap";
    }
    return {};
  }

  std::string params() const {
    switch (kind) {
      case Kind::Constant:
        return "u=dim" + std::to_string(constant_u.size());
      case Kind::BlockConstant:
        return "k=" + std::to_string(blocks) +
               (block_rows.empty() ? "" : ";explicit");
      case Kind::SelfModified:
        return "k=" + std::to_string(modified) +
               (targets.empty() ? "" : ";explicit");
      case Kind::RandomStochastic:
        return "seed=" + std::to_string(seed);
      case Kind::BestSwapInHindsight:
        return "";
    }
    return {};
  }

  StochasticMatrix realize(const RegretAccumulator& stats) const;
};

namespace detail {

// Nested partition used for block comparators: one block of the first
// d - k + 1 rows followed by singletons. Refining k keeps earlier partitions
// coarser, so hindsight-optimal regrets are monotone in k by construction.
inline std::vector<std::pair<std::size_t, std::size_t>> nested_blocks(
    std::size_t d, std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  blocks.reserve(k);
  blocks.emplace_back(0, d - k + 1);
  for (std::size_t r = d - k + 1; r < d; ++r) blocks.emplace_back(r, r + 1);
  return blocks;
}

}  // namespace detail

inline StochasticMatrix ComparatorSpec::realize(
    const RegretAccumulator& stats) const {
  const std::size_t d = stats.d();
  switch (kind) {
    case Kind::Constant: {
      if (constant_u.size() != d) {
        throw DimensionMismatchError("constant comparator has wrong dimension");
      }
      const auto u = ProbVector::validated(constant_u);
      return StochasticMatrix::from_rows(std::vector<ProbVector>(d, u));
    }
    case Kind::BlockConstant: {
      if (blocks < 1 || blocks > d) {
        throw InvariantViolationError("block count must lie in [1, d]");
      }
      const auto partition = detail::nested_blocks(d, blocks);
      std::vector<ProbVector> rows(d, ProbVector::uniform(d));
      const Matrix moment = stats.cross_moment();
      for (std::size_t b = 0; b < partition.size(); ++b) {
        ProbVector row = ProbVector::uniform(d);
        if (!block_rows.empty()) {
          if (block_rows.size() != blocks) {
            throw DimensionMismatchError("explicit rows must match block count");
          }
          row = ProbVector::validated(block_rows[b]);
        } else {
          // Best single column for this block's pooled mass.
          std::size_t best = 0;
          double best_value = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            double pooled = 0.0;
            for (std::size_t i = partition[b].first; i < partition[b].second; ++i) {
              pooled += moment.at(i, j);
            }
            if (j == 0 || pooled < best_value) {
              best = j;
              best_value = pooled;
            }
          }
          row = ProbVector::basis(d, best);
        }
        for (std::size_t i = partition[b].first; i < partition[b].second; ++i) {
          rows[i] = row;
        }
      }
      return StochasticMatrix::from_rows(rows);
    }
    case Kind::SelfModified: {
      if (modified < 1 || modified > d) {
        throw InvariantViolationError("modified row count must lie in [1, d]");
      }
      std::vector<ProbVector> rows;
      rows.reserve(d);
      for (std::size_t i = 0; i < d; ++i) rows.push_back(ProbVector::basis(d, i));
      if (!targets.empty()) {
        for (const auto& [i, j] : targets) {
          if (i >= d || j >= d || i == j) {
            throw InvariantViolationError("target map must reroute i to j != i");
          }
          rows[i] = ProbVector::basis(d, j);
        }
        return StochasticMatrix::from_rows(rows);
      }
      // Hindsight: rank rows by the gain of rerouting to the best non-self
      // column, modify the top k (ties to the smaller row index).
      const Matrix moment = stats.cross_moment();
      std::vector<std::pair<double, std::size_t>> gains;
      std::vector<std::size_t> best_target(d);
      for (std::size_t i = 0; i < d; ++i) {
        std::size_t best = i == 0 ? 1 : 0;
        for (std::size_t j = 0; j < d; ++j) {
          if (j == i) continue;
          if (moment.at(i, j) < moment.at(i, best)) best = j;
        }
        best_target[i] = best;
        gains.emplace_back(moment.at(i, i) - moment.at(i, best), i);
      }
      std::sort(gains.begin(), gains.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      for (std::size_t r = 0; r < modified; ++r) {
        const std::size_t i = gains[r].second;
        rows[i] = ProbVector::basis(d, best_target[i]);
      }
      return StochasticMatrix::from_rows(rows);
    }
    case Kind::RandomStochastic: {
      Rng rng = Rng::substream(seed, "comparator");
      Matrix m(d);
      for (std::size_t i = 0; i < d; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double e = -std::log(1.0 - rng.next_unit());
          m.at(i, j) = e;
          sum += e;
        }
        for (std::size_t j = 0; j < d; ++j) m.at(i, j) /= sum;
      }
      return validate_stochastic(std::move(m), 1e-9);
    }
    case Kind::BestSwapInHindsight:
      return stats.best_swap();
  }
  throw InvariantViolationError("unreachable comparator kind");
}

}  // namespace phiregret
