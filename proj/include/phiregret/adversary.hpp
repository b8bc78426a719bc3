#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "phiregret/errors.hpp"
#include "phiregret/rng.hpp"
#include "phiregret/simplex.hpp"

namespace phiregret {

enum class AdversaryKind { IidUniform, Segmented, SpiteAdaptive, SwapTrap };

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::IidUniform;
  std::size_t segments = 1;  // Segmented only

  std::string describe() const {
    switch (kind) {
      case AdversaryKind::IidUniform:
        return "iid_uniform";
      case AdversaryKind::Segmented:
        return "segmented:k=" + std::to_string(segments);
      case AdversaryKind::SpiteAdaptive:
        return "spite_adaptive";
      case AdversaryKind::SwapTrap:
        return "swap_trap";
    }
    return {};
  }
};

// Loss generators for the interaction protocol. All outputs stay in
// [-1, 1]^d. Deterministic given (spec, d, horizon, seed); draws come from a
// dedicated substream so other seeded components never shift them.
class Adversary {
 public:
  Adversary(AdversarySpec spec, std::size_t d, std::int64_t horizon,
            std::uint64_t seed)
      : spec_(spec),
        d_(d),
        rng_(Rng::substream(seed, "adversary")) {
    if (spec_.kind == AdversaryKind::Segmented) {
      if (spec_.segments < 1) {
        throw InvariantViolationError("segmented adversary needs >= 1 segment");
      }
      segment_len_ = (horizon + static_cast<std::int64_t>(spec_.segments) - 1) /
                     static_cast<std::int64_t>(spec_.segments);
      if (segment_len_ < 1) segment_len_ = 1;
    }
  }

  LossVector next(const ProbVector& p) {
    if (p.size() != d_) throw DimensionMismatchError("play length mismatch");
    std::vector<double> l(d_, 0.0);
    switch (spec_.kind) {
      case AdversaryKind::IidUniform:
        for (double& x : l) x = rng_.next_uniform(-1.0, 1.0);
        break;
      case AdversaryKind::Segmented: {
        // The segment's best expert carries a small mean edge under noise;
        // per-round signal stays below the noise floor, so hindsight
        // comparators keep a positive margin over any online play.
        if (round_ % segment_len_ == 0) {
          segment_best_ = static_cast<std::size_t>(rng_.next_below(d_));
        }
        for (std::size_t i = 0; i < d_; ++i) {
          l[i] = 0.7 * rng_.next_uniform(-1.0, 1.0);
          if (i == segment_best_) l[i] -= 0.3;
        }
        break;
      }
      case AdversaryKind::SpiteAdaptive: {
        const double u = 1.0 / static_cast<double>(d_);
        for (std::size_t i = 0; i < d_; ++i) {
          const double gap = p[i] - u;
          l[i] = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
        }
        break;
      }
      case AdversaryKind::SwapTrap: {
        // Tax the currently heaviest expert, reward its cyclic successor,
        // and add noise at half scale so the best-swap comparator keeps a
        // root-T-sized edge against adaptive learners too.
        std::size_t top = 0;
        for (std::size_t i = 1; i < d_; ++i) {
          if (p[i] > p[top]) top = i;
        }
        for (std::size_t i = 0; i < d_; ++i) l[i] = 0.5 * rng_.next_uniform(-1.0, 1.0);
        l[top] += 0.5;
        l[(top + 1) % d_] -= 0.5;
        break;
      }
    }
    ++round_;
    return LossVector::validated(std::move(l));
  }

  const AdversarySpec& spec() const { return spec_; }

 private:
  AdversarySpec spec_;
  std::size_t d_;
  Rng rng_;
  std::int64_t round_ = 0;
  std::int64_t segment_len_ = 1;
  std::size_t segment_best_ = 0;
};

}  // namespace phiregret
