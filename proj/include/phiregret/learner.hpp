#pragma once

#include "phiregret/simplex.hpp"

namespace phiregret {

// Single-pass online protocol: strictly alternating predict / update.
class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;
  virtual ProbVector step_predict() = 0;
  virtual void step_update(const LossVector& l) = 0;
};

}  // namespace phiregret
