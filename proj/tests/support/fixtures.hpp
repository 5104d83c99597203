#pragma once

#include <vector>

#include "ahtlab/model.hpp"

namespace ahtlab::testing {

inline constexpr double kDelta = 1e-7;

// Three hypotheses, queries u1 and u2.
inline ObservationModel setup1_model() {
  return ObservationModel(std::vector<std::vector<std::vector<double>>>{
      {{0.8, 0.2}, {0.8, 0.2}},
      {{0.2, 0.8}, {0.8, 0.2}},
      {{0.8, 0.2}, {0.2, 0.8}},
  });
}

// setup1 plus the near-deterministic queries u3 and u4.
inline ObservationModel setup2_model() {
  return ObservationModel(std::vector<std::vector<std::vector<double>>>{
      {{0.8, 0.2}, {0.8, 0.2}, {0.8, 0.2}, {0.8, 0.2}},
      {{0.2, 0.8}, {0.8, 0.2}, {1 - kDelta, kDelta}, {0.8, 0.2}},
      {{0.8, 0.2}, {0.2, 0.8}, {0.8, 0.2}, {1 - kDelta, kDelta}},
  });
}

// Every query has the same outcome law under every hypothesis.
inline ObservationModel uninformative_model() {
  return ObservationModel(std::vector<std::vector<std::vector<double>>>{
      {{0.3, 0.7}, {0.6, 0.4}},
      {{0.3, 0.7}, {0.6, 0.4}},
      {{0.3, 0.7}, {0.6, 0.4}},
  });
}

}  // namespace ahtlab::testing
