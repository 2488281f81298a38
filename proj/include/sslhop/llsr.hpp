#pragma once

#include "sslhop/types.hpp"

#include <vector>

namespace sslhop {

// Multi-class linear least-squares head fitted on one-hot targets. Features
// are standardized per dimension at fit time; the standardization parameters
// travel with the model and predict() applies them before the linear map.
struct LLSRModel {
  int n_features = 0;  // D
  int n_classes = 0;   // K
  Matrix weights;      // K x D, in standardized feature space
  Vector intercept;    // K
  double ridge = 0.0;  // resolved lambda used at fit time
  Vector feature_mean;   // D
  Vector feature_scale;  // D, sqrt of variance floored at 1e-12
};

// Fits by ridge-regularized normal equations on the centered standardized
// design. ridge < 0 selects the default lambda 1e-4 * trace(X'X)/D (floored
// at 1e-10 so zero-variance feature sets still solve); ridge = 0 demands a
// full-rank system and throws "singular system; set ridge > 0" otherwise.
LLSRModel fit_llsr(const Matrix& features, const std::vector<int>& labels, int n_classes,
                   double ridge = -1.0);

struct Prediction {
  int label = 0;
  Vector scores;
};

// scores = W z + b on the standardized feature; label = argmax with the
// lowest index winning ties.
Prediction predict(const LLSRModel& model, const Vector& feature);

}  // namespace sslhop
