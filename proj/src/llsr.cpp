#include "sslhop/llsr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sslhop {

LLSRModel fit_llsr(const Matrix& features, const std::vector<int>& labels, int n_classes,
                   double ridge) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n < 2) throw std::invalid_argument("insufficient samples");
  if (d < 1) throw std::invalid_argument("empty feature vector");
  if (n_classes < 1) throw std::invalid_argument("n_classes must be positive");
  if (!features.allFinite()) throw std::invalid_argument("non-finite input");
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("label count mismatch");
  for (int label : labels)
    if (label < 0 || label >= n_classes) throw std::invalid_argument("label out of range");

  LLSRModel model;
  model.n_features = static_cast<int>(d);
  model.n_classes = n_classes;
  model.feature_mean = features.colwise().mean();
  const Matrix centered_raw = features.rowwise() - model.feature_mean.transpose();
  const Vector variance = centered_raw.array().square().colwise().sum() / static_cast<double>(n - 1);
  model.feature_scale = variance.cwiseMax(1e-12).cwiseSqrt();

  Matrix z = centered_raw.array().rowwise() / model.feature_scale.transpose().array();
  const Vector z_mean = z.colwise().mean();
  z.rowwise() -= z_mean.transpose();  // exact centering of the design

  Matrix targets = Matrix::Zero(n, n_classes);
  for (Eigen::Index i = 0; i < n; ++i) targets(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  const Vector target_mean = targets.colwise().mean();
  targets.rowwise() -= target_mean.transpose();

  if (ridge < 0.0) ridge = std::max(1e-4 * z.squaredNorm() / static_cast<double>(d), 1e-10);
  model.ridge = ridge;

  Matrix coeffs;  // D x K
  if (ridge == 0.0) {
    const Matrix gram = z.transpose() * z;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("eigendecomposition did not converge");
    const Vector& eigs = solver.eigenvalues();
    const double largest = eigs[d - 1];
    if (eigs[0] <= 1e-10 * std::max(1.0, largest))
      throw std::runtime_error("singular system; set ridge > 0");
    const Matrix rhs = solver.eigenvectors().transpose() * (z.transpose() * targets);
    coeffs = solver.eigenvectors() * (rhs.array().colwise() / eigs.array()).matrix();
  } else if (d <= n) {
    Matrix gram = z.transpose() * z;
    gram.diagonal().array() += ridge;
    coeffs = gram.ldlt().solve(z.transpose() * targets);
  } else {
    // Dual form: (Z'Z + lI)^{-1} Z' Y == Z' (Z Z' + lI)^{-1} Y, an n-by-n
    // solve when the feature dimension outgrows the sample count.
    Matrix kernel = z * z.transpose();
    kernel.diagonal().array() += ridge;
    coeffs = z.transpose() * kernel.llt().solve(targets);
  }

  model.weights = coeffs.transpose();
  model.intercept = target_mean - model.weights * z_mean;
  if (!model.weights.allFinite() || !model.intercept.allFinite())
    throw std::runtime_error("singular system; set ridge > 0");
  return model;
}

Prediction predict(const LLSRModel& model, const Vector& feature) {
  if (feature.size() != model.n_features) throw std::invalid_argument("shape mismatch");
  const Vector z =
      (feature - model.feature_mean).array() / model.feature_scale.array();
  Prediction p;
  p.scores = model.weights * z + model.intercept;
  p.label = 0;
  for (Eigen::Index k = 1; k < p.scores.size(); ++k)
    if (p.scores[k] > p.scores[p.label]) p.label = static_cast<int>(k);
  return p;
}

}  // namespace sslhop
