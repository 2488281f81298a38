#include "sslhop/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace sslhop {

namespace {

// Canonical row order: lexicographic over row values. Equal rows are
// interchangeable, so any permutation of the input sorts to the same matrix.
std::vector<Eigen::Index> canonical_row_order(const PatchMatrix& m) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::Index d = m.cols();
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (m(a, j) != m(b, j)) return m(a, j) < m(b, j);
    }
    return false;
  });
  return order;
}

}  // namespace

Covariance covariance(const PatchMatrix& patches) {
  const Eigen::Index n = patches.rows();
  const Eigen::Index d = patches.cols();
  if (n < 2) throw std::invalid_argument("insufficient samples");
  if (d < 1) throw std::invalid_argument("empty patch");
  if (!patches.allFinite()) throw std::invalid_argument("non-finite input");

  const auto order = canonical_row_order(patches);
  Matrix sorted(n, d);
  for (Eigen::Index i = 0; i < n; ++i) sorted.row(i) = patches.row(order[static_cast<std::size_t>(i)]);

  Covariance result;
  result.mean = sorted.colwise().sum() / static_cast<double>(n);
  sorted.rowwise() -= result.mean.transpose();

  Matrix cov = Matrix::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(sorted.adjoint());
  cov = cov.selfadjointView<Eigen::Lower>();  // mirror: exactly symmetric
  cov /= static_cast<double>(n - 1);
  result.cov = std::move(cov);
  return result;
}

SymEigResult sym_eig(const Matrix& symmetric) {
  const Eigen::Index d = symmetric.rows();
  if (d < 1 || symmetric.cols() != d) throw std::invalid_argument("not symmetric");
  const double asymmetry = (symmetric - symmetric.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-9) throw std::invalid_argument("not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition did not converge");

  // Eigen returns ascending order; reorder descending. stable_sort keeps the
  // solver's relative order for repeated eigenvalues (identity stays identity).
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Vector& raw_vals = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return raw_vals[a] > raw_vals[b]; });

  SymEigResult result;
  result.eigenvalues.resize(d);
  result.eigenvectors.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    result.eigenvalues[k] = raw_vals[src];
    result.eigenvectors.col(k) = solver.eigenvectors().col(src);
  }

  // Sign convention: largest-magnitude component nonnegative, lowest index wins ties.
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::Index pivot = 0;
    double best = std::abs(result.eigenvectors(0, k));
    for (Eigen::Index i = 1; i < d; ++i) {
      const double a = std::abs(result.eigenvectors(i, k));
      if (a > best) {
        best = a;
        pivot = i;
      }
    }
    if (result.eigenvectors(pivot, k) < 0.0) result.eigenvectors.col(k) = -result.eigenvectors.col(k);
  }
  return result;
}

Matrix project(const PatchMatrix& patches, const Matrix& basis, const Vector& offset) {
  if (basis.cols() != patches.cols() || offset.size() != patches.cols())
    throw std::invalid_argument("shape mismatch");
  return (patches.rowwise() - offset.transpose()) * basis.transpose();
}

}  // namespace sslhop
