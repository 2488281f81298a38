#pragma once

#include "sslhop/types.hpp"

namespace sslhop {

struct Covariance {
  Vector mean;  // column-wise arithmetic mean
  Matrix cov;   // unbiased (n-1) sample covariance, exactly symmetric
};

// Mean and sample covariance of the rows of `patches`. Rows are accumulated
// in a canonical (lexicographically sorted) order, so the result is
// bit-identical under any permutation of the input rows.
Covariance covariance(const PatchMatrix& patches);

struct SymEigResult {
  Vector eigenvalues;   // sorted non-increasing
  Matrix eigenvectors;  // orthonormal columns, column k pairs with eigenvalues[k]
};

// Dense symmetric eigendecomposition. Eigenvectors follow a fixed sign
// convention: the component of largest absolute value is nonnegative, ties
// broken by lowest index. Equal eigenvalues keep the solver's relative order.
SymEigResult sym_eig(const Matrix& symmetric);

// Row i, column j of the result is basis.row(j) . (patches.row(i) - offset).
Matrix project(const PatchMatrix& patches, const Matrix& basis, const Vector& offset);

}  // namespace sslhop
