#include "sslhop/saab.hpp"

#include "sslhop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sslhop {

namespace {

// Sample variance of a set of scalars, summed in sorted order so the result
// is bit-identical under any permutation of the inputs.
double sample_variance(const Vector& values) {
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size() - 1);
}

}  // namespace

SaabKernels fit_saab(const PatchMatrix& patches) {
  const Eigen::Index d = patches.cols();
  const Eigen::Index n = patches.rows();
  if (d < 1) throw std::invalid_argument("empty patch");
  if (n < 2) throw std::invalid_argument("insufficient samples");
  if (!patches.allFinite()) throw std::invalid_argument("non-finite input");

  SaabKernels k;
  k.dc_kernel = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));

  const Vector dc_responses = patches * k.dc_kernel;
  const double dc_energy = sample_variance(dc_responses);

  const Matrix residuals = patches - dc_responses * k.dc_kernel.transpose();
  const Covariance cov = covariance(residuals);
  k.residual_mean = cov.mean;

  const SymEigResult eig = sym_eig(cov.cov);

  // Eigenvalues at or below rank_epsilon are numerical noise; their kernels
  // are dropped before any pruning logic sees them.
  const double lead = eig.eigenvalues[0];
  const double rank_epsilon = 1e-9 * (lead > 0.0 ? lead : 1.0);
  Eigen::Index keep = 0;
  while (keep < d - 1 && eig.eigenvalues[keep] > rank_epsilon) ++keep;

  k.ac_kernels.resize(keep, d);
  k.energies.resize(1 + keep);
  k.energies[0] = std::max(dc_energy, 0.0);
  for (Eigen::Index i = 0; i < keep; ++i) {
    k.ac_kernels.row(i) = eig.eigenvectors.col(i).transpose();
    k.energies[1 + i] = std::max(eig.eigenvalues[i], 0.0);
  }
  return k;
}

Matrix apply_saab(const PatchMatrix& patches, const SaabKernels& kernels,
                  const std::vector<int>& keep) {
  if (patches.cols() != kernels.dim()) throw std::invalid_argument("shape mismatch");
  for (int idx : keep) {
    if (idx < 0 || idx >= kernels.channel_count()) throw std::invalid_argument("unknown channel");
  }

  Matrix out(patches.rows(), static_cast<Eigen::Index>(keep.size()));
  const bool needs_ac =
      std::any_of(keep.begin(), keep.end(), [](int idx) { return idx > 0; });
  Matrix centered;
  if (needs_ac) centered = patches.rowwise() - kernels.residual_mean.transpose();

  for (std::size_t j = 0; j < keep.size(); ++j) {
    const int idx = keep[j];
    if (idx == 0) {
      out.col(static_cast<Eigen::Index>(j)) = patches * kernels.dc_kernel;
    } else {
      out.col(static_cast<Eigen::Index>(j)) =
          centered * kernels.ac_kernels.row(idx - 1).transpose();
    }
  }
  return out;
}

Vector energy_ratios(const SaabKernels& kernels) {
  const double total = kernels.total_energy();
  if (total <= 0.0) throw std::runtime_error("degenerate unit");
  return kernels.energies / total;
}

}  // namespace sslhop
