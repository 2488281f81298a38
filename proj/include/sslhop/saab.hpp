#pragma once

#include "sslhop/types.hpp"

#include <vector>

namespace sslhop {

// One fitted Saab transform: the constant mean-filter (DC) kernel plus
// PCA-derived AC kernels over the DC-removed residuals, with the variance of
// the training patches along each kernel ("energy", DC first).
struct SaabKernels {
  Vector dc_kernel;      // length d, every entry 1/sqrt(d)
  Matrix ac_kernels;     // one unit-norm kernel per row, descending energy
  Vector residual_mean;  // length d, offset used for AC projections
  Vector energies;       // length 1 + ac_count(), all >= 0

  int dim() const { return static_cast<int>(dc_kernel.size()); }
  int ac_count() const { return static_cast<int>(ac_kernels.rows()); }
  int channel_count() const { return 1 + ac_count(); }
  double total_energy() const { return energies.sum(); }
};

SaabKernels fit_saab(const PatchMatrix& patches);

// Response columns for the requested channels, in `keep` order.
// Channel index 0 is DC (projection on dc_kernel, no offset); index k >= 1 is
// AC kernel k-1 (projection on ac_kernels.row(k-1) after subtracting
// residual_mean).
Matrix apply_saab(const PatchMatrix& patches, const SaabKernels& kernels,
                  const std::vector<int>& keep);

// energies[k] / sum(energies); throws "degenerate unit" when every energy is zero.
Vector energy_ratios(const SaabKernels& kernels);

}  // namespace sslhop
