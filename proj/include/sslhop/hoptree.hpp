#pragma once

#include "sslhop/saab.hpp"
#include "sslhop/types.hpp"

#include <string>
#include <vector>

namespace sslhop {

enum class Aggregation { flatten, spatial_max, spatial_mean };

struct HopConfig {
  int num_levels = 3;
  int window = 5;
  int stride = 1;
  int pool = 2;
  double energy_forward = 0.002;  // E_f: forward above this global ratio
  double energy_cutoff = 1e-4;    // E_c: discard below this global ratio
  Aggregation aggregation = Aggregation::flatten;
  // Uniform cap on the number of patches a unit is fitted on (0 = fit on all).
  // Responses are always computed on the full patch grid.
  std::size_t patch_cap = 0;
};

void validate(const HopConfig& config);

enum class ChannelStatus { intermediate, leaf, discarded };

const char* to_string(ChannelStatus status);
const char* to_string(Aggregation aggregation);

struct ChannelNode {
  int level = 0;         // 1-based
  int unit_id = 0;
  int kernel_index = 0;  // 0 = DC
  double local_ratio = 0.0;
  double global_ratio = 0.0;
  ChannelStatus status = ChannelStatus::leaf;
  int child_unit = -1;  // unit fitted on this channel; -1 unless intermediate
};

struct SaabUnit {
  SaabKernels kernels;
  int level = 0;
  int parent_unit = -1;    // -1 for the root
  int parent_kernel = -1;  // kernel index within the parent unit
  int in_height = 0, in_width = 0, in_channels = 0;
  int out_height = 0, out_width = 0;
  int first_channel = 0;  // index of this unit's first node in HopTree::channels
};

struct FeatureSlot {
  int channel = 0;  // index into HopTree::channels (always a leaf)
  int out_height = 0, out_width = 0;
  std::size_t offset = 0;  // start of this slot in the feature vector
  std::size_t length = 0;
};

// The trained multi-level model: a tree of Saab units whose edges are
// intermediate channels. Unit 0 is the single level-1 root; units are
// numbered breadth-first, so unit and channel order is deterministic.
struct HopTree {
  HopConfig config;
  int input_height = 0, input_width = 0, input_channels = 0;
  std::vector<SaabUnit> units;
  std::vector<ChannelNode> channels;
  std::vector<FeatureSlot> feature_layout;  // leaf channels in (level, unit, kernel) order

  std::size_t feature_length() const;

  // Rebuilds first_channel markers and the feature layout from units/channels.
  void rebuild_layout();
};

// Valid-mode sliding-window patch extraction in row-major scan order; each row
// is the window flattened in (row, column, channel) order.
PatchMatrix extract_patches(const ResponseMap& input, int window, int stride);

// Non-overlapping valid-mode max pooling, window and stride both `pool`.
ResponseMap max_pool(const ResponseMap& input, int pool);

HopTree fit_hoptree(const std::vector<ResponseMap>& images, const HopConfig& config);

// Feature vector for one image: leaf-channel responses reduced per
// config.aggregation, concatenated in feature_layout order.
Vector transform(const ResponseMap& image, const HopTree& tree);

// transform() over a dataset, fanned out over `threads` workers; row i always
// holds image i's features.
Matrix transform_all(const std::vector<ResponseMap>& images, const HopTree& tree, int threads);

// Deterministic model report: per-level summary, one tab-separated line per
// channel, and the total parameter count.
std::string describe(const HopTree& tree);

// "%.9g" rendering used by describe and the data output of the CLI.
std::string format_g9(double value);

// Side length of the input region influencing one response at each level,
// from the window/stride/pool composition alone.
std::vector<int> receptive_field_sides(const HopConfig& config);

}  // namespace sslhop
