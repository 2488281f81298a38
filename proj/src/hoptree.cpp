#include "sslhop/hoptree.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

namespace sslhop {

void validate(const HopConfig& config) {
  if (config.num_levels < 1) throw std::invalid_argument("num_levels must be positive");
  if (config.window < 1) throw std::invalid_argument("window must be positive");
  if (config.stride < 1) throw std::invalid_argument("stride must be positive");
  if (config.pool < 1) throw std::invalid_argument("pool must be positive");
  if (!(config.energy_forward > 0.0 && config.energy_forward <= 1.0))
    throw std::invalid_argument("energy_forward must be in (0, 1]");
  if (!(config.energy_cutoff >= 0.0 && config.energy_cutoff <= 1.0))
    throw std::invalid_argument("energy_cutoff must be in [0, 1]");
  if (config.energy_cutoff > config.energy_forward)
    throw std::invalid_argument("energy_cutoff must not exceed energy_forward");
}

const char* to_string(ChannelStatus status) {
  switch (status) {
    case ChannelStatus::intermediate: return "intermediate";
    case ChannelStatus::leaf: return "leaf";
    case ChannelStatus::discarded: return "discarded";
  }
  return "?";
}

const char* to_string(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::flatten: return "flatten";
    case Aggregation::spatial_max: return "spatial_max";
    case Aggregation::spatial_mean: return "spatial_mean";
  }
  return "?";
}

PatchMatrix extract_patches(const ResponseMap& input, int window, int stride) {
  if (window < 1 || stride < 1) throw std::invalid_argument("window and stride must be positive");
  if (window > input.height || window > input.width)
    throw std::invalid_argument("window exceeds input");

  const int nh = (input.height - window) / stride + 1;
  const int nw = (input.width - window) / stride + 1;
  const int c = input.channels;
  PatchMatrix out(static_cast<Eigen::Index>(nh) * nw, static_cast<Eigen::Index>(window) * window * c);
  Eigen::Index patch = 0;
  for (int by = 0; by < nh; ++by) {
    for (int bx = 0; bx < nw; ++bx, ++patch) {
      Eigen::Index col = 0;
      for (int r = 0; r < window; ++r)
        for (int cc = 0; cc < window; ++cc)
          for (int ch = 0; ch < c; ++ch, ++col)
            out(patch, col) = input(by * stride + r, bx * stride + cc, ch);
    }
  }
  return out;
}

ResponseMap max_pool(const ResponseMap& input, int pool) {
  if (pool < 1) throw std::invalid_argument("pool must be positive");
  if (pool == 1) return input;
  const int oh = input.height / pool;
  const int ow = input.width / pool;
  if (oh == 0 || ow == 0) throw std::invalid_argument("input too small to pool");

  ResponseMap out(oh, ow, input.channels);
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int ch = 0; ch < input.channels; ++ch) {
        double best = input(oy * pool, ox * pool, ch);
        for (int r = 0; r < pool; ++r)
          for (int c = 0; c < pool; ++c)
            best = std::max(best, input(oy * pool + r, ox * pool + c, ch));
        out(oy, ox, ch) = best;
      }
  return out;
}

std::size_t HopTree::feature_length() const {
  if (feature_layout.empty()) return 0;
  const FeatureSlot& last = feature_layout.back();
  return last.offset + last.length;
}

void HopTree::rebuild_layout() {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i].kernel_index == 0)
      units[static_cast<std::size_t>(channels[i].unit_id)].first_channel = static_cast<int>(i);

  std::vector<int> leaves;
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i].status == ChannelStatus::leaf) leaves.push_back(static_cast<int>(i));
  std::sort(leaves.begin(), leaves.end(), [&](int a, int b) {
    const ChannelNode& x = channels[static_cast<std::size_t>(a)];
    const ChannelNode& y = channels[static_cast<std::size_t>(b)];
    if (x.level != y.level) return x.level < y.level;
    if (x.unit_id != y.unit_id) return x.unit_id < y.unit_id;
    return x.kernel_index < y.kernel_index;
  });

  feature_layout.clear();
  std::size_t offset = 0;
  for (int ci : leaves) {
    const SaabUnit& unit = units[static_cast<std::size_t>(channels[static_cast<std::size_t>(ci)].unit_id)];
    FeatureSlot slot;
    slot.channel = ci;
    slot.out_height = unit.out_height;
    slot.out_width = unit.out_width;
    slot.offset = offset;
    slot.length = config.aggregation == Aggregation::flatten
                      ? static_cast<std::size_t>(unit.out_height) * unit.out_width
                      : 1u;
    offset += slot.length;
    feature_layout.push_back(slot);
  }
}

namespace {

struct PendingUnit {
  int level = 1;
  int parent_unit = -1;
  int parent_kernel = -1;
  int parent_channel = -1;  // index into channels, -1 for the root
  double parent_global = 1.0;
  std::vector<ResponseMap> inputs;  // one map per training image
};

PatchMatrix gather_patches(const std::vector<ResponseMap>& inputs, int window, int stride) {
  PatchMatrix first = extract_patches(inputs[0], window, stride);
  const Eigen::Index per_image = first.rows();
  PatchMatrix all(per_image * static_cast<Eigen::Index>(inputs.size()), first.cols());
  all.topRows(per_image) = first;
  for (std::size_t i = 1; i < inputs.size(); ++i)
    all.middleRows(per_image * static_cast<Eigen::Index>(i), per_image) =
        extract_patches(inputs[i], window, stride);
  return all;
}

// Evenly spaced row subsample keeping the first row; identity when cap is 0
// or already satisfied.
PatchMatrix subsample_rows(PatchMatrix patches, std::size_t cap) {
  const auto n = static_cast<std::size_t>(patches.rows());
  if (cap == 0 || n <= cap) return patches;
  PatchMatrix out(static_cast<Eigen::Index>(cap), patches.cols());
  for (std::size_t i = 0; i < cap; ++i)
    out.row(static_cast<Eigen::Index>(i)) = patches.row(static_cast<Eigen::Index>(i * n / cap));
  return out;
}

void check_geometry(const HopConfig& config, int height, int width) {
  int h = height, w = width;
  for (int level = 1; level <= config.num_levels; ++level) {
    if (config.window > h || config.window > w)
      throw std::invalid_argument(level == 1 ? "window exceeds input"
                                             : "architecture too deep for input size");
    h = (h - config.window) / config.stride + 1;
    w = (w - config.window) / config.stride + 1;
    if (level < config.num_levels) {
      h /= config.pool;
      w /= config.pool;
      if (h == 0 || w == 0) throw std::invalid_argument("architecture too deep for input size");
    }
  }
}

}  // namespace

HopTree fit_hoptree(const std::vector<ResponseMap>& images, const HopConfig& config) {
  validate(config);
  if (images.size() < 2)
    throw std::invalid_argument("insufficient samples");
  const int in_h = images[0].height, in_w = images[0].width, in_c = images[0].channels;
  for (const ResponseMap& img : images)
    if (img.height != in_h || img.width != in_w || img.channels != in_c)
      throw std::invalid_argument("image dimensions differ");
  check_geometry(config, in_h, in_w);

  HopTree tree;
  tree.config = config;
  tree.input_height = in_h;
  tree.input_width = in_w;
  tree.input_channels = in_c;

  std::deque<PendingUnit> queue;
  {
    PendingUnit root;
    root.inputs = images;
    queue.push_back(std::move(root));
  }

  while (!queue.empty()) {
    PendingUnit pending = std::move(queue.front());
    queue.pop_front();

    const int unit_id = static_cast<int>(tree.units.size());
    if (pending.parent_channel >= 0)
      tree.channels[static_cast<std::size_t>(pending.parent_channel)].child_unit = unit_id;

    const ResponseMap& sample = pending.inputs[0];
    const SaabKernels kernels =
        fit_saab(subsample_rows(gather_patches(pending.inputs, config.window, config.stride),
                                config.patch_cap));

    // A unit with zero total energy keeps its lone DC node with full ratio so
    // a constant region cannot abort the fit.
    const Vector locals =
        kernels.total_energy() > 0.0 ? energy_ratios(kernels) : Vector::Ones(1);

    SaabUnit unit;
    unit.kernels = kernels;
    unit.level = pending.level;
    unit.parent_unit = pending.parent_unit;
    unit.parent_kernel = pending.parent_kernel;
    unit.in_height = sample.height;
    unit.in_width = sample.width;
    unit.in_channels = sample.channels;
    unit.out_height = (sample.height - config.window) / config.stride + 1;
    unit.out_width = (sample.width - config.window) / config.stride + 1;
    unit.first_channel = static_cast<int>(tree.channels.size());
    tree.units.push_back(std::move(unit));
    const SaabUnit& placed = tree.units.back();

    std::vector<int> forwarded;
    for (int k = 0; k < kernels.channel_count(); ++k) {
      ChannelNode node;
      node.level = pending.level;
      node.unit_id = unit_id;
      node.kernel_index = k;
      node.local_ratio = locals[k];
      node.global_ratio = pending.parent_global * locals[k];
      if (node.global_ratio < config.energy_cutoff)
        node.status = ChannelStatus::discarded;
      else if (node.global_ratio > config.energy_forward && pending.level < config.num_levels)
        node.status = ChannelStatus::intermediate;
      else
        node.status = ChannelStatus::leaf;
      if (node.status == ChannelStatus::intermediate) forwarded.push_back(k);
      tree.channels.push_back(node);
    }

    // Responses are materialized only for forwarded channels; leaves are
    // recomputed at transform time and discarded channels never exist.
    if (!forwarded.empty()) {
      std::vector<PendingUnit> children(forwarded.size());
      for (std::size_t j = 0; j < forwarded.size(); ++j) {
        children[j].level = pending.level + 1;
        children[j].parent_unit = unit_id;
        children[j].parent_kernel = forwarded[j];
        children[j].parent_channel = placed.first_channel + forwarded[j];
        children[j].parent_global =
            tree.channels[static_cast<std::size_t>(children[j].parent_channel)].global_ratio;
        children[j].inputs.reserve(pending.inputs.size());
      }
      for (const ResponseMap& input : pending.inputs) {
        const PatchMatrix patches = extract_patches(input, config.window, config.stride);
        const Matrix resp = apply_saab(patches, kernels, forwarded);
        for (std::size_t j = 0; j < forwarded.size(); ++j) {
          ResponseMap map(placed.out_height, placed.out_width, 1, resp.col(static_cast<Eigen::Index>(j)));
          children[j].inputs.push_back(max_pool(map, config.pool));
        }
      }
      for (PendingUnit& child : children) queue.push_back(std::move(child));
    }
  }

  tree.rebuild_layout();
  return tree;
}

namespace {

void walk_unit(const HopTree& tree, int unit_id, const ResponseMap& input,
               const std::vector<int>& slot_of, Vector& feature) {
  const SaabUnit& unit = tree.units[static_cast<std::size_t>(unit_id)];
  const HopConfig& cfg = tree.config;

  std::vector<int> kept;
  for (int k = 0; k < unit.kernels.channel_count(); ++k)
    if (tree.channels[static_cast<std::size_t>(unit.first_channel + k)].status !=
        ChannelStatus::discarded)
      kept.push_back(k);
  if (kept.empty()) return;

  const PatchMatrix patches = extract_patches(input, cfg.window, cfg.stride);
  const Matrix resp = apply_saab(patches, unit.kernels, kept);

  for (std::size_t j = 0; j < kept.size(); ++j) {
    const int ci = unit.first_channel + kept[j];
    const ChannelNode& node = tree.channels[static_cast<std::size_t>(ci)];
    const auto col = resp.col(static_cast<Eigen::Index>(j));
    if (node.status == ChannelStatus::leaf) {
      const FeatureSlot& slot =
          tree.feature_layout[static_cast<std::size_t>(slot_of[static_cast<std::size_t>(ci)])];
      switch (cfg.aggregation) {
        case Aggregation::flatten:
          feature.segment(static_cast<Eigen::Index>(slot.offset),
                          static_cast<Eigen::Index>(slot.length)) = col;
          break;
        case Aggregation::spatial_max:
          feature[static_cast<Eigen::Index>(slot.offset)] = col.maxCoeff();
          break;
        case Aggregation::spatial_mean:
          feature[static_cast<Eigen::Index>(slot.offset)] = col.mean();
          break;
      }
    } else {
      ResponseMap map(unit.out_height, unit.out_width, 1, col);
      walk_unit(tree, node.child_unit, max_pool(map, cfg.pool), slot_of, feature);
    }
  }
}

}  // namespace

Vector transform(const ResponseMap& image, const HopTree& tree) {
  if (image.height != tree.input_height || image.width != tree.input_width ||
      image.channels != tree.input_channels)
    throw std::invalid_argument("input shape differs from training shape");

  std::vector<int> slot_of(tree.channels.size(), -1);
  for (std::size_t si = 0; si < tree.feature_layout.size(); ++si)
    slot_of[static_cast<std::size_t>(tree.feature_layout[si].channel)] = static_cast<int>(si);

  Vector feature = Vector::Zero(static_cast<Eigen::Index>(tree.feature_length()));
  walk_unit(tree, 0, image, slot_of, feature);
  return feature;
}

Matrix transform_all(const std::vector<ResponseMap>& images, const HopTree& tree, int threads) {
  const std::size_t n = images.size();
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(tree.feature_length()));
  if (n == 0) return out;

  const auto max_threads = static_cast<int>(n);
  threads = std::clamp(threads, 1, max_threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i)
      out.row(static_cast<Eigen::Index>(i)) = transform(images[i], tree);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    try {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
        out.row(static_cast<Eigen::Index>(i)) = transform(images[i], tree);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::string format_g9(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string describe(const HopTree& tree) {
  std::string out;
  out += "# level\tunits\tintermediate\tleaf\tdiscarded\tmin_global\tmax_global\tcum_discarded_energy\n";

  int max_level = 0;
  for (const ChannelNode& ch : tree.channels) max_level = std::max(max_level, ch.level);

  double cum_discarded = 0.0;
  for (int level = 1; level <= max_level; ++level) {
    int units = 0, inter = 0, leaf = 0, disc = 0;
    double lo = 1.0, hi = 0.0;
    for (const SaabUnit& u : tree.units)
      if (u.level == level) ++units;
    for (const ChannelNode& ch : tree.channels) {
      if (ch.level != level) continue;
      switch (ch.status) {
        case ChannelStatus::intermediate: ++inter; break;
        case ChannelStatus::leaf: ++leaf; break;
        case ChannelStatus::discarded:
          ++disc;
          cum_discarded += ch.global_ratio;
          break;
      }
      lo = std::min(lo, ch.global_ratio);
      hi = std::max(hi, ch.global_ratio);
    }
    out += std::to_string(level) + '\t' + std::to_string(units) + '\t' + std::to_string(inter) +
           '\t' + std::to_string(leaf) + '\t' + std::to_string(disc) + '\t' + format_g9(lo) +
           '\t' + format_g9(hi) + '\t' + format_g9(cum_discarded) + '\n';
  }

  out += "# level\tunit\tkernel\tstatus\tlocal_ratio\tglobal_ratio\n";
  for (const ChannelNode& ch : tree.channels) {
    out += std::to_string(ch.level) + '\t' + std::to_string(ch.unit_id) + '\t' +
           std::to_string(ch.kernel_index) + '\t' + to_string(ch.status) + '\t' +
           format_g9(ch.local_ratio) + '\t' + format_g9(ch.global_ratio) + '\n';
  }

  std::size_t parameters = 0;
  for (std::size_t u = 0; u < tree.units.size(); ++u) {
    const SaabUnit& unit = tree.units[u];
    std::size_t retained = 0;
    for (int k = 0; k < unit.kernels.channel_count(); ++k)
      if (tree.channels[static_cast<std::size_t>(unit.first_channel + k)].status !=
          ChannelStatus::discarded)
        ++retained;
    const auto d = static_cast<std::size_t>(unit.kernels.dim());
    parameters += d * retained + d;  // kernels plus the residual mean
  }
  out += "parameters\t" + std::to_string(parameters) + '\n';
  return out;
}

std::vector<int> receptive_field_sides(const HopConfig& config) {
  std::vector<int> sides;
  int rf = config.window;
  int jump = config.stride;
  sides.push_back(rf);
  for (int level = 2; level <= config.num_levels; ++level) {
    rf += (config.pool - 1) * jump;
    jump *= config.pool;
    rf += (config.window - 1) * jump;
    jump *= config.stride;
    sides.push_back(rf);
  }
  return sides;
}

}  // namespace sslhop
