#pragma once

#include "sslhop/types.hpp"

#include <string>
#include <vector>

namespace sslhop {

struct Dataset {
  std::vector<ResponseMap> images;  // uniform dimensions, values in [0, 1]
  std::vector<int> labels;          // empty when unlabeled
  int class_count = 0;              // 0 when unlabeled

  bool has_labels() const { return !labels.empty(); }
};

// IDX3 image file (magic 0x00000803, big-endian dims, unsigned bytes) with an
// optional IDX1 label file (magic 0x00000801). Pixel bytes are scaled to
// [0, 1]; the class count is inferred as max label + 1.
Dataset load_idx(const std::string& images_path, const std::string& labels_path = "");

// Fallback loader: one subdirectory per class (sorted by name = label order),
// each holding binary 8-bit PGM (P5) files.
Dataset load_image_dir(const std::string& root);

}  // namespace sslhop
