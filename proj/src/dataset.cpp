#include "sslhop/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace sslhop {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& buf, std::size_t offset) {
  if (offset + 4 > buf.size()) throw std::runtime_error("truncated IDX file");
  return (std::uint32_t(buf[offset]) << 24) | (std::uint32_t(buf[offset + 1]) << 16) |
         (std::uint32_t(buf[offset + 2]) << 8) | std::uint32_t(buf[offset + 3]);
}

std::vector<ResponseMap> load_idx_images(const std::string& path) {
  const auto buf = read_file(path);
  if (buf.size() < 4 || read_be32(buf, 0) != 0x00000803u)
    throw std::runtime_error("not an IDX file: " + path);
  const std::uint32_t count = read_be32(buf, 4);
  const std::uint32_t rows = read_be32(buf, 8);
  const std::uint32_t cols = read_be32(buf, 12);
  const std::size_t expected = 16 + std::size_t(count) * rows * cols;
  if (buf.size() < expected) throw std::runtime_error("truncated IDX file");
  if (buf.size() > expected) throw std::runtime_error("trailing bytes in IDX file");

  std::vector<ResponseMap> images;
  images.reserve(count);
  std::size_t at = 16;
  for (std::uint32_t i = 0; i < count; ++i) {
    ResponseMap img(static_cast<int>(rows), static_cast<int>(cols), 1);
    for (Eigen::Index p = 0; p < img.size(); ++p) img.data[p] = buf[at++] / 255.0;
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<int> load_idx_labels(const std::string& path) {
  const auto buf = read_file(path);
  if (buf.size() < 4 || read_be32(buf, 0) != 0x00000801u)
    throw std::runtime_error("not an IDX file: " + path);
  const std::uint32_t count = read_be32(buf, 4);
  const std::size_t expected = 8 + std::size_t(count);
  if (buf.size() < expected) throw std::runtime_error("truncated IDX file");
  if (buf.size() > expected) throw std::runtime_error("trailing bytes in IDX file");
  return std::vector<int>(buf.begin() + 8, buf.end());
}

// P5 header token reader; '#' starts a comment running to end of line.
int next_pgm_int(const std::vector<std::uint8_t>& buf, std::size_t& at, const std::string& path) {
  while (at < buf.size()) {
    if (std::isspace(buf[at])) {
      ++at;
    } else if (buf[at] == '#') {
      while (at < buf.size() && buf[at] != '\n') ++at;
    } else {
      break;
    }
  }
  if (at >= buf.size() || !std::isdigit(buf[at])) throw std::runtime_error("not a PGM file: " + path);
  int value = 0;
  while (at < buf.size() && std::isdigit(buf[at])) value = value * 10 + (buf[at++] - '0');
  return value;
}

ResponseMap load_pgm(const std::string& path) {
  const auto buf = read_file(path);
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5')
    throw std::runtime_error("not a PGM file: " + path);
  std::size_t at = 2;
  const int width = next_pgm_int(buf, at, path);
  const int height = next_pgm_int(buf, at, path);
  const int maxval = next_pgm_int(buf, at, path);
  if (maxval < 1 || maxval > 255) throw std::runtime_error("unsupported PGM maxval: " + path);
  ++at;  // single whitespace byte before the raster
  if (at + std::size_t(width) * height > buf.size())
    throw std::runtime_error("truncated PGM file: " + path);

  ResponseMap img(height, width, 1);
  for (Eigen::Index p = 0; p < img.size(); ++p)
    img.data[p] = buf[at + static_cast<std::size_t>(p)] / static_cast<double>(maxval);
  return img;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  Dataset data;
  data.images = load_idx_images(images_path);
  if (!labels_path.empty()) {
    data.labels = load_idx_labels(labels_path);
    if (data.labels.size() != data.images.size())
      throw std::runtime_error("label count mismatch");
    int max_label = -1;
    for (int label : data.labels) max_label = std::max(max_label, label);
    data.class_count = max_label + 1;
  }
  return data;
}

Dataset load_image_dir(const std::string& root) {
  std::vector<std::string> class_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw std::runtime_error("no class subdirectories in " + root);

  Dataset data;
  data.class_count = static_cast<int>(class_dirs.size());
  for (std::size_t label = 0; label < class_dirs.size(); ++label) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(fs::path(root) / class_dirs[label]))
      if (entry.is_regular_file()) files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    for (const std::string& file : files) {
      data.images.push_back(load_pgm(file));
      data.labels.push_back(static_cast<int>(label));
    }
  }
  if (!data.images.empty()) {
    const ResponseMap& first = data.images.front();
    for (const ResponseMap& img : data.images)
      if (img.height != first.height || img.width != first.width)
        throw std::runtime_error("image dimensions differ");
  }
  return data;
}

}  // namespace sslhop
