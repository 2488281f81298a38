#pragma once

// Test fixtures: a byte-level IDX writer independent of the library's
// loader, a deterministic synthetic digit corpus, scratch directories, and a
// helper that runs the installed CLI binary.

#include "sslhop/types.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fixtures {

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "sslhop_test_XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

// images: one vector of h*w bytes per image, row-major.
inline void write_idx_images(const std::string& path,
                             const std::vector<std::vector<std::uint8_t>>& images, int height,
                             int width) {
  std::vector<std::uint8_t> out;
  push_be32(out, 0x00000803u);
  push_be32(out, static_cast<std::uint32_t>(images.size()));
  push_be32(out, static_cast<std::uint32_t>(height));
  push_be32(out, static_cast<std::uint32_t>(width));
  for (const auto& img : images) {
    if (img.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
      throw std::runtime_error("fixture image size mismatch");
    out.insert(out.end(), img.begin(), img.end());
  }
  write_bytes(path, out);
}

inline void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> out;
  push_be32(out, 0x00000801u);
  push_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  write_bytes(path, out);
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Runs the CLI with the given argument string inside a scratch directory.
inline CliResult run_cli(const std::string& args, const TempDir& dir,
                         const std::string& env = "") {
  const std::string out_path = dir.file("cli_stdout.txt");
  const std::string err_path = dir.file("cli_stderr.txt");
  const std::string command = env + (env.empty() ? "" : " ") + std::string(SSLHOP_CLI_PATH) + " " +
                              args + " > " + out_path + " 2> " + err_path;
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  result.out = read_text(out_path);
  result.err = read_text(err_path);
  return result;
}

// ---------------------------------------------------------------------------
// Synthetic digit corpus: a 5x7 bitmap font rendered into 28x28 frames with
// deterministic per-image scale, placement, intensity, and pixel noise. Hard
// enough that chance is 10%, easy enough that a linear head separates it.

inline const std::array<std::array<const char*, 7>, 10>& digit_font() {
  static const std::array<std::array<const char*, 7>, 10> font = {{
      {" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "},
      {"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "},
      {" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"},
      {"#####", "   # ", "  #  ", "   # ", "    #", "#   #", " ### "},
      {"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "},
      {"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "},
      {"  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "},
      {"#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "},
      {" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "},
      {" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "},
  }};
  return font;
}

struct DigitCorpus {
  std::vector<std::vector<std::uint8_t>> images;  // 28x28 row-major
  std::vector<std::uint8_t> labels;
};

inline DigitCorpus make_digit_corpus(int count, std::uint32_t seed) {
  constexpr int side = 28;
  DigitCorpus corpus;
  corpus.images.reserve(static_cast<std::size_t>(count));
  corpus.labels.reserve(static_cast<std::size_t>(count));
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> scale_dist(2, 3);
  std::uniform_int_distribution<int> intensity_dist(160, 255);
  std::uniform_int_distribution<int> fg_noise(-20, 20);
  std::uniform_int_distribution<int> bg_noise(0, 30);

  for (int i = 0; i < count; ++i) {
    const int digit = i % 10;  // balanced classes
    const auto& glyph = digit_font()[static_cast<std::size_t>(digit)];
    const int scale = scale_dist(rng);
    const int gw = 5 * scale, gh = 7 * scale;
    std::uniform_int_distribution<int> x_dist(2, side - gw - 2);
    std::uniform_int_distribution<int> y_dist(2, side - gh - 2);
    const int x0 = x_dist(rng);
    const int y0 = y_dist(rng);
    const int intensity = intensity_dist(rng);

    std::vector<std::uint8_t> img(side * side, 0);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) img[static_cast<std::size_t>(r * side + c)] =
          static_cast<std::uint8_t>(bg_noise(rng));
    for (int gr = 0; gr < 7; ++gr) {
      for (int gc = 0; gc < 5; ++gc) {
        if (glyph[static_cast<std::size_t>(gr)][gc] != '#') continue;
        for (int dr = 0; dr < scale; ++dr) {
          for (int dc = 0; dc < scale; ++dc) {
            const int r = y0 + gr * scale + dr;
            const int c = x0 + gc * scale + dc;
            const int v = std::clamp(intensity + fg_noise(rng), 0, 255);
            img[static_cast<std::size_t>(r * side + c)] = static_cast<std::uint8_t>(v);
          }
        }
      }
    }
    corpus.images.push_back(std::move(img));
    corpus.labels.push_back(static_cast<std::uint8_t>(digit));
  }
  return corpus;
}

// ResponseMap view of a fixture image, scaled to [0,1] like the loader does.
inline sslhop::ResponseMap to_map(const std::vector<std::uint8_t>& image, int height, int width) {
  sslhop::ResponseMap map(height, width, 1);
  for (int i = 0; i < height * width; ++i)
    map.data[i] = static_cast<double>(image[static_cast<std::size_t>(i)]) / 255.0;
  return map;
}

}  // namespace fixtures
