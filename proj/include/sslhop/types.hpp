#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>

namespace sslhop {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Patches as rows: rows() = number of patches, cols() = patch dimension
// (m*m*C for an m-by-m window over C channels).
using PatchMatrix = Eigen::MatrixXd;

// Rank-3 response array stored row-major in (row, column, channel) order.
// Images are the special case channels = C.
struct ResponseMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  Vector data;

  ResponseMap() = default;

  ResponseMap(int h, int w, int c) : height(h), width(w), channels(c) {
    check_dims();
    data = Vector::Zero(static_cast<Eigen::Index>(h) * w * c);
  }

  ResponseMap(int h, int w, int c, Vector values)
      : height(h), width(w), channels(c), data(std::move(values)) {
    check_dims();
    if (data.size() != static_cast<Eigen::Index>(h) * w * c)
      throw std::invalid_argument("response map data length does not match dimensions");
  }

  std::ptrdiff_t index(int r, int c, int ch) const {
    return (static_cast<std::ptrdiff_t>(r) * width + c) * channels + ch;
  }

  double operator()(int r, int c, int ch) const { return data[index(r, c, ch)]; }
  double& operator()(int r, int c, int ch) { return data[index(r, c, ch)]; }

  std::ptrdiff_t size() const { return data.size(); }

 private:
  void check_dims() const {
    if (height < 1 || width < 1 || channels < 1)
      throw std::invalid_argument("response map dimensions must be positive");
  }
};

}  // namespace sslhop
