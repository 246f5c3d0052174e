// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coat/common.hpp"

namespace coat {

/// RGB float image, rows top to bottom.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // interleaved RGB

  Image() = default;
  Image(int w, int h) : width(w), height(h), data(std::size_t(w) * h * 3, 0.0f) {}

  float& at(int x, int y, int c) { return data[(std::size_t(y) * width + x) * 3 + c]; }
  float at(int x, int y, int c) const { return data[(std::size_t(y) * width + x) * 3 + c]; }
  Rgb pixel(int x, int y) const { return {at(x, y, 0), at(x, y, 1), at(x, y, 2)}; }
  void set(int x, int y, const Rgb& v) {
    for (int c = 0; c < 3; ++c) at(x, y, c) = static_cast<float>(v[c]);
  }
};

/// Little-endian PFM ("PF", scale -1).
void write_pfm(const Image& img, const std::filesystem::path& path);
Image read_pfm(const std::filesystem::path& path);

struct CompareMetrics {
  double rmse = 0.0;
  double max_abs = 0.0;
  Rgb mean_a = Rgb::Zero();
  Rgb mean_b = Rgb::Zero();
  // Relative RMSE ||a - b|| / ||b|| over pixels kept by the noise mask.
  double relative_rmse = 0.0;
  std::size_t pixels_compared = 0;
  std::size_t pixels_masked = 0;

  std::string to_json() const;
};

/// Compares `a` against reference `b`. With `b_error` (per-pixel standard
/// error of `b`), pixels whose relative error exceeds `max_relative_error`,
/// and pixels where `b` is zero, are left out of relative_rmse.
CompareMetrics compare_images(const Image& a, const Image& b, const Image* b_error = nullptr,
                              double max_relative_error = 0.02);

}  // namespace coat
