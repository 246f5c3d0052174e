// SPDX-License-Identifier: Apache-2.0
#include "coat/image.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace coat {

static_assert(std::endian::native == std::endian::little, "PFM output assumes a little-endian host");

void write_pfm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "PF\n" << img.width << ' ' << img.height << "\n-1.0\n";
  // PFM scanlines run bottom to top.
  for (int y = img.height - 1; y >= 0; --y)
    out.write(reinterpret_cast<const char*>(&img.data[std::size_t(y) * img.width * 3]),
              std::streamsize(sizeof(float)) * img.width * 3);
  if (!out) throw IoError("write failed: " + path.string());
}

Image read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  if (!in || magic != "PF") throw FormatError(path.string() + ": not an RGB PFM file");
  if (w <= 0 || h <= 0) throw FormatError(path.string() + ": bad image size");
  if (scale >= 0.0) throw FormatError(path.string() + ": big-endian PFM is not supported");
  in.get();
  Image img(w, h);
  for (int y = h - 1; y >= 0; --y)
    in.read(reinterpret_cast<char*>(&img.data[std::size_t(y) * w * 3]), std::streamsize(sizeof(float)) * w * 3);
  if (!in) throw FormatError(path.string() + ": truncated pixel data");
  return img;
}

std::string CompareMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["rmse"] = rmse;
  j["max_abs"] = max_abs;
  j["mean_a"] = {mean_a[0], mean_a[1], mean_a[2]};
  j["mean_b"] = {mean_b[0], mean_b[1], mean_b[2]};
  j["relative_rmse"] = relative_rmse;
  j["pixels_compared"] = pixels_compared;
  j["pixels_masked"] = pixels_masked;
  return j.dump(2);
}

CompareMetrics compare_images(const Image& a, const Image& b, const Image* b_error, double max_relative_error) {
  if (a.width != b.width || a.height != b.height) throw ShapeError("images differ in size");
  if (b_error && (b_error->width != b.width || b_error->height != b.height))
    throw ShapeError("error image differs in size");
  CompareMetrics m;
  double sq = 0.0, num = 0.0, den = 0.0;
  const double n = double(a.width) * a.height;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      const Rgb pa = a.pixel(x, y), pb = b.pixel(x, y);
      const Rgb d = pa - pb;
      sq += d.square().sum();
      m.max_abs = std::max(m.max_abs, d.abs().maxCoeff());
      m.mean_a += pa / n;
      m.mean_b += pb / n;
      const double level = channel_mean(pb.abs());
      bool keep = level > 0.0;
      if (keep && b_error) keep = channel_mean(b_error->pixel(x, y)) <= max_relative_error * level;
      if (keep) {
        num += d.square().sum();
        den += pb.square().sum();
        ++m.pixels_compared;
      } else {
        ++m.pixels_masked;
      }
    }
  }
  m.rmse = std::sqrt(sq / (3.0 * n));
  m.relative_rmse = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return m;
}

}  // namespace coat
