// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "coat/common.hpp"

namespace coat {

enum class Spacing : std::uint8_t { Linear = 0, Log = 1 };

struct Axis {
  std::string name;
  int count = 2;
  double min = 0.0;
  double max = 1.0;
  Spacing spacing = Spacing::Linear;

  Axis() = default;
  Axis(std::string name, int count, double min, double max, Spacing spacing = Spacing::Linear);

  double node(int i) const;
  /// Fractional grid position of x, clamped to [0, count - 1].
  double position(double x) const;
  void validate() const;
  bool operator==(const Axis& o) const = default;
};

struct Provenance {
  std::string id;
  std::uint64_t seed = 0;
  std::uint64_t paths_per_cell = 0;
};

/// Dense row-major grid of scalars; the last axis varies fastest. Values are
/// stored as f32 so that files round-trip bit-exactly.
class TableNd {
 public:
  TableNd() = default;
  explicit TableNd(std::vector<Axis> axes);
  TableNd(std::vector<Axis> axes, std::vector<float> data);

  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(std::size_t i) const { return axes_.at(i); }
  /// Index of the named axis; throws ShapeError if absent.
  std::size_t axis_index(const std::string& name) const;
  std::size_t rank() const { return axes_.size(); }
  std::size_t size() const { return data_.size(); }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }
  std::size_t flat_index(std::span<const int> idx) const;
  std::vector<int> unravel(std::size_t flat) const;
  float& at(std::initializer_list<int> idx) { return data_[flat_index({idx.begin(), idx.size()})]; }
  float at(std::initializer_list<int> idx) const { return data_[flat_index({idx.begin(), idx.size()})]; }

  /// Multilinear interpolation, coordinates clamped to the axis ranges.
  double lookup(std::span<const double> coords) const;
  double lookup(std::initializer_list<double> coords) const { return lookup({coords.begin(), coords.size()}); }

  /// FNV-1a 64 of the serialized header and data.
  std::uint64_t content_hash() const;

  Provenance provenance;

 private:
  std::vector<Axis> axes_;
  std::vector<float> data_;
  std::vector<std::size_t> strides_;
};

std::vector<std::uint8_t> serialize_table(const TableNd& table);
TableNd deserialize_table(std::span<const std::uint8_t> bytes);

void save_table(const TableNd& table, const std::filesystem::path& path);
/// `expected_rank` of 0 accepts any rank; otherwise a mismatch is a ShapeError.
TableNd load_table(const std::filesystem::path& path, std::size_t expected_rank = 0);

/// One row per cell: axis coordinates then the value.
void write_table_csv(const TableNd& table, const std::filesystem::path& path);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace coat
