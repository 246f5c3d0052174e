// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "coat/stats_tables.hpp"
#include "coat/table.hpp"

namespace coat {

/// One PCA step: table ~ mean(x) + sum_j coefficients[j](others) * basis(x, j).
struct PcaResult {
  Axis axis;
  Eigen::VectorXd mean;   // over the reduced axis
  Eigen::MatrixXd basis;  // axis count x k, orthonormal columns
  Eigen::VectorXd singular_values;
  std::vector<TableNd> coefficients;
};

PcaResult pca_reduce(const TableNd& table, const std::string& axis, int k);

/// Recursive PCA factorization. Level l reduces `axes[l]`; every coefficient
/// table of level l is reduced on its own, so level l holds prod_{m<l} K_m
/// nodes. Leaves are indexed in mixed radix (k_0, k_1, ...), last fastest.
class CompressedTable {
 public:
  struct Node {
    Eigen::VectorXd mean;
    Eigen::MatrixXd basis;
  };
  struct Level {
    Axis axis;
    int k = 1;
    std::vector<Node> nodes;
  };

  CompressedTable() = default;
  CompressedTable(std::vector<Axis> axes, std::vector<Level> levels, std::vector<TableNd> leaves);

  /// `plan` is the reduction order as (axis name, basis count) pairs.
  static CompressedTable compress(const TableNd& table, const std::vector<std::pair<std::string, int>>& plan);

  /// Coordinates in the original axis order; clamped like TableNd::lookup.
  double reconstruct(std::span<const double> coords) const;
  double reconstruct(std::initializer_list<double> coords) const {
    return reconstruct({coords.begin(), coords.size()});
  }
  /// Dense reconstruction on the original grid.
  TableNd reconstruct_dense() const;

  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<Level>& levels() const { return levels_; }
  const std::vector<TableNd>& leaves() const { return leaves_; }

 private:
  double eval(std::size_t level, std::size_t node, std::span<const double> coords) const;

  std::vector<Axis> axes_;  // original table axes
  std::vector<Level> levels_;
  std::vector<std::size_t> level_axis_;  // index into axes_ per level
  std::vector<std::size_t> leaf_axes_;   // indices into axes_ of the leaf axes
  std::vector<TableNd> leaves_;
};

/// ||T - T_hat||_F / ||T||_F over the grid nodes.
double relative_rms_error(const TableNd& table, const CompressedTable& ct);

/// T01 is reduced along tau first, then along `second_axis`.
CompressedTable compress_T01(const TableNd& t01, int k_tau = 2, int k_second = 4,
                             const std::string& second_axis = kAxisAlpha);
/// R10 / T10: tau only.
CompressedTable compress_3d(const TableNd& table, int k_tau = 2);

enum class TexelType : std::uint8_t { F16 = 0, F32 = 1 };

/// Writes the factorization as CLTX planes plus a JSON sidecar (`path` with
/// ".json" appended) describing the reconstruction term order. Leaf
/// coefficient tables are packed four per RGBA plane group.
void export_texture_layout(const CompressedTable& ct, const std::filesystem::path& path,
                           TexelType type = TexelType::F16);
CompressedTable import_texture_layout(const std::filesystem::path& path);
/// Number of RGBA plane groups needed for the leaves.
int plane_groups(const CompressedTable& ct);

/// Table-backed statistics with T01, R10 and T10 taken from compressed
/// factorizations (clipped to [0, 1]); sigma2+ stays a raw 2D table.
struct CompressedStatsTables : StatsSource {
  CompressedTable T01, R10, T10;
  TableNd S2P;

  double t01(double cos_theta, double alpha, double eta, double tau) const override;
  double r10(double eta, double alpha, double tau) const override;
  double t10(double eta, double alpha, double tau) const override;
  double sigma2plus(double eta, double alpha) const override;
};

}  // namespace coat
