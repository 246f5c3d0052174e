// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "coat/table.hpp"

namespace coat {

// Axis names used throughout.
inline constexpr const char* kAxisCos = "cos_theta";
inline constexpr const char* kAxisAlpha = "alpha";
inline constexpr const char* kAxisEta = "eta";
inline constexpr const char* kAxisTau = "tau";

struct GridSpec {
  int cos_samples = 64;
  int alpha_samples = 64;
  int eta_samples = 64;
  int tau_samples = 16;
  double eta_min = 0.25;
  double eta_max = 4.0;
};

Axis cos_axis(const GridSpec& g);
Axis alpha_axis(const GridSpec& g);
Axis eta_axis(const GridSpec& g);
Axis tau_axis(const GridSpec& g);

struct PrecomputeConfig {
  std::uint64_t seed = 1;
  std::size_t paths_per_cell = 40960;
  int threads = 0;  // 0: default
};

/// T01(cos_theta, alpha, eta, tau).
TableNd precompute_T01(const std::vector<Axis>& axes, const PrecomputeConfig& config);
/// R10 and T10 over (eta, alpha, tau).
std::pair<TableNd, TableNd> precompute_diffuse_RT(const std::vector<Axis>& axes, const PrecomputeConfig& config);
/// sigma2+(eta, alpha).
TableNd precompute_sigma2plus(const std::vector<Axis>& axes, const PrecomputeConfig& config);

/// Single-cell estimators; the precompute functions are built from these, so
/// regenerating a cell with the same seed reproduces it exactly.
std::vector<double> t01_cell(double cos_theta, double alpha, double eta, const Axis& tau,
                             std::size_t n_paths, std::uint64_t seed);
std::pair<std::vector<double>, std::vector<double>> diffuse_rt_cell(double eta, double alpha, const Axis& tau,
                                                                    std::size_t n_paths, std::uint64_t seed);
std::uint64_t cell_seed(std::uint64_t global_seed, std::uint64_t table_tag, std::uint64_t cell);

inline constexpr std::uint64_t kTagT01 = 1;
inline constexpr std::uint64_t kTagRT = 2;
inline constexpr std::uint64_t kTagS2P = 3;

/// Per-channel-free scalar statistics needed by the model.
class StatsSource {
 public:
  virtual ~StatsSource() = default;
  virtual double t01(double cos_theta, double alpha, double eta, double tau) const = 0;
  virtual double r10(double eta, double alpha, double tau) const = 0;
  virtual double t10(double eta, double alpha, double tau) const = 0;
  virtual double sigma2plus(double eta, double alpha) const = 0;
};

struct StatsTables : StatsSource {
  TableNd T01, R10, T10, S2P;

  double t01(double cos_theta, double alpha, double eta, double tau) const override;
  double r10(double eta, double alpha, double tau) const override;
  double t10(double eta, double alpha, double tau) const override;
  double sigma2plus(double eta, double alpha) const override;

  /// Range invariants over all cells; throws ValidationError naming the cell.
  void validate() const;

  static StatsTables compute(const GridSpec& grid, const PrecomputeConfig& config);
  void save(const std::filesystem::path& dir) const;
  static StatsTables load(const std::filesystem::path& dir);
};

}  // namespace coat
