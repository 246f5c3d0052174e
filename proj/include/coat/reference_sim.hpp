// SPDX-License-Identifier: Apache-2.0
#pragma once

// Stochastic light transport through a layer stack.
//
// Interfaces are horizontal planes with normal +z; the path starts above the
// top interface. Directions passed in are world-space: `wi` points towards the
// light, exit directions are propagation directions.

#include <array>
#include <filesystem>

#include "coat/common.hpp"
#include "coat/layer_stack.hpp"
#include "coat/rng.hpp"

namespace coat {

enum class ExitSide { Top, Bottom, Absorbed };

struct PathOutcome {
  ExitSide side = ExitSide::Absorbed;
  Vec3d direction = Vec3d::Zero();
  Rgb throughput = Rgb::Zero();
  int order = 0;  // Lambertian bounces
};

struct TraceOptions {
  double roulette_threshold = 1e-4;
  int max_events = 1 << 16;
};

/// Result of one rough-dielectric interaction, including the chain of
/// microfacet events needed to leave the interface.
struct InterfaceEvent {
  bool transmitted = false;
  bool lost = false;  // chain cap reached
  Vec3d direction = Vec3d::Zero();
};

/// Scatters a propagation direction `d` off a rough dielectric at the plane
/// z = 0. `eta` is IOR below over IOR above. Each microfacet event samples a
/// visible normal, then reflects or refracts by Fresnel; events that leave on
/// the wrong side of the mean surface continue the chain.
///
/// If `probe` is given, the single-event densities (per solid angle) of
/// leaving the interface along `*probe` are summed into `*probe_density`.
InterfaceEvent scatter_dielectric(const Vec3d& d, double eta, double alpha, Rng& rng,
                                  const Vec3d* probe = nullptr, double* probe_density = nullptr);

PathOutcome trace_path(const LayerStack& stack, const Vec3d& wi, Rng& rng,
                       const TraceOptions& options = {});

/// Energy binned over the projected disc, plus exact first and second
/// moments of the (channel-averaged) weights.
struct DiscHistogram {
  int bins = 64;
  std::array<Eigen::ArrayXXd, 3> value;  // [channel](ix, iy)
  Rgb energy = Rgb::Zero();
  Rgb energy_sq = Rgb::Zero();  // sum of squared per-path contributions
  double w = 0.0;
  Vec2d wp = Vec2d::Zero();
  double wp2 = 0.0;

  explicit DiscHistogram(int bins = 64);
  void add(const Vec3d& direction, const Rgb& weight);
  void merge(const DiscHistogram& other);
  void scale(double s);
};

struct GonioResult {
  DiscHistogram order0;
  DiscHistogram order_multi;  // order >= 1
  Rgb bottom = Rgb::Zero();
  Rgb absorbed = Rgb::Zero();
  std::size_t n_paths = 0;

  explicit GonioResult(int bins = 64) : order0(bins), order_multi(bins) {}
  Rgb top() const { return order0.energy + order_multi.energy; }
  /// Monte Carlo standard error of an accumulated per-path mean.
  Rgb standard_error(const DiscHistogram& h) const;
};

struct GonioConfig {
  std::size_t n_paths = 1'000'000;
  int bins = 64;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: default
};

/// Per-path normalized histograms; deterministic for a given seed and
/// independent of the worker count.
GonioResult goniophotometer(const LayerStack& stack, const Vec3d& wi, const GonioConfig& config);

struct DirectionalStats {
  Rgb energy = Rgb::Zero();
  Vec2d mean = Vec2d::Zero();
  double variance = 0.0;
};

/// Throws ValidationError on an empty histogram.
DirectionalStats directional_stats(const DiscHistogram& h);

Rgb furnace_albedo(const LayerStack& stack, const Vec3d& wi, std::size_t n_paths, std::uint64_t seed);

/// Variance of the light escaping a single rough dielectric coat when emitted
/// from a white cosine base below it. `n_paths` counts emissions, including
/// re-emissions after internal reflection.
double measure_sigma2plus(double eta, double alpha, std::size_t n_paths, std::uint64_t seed,
                          int threads = 0);

/// One-sample estimate of the top-exit density towards `wo` (per solid angle,
/// per unit incident power) for light arriving from `wi`, accumulated with
/// next-event connections at the last scattering vertex. Delta lobes (mirror
/// reflection off a smooth top) are not represented.
Rgb estimate_exit_density(const LayerStack& stack, const Vec3d& wi, const Vec3d& wo, Rng& rng,
                          const TraceOptions& options = {});

void write_histogram_csv(const GonioResult& result, const std::filesystem::path& path);

}  // namespace coat
