// SPDX-License-Identifier: Apache-2.0
#pragma once

// Adding-doubling over a stack of rough dielectrics, with an optional
// Lambertian base handled as one extra normal-centred lobe.

#include <functional>
#include <vector>

#include "coat/brdf_model.hpp"
#include "coat/layer_stack.hpp"
#include "coat/lobe_math.hpp"
#include "coat/stats_tables.hpp"
#include "coat/table.hpp"

namespace coat {

struct GlobalStats {
  Rgb r0i = Rgb::Zero(), ri0 = Rgb::Zero();
  Rgb t0i = Rgb::Ones(), ti0 = Rgb::Ones();
  double var_r0i = 0.0, var_ri0 = 0.0;
  double var_t0i = 0.0, var_ti0 = 0.0;
  double j_i0 = 1.0;
};

/// Local statistics of one interface. "12" is light arriving from above,
/// "21" from below.
struct LocalStats {
  Rgb r12 = Rgb::Zero(), t12 = Rgb::Ones();
  Rgb r21 = Rgb::Zero(), t21 = Rgb::Ones();
  double var_r12 = 0.0, var_r21 = 0.0;
  double var_t12 = 0.0, var_t21 = 0.0;
  double j12 = 1.0, j21 = 1.0;
  double cos_t = 1.0;  // mean cosine after transmission downwards
};

struct RefractionStats {
  double sigma_t = 0.0;   // variance added by transmission
  double jacobian = 1.0;  // scaling of incident variance
};

/// (eta, alpha) -> transmission statistics for light arriving from the side
/// where `eta` is the IOR ratio other / incident.
using RefractionModel = std::function<RefractionStats(double eta, double alpha)>;

/// Measures transmission statistics at normal incidence with the reference
/// simulator: a zero-variance beam gives sigma_t, and a narrow GGX beam
/// (common random numbers) gives the jacobian as d(sigma_out)/d(sigma_in).
RefractionStats calibrate_refraction(double eta, double alpha, std::size_t n_paths, std::uint64_t seed);

struct RefractionTables {
  TableNd sigma_t;   // (eta, alpha)
  TableNd jacobian;  // (eta, alpha)

  static RefractionTables compute(int eta_samples, int alpha_samples, std::size_t n_paths, std::uint64_t seed,
                                  int threads = 0);
  void save(const std::filesystem::path& dir) const;
  static RefractionTables load(const std::filesystem::path& dir);
  RefractionModel model() const;
};

/// Lazily calibrated default table, shared by every caller.
RefractionModel default_refraction();

struct LayeredContext {
  const StatsSource* tables = nullptr;
  RefractionModel refraction;  // empty: default_refraction()
};

/// Local statistics of a dielectric for light arriving from above with mean
/// cosine `cos_i`.
LocalStats interface_local_stats(const RoughDielectric& d, double cos_i, const RefractionModel& refraction);

/// Local statistics of a gap: no reflection, Beer-Lambert transmission along
/// the mean cosine.
LocalStats medium_local_stats(const Medium& m, double cos_theta);

struct AddingResult {
  GlobalStats gs;
  Lobe lobe;
};

/// One adding step. The emitted lobe carries the energy reflected by the new
/// interface and escaping at the top; `mean` is its direction.
AddingResult adding_step(const GlobalStats& gs, const LocalStats& local, const Vec3d& mean);

/// min(sigma_t, sigma2+(eta, alpha)).
double clamp_variance(double sigma_t, double eta, double alpha, const StatsSource& tables);

/// Lobes of the coated Lambertian at the bottom of the stack: the direct lobe
/// of the last dielectric, then the normal-centred lobe carried up through
/// the upper interfaces. `gs` is the state above the last dielectric.
std::vector<Lobe> lambertian_bottom(const GlobalStats& gs, const LayerStack& stack, const Vec3d& wi,
                                    double cos_at_coat, const LayeredContext& ctx);

/// Full evaluation: one lobe per dielectric, plus the Lambertian lobe last.
std::vector<Lobe> evaluate_layered(const LayerStack& stack, const Vec3d& wi, const LayeredContext& ctx);

/// Reflected radiance of a lobe list (GGX lobes, normal-incidence
/// normalization as in the two-lobe model).
Rgb eval_lobes(const std::vector<Lobe>& lobes, const Vec3d& wi, const Vec3d& wo, const LayerStack& stack);

}  // namespace coat
