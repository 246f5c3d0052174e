// SPDX-License-Identifier: Apache-2.0
#pragma once

// Two-lobe coated Lambertian BRDF: a GGX microfacet lobe for light reflected
// by the coat and a normal-centred GGX lobe for light that reached the base.

#include "coat/common.hpp"
#include "coat/lobe_math.hpp"
#include "coat/rng.hpp"
#include "coat/stats_tables.hpp"

namespace coat {

struct CoatedLambertianParams {
  double eta = 1.5;
  double alpha = 0.1;
  Rgb rho = Rgb::Constant(0.5);
  Rgb tau = Rgb::Ones();

  void validate() const;
};

struct EvalOptions {
  // Replace the indirect GGX lobe by rho2+ / pi. Only meaningful for eta > 1.
  bool diffuse_fallback = false;
};

/// T01 rho / (1 - rho R10) T10 for one channel. Throws NumericalError when
/// the denominator drops below 1e-6.
double rho_2plus_closed(double t01, double rho, double r10, double t10);

/// Energy of the indirect lobe, per channel, with each channel's tau.
Rgb rho_2plus(double cos_theta_i, const CoatedLambertianParams& p, const StatsSource& tables);

/// Equivalent roughness of the indirect lobe.
double alpha_2plus(const CoatedLambertianParams& p, const StatsSource& tables);

struct TwoLobes {
  Lobe direct;
  Lobe indirect;
};

/// Directional statistics of the two lobes for light arriving from `wi`.
TwoLobes model_lobes(const CoatedLambertianParams& p, const Vec3d& wi, const StatsSource& tables);

struct BrdfParts {
  Rgb direct = Rgb::Zero();
  Rgb indirect = Rgb::Zero();
  Rgb total() const { return direct + indirect; }
};

BrdfParts eval_parts(const CoatedLambertianParams& p, const Vec3d& wi, const Vec3d& wo, const StatsSource& tables,
                     const EvalOptions& options = {});
Rgb eval(const CoatedLambertianParams& p, const Vec3d& wi, const Vec3d& wo, const StatsSource& tables,
         const EvalOptions& options = {});

struct BrdfSample {
  Vec3d wo = Vec3d::UnitZ();
  double pdf = 0.0;
  Rgb value = Rgb::Zero();
  bool delta = false;  // mirror reflection of a smooth coat; value is the throughput weight
};

/// Picks a lobe by relative energy, then samples visible normals (direct) or
/// the normal-incidence GGX lobe (indirect). `pdf` is the mixture density.
BrdfSample sample(const CoatedLambertianParams& p, const Vec3d& wi, Rng& rng, const StatsSource& tables);
double pdf(const CoatedLambertianParams& p, const Vec3d& wi, const Vec3d& wo, const StatsSource& tables);

}  // namespace coat
