// SPDX-License-Identifier: Apache-2.0
#pragma once

// Lobe representation and the scalar maps shared by the two-lobe model and
// the layered framework.

#include <cstdint>

#include "coat/common.hpp"

namespace coat {

struct Lobe {
  Rgb energy = Rgb::Zero();
  Vec3d mean = Vec3d::UnitZ();
  double alpha = 0.0;  // equivalent GGX roughness

  bool operator==(const Lobe& o) const {
    return (energy == o.energy).all() && mean == o.mean && alpha == o.alpha;
  }
};

/// Projected-disc per-axis variance of the normalized GGX lobe seen from
/// normal incidence, D(h) G2 / (4 cos_o) with h = normalize(n + w_o).
/// Piecewise linear on a fine alpha grid; strictly increasing.
double variance_from_alpha(double alpha);
/// Exact inverse of variance_from_alpha, clamped to alpha in [0, 1].
double alpha_from_variance(double sigma);

/// Directional albedo of the normal-incidence GGX reflection lobe without
/// Fresnel, integral of D(h) G2(n, w_o) / 4 over w_o.
double ggx_normal_albedo(double alpha);

/// White directional albedo of the GGX reflection lobe D G2 / (4 cos_i cos_o)
/// for light arriving at cosine `cos_theta`; tabulated.
double ggx_directional_albedo(double cos_theta, double alpha);

/// Fraction of visible-normal reflections from `cos_theta` that stay above
/// the surface; tabulated.
double vndf_upper_fraction(double cos_theta, double alpha);

/// Directional albedo of a rough dielectric for light arriving from above:
/// the fraction leaving upwards, microfacet chains included. Exact for
/// alpha = 0 or eta = 1, otherwise interpolated from a lazily built table.
double fresnel_albedo(double cos_theta, double alpha, double eta);
/// One cell of that table: the first microfacet event on an n x n grid of
/// visible normals, continuations into the surface sampled once each.
double interface_albedo(double cos_theta, double alpha, double eta, int n = 32, std::uint64_t seed = 1);
/// Expected single-event Fresnel reflectance over visible normals, n x n grid.
double fresnel_albedo_quadrature(double cos_theta, double alpha, double eta, int n = 32);

}  // namespace coat
