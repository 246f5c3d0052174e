// SPDX-License-Identifier: Apache-2.0
#pragma once

// Analytic optics and GGX microfacet primitives shared by the stochastic
// reference and the approximate model. Everything here is header-only and
// templated on the scalar type; directions live in a tangent frame whose z
// axis is the shading normal.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Geometry>

#include "coat/common.hpp"

namespace coat {

template <typename Scalar>
void check_eta(Scalar eta) {
  if (!(eta > Scalar(0)) || !std::isfinite(eta)) {
    throw DomainError("relative IOR must be finite and > 0, got " + std::to_string(double(eta)));
  }
}

/// Unpolarized Fresnel reflectance of a smooth dielectric boundary.
/// `eta` is the IOR of the transmitted side over the IOR of the incident side.
template <typename Scalar>
Scalar fresnel_dielectric(Scalar cos_theta_i, Scalar eta) {
  check_eta(eta);
  const Scalar c = std::clamp(cos_theta_i, Scalar(0), Scalar(1));
  const Scalar sin2_t = (Scalar(1) - c * c) / (eta * eta);
  if (sin2_t >= Scalar(1)) return Scalar(1);
  const Scalar cos_t = std::sqrt(Scalar(1) - sin2_t);
  const Scalar rs = (c - eta * cos_t) / (c + eta * cos_t);
  const Scalar rp = (eta * c - cos_t) / (eta * c + cos_t);
  return std::clamp(Scalar(0.5) * (rs * rs + rp * rp), Scalar(0), Scalar(1));
}

template <typename Scalar>
Vec3<Scalar> reflect(const Vec3<Scalar>& w, const Vec3<Scalar>& n) {
  return Scalar(2) * w.dot(n) * n - w;
}

/// Refraction of a propagation direction `d` through a boundary with normal `n`.
/// The incident side is the one `d` arrives from; `eta` is n_other / n_incident.
/// Returns the transmitted propagation direction, or nullopt on total internal
/// reflection.
template <typename Scalar>
std::optional<Vec3<Scalar>> refract(const Vec3<Scalar>& d, Vec3<Scalar> n, Scalar eta) {
  Scalar c = -d.dot(n);
  if (c < Scalar(0)) {
    n = -n;
    c = -c;
  }
  const Scalar sin2_t = (Scalar(1) - c * c) / (eta * eta);
  if (sin2_t >= Scalar(1)) return std::nullopt;
  const Scalar cos_t = std::sqrt(Scalar(1) - sin2_t);
  Vec3<Scalar> t = d / eta + (c / eta - cos_t) * n;
  return t.normalized();
}

template <typename Scalar>
std::optional<Vec3<Scalar>> refract(const Vec3<Scalar>& d, Scalar eta) {
  return refract<Scalar>(d, Vec3<Scalar>::UnitZ(), eta);
}

/// GGX normal distribution D(h) for roughness alpha > 0.
template <typename Scalar>
Scalar ggx(Scalar h_dot_n, Scalar alpha) {
  if (h_dot_n <= Scalar(0)) return Scalar(0);
  const Scalar a2 = alpha * alpha;
  const Scalar c2 = h_dot_n * h_dot_n;
  const Scalar d = c2 * (a2 - Scalar(1)) + Scalar(1);
  return a2 / (Scalar(kPi) * d * d);
}

template <typename Scalar>
Scalar smith_lambda(Scalar cos_theta, Scalar alpha) {
  const Scalar c2 = cos_theta * cos_theta;
  if (c2 >= Scalar(1)) return Scalar(0);
  if (c2 <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  const Scalar tan2 = (Scalar(1) - c2) / c2;
  return Scalar(0.5) * (std::sqrt(Scalar(1) + alpha * alpha * tan2) - Scalar(1));
}

template <typename Scalar>
Scalar smith_g1(Scalar cos_theta, Scalar alpha) {
  return Scalar(1) / (Scalar(1) + smith_lambda(std::abs(cos_theta), alpha));
}

/// Height-correlated masking-shadowing.
template <typename Scalar>
Scalar smith_g2(Scalar cos_i, Scalar cos_o, Scalar alpha) {
  return Scalar(1) /
         (Scalar(1) + smith_lambda(std::abs(cos_i), alpha) + smith_lambda(std::abs(cos_o), alpha));
}

/// Visible-normal sampling (Heitz 2018). `w` must be in the upper hemisphere.
template <typename Scalar>
Vec3<Scalar> sample_ggx_vndf(const Vec3<Scalar>& w, Scalar alpha, const Vec2<Scalar>& u) {
  if (alpha <= Scalar(0)) return Vec3<Scalar>::UnitZ();
  const Vec3<Scalar> vh = Vec3<Scalar>(alpha * w.x(), alpha * w.y(), w.z()).normalized();
  const Scalar lensq = vh.x() * vh.x() + vh.y() * vh.y();
  const Vec3<Scalar> t1 = lensq > Scalar(0)
                              ? Vec3<Scalar>(Vec3<Scalar>(-vh.y(), vh.x(), Scalar(0)) / std::sqrt(lensq))
                              : Vec3<Scalar>(Vec3<Scalar>::UnitX());
  const Vec3<Scalar> t2 = vh.cross(t1);
  const Scalar r = std::sqrt(u.x());
  const Scalar phi = Scalar(2 * kPi) * u.y();
  const Scalar p1 = r * std::cos(phi);
  Scalar p2 = r * std::sin(phi);
  const Scalar s = Scalar(0.5) * (Scalar(1) + vh.z());
  p2 = (Scalar(1) - s) * std::sqrt(std::max(Scalar(0), Scalar(1) - p1 * p1)) + s * p2;
  const Vec3<Scalar> nh =
      p1 * t1 + p2 * t2 + std::sqrt(std::max(Scalar(0), Scalar(1) - p1 * p1 - p2 * p2)) * vh;
  return Vec3<Scalar>(alpha * nh.x(), alpha * nh.y(), std::max(Scalar(1e-9), nh.z())).normalized();
}

/// Plain NDF inversion: density D(m) (m.n) over the hemisphere.
template <typename Scalar>
Vec3<Scalar> sample_ggx_ndf(Scalar alpha, const Vec2<Scalar>& u) {
  if (alpha <= Scalar(0)) return Vec3<Scalar>::UnitZ();
  const Scalar tan2 = alpha * alpha * u.x() / (Scalar(1) - u.x());
  const Scalar cos_t = Scalar(1) / std::sqrt(Scalar(1) + tan2);
  const Scalar sin_t = std::sqrt(std::max(Scalar(0), Scalar(1) - cos_t * cos_t));
  const Scalar phi = Scalar(2 * kPi) * u.y();
  return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
}

/// Samples a microfacet normal: visible normals when a view direction is
/// given, plain NDF inversion otherwise.
template <typename Scalar>
Vec3<Scalar> sample_ggx_normal(const std::optional<Vec3<Scalar>>& w, Scalar alpha,
                               const Vec2<Scalar>& u) {
  return w ? sample_ggx_vndf(*w, alpha, u) : sample_ggx_ndf(alpha, u);
}

template <typename Scalar>
Scalar vndf_pdf(const Vec3<Scalar>& w, const Vec3<Scalar>& m, Scalar alpha) {
  const Scalar wm = w.dot(m);
  if (wm <= Scalar(0) || w.z() <= Scalar(0)) return Scalar(0);
  return smith_g1(w.z(), alpha) * wm * ggx(m.z(), alpha) / w.z();
}

template <typename Scalar>
Vec3<Scalar> cosine_sample_hemisphere(const Vec2<Scalar>& u) {
  const Scalar r = std::sqrt(u.x());
  const Scalar phi = Scalar(2 * kPi) * u.y();
  return {r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(Scalar(0), Scalar(1) - u.x()))};
}

/// Density (per solid angle of `o`) of one visible-normal scattering event from
/// `wi` (upper hemisphere) ending in reflection towards `o` (upper hemisphere).
template <typename Scalar>
Scalar vndf_reflection_density(const Vec3<Scalar>& wi, const Vec3<Scalar>& o, Scalar alpha,
                               Scalar eta) {
  if (alpha <= Scalar(0) || o.z() <= Scalar(0) || wi.z() <= Scalar(0)) return Scalar(0);
  const Vec3<Scalar> m = (wi + o).normalized();
  const Scalar c = wi.dot(m);
  if (c <= Scalar(0) || m.z() <= Scalar(0)) return Scalar(0);
  return smith_g1(wi.z(), alpha) * ggx(m.z(), alpha) * fresnel_dielectric(c, eta) /
         (Scalar(4) * wi.z());
}

/// Same as above for transmission towards `o` (lower hemisphere);
/// `eta` = n_transmitted / n_incident.
template <typename Scalar>
Scalar vndf_transmission_density(const Vec3<Scalar>& wi, const Vec3<Scalar>& o, Scalar alpha,
                                 Scalar eta) {
  if (alpha <= Scalar(0) || o.z() >= Scalar(0) || wi.z() <= Scalar(0)) return Scalar(0);
  if (eta == Scalar(1)) return Scalar(0);  // index-matched: delta transmission
  Vec3<Scalar> m = -(wi + eta * o);
  const Scalar len = m.norm();
  if (len <= Scalar(0)) return Scalar(0);
  m /= len;
  if (m.z() < Scalar(0)) m = -m;
  const Scalar wim = wi.dot(m);
  const Scalar om = o.dot(m);
  if (wim <= Scalar(0) || om >= Scalar(0)) return Scalar(0);
  const Scalar denom = wim + eta * om;
  const Scalar jac = eta * eta * std::abs(om) / (denom * denom);
  const Scalar d_vis = smith_g1(wi.z(), alpha) * wim * ggx(m.z(), alpha) / wi.z();
  return d_vis * (Scalar(1) - fresnel_dielectric(wim, eta)) * jac;
}

/// Orthonormal frame around a unit normal (Duff et al. 2017).
template <typename Scalar>
struct Frame {
  Vec3<Scalar> s, t, n;

  explicit Frame(const Vec3<Scalar>& normal) : n(normal) {
    const Scalar sign = std::copysign(Scalar(1), n.z());
    const Scalar a = Scalar(-1) / (sign + n.z());
    const Scalar b = n.x() * n.y() * a;
    s = Vec3<Scalar>(Scalar(1) + sign * n.x() * n.x() * a, sign * b, -sign * n.x());
    t = Vec3<Scalar>(b, sign + n.y() * n.y() * a, -n.y());
  }

  Vec3<Scalar> to_local(const Vec3<Scalar>& v) const { return {v.dot(s), v.dot(t), v.dot(n)}; }
  Vec3<Scalar> to_world(const Vec3<Scalar>& v) const { return v.x() * s + v.y() * t + v.z() * n; }
};

inline Vec3d direction_from_cos(double cos_theta, double phi = 0.0) {
  const double c = std::clamp(cos_theta, -1.0, 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return {s * std::cos(phi), s * std::sin(phi), c};
}

}  // namespace coat
