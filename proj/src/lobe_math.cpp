// SPDX-License-Identifier: Apache-2.0
#include "coat/lobe_math.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "coat/microfacet.hpp"
#include "coat/parallel.hpp"
#include "coat/reference_sim.hpp"
#include "coat/rng.hpp"
#include "coat/table.hpp"

namespace coat {

namespace {

// Alpha nodes are (i / N)^2 so the steep small-alpha end is well resolved.
constexpr int kMapNodes = 1024;
constexpr int kQuadrature = 4096;  // Simpson panels, even

struct LobeMap {
  std::vector<double> alpha, sigma, albedo;

  LobeMap() {
    alpha.resize(kMapNodes + 1);
    sigma.resize(kMapNodes + 1);
    albedo.resize(kMapNodes + 1);
    for (int i = 0; i <= kMapNodes; ++i) {
      const double t = double(i) / kMapNodes;
      alpha[i] = t * t;
      integrate(alpha[i], sigma[i], albedo[i]);
    }
  }

  // With tan^2(theta_h) = a^2 u / (1 - u), D(h) cos(theta_h) d(omega_h) = du, so
  // the lobe D G2 / 4 d(omega_o) becomes G2 du over u in [0, 1 / (1 + a^2)).
  static void integrate(double a, double& var, double& energy) {
    if (a <= 0.0) {
      var = 0.0;
      energy = 1.0;
      return;
    }
    const double umax = 1.0 / (1.0 + a * a);
    const double h = umax / kQuadrature;
    double e = 0.0, s2 = 0.0;
    for (int k = 0; k <= kQuadrature; ++k) {
      const double u = std::min(k * h, umax * (1.0 - 1e-12));
      const double tan2 = a * a * u / (1.0 - u);
      const double cos2h = 1.0 / (1.0 + tan2);
      const double cos_o = 2.0 * cos2h - 1.0;  // cos(2 theta_h)
      const double sin2_o = std::max(0.0, 1.0 - cos_o * cos_o);
      const double g = cos_o > 0.0 ? smith_g2(1.0, cos_o, a) : 0.0;
      const double wgt = (k == 0 || k == kQuadrature) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      e += wgt * g;
      s2 += wgt * g * sin2_o;
    }
    e *= h / 3.0;
    s2 *= h / 3.0;
    energy = e;
    var = 0.5 * s2 / e;
  }

  double sigma_at(double a) const {
    a = std::clamp(a, 0.0, 1.0);
    const double t = std::sqrt(a) * kMapNodes;
    const int i = std::min(static_cast<int>(t), kMapNodes - 1);
    const double f = (a - alpha[i]) / (alpha[i + 1] - alpha[i]);
    return sigma[i] + f * (sigma[i + 1] - sigma[i]);
  }

  double albedo_at(double a) const {
    a = std::clamp(a, 0.0, 1.0);
    const double t = std::sqrt(a) * kMapNodes;
    const int i = std::min(static_cast<int>(t), kMapNodes - 1);
    const double f = (a - alpha[i]) / (alpha[i + 1] - alpha[i]);
    return albedo[i] + f * (albedo[i + 1] - albedo[i]);
  }

  double alpha_at(double s) const {
    if (!(s > 0.0)) return 0.0;
    if (s >= sigma.back()) return 1.0;
    const auto it = std::upper_bound(sigma.begin(), sigma.end(), s);
    const auto i = static_cast<std::size_t>(it - sigma.begin()) - 1;
    const double f = (s - sigma[i]) / (sigma[i + 1] - sigma[i]);
    return alpha[i] + f * (alpha[i + 1] - alpha[i]);
  }
};

const LobeMap& lobe_map() {
  static const LobeMap map;
  return map;
}

const TableNd& fgd_table() {
  static const TableNd table = [] {
    TableNd t({Axis("cos_theta", 48, 0.0, 1.0), Axis("alpha", 16, 0.0, 1.0), Axis("eta", 40, 0.2, 5.0, Spacing::Log)});
    parallel_for(t.size(), [&](std::size_t f) {
      const auto idx = t.unravel(f);
      t.data()[f] = static_cast<float>(interface_albedo(t.axis(0).node(idx[0]), t.axis(1).node(idx[1]),
                                                         t.axis(2).node(idx[2]), 32, hash_seed(0xf6dULL, f)));
    });
    return t;
  }();
  return table;
}

const TableNd& white_albedo_table() {
  static const TableNd table = [] {
    TableNd t({Axis("cos_theta", 32, 0.0, 1.0), Axis("alpha", 32, 0.0, 1.0)});
    constexpr int n = 48;
    for (std::size_t f = 0; f < t.size(); ++f) {
      const auto idx = t.unravel(f);
      const double a = t.axis(1).node(idx[1]);
      const Vec3d wi = direction_from_cos(std::max(t.axis(0).node(idx[0]), 1e-4));
      if (a <= 0.0) {
        t.data()[f] = 1.0f;
        continue;
      }
      // Visible-normal sampling leaves G2 / G1 as the weight.
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const Vec3d m = sample_ggx_vndf(wi, a, Vec2d((i + 0.5) / n, (j + 0.5) / n));
          const Vec3d o = reflect(wi, m);
          if (o.z() > 0.0) sum += smith_g2(wi.z(), o.z(), a) / smith_g1(wi.z(), a);
        }
      }
      t.data()[f] = static_cast<float>(sum / (n * n));
    }
    return t;
  }();
  return table;
}

const TableNd& upper_fraction_table() {
  static const TableNd table = [] {
    TableNd t({Axis("cos_theta", 64, 0.0, 1.0), Axis("alpha", 64, 0.0, 1.0)});
    constexpr int n = 96;
    parallel_for(t.size(), [&](std::size_t f) {
      const auto idx = t.unravel(f);
      const double a = t.axis(1).node(idx[1]);
      const Vec3d wi = direction_from_cos(std::max(t.axis(0).node(idx[0]), 1e-4));
      int up = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          up += reflect(wi, sample_ggx_vndf(wi, a, Vec2d((i + 0.5) / n, (j + 0.5) / n))).z() > 0.0;
      t.data()[f] = a <= 0.0 ? 1.0f : static_cast<float>(double(up) / (n * n));
    });
    return t;
  }();
  return table;
}

}  // namespace

double vndf_upper_fraction(double cos_theta, double alpha) {
  if (alpha <= 0.0) return 1.0;
  return upper_fraction_table().lookup({cos_theta, alpha});
}

double ggx_directional_albedo(double cos_theta, double alpha) {
  if (alpha <= 0.0) return 1.0;
  return white_albedo_table().lookup({cos_theta, alpha});
}

double variance_from_alpha(double alpha) { return lobe_map().sigma_at(alpha); }

double alpha_from_variance(double sigma) { return lobe_map().alpha_at(sigma); }

double ggx_normal_albedo(double alpha) { return lobe_map().albedo_at(alpha); }

double fresnel_albedo_quadrature(double cos_theta, double alpha, double eta, int n) {
  const Vec3d wi = direction_from_cos(std::max(cos_theta, 1e-4));
  if (alpha <= 0.0) return fresnel_dielectric(wi.z(), eta);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec3d m = sample_ggx_vndf(wi, alpha, Vec2d((i + 0.5) / n, (j + 0.5) / n));
      sum += fresnel_dielectric(std::max(0.0, wi.dot(m)), eta);
    }
  }
  return sum / (double(n) * n);
}

double interface_albedo(double cos_theta, double alpha, double eta, int n, std::uint64_t seed) {
  check_eta(eta);
  if (eta == 1.0) return 0.0;
  const Vec3d wi = direction_from_cos(std::max(cos_theta, 1e-4));
  if (alpha <= 0.0) return fresnel_dielectric(wi.z(), eta);
  Rng rng(seed, 0);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec3d m = sample_ggx_vndf(wi, alpha, Vec2d((i + 0.5) / n, (j + 0.5) / n));
      const double f = fresnel_dielectric(std::max(0.0, wi.dot(m)), eta);
      const Vec3d o = reflect(wi, m);
      if (o.z() > 0.0) {
        sum += f;
      } else if (f > 0.0) {
        // Reflected into the surface: the chain continues from above.
        sum += f * (scatter_dielectric(o, eta, alpha, rng).transmitted ? 0.0 : 1.0);
      }
      if (f < 1.0) {
        const auto t = refract<double>(-wi, m, eta);
        // Refracted upwards from below the surface.
        if (t && t->z() > 0.0) sum += (1.0 - f) * (scatter_dielectric(*t, eta, alpha, rng).transmitted ? 1.0 : 0.0);
      }
    }
  }
  return sum / (double(n) * n);
}

double fresnel_albedo(double cos_theta, double alpha, double eta) {
  check_eta(eta);
  if (eta == 1.0) return 0.0;
  if (alpha <= 0.0) return fresnel_dielectric(std::clamp(cos_theta, 0.0, 1.0), eta);
  const TableNd& t = fgd_table();
  if (eta < t.axis(2).min || eta > t.axis(2).max) return interface_albedo(cos_theta, alpha, eta);
  return std::clamp(t.lookup({cos_theta, alpha, eta}), 0.0, 1.0);
}

}  // namespace coat
