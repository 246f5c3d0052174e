// SPDX-License-Identifier: Apache-2.0
#include "coat/brdf_model.hpp"

#include <cmath>

#include "coat/microfacet.hpp"

namespace coat {

namespace {

constexpr int kMaxRetries = 64;

struct Mixture {
  double p_direct = 1.0;
  double alpha2 = 0.0;
};

Mixture mixture(const CoatedLambertianParams& p, const Vec3d& wi, const StatsSource& tables) {
  const TwoLobes lobes = model_lobes(p, wi, tables);
  const double e1 = channel_mean(lobes.direct.energy);
  const double e2 = channel_mean(lobes.indirect.energy);
  Mixture m;
  m.alpha2 = lobes.indirect.alpha;
  m.p_direct = e1 + e2 > 0.0 ? e1 / (e1 + e2) : 1.0;
  if (m.alpha2 <= 0.0) m.p_direct = 1.0;
  return m;
}

}  // namespace

void CoatedLambertianParams::validate() const {
  check_eta(eta);
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must be in [0,1]");
  if (!((rho >= 0.0).all() && (rho <= 1.0).all())) throw DomainError("rho must be in [0,1]");
  if (!((tau >= 0.0).all() && (tau <= 1.0).all())) throw DomainError("tau must be in [0,1]");
}

double rho_2plus_closed(double t01, double rho, double r10, double t10) {
  const double denom = 1.0 - rho * r10;
  if (denom < 1e-6) throw NumericalError("indirect energy series saturates (rho * R10 ~ 1)");
  return t01 * rho / denom * t10;
}

Rgb rho_2plus(double cos_theta_i, const CoatedLambertianParams& p, const StatsSource& tables) {
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    if (p.rho[c] == 0.0) {
      out[c] = 0.0;
      continue;
    }
    out[c] = rho_2plus_closed(tables.t01(cos_theta_i, p.alpha, p.eta, p.tau[c]), p.rho[c],
                              tables.r10(p.eta, p.alpha, p.tau[c]), tables.t10(p.eta, p.alpha, p.tau[c]));
  }
  return out;
}

double alpha_2plus(const CoatedLambertianParams& p, const StatsSource& tables) {
  return alpha_from_variance(tables.sigma2plus(p.eta, p.alpha));
}

TwoLobes model_lobes(const CoatedLambertianParams& p, const Vec3d& wi, const StatsSource& tables) {
  p.validate();
  TwoLobes out;
  const double cos_i = std::clamp(wi.z(), 0.0, 1.0);
  out.direct.energy = Rgb::Constant(fresnel_albedo(cos_i, p.alpha, p.eta));
  out.direct.mean = reflect<double>(wi, Vec3d::UnitZ());
  out.direct.alpha = alpha_from_variance(variance_from_alpha(p.alpha));
  out.indirect.energy = rho_2plus(cos_i, p, tables);
  out.indirect.mean = Vec3d::UnitZ();
  out.indirect.alpha = alpha_2plus(p, tables);
  return out;
}

BrdfParts eval_parts(const CoatedLambertianParams& p, const Vec3d& wi, const Vec3d& wo, const StatsSource& tables,
                     const EvalOptions& options) {
  BrdfParts out;
  if (wi.z() <= 0.0 || wo.z() <= 0.0) return out;
  if (p.alpha > 0.0) {
    const Vec3d h = (wi + wo).normalized();
    const double f = fresnel_dielectric(std::max(0.0, wi.dot(h)), p.eta);
    out.direct = Rgb::Constant(ggx(h.z(), p.alpha) * smith_g2(wi.z(), wo.z(), p.alpha) * f /
                               (4.0 * wi.z() * wo.z()));
  }
  if ((p.rho > 0.0).any()) {
    const Rgb e2 = rho_2plus(wi.z(), p, tables);
    if (options.diffuse_fallback && p.eta > 1.0) {
      out.indirect = e2 * kInvPi;
    } else {
      const double a2 = alpha_2plus(p, tables);
      if (a2 > 0.0) {
        // Normal incidence: cos(theta_i) of the lobe is n.n = 1.
        const Vec3d h = (Vec3d::UnitZ() + wo).normalized();
        const double g = smith_g2(1.0, wo.z(), a2) / ggx_normal_albedo(a2);
        out.indirect = e2 * (ggx(h.z(), a2) * g / (4.0 * wo.z()));
      }
    }
  }
  return out;
}

Rgb eval(const CoatedLambertianParams& p, const Vec3d& wi, const Vec3d& wo, const StatsSource& tables,
         const EvalOptions& options) {
  return eval_parts(p, wi, wo, tables, options).total();
}

double pdf(const CoatedLambertianParams& p, const Vec3d& wi, const Vec3d& wo, const StatsSource& tables) {
  if (wi.z() <= 0.0 || wo.z() <= 0.0) return 0.0;
  const Mixture mix = mixture(p, wi, tables);
  // Both lobes are sampled on the upper hemisphere only, hence the
  // renormalization.
  double pd = 0.0;
  if (p.alpha > 0.0) {
    const Vec3d h = (wi + wo).normalized();
    const double up = vndf_upper_fraction(wi.z(), p.alpha);
    if (wi.dot(h) > 0.0 && up > 0.0) pd = vndf_pdf(wi, h, p.alpha) / (4.0 * wi.dot(h) * up);
  }
  double pi = 0.0;
  if (mix.alpha2 > 0.0) {
    const Vec3d h = (Vec3d::UnitZ() + wo).normalized();
    pi = ggx(h.z(), mix.alpha2) / 4.0 * (1.0 + mix.alpha2 * mix.alpha2);
  }
  return mix.p_direct * pd + (1.0 - mix.p_direct) * pi;
}

BrdfSample sample(const CoatedLambertianParams& p, const Vec3d& wi, Rng& rng, const StatsSource& tables) {
  BrdfSample s;
  if (wi.z() <= 0.0) return s;
  const Mixture mix = mixture(p, wi, tables);
  const double u = rng.uniform();
  const Vec2d uv = rng.uniform2();
  if (u < mix.p_direct) {
    if (p.alpha <= 0.0) {
      s.wo = reflect<double>(wi, Vec3d::UnitZ());
      s.delta = true;
      s.pdf = mix.p_direct;
      s.value = Rgb::Constant(fresnel_dielectric(wi.z(), p.eta) / mix.p_direct);
      return s;
    }
    s.wo = reflect(wi, sample_ggx_vndf(wi, p.alpha, uv));
    for (int retry = 0; retry < kMaxRetries && s.wo.z() <= 0.0; ++retry)
      s.wo = reflect(wi, sample_ggx_vndf(wi, p.alpha, rng.uniform2()));
  } else {
    // Normals with m.z^2 >= 1/2 reflect the normal into the upper hemisphere.
    const double u_max = 1.0 / (1.0 + mix.alpha2 * mix.alpha2);
    const Vec3d m = sample_ggx_ndf(mix.alpha2, Vec2d(uv.x() * u_max, uv.y()));
    s.wo = reflect<double>(Vec3d::UnitZ(), m);
  }
  if (s.wo.z() <= 0.0) return BrdfSample{s.wo, 0.0, Rgb::Zero(), false};
  s.pdf = pdf(p, wi, s.wo, tables);
  s.value = eval(p, wi, s.wo, tables);
  return s;
}

}  // namespace coat
