// SPDX-License-Identifier: Apache-2.0
#include "coat/layered.hpp"

#include <cmath>
#include <memory>

#include "coat/microfacet.hpp"
#include "coat/parallel.hpp"
#include "coat/reference_sim.hpp"
#include "coat/rng.hpp"

namespace coat {

namespace {

constexpr double kProbeAlpha = 0.05;
constexpr std::uint64_t kTagRefraction = 4;

double weighted(const Rgb& num_w, double num_v, const Rgb& add_w, double add_v, const Rgb& total) {
  const double d = channel_mean(total);
  if (!(d > 1e-12)) return 0.0;
  return std::max(0.0, (channel_mean(num_w) * num_v + channel_mean(add_w) * add_v) / d);
}

struct Moments {
  double w = 0.0, x = 0.0, y = 0.0, r2 = 0.0;
  void add(const Vec3d& d, double wt) {
    w += wt;
    x += wt * d.x();
    y += wt * d.y();
    r2 += wt * (d.x() * d.x() + d.y() * d.y());
  }
  double variance() const {
    if (!(w > 0.0)) return 0.0;
    const double mx = x / w, my = y / w;
    return std::max(0.0, 0.5 * (r2 / w - mx * mx - my * my));
  }
};

}  // namespace

RefractionStats calibrate_refraction(double eta, double alpha, std::size_t n_paths, std::uint64_t seed) {
  check_eta(eta);
  if (eta == 1.0) return {};
  const Rng root(seed, 0);
  Moments in, beam, lobe;
  for (std::size_t i = 0; i < n_paths; ++i) {
    Rng r1 = root.split(i);
    Rng r2 = r1;
    // Narrow normal-incidence GGX lobe: NDF samples reweighted by G2.
    const Vec2d u = r1.uniform2();
    r2.uniform2();
    const Vec3d m = sample_ggx_vndf<double>(Vec3d::UnitZ(), kProbeAlpha, u);
    const Vec3d w = reflect<double>(Vec3d::UnitZ(), m);
    if (w.z() <= 0.0) continue;
    const double g = smith_g2(1.0, w.z(), kProbeAlpha);
    in.add(w, g);
    const InterfaceEvent a = scatter_dielectric(Vec3d(0.0, 0.0, -1.0), eta, alpha, r2);
    const InterfaceEvent b = scatter_dielectric(-w, eta, alpha, r1);
    if (!a.lost && a.transmitted) beam.add(a.direction, 1.0);
    if (!b.lost && b.transmitted) lobe.add(b.direction, g);
  }
  RefractionStats s;
  s.sigma_t = beam.variance();
  const double sin = in.variance();
  s.jacobian = sin > 0.0 ? std::max(0.05, (lobe.variance() - s.sigma_t) / sin) : 1.0;
  return s;
}

RefractionTables RefractionTables::compute(int eta_samples, int alpha_samples, std::size_t n_paths,
                                           std::uint64_t seed, int threads) {
  const std::vector<Axis> axes{Axis("eta", eta_samples, 0.2, 5.0, Spacing::Log),
                               Axis("alpha", alpha_samples, 0.0, 1.0)};
  RefractionTables t{TableNd(axes), TableNd(axes)};
  parallel_for(
      t.sigma_t.size(),
      [&](std::size_t cell) {
        const auto idx = t.sigma_t.unravel(cell);
        const RefractionStats s = calibrate_refraction(axes[0].node(idx[0]), axes[1].node(idx[1]), n_paths,
                                                       hash_seed(seed, kTagRefraction, cell));
        t.sigma_t.data()[cell] = static_cast<float>(s.sigma_t);
        t.jacobian.data()[cell] = static_cast<float>(s.jacobian);
      },
      threads > 0 ? threads : default_thread_count());
  t.sigma_t.provenance = {"RTS", seed, n_paths};
  t.jacobian.provenance = {"RTJ", seed, n_paths};
  return t;
}

void RefractionTables::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  save_table(sigma_t, dir / "RTS.cltb");
  save_table(jacobian, dir / "RTJ.cltb");
}

RefractionTables RefractionTables::load(const std::filesystem::path& dir) {
  return {load_table(dir / "RTS.cltb", 2), load_table(dir / "RTJ.cltb", 2)};
}

RefractionModel RefractionTables::model() const {
  auto shared = std::make_shared<const RefractionTables>(*this);
  return [shared](double eta, double alpha) -> RefractionStats {
    if (eta == 1.0) return {};
    return {std::max(0.0, shared->sigma_t.lookup({eta, alpha})),
            std::max(0.05, shared->jacobian.lookup({eta, alpha}))};
  };
}

RefractionModel default_refraction() {
  static const RefractionModel model = RefractionTables::compute(25, 11, 16384, 0x5eedULL).model();
  return model;
}

LocalStats interface_local_stats(const RoughDielectric& d, double cos_i, const RefractionModel& refraction) {
  check_eta(d.eta);
  LocalStats s;
  cos_i = std::clamp(cos_i, 0.0, 1.0);
  s.var_r12 = s.var_r21 = variance_from_alpha(d.alpha);
  if (d.eta == 1.0) {
    s.cos_t = cos_i;
    return s;
  }
  const double sin2_t = (1.0 - cos_i * cos_i) / (d.eta * d.eta);
  s.cos_t = std::sqrt(std::max(1e-4, 1.0 - sin2_t));
  s.r12 = Rgb::Constant(fresnel_albedo(cos_i, d.alpha, d.eta));
  s.t12 = 1.0 - s.r12;
  s.r21 = Rgb::Constant(fresnel_albedo(s.cos_t, d.alpha, 1.0 / d.eta));
  s.t21 = 1.0 - s.r21;
  const RefractionModel& rm = refraction ? refraction : default_refraction();
  const RefractionStats down = rm(d.eta, d.alpha);
  const RefractionStats up = rm(1.0 / d.eta, d.alpha);
  s.var_t12 = down.sigma_t;
  s.j12 = down.jacobian;
  s.var_t21 = up.sigma_t;
  s.j21 = up.jacobian;
  return s;
}

LocalStats medium_local_stats(const Medium& m, double cos_theta) {
  LocalStats s;
  s.cos_t = cos_theta;
  s.t12 = s.t21 = m.tau.pow(1.0 / std::max(cos_theta, 1e-4));
  return s;
}

AddingResult adding_step(const GlobalStats& gs, const LocalStats& l, const Vec3d& mean) {
  const Rgb denom = 1.0 - gs.ri0 * l.r12;
  if (!(denom > 0.0).all()) throw NumericalError("adding step: multiple-scattering denominator is not positive");
  AddingResult out;
  GlobalStats& g = out.gs;
  const Rgb e_r = gs.t0i * l.r12 * gs.ti0 / denom;
  const double m = channel_mean(gs.ri0 * l.r12 / denom);
  const double lobe_var = gs.var_ti0 + gs.j_i0 * (gs.var_t0i + l.var_r12 + m * (l.var_r12 + gs.var_ri0));

  g.r0i = gs.r0i + e_r;
  g.t0i = gs.t0i * l.t12 / denom;
  const Rgb inner = l.t21 * gs.ri0 * l.t12 / denom;
  g.ri0 = l.r21 + inner;
  g.ti0 = gs.ti0 * l.t21 / denom;

  g.var_r0i = weighted(gs.r0i, gs.var_r0i, e_r, lobe_var, g.r0i);
  g.var_t0i = l.j12 * gs.var_t0i + l.var_t12 + l.j12 * (l.var_r12 + gs.var_ri0) * m;
  g.var_ri0 = weighted(l.r21, l.var_r21, inner,
                       l.var_t12 + l.j12 * (l.var_t21 + gs.var_ri0 + m * (l.var_r12 + gs.var_ri0)), g.ri0);
  g.var_ti0 = gs.j_i0 * l.var_t21 + gs.var_ti0 + gs.j_i0 * (l.var_r12 + gs.var_ri0) * m;
  g.j_i0 = gs.j_i0 * l.j21;

  out.lobe.energy = e_r;
  out.lobe.mean = mean;
  out.lobe.alpha = alpha_from_variance(lobe_var);
  return out;
}

double clamp_variance(double sigma_t, double eta, double alpha, const StatsSource& tables) {
  return std::min(sigma_t, tables.sigma2plus(eta, alpha));
}

std::vector<Lobe> lambertian_bottom(const GlobalStats& gs, const LayerStack& stack, const Vec3d& wi,
                                    double cos_at_coat, const LayeredContext& ctx) {
  if (!stack.has_lambertian_base()) throw ValidationError("lambertian_bottom needs a Lambertian base");
  const std::size_t n = stack.dielectric_count();
  if (n == 0) throw ValidationError("lambertian_bottom needs a dielectric coat above the base");
  if (!ctx.tables) throw ValidationError("layered evaluation needs statistics tables");
  const StatsSource& tables = *ctx.tables;
  const RoughDielectric& coat = stack.dielectric(n - 1);

  std::vector<Lobe> lobes;
  const LocalStats local = interface_local_stats(coat, cos_at_coat, ctx.refraction);
  lobes.push_back(adding_step(gs, local, reflect<double>(wi, Vec3d::UnitZ())).lobe);

  const CoatedLambertianParams params{coat.eta, coat.alpha, stack.base().rho, stack.media()[n - 1].tau};
  Rgb r = gs.t0i * rho_2plus(cos_at_coat, params, tables);
  double sigma = tables.sigma2plus(coat.eta, coat.alpha);

  for (std::size_t k = n - 1; k-- > 0;) {
    const RoughDielectric& upper = stack.dielectric(k);
    const RoughDielectric& lower = stack.dielectric(k + 1);
    const double cos_eff = std::sqrt(std::max(0.0, 1.0 - 2.0 * sigma));
    // Light arrives at interface k from below.
    const LocalStats up = interface_local_stats(RoughDielectric{1.0 / upper.eta, upper.alpha}, cos_eff, ctx.refraction);
    const double r_lower = fresnel_albedo(cos_eff, lower.alpha, lower.eta);
    const Rgb a = stack.media()[k].tau.pow(1.0 / std::max(cos_eff, 1e-4));
    const Rgb bounce = a * a * up.r12 * r_lower;
    const Rgb denom = 1.0 - bounce;
    if (!(denom > 0.0).all()) throw NumericalError("bottom-to-top loop: denominator is not positive");
    r = r * a * up.t12 / denom;
    const double m = channel_mean(bounce / denom);
    sigma = up.j12 * sigma + up.var_t12 + up.j12 * (variance_from_alpha(upper.alpha) + variance_from_alpha(lower.alpha)) * m;
    if (upper.eta != 1.0) sigma = clamp_variance(sigma, upper.eta, upper.alpha, tables);
  }
  lobes.push_back(Lobe{r, Vec3d::UnitZ(), alpha_from_variance(sigma)});
  return lobes;
}

std::vector<Lobe> evaluate_layered(const LayerStack& stack, const Vec3d& wi, const LayeredContext& ctx) {
  stack.validate();
  if (!(wi.z() > 0.0)) throw DomainError("incident direction must be in the upper hemisphere");
  const std::size_t n = stack.dielectric_count();
  const bool base = stack.has_lambertian_base();
  std::vector<Lobe> lobes;
  if (n == 0) {
    lobes.push_back(Lobe{stack.base().rho, Vec3d::UnitZ(), alpha_from_variance(0.25)});
    return lobes;
  }
  const Vec3d mirror = reflect<double>(wi, Vec3d::UnitZ());
  GlobalStats gs;
  double cos = wi.z();
  for (std::size_t i = 0; i < n; ++i) {
    if (base && i == n - 1) {
      for (auto& l : lambertian_bottom(gs, stack, wi, cos, ctx)) lobes.push_back(std::move(l));
      break;
    }
    const LocalStats local = interface_local_stats(stack.dielectric(i), cos, ctx.refraction);
    AddingResult step = adding_step(gs, local, mirror);
    lobes.push_back(step.lobe);
    gs = step.gs;
    cos = local.cos_t;
    if (i + 1 < stack.size()) gs = adding_step(gs, medium_local_stats(stack.media()[i], cos), mirror).gs;
  }
  return lobes;
}

Rgb eval_lobes(const std::vector<Lobe>& lobes, const Vec3d& wi, const Vec3d& wo, const LayerStack& stack) {
  Rgb out = Rgb::Zero();
  if (wi.z() <= 0.0 || wo.z() <= 0.0) return out;
  const std::size_t normal_lobe = stack.has_lambertian_base() ? lobes.size() - 1 : lobes.size();
  for (std::size_t i = 0; i < lobes.size(); ++i) {
    const Lobe& l = lobes[i];
    if (l.alpha <= 0.0 || !(l.energy > 0.0).any()) continue;
    if (i == normal_lobe) {
      const Vec3d h = (Vec3d::UnitZ() + wo).normalized();
      out += l.energy * (ggx(h.z(), l.alpha) * smith_g2(1.0, wo.z(), l.alpha) /
                         (ggx_normal_albedo(l.alpha) * 4.0 * wo.z()));
    } else {
      const Vec3d h = (wi + wo).normalized();
      out += l.energy * (ggx(h.z(), l.alpha) * smith_g2(wi.z(), wo.z(), l.alpha) /
                         (4.0 * wi.z() * wo.z() * ggx_directional_albedo(wi.z(), l.alpha)));
    }
  }
  return out;
}

}  // namespace coat
