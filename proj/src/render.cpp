// SPDX-License-Identifier: Apache-2.0
#include "coat/render.hpp"

#include <cmath>
#include <fstream>

#include "coat/microfacet.hpp"
#include "coat/parallel.hpp"
#include "coat/reference_sim.hpp"
#include "coat/rng.hpp"

namespace coat {

namespace {

template <typename PixelFn>
RenderResult render_with(const RenderConfig& cfg, PixelFn&& shade) {
  if (cfg.width <= 0 || cfg.height <= 0) throw ValidationError("image size must be positive");
  RenderResult r{Image(cfg.width, cfg.height), Image(cfg.width, cfg.height)};
  parallel_for(
      std::size_t(cfg.height),
      [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < cfg.width; ++x) {
          Vec3d wi, wo;
          if (!pixel_directions(cfg, x, y, wi, wo)) continue;
          Rgb value = Rgb::Zero(), error = Rgb::Zero();
          shade(std::size_t(y) * cfg.width + x, wi, wo, value, error);
          r.image.set(x, y, value);
          r.standard_error.set(x, y, error);
        }
      },
      cfg.threads > 0 ? cfg.threads : default_thread_count());
  return r;
}

}  // namespace

Engine parse_engine(const std::string& name) {
  if (name == "model") return Engine::Model;
  if (name == "oracle") return Engine::Oracle;
  if (name == "layered") return Engine::Layered;
  throw ValidationError("unknown engine: " + name);
}

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::Model: return "model";
    case Engine::Oracle: return "oracle";
    case Engine::Layered: return "layered";
  }
  return "?";
}

bool pixel_on_sphere(const RenderConfig& cfg, int x, int y) {
  const double px = 2.0 * (x + 0.5) / cfg.width - 1.0;
  const double py = 1.0 - 2.0 * (y + 0.5) / cfg.height;
  return px * px + py * py < 1.0;
}

bool pixel_directions(const RenderConfig& cfg, int x, int y, Vec3d& wi, Vec3d& wo) {
  const double px = 2.0 * (x + 0.5) / cfg.width - 1.0;
  const double py = 1.0 - 2.0 * (y + 0.5) / cfg.height;
  const double r2 = px * px + py * py;
  if (r2 >= 1.0) return false;
  const Frame<double> frame(Vec3d(px, py, std::sqrt(1.0 - r2)));
  wi = frame.to_local(cfg.light);
  wo = frame.to_local(Vec3d::UnitZ());
  return wi.z() > 0.0 && wo.z() > 0.0;
}

RenderResult render_model(const CoatedLambertianParams& params, const StatsSource& tables, const RenderConfig& cfg) {
  params.validate();
  return render_with(cfg, [&](std::size_t, const Vec3d& wi, const Vec3d& wo, Rgb& value, Rgb&) {
    value = cfg.radiance * eval(params, wi, wo, tables) * wi.z();
  });
}

RenderResult render_oracle(const LayerStack& stack, const RenderConfig& cfg) {
  stack.validate();
  if (cfg.paths_per_pixel < 2) throw ValidationError("oracle rendering needs at least 2 paths per pixel");
  const Rng root(cfg.seed, 2);
  return render_with(cfg, [&](std::size_t pixel, const Vec3d& wi, const Vec3d& wo, Rgb& value, Rgb& error) {
    Rng rng = root.split(pixel);
    Rgb sum = Rgb::Zero(), sum_sq = Rgb::Zero();
    for (std::size_t i = 0; i < cfg.paths_per_pixel; ++i) {
      const Rgb p = estimate_exit_density(stack, wi, wo, rng);
      sum += p;
      sum_sq += p * p;
    }
    const double n = double(cfg.paths_per_pixel);
    const Rgb mean = sum / n;
    const Rgb var = ((sum_sq / n - mean * mean) / (n - 1.0)).max(0.0);
    const Rgb scale = cfg.radiance * (wi.z() / wo.z());
    value = scale * mean;
    error = scale * var.sqrt();
  });
}

RenderResult render_layered(const LayerStack& stack, const LayeredContext& ctx, const RenderConfig& cfg) {
  stack.validate();
  return render_with(cfg, [&](std::size_t, const Vec3d& wi, const Vec3d& wo, Rgb& value, Rgb&) {
    value = cfg.radiance * eval_lobes(evaluate_layered(stack, wi, ctx), wi, wo, stack) * wi.z();
  });
}

LobeProfile indirect_lobe_profile(double eta, double alpha, double sigma2plus, std::size_t n_paths,
                                  std::uint64_t seed, int threads, int bins) {
  if (bins < 4 || bins % 2) throw ValidationError("profile bins must be even and at least 4");
  const LayerStack stack = LayerStack::coated_lambertian(eta, alpha, Rgb::Ones(), Rgb::Ones());
  GonioConfig gc;
  gc.n_paths = n_paths;
  gc.bins = bins;
  gc.seed = seed;
  gc.threads = threads;
  const GonioResult g = goniophotometer(stack, Vec3d::UnitZ(), gc);

  LobeProfile p;
  p.eta = eta;
  p.alpha = alpha;
  const double dx = 2.0 / bins;
  const int mid = bins / 2;
  const double a2 = alpha_from_variance(sigma2plus);
  const double norm = a2 > 0.0 ? 1.0 / ggx_normal_albedo(a2) : 0.0;
  auto lobe = [&](double x, double y) {
    const double r2 = x * x + y * y;
    if (r2 >= 1.0 || a2 <= 0.0) return 0.0;
    const Vec3d wo(x, y, std::sqrt(1.0 - r2));
    const Vec3d h = (Vec3d::UnitZ() + wo).normalized();
    // Exit density per unit disc area equals the BRDF.
    return ggx(h.z(), a2) * smith_g2(1.0, wo.z(), a2) * norm / (4.0 * wo.z());
  };
  constexpr int sub = 4;
  // Both curves are slices of densities normalized over the whole disc.
  const double energy = channel_mean(g.order_multi.energy);
  for (int ix = 0; ix < bins; ++ix) {
    p.x.push_back(-1.0 + (ix + 0.5) * dx);
    double ref = 0.0;
    for (int c = 0; c < 3; ++c) ref += g.order_multi.value[c](ix, mid - 1) + g.order_multi.value[c](ix, mid);
    p.reference.push_back(energy > 0.0 ? ref / (6.0 * energy * dx * dx) : 0.0);
    double approx = 0.0;
    for (int i = 0; i < sub; ++i)
      for (int j = 0; j < sub; ++j)
        approx += lobe(-1.0 + (ix + (i + 0.5) / sub) * dx, (j + 0.5) / sub * dx);
    p.approximation.push_back(approx / (sub * sub));
    p.l1 += std::abs(p.reference.back() - p.approximation.back()) * dx;
  }
  return p;
}

void write_profiles_csv(const std::vector<LobeProfile>& profiles, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "eta,alpha,x,reference,approximation\n";
  out.precision(9);
  for (const auto& p : profiles)
    for (std::size_t i = 0; i < p.x.size(); ++i)
      out << p.eta << ',' << p.alpha << ',' << p.x[i] << ',' << p.reference[i] << ',' << p.approximation[i] << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace coat
