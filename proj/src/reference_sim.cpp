// SPDX-License-Identifier: Apache-2.0
#include "coat/reference_sim.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "coat/microfacet.hpp"
#include "coat/parallel.hpp"

namespace coat {

namespace {

constexpr int kChainCap = 256;

Vec3d mirror_z(const Vec3d& v) { return {v.x(), v.y(), -v.z()}; }

int resolve_threads(int threads) { return threads > 0 ? threads : default_thread_count(); }

// Fixed batch size so that results depend on the path count only.
std::size_t batch_size(std::size_t n_paths) {
  return std::max<std::size_t>(4096, (n_paths + 255) / 256);
}

InterfaceEvent scatter_chain(const Vec3d& d, double eta, double alpha, Rng& rng, const Vec3d* probe,
                             double* probe_density, bool skip_first_probe) {
  check_eta(eta);
  InterfaceEvent ev;
  const bool from_above = d.z() < 0.0;
  if (eta == 1.0) {
    ev.transmitted = true;
    ev.direction = d;
    return ev;
  }
  // Local frame: incident side is +z.
  bool flipped = !from_above;
  double e = flipped ? 1.0 / eta : eta;
  Vec3d wi = flipped ? mirror_z(-d) : Vec3d(-d);
  Vec3d probe_l = Vec3d::Zero();
  if (probe) probe_l = flipped ? mirror_z(*probe) : *probe;

  for (int step = 0; step < kChainCap; ++step) {
    if (probe && !(skip_first_probe && step == 0)) {
      *probe_density += probe_l.z() > 0.0 ? vndf_reflection_density(wi, probe_l, alpha, e)
                                          : vndf_transmission_density(wi, probe_l, alpha, e);
    }
    const Vec3d m = sample_ggx_vndf(wi, alpha, rng.uniform2());
    const double c = wi.dot(m);
    const double f = c > 0.0 ? fresnel_dielectric(c, e) : 1.0;
    const double u = rng.uniform();
    std::optional<Vec3d> t;
    if (u >= f) t = refract<double>(-wi, m, e);
    if (!t) {
      const Vec3d o = reflect(wi, m);
      if (o.z() > 0.0) {
        ev.direction = flipped ? mirror_z(o) : o;
        ev.transmitted = (ev.direction.z() < 0.0) == from_above;
        return ev;
      }
      wi = -o;
      continue;
    }
    if (t->z() < 0.0) {
      ev.direction = flipped ? mirror_z(*t) : *t;
      ev.transmitted = (ev.direction.z() < 0.0) == from_above;
      return ev;
    }
    // Refracted upwards: now on the other side, heading back to the surface.
    wi = -mirror_z(*t);
    flipped = !flipped;
    e = 1.0 / e;
    probe_l = mirror_z(probe_l);
  }
  ev.lost = true;
  return ev;
}

// Next-event plan for the exit density estimator.
struct NeePlan {
  enum Mode { None, LambertianTop, RoughTop, DeltaTop } mode = None;
  Vec3d target = Vec3d::Zero();  // world propagation direction to connect along
  Rgb factor = Rgb::Ones();      // DeltaTop: gap absorption and top transmission
  // RoughTop over a Lambertian: connect from the base through the top instead
  // of probing the first top event after each diffuse bounce.
  bool base_connect = false;
  double eta = 1.0, alpha = 0.0;
  Rgb tau = Rgb::Ones();
};

NeePlan make_plan(const LayerStack& stack, const Vec3d& wo) {
  NeePlan plan;
  const auto& ifs = stack.interfaces();
  if (wo.z() <= 0.0) return plan;
  if (std::holds_alternative<Lambertian>(ifs[0])) {
    plan.mode = NeePlan::LambertianTop;
    plan.target = wo;
    return plan;
  }
  const auto& top = std::get<RoughDielectric>(ifs[0]);
  if (top.alpha > 0.0 && top.eta != 1.0) {
    plan.mode = NeePlan::RoughTop;
    plan.target = wo;
    if (ifs.size() >= 2 && std::holds_alternative<Lambertian>(ifs[1])) {
      plan.base_connect = true;
      plan.eta = top.eta;
      plan.alpha = top.alpha;
      plan.tau = stack.media()[0].tau;
    }
    return plan;
  }
  if (ifs.size() < 2) return plan;
  // Smooth or index-matched top: connect from the vertex below it.
  const auto t = refract<double>(-wo, top.eta);
  if (!t) return plan;
  const Vec3d d1 = -*t;
  const double fr = 1.0 - fresnel_dielectric(wo.z(), top.eta);
  const double jac = wo.z() / (top.eta * top.eta * d1.z());
  plan.mode = NeePlan::DeltaTop;
  plan.target = d1;
  plan.factor = stack.media()[0].tau.pow(1.0 / d1.z()) * fr * jac;
  return plan;
}

// Exit density towards plan.target of light leaving the base with a cosine
// distribution: the inner direction is sampled from the view side (visible
// normal, then refraction) and weighted by the single-event transmission.
Rgb base_connection(const NeePlan& plan, Rng& rng) {
  const Vec3d& wo = plan.target;
  const Vec3d m = sample_ggx_vndf(wo, plan.alpha, rng.uniform2());
  const auto t = refract<double>(-wo, m, plan.eta);
  if (!t || t->z() >= 0.0) return Rgb::Zero();
  const double pass = 1.0 - fresnel_dielectric(wo.dot(m), plan.eta);
  const double pdf = vndf_transmission_density(wo, *t, plan.alpha, plan.eta) / pass;
  if (!(pass > 0.0) || !(pdf > 0.0)) return Rgb::Zero();
  const Vec3d up = -*t;
  const double f = vndf_transmission_density(mirror_z(*t), mirror_z(wo), plan.alpha, 1.0 / plan.eta);
  return plan.tau.pow(1.0 / up.z()) * (up.z() * kInvPi * f / pdf);
}

PathOutcome run_path(const LayerStack& stack, const Vec3d& wi, Rng& rng, const TraceOptions& opt,
                     const NeePlan* nee, Rgb* acc) {
  const auto& ifs = stack.interfaces();
  const std::size_t n = ifs.size();
  PathOutcome out;
  Vec3d d = -wi;
  std::size_t region = 0;
  Rgb beta = Rgb::Ones();
  int order = 0;
  bool skip_probe = false;

  auto fail = [&](const char* what) {
    std::ostringstream ss;
    ss << "non-finite throughput (" << what << ") at region " << region << ", order " << order
       << ", direction (" << d.x() << ", " << d.y() << ", " << d.z() << "), throughput ("
       << beta[0] << ", " << beta[1] << ", " << beta[2] << ")";
    throw SimulationError(ss.str());
  };

  for (int event = 0; event < opt.max_events; ++event) {
    const bool down = d.z() < 0.0;
    if (!down && region == 0) {
      out.side = ExitSide::Top;
      out.direction = d;
      out.throughput = beta;
      out.order = order;
      return out;
    }
    if (down && region == n) {
      out.side = ExitSide::Bottom;
      out.direction = d;
      out.throughput = beta;
      out.order = order;
      return out;
    }
    const std::size_t idx = down ? region : region - 1;
    if (region >= 1 && region <= n - 1) beta *= stack.media()[region - 1].tau.pow(1.0 / std::abs(d.z()));

    if (const auto* lam = std::get_if<Lambertian>(&ifs[idx])) {
      beta *= lam->rho;
      ++order;
      if (nee && nee->mode == NeePlan::LambertianTop && idx == 0) {
        *acc += beta * nee->target.z() * kInvPi;
      } else if (nee && nee->mode == NeePlan::DeltaTop && idx == 1) {
        *acc += beta * nee->target.z() * kInvPi * nee->factor;
      } else if (nee && nee->base_connect && idx == 1) {
        *acc += beta * base_connection(*nee, rng);
        skip_probe = true;
      }
      d = cosine_sample_hemisphere(rng.uniform2());
    } else {
      const auto& die = std::get<RoughDielectric>(ifs[idx]);
      const bool probe = nee && ((nee->mode == NeePlan::RoughTop && idx == 0) ||
                                 (nee->mode == NeePlan::DeltaTop && idx == 1));
      double density = 0.0;
      const bool skip_first = probe && skip_probe && idx == 0;
      skip_probe = false;
      const InterfaceEvent ev = scatter_chain(d, die.eta, die.alpha, rng, probe ? &nee->target : nullptr,
                                              probe ? &density : nullptr, skip_first);
      if (probe) *acc += beta * density * (nee->mode == NeePlan::DeltaTop ? nee->factor : Rgb::Ones());
      if (ev.lost) break;
      d = ev.direction;
      if (ev.transmitted) region = down ? idx + 1 : idx;
    }

    if (!beta.allFinite()) fail("event");
    const double peak = beta.maxCoeff();
    if (peak <= 0.0) break;
    if (peak < opt.roulette_threshold) {
      if (rng.uniform() >= peak) break;
      beta /= peak;
    }
  }
  out.side = ExitSide::Absorbed;
  out.direction = d;
  out.throughput = beta;
  out.order = order;
  return out;
}

}  // namespace

InterfaceEvent scatter_dielectric(const Vec3d& d, double eta, double alpha, Rng& rng, const Vec3d* probe,
                                  double* probe_density) {
  return scatter_chain(d, eta, alpha, rng, probe, probe_density, false);
}

PathOutcome trace_path(const LayerStack& stack, const Vec3d& wi, Rng& rng, const TraceOptions& options) {
  if (!(wi.z() > 0.0)) throw DomainError("incident direction must be in the upper hemisphere");
  return run_path(stack, wi, rng, options, nullptr, nullptr);
}

Rgb estimate_exit_density(const LayerStack& stack, const Vec3d& wi, const Vec3d& wo, Rng& rng,
                          const TraceOptions& options) {
  if (!(wi.z() > 0.0)) throw DomainError("incident direction must be in the upper hemisphere");
  const NeePlan plan = make_plan(stack, wo);
  Rgb acc = Rgb::Zero();
  if (plan.mode == NeePlan::None) return acc;
  run_path(stack, wi, rng, options, &plan, &acc);
  if (!acc.allFinite()) throw SimulationError("non-finite exit density estimate");
  return acc;
}

DiscHistogram::DiscHistogram(int n) : bins(n) {
  if (n < 2) throw ValidationError("histogram needs at least 2 bins per axis");
  for (auto& v : value) v = Eigen::ArrayXXd::Zero(n, n);
}

void DiscHistogram::add(const Vec3d& direction, const Rgb& weight) {
  const auto bin = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x + 1.0) * 0.5 * bins)), 0, bins - 1);
  };
  const int ix = bin(direction.x());
  const int iy = bin(direction.y());
  for (int c = 0; c < 3; ++c) value[c](ix, iy) += weight[c];
  energy += weight;
  energy_sq += weight.square();
  const double a = weight.mean();
  const Vec2d p(direction.x(), direction.y());
  w += a;
  wp += a * p;
  wp2 += a * p.squaredNorm();
}

void DiscHistogram::merge(const DiscHistogram& o) {
  if (o.bins != bins) throw ShapeError("histogram bin counts differ");
  for (int c = 0; c < 3; ++c) value[c] += o.value[c];
  energy += o.energy;
  energy_sq += o.energy_sq;
  w += o.w;
  wp += o.wp;
  wp2 += o.wp2;
}

void DiscHistogram::scale(double s) {
  for (auto& v : value) v *= s;
  energy *= s;
  energy_sq *= s;
  w *= s;
  wp *= s;
  wp2 *= s;
}

Rgb GonioResult::standard_error(const DiscHistogram& h) const {
  if (n_paths == 0) return Rgb::Zero();
  return ((h.energy_sq - h.energy.square()).max(0.0) / double(n_paths)).sqrt();
}

GonioResult goniophotometer(const LayerStack& stack, const Vec3d& wi, const GonioConfig& config) {
  if (config.n_paths < 1) throw ValidationError("goniophotometer needs at least one path");
  if (!(wi.z() > 0.0)) throw DomainError("incident direction must be in the upper hemisphere");
  stack.validate();
  const std::size_t batch = batch_size(config.n_paths);
  const std::size_t n_batches = (config.n_paths + batch - 1) / batch;
  const Rng root(config.seed, 0);
  std::vector<GonioResult> partial(n_batches, GonioResult(config.bins));
  parallel_for(
      n_batches,
      [&](std::size_t b) {
        Rng rng = root.split(b);
        GonioResult& r = partial[b];
        const std::size_t end = std::min(config.n_paths, (b + 1) * batch);
        for (std::size_t i = b * batch; i < end; ++i) {
          const PathOutcome p = trace_path(stack, wi, rng);
          switch (p.side) {
            case ExitSide::Top:
              (p.order == 0 ? r.order0 : r.order_multi).add(p.direction, p.throughput);
              break;
            case ExitSide::Bottom:
              r.bottom += p.throughput;
              break;
            case ExitSide::Absorbed:
              r.absorbed += p.throughput;
              break;
          }
        }
      },
      resolve_threads(config.threads));
  GonioResult result(config.bins);
  for (const auto& r : partial) {
    result.order0.merge(r.order0);
    result.order_multi.merge(r.order_multi);
    result.bottom += r.bottom;
    result.absorbed += r.absorbed;
  }
  const double inv = 1.0 / double(config.n_paths);
  result.order0.scale(inv);
  result.order_multi.scale(inv);
  result.bottom *= inv;
  result.absorbed *= inv;
  result.n_paths = config.n_paths;
  return result;
}

DirectionalStats directional_stats(const DiscHistogram& h) {
  if (!(h.w > 0.0)) throw ValidationError("directional stats of an empty histogram");
  DirectionalStats s;
  s.energy = h.energy;
  s.mean = h.wp / h.w;
  s.variance = std::max(0.0, 0.5 * (h.wp2 / h.w - s.mean.squaredNorm()));
  return s;
}

Rgb furnace_albedo(const LayerStack& stack, const Vec3d& wi, std::size_t n_paths, std::uint64_t seed) {
  GonioConfig cfg;
  cfg.n_paths = n_paths;
  cfg.seed = seed;
  cfg.bins = 2;
  return goniophotometer(stack, wi, cfg).top();
}

double measure_sigma2plus(double eta, double alpha, std::size_t n_paths, std::uint64_t seed,
                          int threads) {
  check_eta(eta);
  if (n_paths < 1) throw ValidationError("measure_sigma2plus needs at least one path");
  struct Moments {
    double w = 0.0, x = 0.0, y = 0.0, r2 = 0.0;
  };
  const std::size_t batch = batch_size(n_paths);
  const std::size_t n_batches = (n_paths + batch - 1) / batch;
  const Rng root(seed, 1);
  std::vector<Moments> partial(n_batches);
  parallel_for(n_batches, [&](std::size_t b) {
    Rng rng = root.split(b);
    Moments m;
    const std::size_t end = std::min(n_paths, (b + 1) * batch);
    for (std::size_t i = b * batch; i < end; ++i) {
      const Vec3d d = cosine_sample_hemisphere(rng.uniform2());
      const InterfaceEvent ev = scatter_dielectric(d, eta, alpha, rng);
      if (ev.lost || !ev.transmitted) continue;  // back to the base, re-emitted as a new path
      m.w += 1.0;
      m.x += ev.direction.x();
      m.y += ev.direction.y();
      m.r2 += ev.direction.x() * ev.direction.x() + ev.direction.y() * ev.direction.y();
    }
    partial[b] = m;
  }, resolve_threads(threads));
  Moments t;
  for (const auto& m : partial) {
    t.w += m.w;
    t.x += m.x;
    t.y += m.y;
    t.r2 += m.r2;
  }
  if (t.w <= 0.0) throw SimulationError("no light escaped the coat");
  const double mx = t.x / t.w, my = t.y / t.w;
  return std::max(0.0, 0.5 * (t.r2 / t.w - mx * mx - my * my));
}

void write_histogram_csv(const GonioResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "bin_x,bin_y,order,channel,value\n";
  out.precision(9);
  const auto dump = [&](const DiscHistogram& h, const char* order) {
    for (int c = 0; c < 3; ++c)
      for (int ix = 0; ix < h.bins; ++ix)
        for (int iy = 0; iy < h.bins; ++iy)
          out << ix << ',' << iy << ',' << order << ',' << c << ',' << h.value[c](ix, iy) << '\n';
  };
  dump(result.order0, "0");
  dump(result.order_multi, "1+");
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace coat
