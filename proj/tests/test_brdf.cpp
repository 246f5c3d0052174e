// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coat/brdf_model.hpp"
#include "coat/microfacet.hpp"
#include "coat/reference_sim.hpp"
#include "support.hpp"

using namespace coat;

namespace {

double series(double t01, double rho, double r10, double t10, int terms = 64) {
  double sum = 0.0, g = 1.0;
  for (int k = 0; k <= terms; ++k) {
    sum += t01 * rho * g * t10;
    g *= rho * r10;
  }
  return sum;
}

// Fixed, smooth statistics for properties that hold for any table.
struct ToyStats : StatsSource {
  double t01(double c, double, double eta, double tau) const override {
    return (1 - fresnel_dielectric(std::max(c, 1e-3), eta)) * std::pow(tau, 1.0 / std::max(c, 0.05));
  }
  double r10(double eta, double alpha, double tau) const override {
    return eta == 1.0 ? 0.0 : 0.4 * tau * tau * (1 - 0.2 * alpha);
  }
  double t10(double eta, double alpha, double tau) const override {
    return eta == 1.0 ? tau * tau : 0.6 * tau * tau * (1 - 0.2 * alpha);
  }
  double sigma2plus(double eta, double alpha) const override { return eta == 1.0 ? 0.25 : 0.12 + 0.1 * alpha; }
};

double albedo(const CoatedLambertianParams& p, const Vec3d& wi, const StatsSource& s, int channel = 0,
              bool indirect_only = false) {
  return test::hemisphere_integral(
      [&](const Vec3d& wo) {
        const BrdfParts b = eval_parts(p, wi, wo, s);
        return (indirect_only ? b.indirect[channel] : b.total()[channel]) * wo.z();
      },
      512, 256);
}

// Energy per projected-disc bin of a BRDF part, for light from wi.
Eigen::ArrayXXd bin_model(const CoatedLambertianParams& p, const Vec3d& wi, const StatsSource& s, int bins,
                          bool indirect, int channel) {
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(bins, bins);
  const int sub = 64;
  const double w = 2.0 / bins, d = w / sub;
  for (int ix = 0; ix < bins; ++ix)
    for (int iy = 0; iy < bins; ++iy)
      for (int a = 0; a < sub; ++a)
        for (int b = 0; b < sub; ++b) {
          const double x = -1 + ix * w + (a + 0.5) * d, y = -1 + iy * w + (b + 0.5) * d;
          const double r2 = x * x + y * y;
          if (r2 >= 1.0) continue;
          const Vec3d wo(x, y, std::sqrt(1 - r2));
          const BrdfParts parts = eval_parts(p, wi, wo, s);
          out(ix, iy) += (indirect ? parts.indirect : parts.direct)[channel] * d * d;
        }
  return out;
}

}  // namespace

TEST_CASE("indirect energy: closed form against the truncated series") {
  CHECK(rho_2plus_closed(0.9, 0.5, 0.2, 0.85) == doctest::Approx(0.425).epsilon(1e-12));
  CHECK(std::abs(series(0.9, 0.5, 0.2, 0.85) - 0.425) < 1e-6);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 10; ++k) {
        const double rho = 0.8 * i / 9, r10 = 0.8 * j / 9, tt = double(k) / 9;
        worst = std::max(worst, std::abs(rho_2plus_closed(tt, rho, r10, 1.0) - series(tt, rho, r10, 1.0)));
      }
  CHECK(worst < 1e-6);
  CHECK(rho_2plus_closed(0.7, 0.0, 0.5, 0.9) == 0.0);
  CHECK(rho_2plus_closed(0.7, 0.6, 0.0, 0.9) == doctest::Approx(0.7 * 0.6 * 0.9));
  CHECK_THROWS_AS(rho_2plus_closed(0.5, 1.0, 1.0 - 1e-7, 0.5), NumericalError);
}

TEST_CASE("indirect energy per channel") {
  ToyStats s;
  CoatedLambertianParams p;
  p.eta = 1.5;
  p.alpha = 0.3;
  p.rho = Rgb(0.0, 0.5, 1.0);
  p.tau = Rgb(1.0, 0.8, 0.5);
  const Rgb e = rho_2plus(0.7, p, s);
  CHECK(e[0] == 0.0);
  for (int c = 1; c < 3; ++c)
    CHECK(e[c] == doctest::Approx(rho_2plus_closed(s.t01(0.7, 0.3, 1.5, p.tau[c]), p.rho[c],
                                                   s.r10(1.5, 0.3, p.tau[c]), s.t10(1.5, 0.3, p.tau[c]))));
}

TEST_CASE("variance and roughness maps") {
  CHECK(alpha_from_variance(0.0) == 0.0);
  CHECK(variance_from_alpha(0.0) == 0.0);
  for (int i = 1; i <= 9; ++i) {
    const double a = 0.1 * i;
    CHECK(std::abs(alpha_from_variance(variance_from_alpha(a)) - a) < 1e-6);
  }
  double prev = -1.0;
  for (int i = 1; i < 1000; ++i) {
    const double v = variance_from_alpha(i / 1000.0);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(alpha_from_variance(1e6) == 1.0);
}

TEST_CASE("parameter validation") {
  ToyStats s;
  CoatedLambertianParams p;
  p.alpha = 1.5;
  CHECK_THROWS_AS(model_lobes(p, Vec3d::UnitZ(), s), DomainError);
  p.alpha = 0.2;
  p.eta = -1.0;
  CHECK_THROWS(model_lobes(p, Vec3d::UnitZ(), s));
  p.eta = 1.5;
  p.rho = Rgb(0.5, 1.2, 0.5);
  CHECK_THROWS_AS(model_lobes(p, Vec3d::UnitZ(), s), DomainError);
}

TEST_CASE("eval is non-negative, finite, and zero below the horizon") {
  ToyStats s;
  Rng rng(1, 0);
  for (double eta : {0.5, 0.8, 1.2, 1.5, 2.5})
    for (double alpha : {0.0, 0.05, 0.3, 1.0}) {
      CoatedLambertianParams p;
      p.eta = eta;
      p.alpha = alpha;
      p.rho = Rgb(0.2, 0.7, 1.0);
      for (int i = 0; i < 300; ++i) {
        const Vec3d wi = direction_from_cos(1e-3 + (1 - 1e-3) * rng.uniform(), 2 * kPi * rng.uniform());
        const Vec3d wo = direction_from_cos(1e-3 + (1 - 1e-3) * rng.uniform(), 2 * kPi * rng.uniform());
        const Rgb v = eval(p, wi, wo, s);
        CHECK((v >= 0.0).all());
        CHECK(v.isFinite().all());
      }
      CHECK((eval(p, Vec3d(0, 0.6, -0.8), Vec3d::UnitZ(), s) == 0.0).all());
      CHECK((eval(p, Vec3d::UnitZ(), Vec3d(0, 0.6, -0.8), s) == 0.0).all());
    }
}

TEST_CASE("rho = 0 leaves the microfacet coat") {
  ToyStats s;
  CoatedLambertianParams p;
  p.eta = 1.5;
  p.alpha = 0.3;
  p.rho = Rgb::Zero();
  const Vec3d wi = direction_from_cos(0.8, 0.3);
  Rng rng(2, 0);
  for (int i = 0; i < 200; ++i) {
    const Vec3d wo = direction_from_cos(0.05 + 0.95 * rng.uniform(), 2 * kPi * rng.uniform());
    const BrdfParts b = eval_parts(p, wi, wo, s);
    CHECK((b.indirect == 0.0).all());
    const Vec3d h = (wi + wo).normalized();
    const double f = ggx(h.z(), 0.3) * smith_g2(wi.z(), wo.z(), 0.3) * fresnel_dielectric(wi.dot(h), 1.5) /
                     (4 * wi.z() * wo.z());
    CHECK(b.direct[0] == doctest::Approx(f).epsilon(1e-12));
  }
  // Every sample comes from the direct lobe, renormalized to the upper hemisphere.
  const double up = vndf_upper_fraction(wi.z(), 0.3);
  for (int i = 0; i < 500; ++i) {
    const BrdfSample smp = sample(p, wi, rng, s);
    REQUIRE(smp.pdf > 0.0);
    const Vec3d h = (wi + smp.wo).normalized();
    CHECK(smp.pdf == doctest::Approx(vndf_pdf(wi, h, 0.3) / (4 * wi.dot(h) * up)).epsilon(1e-9));
  }
}

TEST_CASE("index-matched coat integrates to rho") {
  test::PointStats s(40960);
  for (double alpha : {0.1, 0.5}) {
    CoatedLambertianParams p;
    p.eta = 1.0;
    p.alpha = alpha;
    p.rho = Rgb(0.3, 0.6, 0.9);
    for (double c : {1.0, 0.5}) {
      const Vec3d wi = direction_from_cos(c, 0.4);
      for (int ch = 0; ch < 3; ++ch) CHECK(albedo(p, wi, s, ch) == doctest::Approx(p.rho[ch]).epsilon(0.02));
    }
  }
}

TEST_CASE("indirect lobe integrates to its energy") {
  test::PointStats s(40960);
  for (double eta : {0.8, 1.5})
    for (double alpha : {0.1, 0.5}) {
      CoatedLambertianParams p;
      p.eta = eta;
      p.alpha = alpha;
      p.rho = Rgb::Constant(0.8);
      const Vec3d wi = direction_from_cos(0.7, 0.0);
      const double e = rho_2plus(0.7, p, s)[0];
      REQUIRE(e > 0.0);
      CHECK(albedo(p, wi, s, 0, true) == doctest::Approx(e).epsilon(0.02));
    }
}

TEST_CASE("directional albedo stays plausible") {
  test::PointStats s(20480);
  for (double eta : {0.5, 0.8, 1.2, 1.5, 2.5})
    for (double alpha : {0.1, 0.5, 1.0})
      for (double c : {1.0, 0.5, 0.15}) {
        CoatedLambertianParams p;
        p.eta = eta;
        p.alpha = alpha;
        p.rho = Rgb::Ones();
        CAPTURE(eta);
        CAPTURE(alpha);
        CAPTURE(c);
        CHECK(albedo(p, direction_from_cos(c, 0.0), s) <= 1.02);
      }
}

TEST_CASE("indirect lobe peaks at the normal") {
  ToyStats s;
  for (double eta : {0.8, 1.5, 2.5})
    for (double alpha : {0.1, 0.5, 1.0}) {
      CoatedLambertianParams p;
      p.eta = eta;
      p.alpha = alpha;
      p.rho = Rgb::Constant(0.7);
      if (alpha_2plus(p, s) > 0.8) continue;
      const Vec3d wi = direction_from_cos(0.6, 0.0);
      double best = -1.0, best_theta = 90.0;
      for (double phi : {0.0, 1.0, 2.5})
        for (int i = 0; i < 890; ++i) {
          const double theta = 0.1 * i;
          const Vec3d wo = direction_from_cos(std::cos(theta * kPi / 180), phi);
          const double v = eval_parts(p, wi, wo, s).indirect[0] * wo.z();
          if (v > best) {
            best = v;
            best_theta = theta;
          }
        }
      CHECK(best_theta <= 2.0);
    }
}

TEST_CASE("sampling agrees with quadrature") {
  test::PointStats s(20480);
  for (double eta : {0.8, 1.5})
    for (double alpha : {0.1, 0.5}) {
      CoatedLambertianParams p;
      p.eta = eta;
      p.alpha = alpha;
      p.rho = Rgb(0.8, 0.4, 0.1);
      const Vec3d wi = direction_from_cos(0.7, 0.9);
      const double quad = albedo(p, wi, s);
      const double pdf_mass =
          test::hemisphere_integral([&](const Vec3d& wo) { return pdf(p, wi, wo, s); }, 512, 256);
      CHECK(pdf_mass == doctest::Approx(1.0).epsilon(1e-2));

      Rng rng(3, 0);
      const int n = 400000;
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        const BrdfSample smp = sample(p, wi, rng, s);
        if (smp.pdf > 0.0) sum += smp.value[0] * smp.wo.z() / smp.pdf;
      }
      CAPTURE(eta);
      CAPTURE(alpha);
      CHECK(sum / n == doctest::Approx(quad).epsilon(0.01));
    }
}

TEST_CASE("smooth coat samples the mirror direction") {
  ToyStats s;
  CoatedLambertianParams p;
  p.eta = 1.5;
  p.alpha = 0.0;
  p.rho = Rgb::Zero();
  const Vec3d wi = direction_from_cos(0.6, 0.2);
  Rng rng(4, 0);
  const BrdfSample smp = sample(p, wi, rng, s);
  CHECK(smp.delta);
  CHECK((smp.wo - reflect<double>(wi, Vec3d::UnitZ())).norm() < 1e-12);
  CHECK(smp.value[0] == doctest::Approx(fresnel_dielectric(0.6, 1.5)));
}

TEST_CASE("model lobes against the simulator, per bin") {
  const int bins = 16;
  test::PointStats s(81920);
  for (double eta : {0.8, 1.2}) {
    CoatedLambertianParams p;
    p.eta = eta;
    p.alpha = 0.1;
    p.rho = Rgb::Ones();
    const Vec3d wi = direction_from_cos(std::cos(30 * kPi / 180), 0.0);
    GonioConfig g;
    g.n_paths = 10'000'000;
    g.bins = bins;
    g.seed = 9;
    const GonioResult r = goniophotometer(LayerStack::coated_lambertian(eta, 0.1, p.rho, p.tau), wi, g);
    for (bool indirect : {false, true}) {
      const Eigen::ArrayXXd model = bin_model(p, wi, s, bins, indirect, 0);
      const Eigen::ArrayXXd ref = (indirect ? r.order_multi : r.order0).value[0];
      const double peak = ref.maxCoeff();
      double worst = 0.0;
      for (int ix = 0; ix < bins; ++ix)
        for (int iy = 0; iy < bins; ++iy)
          if (ref(ix, iy) > 0.01 * peak) worst = std::max(worst, std::abs(model(ix, iy) / ref(ix, iy) - 1));
      CAPTURE(eta);
      CAPTURE(indirect);
      CHECK(worst <= 0.15);
    }
  }
}
