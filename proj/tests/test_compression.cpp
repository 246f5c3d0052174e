// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coat/compression.hpp"
#include "coat/microfacet.hpp"
#include "coat/rng.hpp"
#include "support.hpp"

using namespace coat;

namespace {

TableNd make_table(std::vector<Axis> axes, const std::function<double(const std::vector<double>&)>& f) {
  TableNd t(std::move(axes));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto idx = t.unravel(i);
    std::vector<double> x(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) x[a] = t.axis(a).node(idx[a]);
    t.data()[i] = float(f(x));
  }
  return t;
}

// Smooth stand-in for T01 over (cos, alpha, eta, tau).
TableNd synthetic_t01() {
  return make_table({Axis(kAxisCos, 9, 0.0, 1.0), Axis(kAxisAlpha, 7, 0.0, 1.0),
                     Axis(kAxisEta, 8, 0.25, 4.0, Spacing::Log), Axis(kAxisTau, 6, 0.0, 1.0)},
                    [](const std::vector<double>& x) {
                      const double c = std::max(x[0], 0.05);
                      return (1 - fresnel_dielectric(c, x[2])) * std::pow(x[3], 1.0 / c) * (1 - 0.3 * x[1] * (1 - c));
                    });
}

TableNd synthetic_r10() {
  return make_table({Axis(kAxisEta, 8, 0.25, 4.0, Spacing::Log), Axis(kAxisAlpha, 7, 0.0, 1.0),
                     Axis(kAxisTau, 6, 0.0, 1.0)},
                    [](const std::vector<double>& x) {
                      return 0.5 * (1 - 1 / (x[0] * x[0] + 1)) * (0.3 + 0.7 * x[2] * x[2]) * (1 - 0.2 * x[1]);
                    });
}

double max_abs_diff(const TableNd& a, const TableNd& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a.data()[i]) - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("pca: constant along the reduced axis") {
  const TableNd t = make_table({Axis("u", 5, 0, 1), Axis("v", 7, 0, 1)},
                               [](const std::vector<double>& x) { return std::sin(3 * x[0]) + 2; });
  const CompressedTable c = CompressedTable::compress(t, {{"v", 1}});
  CHECK(relative_rms_error(t, c) < 1e-6);
}

TEST_CASE("pca: separable table at rank one") {
  const TableNd t = make_table({Axis("u", 6, 0, 1), Axis("v", 9, 0, 1)},
                               [](const std::vector<double>& x) { return (1 + x[0] * x[0]) * std::exp(-x[1]); });
  const CompressedTable c = CompressedTable::compress(t, {{"v", 1}});
  CHECK(relative_rms_error(t, c) < 1e-6);
}

TEST_CASE("pca: full basis is lossless") {
  Rng rng(1, 0);
  TableNd t({Axis("u", 5, 0, 1), Axis("v", 4, 0, 1), Axis("w", 3, 0, 1)});
  for (auto& v : t.data()) v = float(rng.uniform());
  for (const char* axis : {"u", "v", "w"}) {
    const int k = t.axis(t.axis_index(axis)).count;
    const CompressedTable c = CompressedTable::compress(t, {{axis, k}});
    CHECK(relative_rms_error(t, c) < 1e-6);
    // Grid nodes come back at the stored values.
    const TableNd d = c.reconstruct_dense();
    CHECK(max_abs_diff(d, t) < 1e-5);
  }
}

TEST_CASE("pca result structure") {
  const TableNd t = synthetic_r10();
  const PcaResult p = pca_reduce(t, kAxisTau, 3);
  CHECK(p.basis.cols() == 3);
  CHECK(p.basis.rows() == 6);
  CHECK((p.basis.transpose() * p.basis - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-10);
  for (int j = 0; j + 1 < p.singular_values.size(); ++j) CHECK(p.singular_values[j] >= p.singular_values[j + 1]);
  // Sign convention: first nonzero entry of each basis vector is positive.
  for (int j = 0; j < 3; ++j) {
    int i = 0;
    while (i < p.basis.rows() && std::abs(p.basis(i, j)) < 1e-12) ++i;
    REQUIRE(i < p.basis.rows());
    CHECK(p.basis(i, j) > 0.0);
  }
  CHECK(p.coefficients.size() == 3);
  CHECK_THROWS_AS(pca_reduce(t, "nope", 1), ShapeError);
  CHECK_THROWS_AS(pca_reduce(t, kAxisTau, 0), ValidationError);
  CHECK_THROWS_AS(pca_reduce(t, kAxisTau, 7), ValidationError);
}

TEST_CASE("T01 factorization") {
  const TableNd t = synthetic_t01();
  // tau-constant input: the tau stage alone is exact.
  TableNd flat = make_table(t.axes(), [](const std::vector<double>& x) { return 0.5 + 0.4 * x[0] * x[1]; });
  CHECK(relative_rms_error(flat, CompressedTable::compress(flat, {{kAxisTau, 2}})) < 1e-6);

  double prev = 1e9;
  for (int k = 1; k <= 4; ++k) {
    const double e = relative_rms_error(t, compress_T01(t, 2, k));
    CHECK(e <= prev + 1e-9);
    prev = e;
  }
  CHECK(relative_rms_error(t, compress_T01(t, 2, 2)) >= relative_rms_error(t, compress_T01(t, 2, 4)) - 1e-9);
  CHECK(relative_rms_error(t, compress_T01(t, 2, 2, kAxisEta)) >=
        relative_rms_error(t, compress_T01(t, 2, 4, kAxisEta)) - 1e-9);
}

TEST_CASE("reconstruct at arbitrary coordinates matches the dense reconstruction") {
  const TableNd t = synthetic_t01();
  const CompressedTable c = compress_T01(t, 2, 3);
  const TableNd dense = c.reconstruct_dense();
  Rng rng(2, 0);
  for (int i = 0; i < 500; ++i) {
    // Includes coordinates outside every axis range.
    const double x0 = rng.uniform() * 1.4 - 0.2, x1 = rng.uniform() * 1.4 - 0.2;
    const double x2 = std::exp(rng.uniform() * 4 - 2), x3 = rng.uniform() * 1.4 - 0.2;
    CHECK(c.reconstruct({x0, x1, x2, x3}) == doctest::Approx(dense.lookup({x0, x1, x2, x3})).epsilon(1e-5));
  }
}

TEST_CASE("compression is deterministic") {
  const TableNd t = synthetic_t01();
  const CompressedTable a = compress_T01(t), b = compress_T01(t);
  REQUIRE(a.leaves().size() == b.leaves().size());
  for (std::size_t i = 0; i < a.leaves().size(); ++i) CHECK(a.leaves()[i].data() == b.leaves()[i].data());
}

TEST_CASE("plane groups and texture layout round trip") {
  const TableNd r = synthetic_r10();
  CHECK(plane_groups(compress_3d(r, 2)) == 1);
  CHECK(plane_groups(compress_3d(r, 4)) == 1);
  // T01 with two tau bases: 2 second-axis bases fill one RGBA group, 4 need two.
  CHECK(plane_groups(compress_T01(synthetic_t01(), 2, 2)) == 1);
  CHECK(plane_groups(compress_T01(synthetic_t01(), 2, 4)) == 2);

  test::TempDir dir;
  const CompressedTable c = compress_3d(r, 2);
  export_texture_layout(c, dir / "R10.cltx", TexelType::F16);
  CHECK(std::filesystem::exists(dir / "R10.cltx.json"));
  const CompressedTable h = import_texture_layout(dir / "R10.cltx");
  double worst = 0.0;
  Rng rng(3, 0);
  for (int i = 0; i < 300; ++i) {
    const double e = std::exp(rng.uniform() * 3 - 1.5), a = rng.uniform(), tau = rng.uniform();
    worst = std::max(worst, std::abs(h.reconstruct({e, a, tau}) - c.reconstruct({e, a, tau})));
  }
  CHECK(worst <= 1e-3);

  export_texture_layout(c, dir / "R10f.cltx", TexelType::F32);
  const CompressedTable f = import_texture_layout(dir / "R10f.cltx");
  CHECK(f.reconstruct({1.3, 0.2, 0.7}) == doctest::Approx(c.reconstruct({1.3, 0.2, 0.7})).epsilon(1e-6));

  const CompressedTable t4 = compress_T01(synthetic_t01(), 2, 4);
  export_texture_layout(t4, dir / "T01.cltx");
  const CompressedTable t4b = import_texture_layout(dir / "T01.cltx");
  CHECK(std::abs(t4b.reconstruct({0.5, 0.3, 1.5, 0.8}) - t4.reconstruct({0.5, 0.3, 1.5, 0.8})) <= 1e-3);
  CHECK_THROWS_AS(import_texture_layout(dir / "missing.cltx"), IoError);
}

TEST_CASE("compressed statistics are clipped to the unit interval") {
  CompressedStatsTables s;
  s.T01 = compress_T01(synthetic_t01(), 1, 1);
  s.R10 = compress_3d(synthetic_r10(), 1);
  s.T10 = compress_3d(synthetic_r10(), 1);
  s.S2P = make_table({Axis(kAxisEta, 3, 0.25, 4.0, Spacing::Log), Axis(kAxisAlpha, 2, 0, 1)},
                     [](const std::vector<double>&) { return 0.2; });
  Rng rng(4, 0);
  for (int i = 0; i < 1000; ++i) {
    const double v = s.t01(rng.uniform(), rng.uniform(), std::exp(rng.uniform() * 2 - 1), rng.uniform());
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(s.sigma2plus(1.0, 0.5) == doctest::Approx(0.2));
}
