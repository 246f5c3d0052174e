// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "coat/microfacet.hpp"
#include "coat/stats_tables.hpp"
#include "coat/table.hpp"
#include "support.hpp"

using namespace coat;

namespace {

TableNd ramp_table() {
  TableNd t({Axis("a", 3, 0.0, 1.0), Axis("b", 4, 0.25, 4.0, Spacing::Log)});
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = float(i) * 0.5f + 1.0f;
  return t;
}

// Cosine-weighted hemispherical average of internal Fresnel reflectance.
double internal_fresnel_average(double eta) {
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;  // u = cos^2 is uniform under cosine weighting
    sum += fresnel_dielectric(std::sqrt(u), 1.0 / eta);
  }
  return sum / n;
}

// Per-axis projected variance of light leaving a smooth coat from a cosine
// base: the exit lobe is cos (1 - F) over the outer hemisphere.
double smooth_exit_variance(double eta) {
  const int n = 200000;
  double w = 0.0, m = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = (i + 0.5) / n;
    const double p = c * (1 - fresnel_dielectric(c, eta));
    w += p;
    m += p * (1 - c * c);
  }
  return 0.5 * m / w;
}

}  // namespace

TEST_CASE("smooth exit variance oracle") {
  CHECK(smooth_exit_variance(1.0) == doctest::Approx(0.25));
  // Minimum between 1.5 and 2, Brewster transmission widens the lobe beyond.
  CHECK(smooth_exit_variance(1.5) < smooth_exit_variance(1.2));
  CHECK(smooth_exit_variance(4.0) > smooth_exit_variance(2.0));
  CHECK(smooth_exit_variance(0.5) < 0.1);
}

TEST_CASE("axis nodes and positions") {
  const Axis lin("x", 5, 0.0, 1.0);
  CHECK(lin.node(0) == 0.0);
  CHECK(lin.node(4) == 1.0);
  CHECK(lin.position(0.5) == doctest::Approx(2.0));
  CHECK(lin.position(-3.0) == 0.0);
  CHECK(lin.position(7.0) == 4.0);
  const Axis lg("e", 3, 0.25, 4.0, Spacing::Log);
  CHECK(lg.node(1) == doctest::Approx(1.0));
  CHECK(lg.position(2.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(Axis("bad", 1, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(Axis("bad", 3, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(Axis("bad", 3, 0.0, 1.0, Spacing::Log), ValidationError);
}

TEST_CASE("multilinear lookup") {
  const TableNd t = ramp_table();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(t.lookup({t.axis(0).node(i), t.axis(1).node(j)}) == doctest::Approx(t.at({i, j})).epsilon(1e-12));
  // Midpoint on one axis is the arithmetic mean.
  const double mid = 0.5 * (t.axis(0).node(0) + t.axis(0).node(1));
  CHECK(t.lookup({mid, t.axis(1).node(2)}) == doctest::Approx(0.5 * (t.at({0, 2}) + t.at({1, 2}))));
  // Out of range clamps to the boundary.
  CHECK(t.lookup({0.0, 100.0}) == doctest::Approx(t.at({0, 3})));
  CHECK(t.lookup({0.0, 0.01}) == doctest::Approx(t.at({0, 0})));
  CHECK_THROWS_AS(t.lookup({0.0}), ShapeError);
}

TEST_CASE("table serialization round trip") {
  TableNd t = ramp_table();
  const auto bytes = serialize_table(t);
  const TableNd u = deserialize_table(bytes);
  CHECK(u.axes() == t.axes());
  CHECK(u.data() == t.data());
  CHECK(serialize_table(u) == bytes);

  test::TempDir dir;
  save_table(t, dir / "t.cltb");
  const TableNd v = load_table(dir / "t.cltb", 2);
  CHECK(v.content_hash() == t.content_hash());
  CHECK_THROWS_AS(load_table(dir / "t.cltb", 4), ShapeError);
  CHECK_THROWS_AS(load_table(dir / "missing.cltb"), IoError);
}

TEST_CASE("corrupted table bytes are rejected") {
  auto bytes = serialize_table(ramp_table());
  auto flipped = bytes;
  flipped[flipped.size() - 12] ^= 0x01;
  CHECK_THROWS_AS(deserialize_table(flipped), HashMismatchError);
  auto truncated = bytes;
  truncated.resize(truncated.size() / 2);
  CHECK_THROWS_AS(deserialize_table(truncated), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_table(magic), FormatError);
}

TEST_CASE("fnv1a64 reference value") {
  const std::string s = "a";
  const std::vector<std::uint8_t> b(s.begin(), s.end());
  CHECK(fnv1a64(b) == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64({}) == 0xcbf29ce484222325ULL);
}

TEST_CASE("T01 cell values") {
  const Axis tau("tau", 3, 0.0, 1.0);
  const auto id = t01_cell(0.7, 0.3, 1.0, tau, 4096, 1);
  CHECK(id[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id[0] == 0.0);
  const auto smooth = t01_cell(1.0, 0.0, 1.5, tau, 40960, 2);
  CHECK(std::abs(smooth[2] - 0.96) < 4 * std::sqrt(0.04 * 0.96 / 40960));
  // Monotone decrease towards grazing for a smooth coat: exact without roughness.
  double prev = 2.0;
  for (double c : {1.0, 0.8, 0.6, 0.4, 0.2, 0.05}) {
    const double v = t01_cell(c, 0.0, 1.5, tau, 40960, 3)[2];
    CHECK(v < prev + 0.01);
    CHECK(std::abs(v - (1 - fresnel_dielectric(c, 1.5))) < 0.01);
    prev = v;
  }
  CHECK(t01_cell(0.5, 0.2, 1.3, tau, 2048, 5) == t01_cell(0.5, 0.2, 1.3, tau, 2048, 5));
  CHECK(t01_cell(0.5, 0.2, 1.3, tau, 2048, 5) != t01_cell(0.5, 0.2, 1.3, tau, 2048, 6));
}

TEST_CASE("diffuse R10/T10 cell values") {
  const Axis tau("tau", 2, 0.5, 1.0);
  const auto [r1, t1] = diffuse_rt_cell(1.0, 0.4, tau, 8192, 1);
  CHECK(r1[1] == 0.0);
  CHECK(t1[1] == doctest::Approx(1.0).epsilon(1e-12));

  const std::size_t n = 200000;
  const auto [r, t] = diffuse_rt_cell(1.5, 0.0, tau, n, 2);
  const double oracle = internal_fresnel_average(1.5);
  CHECK(oracle == doctest::Approx(0.596).epsilon(0.005));
  CHECK(std::abs(r[1] - oracle) < 4 * std::sqrt(oracle * (1 - oracle) / n));
  CHECK(r[1] + t[1] == doctest::Approx(1.0).epsilon(1e-9));
  for (double eta : {0.7, 1.3})
    for (double a : {0.2, 0.6}) {
      const auto [rr, tt] = diffuse_rt_cell(eta, a, tau, 20000, 3);
      CHECK(rr[1] + tt[1] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(rr[0] + tt[0] < 1.0);
    }
}

TEST_CASE("small table set: ranges, anchors, round trip") {
  GridSpec g;
  g.cos_samples = 4;
  g.alpha_samples = 3;
  g.eta_samples = 5;  // 0.25, 0.5, 1, 2, 4
  g.tau_samples = 3;
  PrecomputeConfig pc;
  pc.seed = 7;
  pc.paths_per_cell = 40960;
  StatsTables s = StatsTables::compute(g, pc);
  CHECK_NOTHROW(s.validate());
  CHECK(s.T01.axis(2).count == 5);

  for (int a = 0; a < 3; ++a) CHECK(std::abs(s.S2P.at({2, a}) - 0.25) < 0.003);
  for (int e = 0; e < 5; ++e)
    for (int a = 0; a < 2; ++a) {  // alpha in {0, 0.5}
      CHECK(s.S2P.at({e, a}) >= 0.0f);
      CHECK(s.S2P.at({e, a}) <= 0.3f);
    }
  // Smooth coat: cos (1 - F) exit lobe.
  for (int e = 0; e < 5; ++e) CHECK(std::abs(s.S2P.at({e, 0}) - smooth_exit_variance(s.S2P.axis(0).node(e))) < 0.003);
  CHECK(s.t01(1.0, 0.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(s.r10(1.0, 0.5, 1.0) == 0.0);

  test::TempDir dir;
  s.save(dir.path());
  for (const char* f : {"T01.cltb", "R10.cltb", "T10.cltb", "S2P.cltb"}) CHECK(std::filesystem::exists(dir / f));
  const StatsTables l = StatsTables::load(dir.path());
  CHECK(l.T01.data() == s.T01.data());
  CHECK(l.S2P.data() == s.S2P.data());

  // Same seed, same bytes.
  StatsTables again = StatsTables::compute(g, pc);
  CHECK(serialize_table(again.T01) == serialize_table(s.T01));
  CHECK(serialize_table(again.R10) == serialize_table(s.R10));
}

TEST_CASE("table invariants are enforced") {
  GridSpec g;
  g.cos_samples = g.alpha_samples = g.eta_samples = g.tau_samples = 2;
  PrecomputeConfig pc;
  pc.paths_per_cell = 64;
  StatsTables s = StatsTables::compute(g, pc);
  s.T01.data()[3] = 1.5f;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = StatsTables::compute(g, pc);
  s.S2P = TableNd({Axis("eta", 2, 0.5, 2.0)});
  CHECK_THROWS_AS(s.validate(), ShapeError);
}
