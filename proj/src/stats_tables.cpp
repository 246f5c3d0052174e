// SPDX-License-Identifier: Apache-2.0
#include "coat/stats_tables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coat/microfacet.hpp"
#include "coat/parallel.hpp"
#include "coat/reference_sim.hpp"
#include "coat/rng.hpp"

namespace coat {

namespace {

// Grazing incidence is evaluated just above the horizon.
constexpr double kMinCos = 1e-3;

int resolve(int threads) { return threads > 0 ? threads : default_thread_count(); }

void expect_axes(const std::vector<Axis>& axes, std::initializer_list<const char*> names) {
  if (axes.size() != names.size()) throw ShapeError("wrong number of axes for table");
  std::size_t i = 0;
  for (const char* n : names) {
    if (axes[i].name != n) throw ShapeError("expected axis '" + std::string(n) + "', got '" + axes[i].name + "'");
    ++i;
  }
}

void check_cell(double v, const std::string& table, const std::vector<int>& idx) {
  if (std::isfinite(v)) return;
  std::ostringstream ss;
  ss << table << ": non-finite estimate at cell (";
  for (std::size_t i = 0; i < idx.size(); ++i) ss << (i ? ", " : "") << idx[i];
  ss << ")";
  throw NumericalError(ss.str());
}

}  // namespace

Axis cos_axis(const GridSpec& g) { return Axis(kAxisCos, g.cos_samples, 0.0, 1.0); }
Axis alpha_axis(const GridSpec& g) { return Axis(kAxisAlpha, g.alpha_samples, 0.0, 1.0); }
Axis eta_axis(const GridSpec& g) { return Axis(kAxisEta, g.eta_samples, g.eta_min, g.eta_max, Spacing::Log); }
Axis tau_axis(const GridSpec& g) { return Axis(kAxisTau, g.tau_samples, 0.0, 1.0); }

std::uint64_t cell_seed(std::uint64_t global_seed, std::uint64_t table_tag, std::uint64_t cell) {
  return hash_seed(global_seed, table_tag, cell);
}

std::vector<double> t01_cell(double cos_theta, double alpha, double eta, const Axis& tau,
                             std::size_t n_paths, std::uint64_t seed) {
  std::vector<double> taus(tau.count), sum(tau.count, 0.0);
  for (int k = 0; k < tau.count; ++k) taus[k] = std::log(tau.node(k));  // -inf at tau = 0
  const Vec3d d = -direction_from_cos(std::max(cos_theta, kMinCos));
  Rng rng(seed, 0);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const InterfaceEvent ev = scatter_dielectric(d, eta, alpha, rng);
    if (ev.lost || !ev.transmitted) continue;
    const double inv = 1.0 / std::abs(ev.direction.z());
    for (int k = 0; k < tau.count; ++k) sum[k] += std::exp(taus[k] * inv);
  }
  for (auto& s : sum) s /= double(n_paths);
  return sum;
}

std::pair<std::vector<double>, std::vector<double>> diffuse_rt_cell(double eta, double alpha, const Axis& tau,
                                                                    std::size_t n_paths, std::uint64_t seed) {
  std::vector<double> taus(tau.count), r(tau.count, 0.0), t(tau.count, 0.0);
  for (int k = 0; k < tau.count; ++k) taus[k] = std::log(tau.node(k));  // -inf at tau = 0
  Rng rng(seed, 0);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const Vec3d d = cosine_sample_hemisphere(rng.uniform2());
    const InterfaceEvent ev = scatter_dielectric(d, eta, alpha, rng);
    if (ev.lost) continue;
    const double up = 1.0 / d.z();
    if (ev.transmitted) {
      for (int k = 0; k < tau.count; ++k) t[k] += std::exp(taus[k] * up);
    } else {
      const double path = up + 1.0 / std::abs(ev.direction.z());
      for (int k = 0; k < tau.count; ++k) r[k] += std::exp(taus[k] * path);
    }
  }
  for (int k = 0; k < tau.count; ++k) {
    r[k] /= double(n_paths);
    t[k] /= double(n_paths);
  }
  return {r, t};
}

TableNd precompute_T01(const std::vector<Axis>& axes, const PrecomputeConfig& config) {
  expect_axes(axes, {kAxisCos, kAxisAlpha, kAxisEta, kAxisTau});
  TableNd table(axes);
  const std::size_t n_cells = std::size_t(axes[0].count) * axes[1].count * axes[2].count;
  parallel_for(
      n_cells,
      [&](std::size_t cell) {
        const int ie = int(cell % axes[2].count);
        const int ia = int(cell / axes[2].count % axes[1].count);
        const int ic = int(cell / (std::size_t(axes[2].count) * axes[1].count));
        const auto v = t01_cell(axes[0].node(ic), axes[1].node(ia), axes[2].node(ie), axes[3],
                                config.paths_per_cell, cell_seed(config.seed, kTagT01, cell));
        for (int k = 0; k < axes[3].count; ++k) {
          check_cell(v[k], "T01", {ic, ia, ie, k});
          table.data()[cell * axes[3].count + k] = static_cast<float>(std::clamp(v[k], 0.0, 1.0));
        }
      },
      resolve(config.threads));
  table.provenance = {"T01", config.seed, config.paths_per_cell};
  return table;
}

std::pair<TableNd, TableNd> precompute_diffuse_RT(const std::vector<Axis>& axes, const PrecomputeConfig& config) {
  expect_axes(axes, {kAxisEta, kAxisAlpha, kAxisTau});
  TableNd r(axes), t(axes);
  const std::size_t n_cells = std::size_t(axes[0].count) * axes[1].count;
  parallel_for(
      n_cells,
      [&](std::size_t cell) {
        const int ia = int(cell % axes[1].count);
        const int ie = int(cell / axes[1].count);
        const auto [rv, tv] = diffuse_rt_cell(axes[0].node(ie), axes[1].node(ia), axes[2],
                                              config.paths_per_cell, cell_seed(config.seed, kTagRT, cell));
        for (int k = 0; k < axes[2].count; ++k) {
          check_cell(rv[k], "R10", {ie, ia, k});
          check_cell(tv[k], "T10", {ie, ia, k});
          r.data()[cell * axes[2].count + k] = static_cast<float>(std::clamp(rv[k], 0.0, 1.0));
          t.data()[cell * axes[2].count + k] = static_cast<float>(std::clamp(tv[k], 0.0, 1.0));
        }
      },
      resolve(config.threads));
  r.provenance = {"R10", config.seed, config.paths_per_cell};
  t.provenance = {"T10", config.seed, config.paths_per_cell};
  return {std::move(r), std::move(t)};
}

TableNd precompute_sigma2plus(const std::vector<Axis>& axes, const PrecomputeConfig& config) {
  expect_axes(axes, {kAxisEta, kAxisAlpha});
  TableNd table(axes);
  parallel_for(
      table.size(),
      [&](std::size_t cell) {
        const int ia = int(cell % axes[1].count);
        const int ie = int(cell / axes[1].count);
        const double v = measure_sigma2plus(axes[0].node(ie), axes[1].node(ia), config.paths_per_cell,
                                            cell_seed(config.seed, kTagS2P, cell), 1);
        check_cell(v, "S2P", {ie, ia});
        table.data()[cell] = static_cast<float>(std::clamp(v, 0.0, 0.5));
      },
      resolve(config.threads));
  table.provenance = {"S2P", config.seed, config.paths_per_cell};
  return table;
}

double StatsTables::t01(double c, double a, double e, double t) const { return T01.lookup({c, a, e, t}); }
double StatsTables::r10(double e, double a, double t) const { return R10.lookup({e, a, t}); }
double StatsTables::t10(double e, double a, double t) const { return T10.lookup({e, a, t}); }
double StatsTables::sigma2plus(double e, double a) const { return S2P.lookup({e, a}); }

void StatsTables::validate() const {
  const auto check = [](const TableNd& t, const char* name, std::size_t rank, double hi) {
    if (t.rank() != rank) throw ShapeError(std::string(name) + ": wrong rank");
    for (std::size_t f = 0; f < t.size(); ++f) {
      const double v = t.data()[f];
      if (!(v >= 0.0 && v <= hi)) {
        std::ostringstream ss;
        ss << name << ": value " << v << " out of range at cell (";
        const auto idx = t.unravel(f);
        for (std::size_t i = 0; i < idx.size(); ++i) ss << (i ? ", " : "") << idx[i];
        ss << ")";
        throw ValidationError(ss.str());
      }
    }
  };
  check(T01, "T01", 4, 1.0);
  check(R10, "R10", 3, 1.0);
  check(T10, "T10", 3, 1.0);
  check(S2P, "S2P", 2, 0.5);
}

StatsTables StatsTables::compute(const GridSpec& grid, const PrecomputeConfig& config) {
  StatsTables s;
  s.T01 = precompute_T01({cos_axis(grid), alpha_axis(grid), eta_axis(grid), tau_axis(grid)}, config);
  auto rt = precompute_diffuse_RT({eta_axis(grid), alpha_axis(grid), tau_axis(grid)}, config);
  s.R10 = std::move(rt.first);
  s.T10 = std::move(rt.second);
  s.S2P = precompute_sigma2plus({eta_axis(grid), alpha_axis(grid)}, config);
  return s;
}

void StatsTables::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  save_table(T01, dir / "T01.cltb");
  save_table(R10, dir / "R10.cltb");
  save_table(T10, dir / "T10.cltb");
  save_table(S2P, dir / "S2P.cltb");
}

StatsTables StatsTables::load(const std::filesystem::path& dir) {
  StatsTables s;
  s.T01 = load_table(dir / "T01.cltb", 4);
  s.R10 = load_table(dir / "R10.cltb", 3);
  s.T10 = load_table(dir / "T10.cltb", 3);
  s.S2P = load_table(dir / "S2P.cltb", 2);
  s.T01.provenance.id = "T01";
  s.R10.provenance.id = "R10";
  s.T10.provenance.id = "T10";
  s.S2P.provenance.id = "S2P";
  return s;
}

}  // namespace coat
