// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <unistd.h>

#include <Eigen/Dense>

#include <map>
#include <mutex>
#include <tuple>

#include "coat/common.hpp"
#include "coat/layered.hpp"
#include "coat/microfacet.hpp"
#include "coat/reference_sim.hpp"
#include "coat/stats_tables.hpp"

namespace coat::test {

// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("coat_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Integrates f(w) over the upper hemisphere with a (theta, phi) midpoint rule.
inline double hemisphere_integral(const std::function<double(const Vec3d&)>& f, int n_theta = 256,
                                  int n_phi = 256) {
  double sum = 0.0;
  const double dt = 0.5 * kPi / n_theta, dp = 2.0 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double t = (i + 0.5) * dt;
    for (int j = 0; j < n_phi; ++j) {
      const double p = (j + 0.5) * dp;
      sum += f(Vec3d(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t))) * std::sin(t);
    }
  }
  return sum * dt * dp;
}

// Statistics estimated at exactly the queried point and cached, so model
// tests see no grid interpolation.
class PointStats : public StatsSource {
 public:
  explicit PointStats(std::size_t paths = 40960, std::uint64_t seed = 5) : paths_(paths), seed_(seed) {}

  double t01(double cos_theta, double alpha, double eta, double tau) const override {
    std::lock_guard lock(mu_);
    const auto key = std::make_tuple(cos_theta, alpha, eta, tau);
    auto it = t01_.find(key);
    if (it == t01_.end()) {
      const auto [axis, i] = tau_point(tau);
      it = t01_.emplace(key, t01_cell(cos_theta, alpha, eta, axis, paths_, seed_)[i]).first;
    }
    return it->second;
  }
  double r10(double eta, double alpha, double tau) const override { return rt(eta, alpha, tau).first; }
  double t10(double eta, double alpha, double tau) const override { return rt(eta, alpha, tau).second; }
  double sigma2plus(double eta, double alpha) const override {
    std::lock_guard lock(mu_);
    const auto key = std::make_pair(eta, alpha);
    auto it = s2p_.find(key);
    if (it == s2p_.end()) it = s2p_.emplace(key, measure_sigma2plus(eta, alpha, 4 * paths_, seed_)).first;
    return it->second;
  }

 private:
  // A two-node axis with `tau` at the returned index.
  static std::pair<Axis, int> tau_point(double tau) {
    if (tau >= 1.0) return {Axis("tau", 2, 0.0, 1.0), 1};
    return {Axis("tau", 2, tau, 1.0), 0};
  }
  std::pair<double, double> rt(double eta, double alpha, double tau) const {
    std::lock_guard lock(mu_);
    const auto key = std::make_pair(eta, std::make_pair(alpha, tau));
    auto it = rt_.find(key);
    if (it == rt_.end()) {
      const auto [axis, i] = tau_point(tau);
      const auto [r, t] = diffuse_rt_cell(eta, alpha, axis, paths_, seed_);
      it = rt_.emplace(key, std::make_pair(r[i], t[i])).first;
    }
    return it->second;
  }

  std::size_t paths_;
  std::uint64_t seed_;
  mutable std::mutex mu_;
  mutable std::map<std::tuple<double, double, double, double>, double> t01_;
  mutable std::map<std::pair<double, std::pair<double, double>>, std::pair<double, double>> rt_;
  mutable std::map<std::pair<double, double>, double> s2p_;
};

// Probabilities of leaving through the top and the bottom for a 1D walker
// entering from above a stack of layers, solved as an absorbing chain.
// Channel `c` of each layer's local energies.
inline std::pair<double, double> walk_exits(const std::vector<LocalStats>& layers, int c) {
  const int n = int(layers.size());
  if (n == 0) return {0.0, 1.0};
  // Unknowns: down_k (about to hit layer k from above), k = 0..n-1, then
  // up_k (about to hit layer k-1 from below), k = 1..n-1.
  const int size = n + (n - 1);
  const auto down = [](int k) { return k; };
  const auto up = [n](int k) { return n + k - 1; };
  std::pair<double, double> out;
  for (int target = 0; target < 2; ++target) {  // 0: top, 1: bottom
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(size, size);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(size);
    for (int k = 0; k < n; ++k) {
      const LocalStats& l = layers[std::size_t(k)];
      if (k == 0) b[down(k)] += target == 0 ? l.r12[c] : 0.0;
      else a(down(k), up(k)) -= l.r12[c];
      if (k + 1 == n) b[down(k)] += target == 1 ? l.t12[c] : 0.0;
      else a(down(k), down(k + 1)) -= l.t12[c];
    }
    for (int k = 1; k < n; ++k) {
      const LocalStats& l = layers[std::size_t(k - 1)];
      a(up(k), down(k)) -= l.r21[c];
      if (k == 1) b[up(k)] += target == 0 ? l.t21[c] : 0.0;
      else a(up(k), up(k - 1)) -= l.t21[c];
    }
    const double v = a.fullPivLu().solve(b)[down(0)];
    (target == 0 ? out.first : out.second) = v;
  }
  return out;
}

}  // namespace coat::test
