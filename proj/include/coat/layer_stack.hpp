// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "coat/common.hpp"

namespace coat {

struct RoughDielectric {
  double eta = 1.5;  // IOR below / IOR above
  double alpha = 0.1;
};

struct Lambertian {
  Rgb rho = Rgb::Ones();
};

using Interface = std::variant<RoughDielectric, Lambertian>;

struct Medium {
  Rgb tau = Rgb::Ones();  // transmittance over a unit vertical path length
};

/// Interfaces ordered top to bottom, with one medium per gap between
/// consecutive interfaces. A Lambertian, if present, is the last interface.
class LayerStack {
 public:
  LayerStack() = default;
  LayerStack(std::vector<Interface> interfaces, std::vector<Medium> media);

  /// Rough dielectric coat over a Lambertian base.
  static LayerStack coated_lambertian(double eta, double alpha, const Rgb& rho, const Rgb& tau);

  const std::vector<Interface>& interfaces() const { return interfaces_; }
  const std::vector<Medium>& media() const { return media_; }
  std::size_t size() const { return interfaces_.size(); }

  bool has_lambertian_base() const;
  /// Number of dielectric interfaces.
  std::size_t dielectric_count() const;
  const RoughDielectric& dielectric(std::size_t i) const;
  const Lambertian& base() const;

  void validate() const;

 private:
  std::vector<Interface> interfaces_;
  std::vector<Medium> media_;
};

LayerStack parse_stack_json(const std::string& text);
LayerStack load_stack_json(const std::filesystem::path& path);
std::string stack_to_json(const LayerStack& stack);

}  // namespace coat
