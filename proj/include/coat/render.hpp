// SPDX-License-Identifier: Apache-2.0
#pragma once

// Orthographic view of a unit sphere lit by one directional light.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coat/brdf_model.hpp"
#include "coat/image.hpp"
#include "coat/layer_stack.hpp"
#include "coat/layered.hpp"

namespace coat {

enum class Engine { Model, Oracle, Layered };

Engine parse_engine(const std::string& name);
std::string engine_name(Engine e);

struct RenderConfig {
  int width = 256;
  int height = 256;
  Vec3d light = Vec3d(-0.5, 0.5, 1.0).normalized();  // towards the light, world space
  Rgb radiance = Rgb::Ones();                          // irradiance on a surface facing the light
  std::size_t paths_per_pixel = 1024;
  std::uint64_t seed = 1;
  int threads = 0;
};

/// Local incident and outgoing directions at pixel (x, y); false off the
/// sphere or where the light is below the horizon.
bool pixel_directions(const RenderConfig& cfg, int x, int y, Vec3d& wi, Vec3d& wo);
/// True where the pixel sees the sphere.
bool pixel_on_sphere(const RenderConfig& cfg, int x, int y);

struct RenderResult {
  Image image;
  Image standard_error;  // oracle only, otherwise zero
};

RenderResult render_model(const CoatedLambertianParams& params, const StatsSource& tables, const RenderConfig& cfg);
RenderResult render_oracle(const LayerStack& stack, const RenderConfig& cfg);
RenderResult render_layered(const LayerStack& stack, const LayeredContext& ctx, const RenderConfig& cfg);

/// Incidence-plane slice of the indirect lobe at normal incidence: the
/// order >= 1 exit density of {coat, white base} from the simulator against
/// the GGX lobe of variance `sigma2plus`. Each is a density over the
/// projected disc with unit total mass, sliced along y = 0; l1 integrates
/// the absolute difference over x in [-1, 1].
struct LobeProfile {
  double eta = 1.0;
  double alpha = 0.0;
  std::vector<double> x, reference, approximation;
  double l1 = 0.0;
};

LobeProfile indirect_lobe_profile(double eta, double alpha, double sigma2plus, std::size_t n_paths,
                                  std::uint64_t seed, int threads = 0, int bins = 128);

void write_profiles_csv(const std::vector<LobeProfile>& profiles, const std::filesystem::path& path);

}  // namespace coat
