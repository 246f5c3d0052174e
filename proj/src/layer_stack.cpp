// SPDX-License-Identifier: Apache-2.0
#include "coat/layer_stack.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace coat {

namespace {

bool in_unit(const Rgb& v) { return (v >= 0.0).all() && (v <= 1.0).all() && v.allFinite(); }

Rgb rgb_from_json(const nlohmann::json& j) {
  if (j.is_number()) return Rgb::Constant(j.get<double>());
  if (!j.is_array() || j.size() != 3) throw ValidationError("expected a number or a 3-element array");
  return Rgb(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

nlohmann::json rgb_to_json(const Rgb& v) { return nlohmann::json::array({v[0], v[1], v[2]}); }

}  // namespace

LayerStack::LayerStack(std::vector<Interface> interfaces, std::vector<Medium> media)
    : interfaces_(std::move(interfaces)), media_(std::move(media)) {
  validate();
}

LayerStack LayerStack::coated_lambertian(double eta, double alpha, const Rgb& rho, const Rgb& tau) {
  return LayerStack({RoughDielectric{eta, alpha}, Lambertian{rho}}, {Medium{tau}});
}

bool LayerStack::has_lambertian_base() const {
  return !interfaces_.empty() && std::holds_alternative<Lambertian>(interfaces_.back());
}

std::size_t LayerStack::dielectric_count() const {
  return interfaces_.size() - (has_lambertian_base() ? 1 : 0);
}

const RoughDielectric& LayerStack::dielectric(std::size_t i) const {
  return std::get<RoughDielectric>(interfaces_.at(i));
}

const Lambertian& LayerStack::base() const {
  if (!has_lambertian_base()) throw ValidationError("stack has no Lambertian base");
  return std::get<Lambertian>(interfaces_.back());
}

void LayerStack::validate() const {
  if (interfaces_.empty()) throw ValidationError("layer stack has no interfaces");
  if (media_.size() + 1 != interfaces_.size()) {
    throw ValidationError("layer stack needs exactly one medium per gap (" +
                          std::to_string(interfaces_.size() - 1) + " expected, got " +
                          std::to_string(media_.size()) + ")");
  }
  for (std::size_t i = 0; i < interfaces_.size(); ++i) {
    if (const auto* d = std::get_if<RoughDielectric>(&interfaces_[i])) {
      if (!(d->eta > 0.0) || !std::isfinite(d->eta)) throw DomainError("dielectric eta must be > 0");
      if (!(d->alpha >= 0.0 && d->alpha <= 1.0)) throw DomainError("dielectric alpha must be in [0,1]");
    } else {
      if (i + 1 != interfaces_.size()) throw ValidationError("Lambertian must be the last interface");
      if (!in_unit(std::get<Lambertian>(interfaces_[i]).rho)) throw DomainError("albedo must be in [0,1]");
    }
  }
  for (const auto& m : media_) {
    if (!in_unit(m.tau) || (m.tau <= 0.0).any()) throw DomainError("medium tau must be in (0,1]");
  }
}

LayerStack parse_stack_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("stack json: ") + e.what());
  }
  try {
    std::vector<Interface> interfaces;
    for (const auto& item : j.at("interfaces")) {
      const auto type = item.at("type").get<std::string>();
      if (type == "dielectric") {
        interfaces.emplace_back(RoughDielectric{item.at("eta").get<double>(), item.at("alpha").get<double>()});
      } else if (type == "lambertian") {
        interfaces.emplace_back(Lambertian{rgb_from_json(item.at("rho"))});
      } else {
        throw ValidationError("unknown interface type '" + type + "'");
      }
    }
    std::vector<Medium> media;
    if (j.contains("media")) {
      for (const auto& item : j.at("media")) media.push_back(Medium{rgb_from_json(item.at("tau"))});
    } else if (!interfaces.empty()) {
      media.assign(interfaces.size() - 1, Medium{});
    }
    return LayerStack(std::move(interfaces), std::move(media));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("stack json: ") + e.what());
  }
}

LayerStack load_stack_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stack file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_stack_json(ss.str());
}

std::string stack_to_json(const LayerStack& stack) {
  nlohmann::json j;
  j["interfaces"] = nlohmann::json::array();
  for (const auto& i : stack.interfaces()) {
    if (const auto* d = std::get_if<RoughDielectric>(&i)) {
      j["interfaces"].push_back({{"type", "dielectric"}, {"eta", d->eta}, {"alpha", d->alpha}});
    } else {
      j["interfaces"].push_back({{"type", "lambertian"}, {"rho", rgb_to_json(std::get<Lambertian>(i).rho)}});
    }
  }
  j["media"] = nlohmann::json::array();
  for (const auto& m : stack.media()) j["media"].push_back({{"tau", rgb_to_json(m.tau)}});
  return j.dump(2);
}

}  // namespace coat
