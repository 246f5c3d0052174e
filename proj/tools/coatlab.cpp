// SPDX-License-Identifier: Apache-2.0
// coatlab: precompute, compress, render, compare, profile, replay.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coat/compression.hpp"
#include "coat/image.hpp"
#include "coat/layered.hpp"
#include "coat/parallel.hpp"
#include "coat/reference_sim.hpp"
#include "coat/render.hpp"
#include "coat/stats_tables.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace coat;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string file_hash(const fs::path& p) { return hex64(fnv1a64(read_bytes(p))); }

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

void guard_outputs(const std::vector<fs::path>& outputs, bool force) {
  if (force) return;
  for (const auto& p : outputs)
    if (fs::exists(p)) throw ValidationError(p.string() + " exists (use --force to overwrite)");
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

Rgb rgb_of(const json& j) {
  if (j.is_number()) return Rgb::Constant(j.get<double>());
  const auto v = j.get<std::vector<double>>();
  if (v.size() == 1) return Rgb::Constant(v[0]);
  if (v.size() != 3) throw ValidationError("expected 1 or 3 components");
  return {v[0], v[1], v[2]};
}

Vec3d vec3_of(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ValidationError("expected 3 components");
  return {v[0], v[1], v[2]};
}

void announce(const std::string& command, const json& config) {
  std::cerr << "coatlab " << command << '\n' << config.dump(2) << '\n';
  if (config.contains("seed") && !config["seed"].is_null()) std::cerr << "seed: " << config["seed"] << '\n';
}

/// Manifest = command + resolved config + output hashes; replay feeds the
/// config back into the same command.
void write_manifest(const fs::path& path, const std::string& command, const json& config,
                    const std::vector<fs::path>& outputs, const json& results = json()) {
  json m;
  m["tool"] = "coatlab";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config;
  json hashes = json::object();
  for (const auto& p : outputs) hashes[p.filename().string()] = file_hash(p);
  m["outputs"] = hashes;
  if (!results.is_null()) m["results"] = results;
  write_text(path, m.dump(2) + "\n");
}

int threads_of(const json& c) {
  const int t = c.value("threads", 0);
  return t > 0 ? t : default_thread_count();
}

// ---------------------------------------------------------------------------

void run_precompute(const json& c) {
  if (c["seed"].is_null()) throw ValidationError("precompute needs --seed");
  const fs::path out = c["out"].get<std::string>();
  GridSpec g;
  g.cos_samples = c["cos_samples"];
  g.alpha_samples = c["alpha_samples"];
  g.eta_samples = c["eta_samples"];
  g.tau_samples = c["tau_samples"];
  g.eta_min = c["eta_min"];
  g.eta_max = c["eta_max"];
  const bool layered = c["with_layered"];
  std::vector<fs::path> files{out / "T01.cltb", out / "R10.cltb", out / "T10.cltb", out / "S2P.cltb"};
  if (layered) {
    files.push_back(out / "RTS.cltb");
    files.push_back(out / "RTJ.cltb");
  }
  guard_outputs(files, c["force"]);
  guard_outputs({out / "manifest.json"}, c["force"]);
  fs::create_directories(out);

  PrecomputeConfig pc;
  pc.seed = c["seed"];
  pc.threads = threads_of(c);
  StatsTables st;
  pc.paths_per_cell = c["t01_paths"];
  std::cerr << "T01 ..." << std::endl;
  st.T01 = precompute_T01({cos_axis(g), alpha_axis(g), eta_axis(g), tau_axis(g)}, pc);
  pc.paths_per_cell = c["paths"];
  std::cerr << "R10/T10 ..." << std::endl;
  auto rt = precompute_diffuse_RT({eta_axis(g), alpha_axis(g), tau_axis(g)}, pc);
  st.R10 = std::move(rt.first);
  st.T10 = std::move(rt.second);
  std::cerr << "sigma2+ ..." << std::endl;
  st.S2P = precompute_sigma2plus({eta_axis(g), alpha_axis(g)}, pc);
  st.validate();
  st.save(out);
  if (layered) {
    std::cerr << "refraction ..." << std::endl;
    RefractionTables::compute(c["refraction_eta_samples"], c["refraction_alpha_samples"], c["refraction_paths"],
                              c["seed"], pc.threads)
        .save(out);
  }
  json prov = json::object();
  prov["T01"] = {{"seed", pc.seed}, {"paths_per_cell", c["t01_paths"]}};
  for (const char* id : {"R10", "T10", "S2P"}) prov[id] = {{"seed", pc.seed}, {"paths_per_cell", c["paths"]}};
  write_manifest(out / "manifest.json", "precompute", c, files, json{{"provenance", prov}});
  std::cerr << "wrote " << files.size() << " tables to " << out << '\n';
}

json slice_report(const TableNd& t01, const CompressedTable& ct) {
  json s;
  s["eta"] = 2.0;
  s["alpha"] = 0.0;
  s["tau"] = 1.0;
  std::vector<double> cs, raw, rec;
  const Axis& ax = t01.axis(t01.axis_index(kAxisCos));
  for (int i = 0; i < ax.count; ++i) {
    const double c = ax.node(i);
    cs.push_back(c);
    raw.push_back(t01.lookup({c, 0.0, 2.0, 1.0}));
    rec.push_back(ct.reconstruct({c, 0.0, 2.0, 1.0}));
  }
  s["cos_theta"] = cs;
  s["raw"] = raw;
  s["compressed"] = rec;
  return s;
}

void run_compress(const json& c) {
  const fs::path in = c["tables"].get<std::string>();
  const fs::path out = c["out"].get<std::string>();
  const int k_tau = c["k_tau"], k_second = c["k_alpha"];
  const std::string axis = c["second_axis"];
  const std::string texel = c["texel"];
  if (texel != "f16" && texel != "f32") throw ValidationError("--texel must be f16 or f32");
  const TexelType type = texel == "f16" ? TexelType::F16 : TexelType::F32;
  const StatsTables st = StatsTables::load(in);

  std::vector<fs::path> files;
  for (const char* n : {"T01", "R10", "T10"}) {
    files.push_back(out / (std::string(n) + ".cltx"));
    files.push_back(out / (std::string(n) + ".cltx.json"));
  }
  files.push_back(out / "S2P.cltb");
  guard_outputs(files, c["force"]);
  guard_outputs({out / "report.json", out / "manifest.json"}, c["force"]);
  fs::create_directories(out);

  const CompressedTable t01 = compress_T01(st.T01, k_tau, k_second, axis);
  const CompressedTable r10 = compress_3d(st.R10, k_tau);
  const CompressedTable t10 = compress_3d(st.T10, k_tau);
  export_texture_layout(t01, out / "T01.cltx", type);
  export_texture_layout(r10, out / "R10.cltx", type);
  export_texture_layout(t10, out / "T10.cltx", type);
  save_table(st.S2P, out / "S2P.cltb");

  json report;
  report["T01"] = {{"relative_rms", relative_rms_error(st.T01, t01)},
                   {"k_tau", k_tau},
                   {"k_second", k_second},
                   {"second_axis", axis},
                   {"plane_groups", plane_groups(t01)}};
  report["R10"] = {{"relative_rms", relative_rms_error(st.R10, r10)}, {"k_tau", k_tau}, {"plane_groups", plane_groups(r10)}};
  report["T10"] = {{"relative_rms", relative_rms_error(st.T10, t10)}, {"k_tau", k_tau}, {"plane_groups", plane_groups(t10)}};
  report["T01_slice"] = slice_report(st.T01, t01);
  write_text(out / "report.json", report.dump(2) + "\n");
  files.push_back(out / "report.json");
  write_manifest(out / "manifest.json", "compress", c, files);
  std::cout << report.dump(2) << '\n';
}

std::unique_ptr<StatsSource> load_stats(const json& c) {
  if (c.contains("compressed") && !c["compressed"].get<std::string>().empty()) {
    const fs::path d = c["compressed"].get<std::string>();
    auto s = std::make_unique<CompressedStatsTables>();
    s->T01 = import_texture_layout(d / "T01.cltx");
    s->R10 = import_texture_layout(d / "R10.cltx");
    s->T10 = import_texture_layout(d / "T10.cltx");
    s->S2P = load_table(d / "S2P.cltb", 2);
    return s;
  }
  if (c["tables"].get<std::string>().empty()) throw ValidationError("this engine needs --tables or --compressed");
  return std::make_unique<StatsTables>(StatsTables::load(c["tables"].get<std::string>()));
}

LayerStack stack_of(const json& c) {
  if (!c["stack"].get<std::string>().empty()) return load_stack_json(c["stack"].get<std::string>());
  return LayerStack::coated_lambertian(c["eta"], c["alpha"], rgb_of(c["rho"]), rgb_of(c["tau"]));
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

fs::path error_image_path(const fs::path& out) {
  fs::path p = out;
  return p.replace_extension(".se.pfm");
}

void run_render(const json& c) {
  const Engine engine = parse_engine(c["engine"]);
  const fs::path out = c["out"].get<std::string>();
  if (engine == Engine::Oracle && c["seed"].is_null()) throw ValidationError("oracle rendering needs --seed");
  const LayerStack stack = stack_of(c);
  RenderConfig rc;
  rc.width = c["width"];
  rc.height = c["height"];
  const Vec3d l = vec3_of(c["light"]);
  if (!(l.norm() > 0.0)) throw ValidationError("light direction must be nonzero");
  rc.light = l.normalized();
  rc.radiance = rgb_of(c["radiance"]);
  rc.paths_per_pixel = c["paths"];
  rc.seed = c["seed"].is_null() ? 0 : c["seed"].get<std::uint64_t>();
  rc.threads = threads_of(c);

  std::vector<fs::path> files{out};
  if (engine == Engine::Oracle) files.push_back(error_image_path(out));
  guard_outputs(files, c["force"]);
  guard_outputs({with_suffix(out, ".manifest.json")}, c["force"]);

  RenderResult r;
  switch (engine) {
    case Engine::Model: {
      const auto tables = load_stats(c);
      if (stack.size() != 2 || !stack.has_lambertian_base())
        throw ValidationError("the model engine needs a single coat over a Lambertian base");
      const RoughDielectric& d = stack.dielectric(0);
      r = render_model({d.eta, d.alpha, stack.base().rho, stack.media()[0].tau}, *tables, rc);
      break;
    }
    case Engine::Oracle:
      r = render_oracle(stack, rc);
      break;
    case Engine::Layered: {
      const auto tables = load_stats(c);
      LayeredContext ctx{tables.get(), {}};
      if (!c["refraction"].get<std::string>().empty())
        ctx.refraction = RefractionTables::load(c["refraction"].get<std::string>()).model();
      r = render_layered(stack, ctx, rc);
      break;
    }
  }
  ensure_parent(out);
  write_pfm(r.image, out);
  if (engine == Engine::Oracle) write_pfm(r.standard_error, error_image_path(out));
  write_manifest(with_suffix(out, ".manifest.json"), "render", c, files);
  std::cerr << "wrote " << out << '\n';
}

void run_compare(const json& c) {
  const Image a = read_pfm(c["a"].get<std::string>());
  const Image b = read_pfm(c["b"].get<std::string>());
  std::optional<Image> se;
  if (!c["error"].get<std::string>().empty()) se = read_pfm(c["error"].get<std::string>());
  const CompareMetrics m = compare_images(a, b, se ? &*se : nullptr, c["max_relative_error"]);
  const std::string text = m.to_json();
  std::cout << text << '\n';
  if (!c["out"].get<std::string>().empty()) {
    const fs::path out = c["out"].get<std::string>();
    guard_outputs({out, with_suffix(out, ".manifest.json")}, c["force"]);
    ensure_parent(out);
    write_text(out, text + "\n");
    write_manifest(with_suffix(out, ".manifest.json"), "compare", c, {out});
  }
}

void run_profile(const json& c) {
  if (c["seed"].is_null()) throw ValidationError("profile needs --seed");
  const fs::path out = c["out"].get<std::string>();
  guard_outputs({out, with_suffix(out, ".manifest.json")}, c["force"]);
  std::unique_ptr<StatsSource> tables;
  if (!c["tables"].get<std::string>().empty()) tables = load_stats(c);
  const std::uint64_t seed = c["seed"];
  std::vector<LobeProfile> profiles;
  json l1 = json::array();
  std::uint64_t cell = 0;
  for (double alpha : c["alphas"].get<std::vector<double>>()) {
    for (double eta : c["etas"].get<std::vector<double>>()) {
      const double s2 = tables ? tables->sigma2plus(eta, alpha)
                               : measure_sigma2plus(eta, alpha, c["sigma_paths"], hash_seed(seed, 1, cell), threads_of(c));
      profiles.push_back(indirect_lobe_profile(eta, alpha, s2, c["paths"], hash_seed(seed, 2, cell), threads_of(c),
                                               c["bins"]));
      l1.push_back({{"eta", eta}, {"alpha", alpha}, {"sigma2plus", s2}, {"l1", profiles.back().l1}});
      std::cerr << "eta " << eta << " alpha " << alpha << " L1 " << profiles.back().l1 << '\n';
      ++cell;
    }
  }
  ensure_parent(out);
  write_profiles_csv(profiles, out);
  write_manifest(with_suffix(out, ".manifest.json"), "profile", c, {out}, json{{"l1", l1}});
}

void run_command(const std::string& command, const json& config) {
  announce(command, config);
  if (command == "precompute") return run_precompute(config);
  if (command == "compress") return run_compress(config);
  if (command == "render") return run_render(config);
  if (command == "compare") return run_compare(config);
  if (command == "profile") return run_profile(config);
  throw ValidationError("unknown command in manifest: " + command);
}

/// Output locations of a recorded config, redirected into `dir`.
json redirect_outputs(const std::string& command, json config, const fs::path& dir) {
  if (command == "precompute" || command == "compress") {
    config["out"] = dir.string();
  } else if (config.contains("out") && !config["out"].get<std::string>().empty()) {
    config["out"] = (dir / fs::path(config["out"].get<std::string>()).filename()).string();
  }
  return config;
}

fs::path manifest_of(const std::string& command, const json& config) {
  const fs::path out = config["out"].get<std::string>();
  if (command == "precompute" || command == "compress") return out / "manifest.json";
  return with_suffix(out, ".manifest.json");
}

int run_replay(const fs::path& manifest_path, const std::string& out_dir, bool force, bool check) {
  const json m = read_json(manifest_path);
  if (!m.contains("command") || !m.contains("config")) throw FormatError(manifest_path.string() + ": not a coatlab manifest");
  const std::string command = m["command"];
  json config = m["config"];
  if (!out_dir.empty()) config = redirect_outputs(command, config, out_dir);
  config["force"] = force;
  run_command(command, config);
  if (!check) return 0;
  const json fresh = read_json(manifest_of(command, config));
  bool same = true;
  for (const auto& [name, hash] : m["outputs"].items()) {
    const bool ok = fresh["outputs"].contains(name) && fresh["outputs"][name] == hash;
    std::cout << (ok ? "identical " : "DIFFERENT ") << name << '\n';
    same = same && ok;
  }
  if (!same) throw ValidationError("replayed outputs differ from the manifest");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coated Lambertian statistics, compression, rendering and validation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  json cfg;
  std::optional<std::uint64_t> seed;
  std::string out, tables, compressed, stack, refraction, engine = "model", a, b, error, second_axis = "alpha",
                                                                  texel = "f16", replay_path, replay_out;
  bool force = false, with_layered = false, check = false;
  int threads = 0, cos_n = 64, alpha_n = 64, eta_n = 64, tau_n = 16, ref_eta_n = 25, ref_alpha_n = 11;
  int k_tau = 2, k_alpha = 4, width = 256, height = 256, bins = 128;
  double eta_min = 0.25, eta_max = 4.0, eta = 1.5, alpha = 0.1, max_rel = 0.02;
  std::size_t paths = 40960, t01_paths = 0, ref_paths = 16384, render_paths = 1024, profile_paths = 1000000,
              sigma_paths = 400000;
  std::vector<double> rho{0.5, 0.5, 0.5}, tau{1.0, 1.0, 1.0}, light{-0.5, 0.5, 1.0}, radiance{1.0, 1.0, 1.0};
  std::vector<double> etas{0.25, 0.41, 0.58, 0.74, 0.91}, alphas{0.01, 0.21, 0.41, 0.60, 0.80};

  auto add_common = [&](CLI::App* s) {
    s->add_flag("--force", force, "Overwrite existing outputs");
    s->add_option("--threads", threads, "Worker threads (default: COAT_THREADS or all cores)");
  };

  auto* pre = app.add_subcommand("precompute", "Tabulate T01, R10, T10 and sigma2+");
  pre->add_option("--seed", seed, "Global seed")->required();
  pre->add_option("--out", out, "Output directory")->required();
  pre->add_option("--paths", paths, "Paths per cell");
  pre->add_option("--t01-paths", t01_paths, "Paths per T01 cell (default: --paths)");
  pre->add_option("--cos-samples", cos_n)->check(CLI::PositiveNumber);
  pre->add_option("--alpha-samples", alpha_n)->check(CLI::PositiveNumber);
  pre->add_option("--eta-samples", eta_n)->check(CLI::PositiveNumber);
  pre->add_option("--tau-samples", tau_n)->check(CLI::PositiveNumber);
  pre->add_option("--eta-min", eta_min);
  pre->add_option("--eta-max", eta_max);
  pre->add_flag("--with-layered", with_layered, "Also calibrate refraction tables for the layered engine");
  pre->add_option("--refraction-paths", ref_paths);
  pre->add_option("--refraction-eta-samples", ref_eta_n);
  pre->add_option("--refraction-alpha-samples", ref_alpha_n);
  add_common(pre);

  auto* cmp = app.add_subcommand("compress", "PCA-compress tables and export texture layouts");
  cmp->add_option("--tables", tables, "Directory with CLTB tables")->required();
  cmp->add_option("--out", out, "Output directory")->required();
  cmp->add_option("--k-tau", k_tau)->check(CLI::PositiveNumber);
  cmp->add_option("--k-alpha", k_alpha, "Basis count of the second T01 reduction")->check(CLI::PositiveNumber);
  cmp->add_option("--second-axis", second_axis)->check(CLI::IsMember({"alpha", "eta", "cos_theta"}));
  cmp->add_option("--texel", texel)->check(CLI::IsMember({"f16", "f32"}));
  add_common(cmp);

  auto* ren = app.add_subcommand("render", "Render a sphere under a directional light (PFM)");
  ren->add_option("--engine", engine)->check(CLI::IsMember({"model", "oracle", "layered"}));
  ren->add_option("--out", out, "Output PFM")->required();
  ren->add_option("--tables", tables, "Directory with CLTB tables");
  ren->add_option("--compressed", compressed, "Directory with compressed tables");
  ren->add_option("--refraction", refraction, "Directory with RTS/RTJ refraction tables");
  ren->add_option("--stack", stack, "Layer stack JSON (default: coated Lambertian from flags)");
  ren->add_option("--eta", eta);
  ren->add_option("--alpha", alpha);
  ren->add_option("--rho", rho)->expected(1, 3)->delimiter(',');
  ren->add_option("--tau", tau)->expected(1, 3)->delimiter(',');
  ren->add_option("--light", light, "Direction towards the light")->expected(3)->delimiter(',');
  ren->add_option("--radiance", radiance)->expected(1, 3)->delimiter(',');
  ren->add_option("--width", width)->check(CLI::PositiveNumber);
  ren->add_option("--height", height)->check(CLI::PositiveNumber);
  ren->add_option("--paths", render_paths, "Oracle paths per pixel");
  ren->add_option("--seed", seed);
  add_common(ren);

  auto* cmpr = app.add_subcommand("compare", "Image metrics as JSON");
  cmpr->add_option("a", a)->required();
  cmpr->add_option("b", b, "Reference image")->required();
  cmpr->add_option("--error", error, "Per-pixel standard error of the reference");
  cmpr->add_option("--max-relative-error", max_rel);
  cmpr->add_option("--out", out, "Also write metrics to this file");
  add_common(cmpr);

  auto* pro = app.add_subcommand("profile", "Incidence-plane profiles of the indirect lobe (CSV)");
  pro->add_option("--seed", seed)->required();
  pro->add_option("--out", out, "Output CSV")->required();
  pro->add_option("--etas", etas)->expected(1, -1)->delimiter(',');
  pro->add_option("--alphas", alphas)->expected(1, -1)->delimiter(',');
  pro->add_option("--paths", profile_paths, "Goniophotometer paths per cell");
  pro->add_option("--sigma-paths", sigma_paths, "Paths for sigma2+ when no tables are given");
  pro->add_option("--tables", tables, "Take sigma2+ from these tables");
  pro->add_option("--bins", bins);
  add_common(pro);

  auto* rep = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  rep->add_option("manifest", replay_path)->required();
  rep->add_option("--out-dir", replay_out, "Write outputs here instead of the recorded location");
  rep->add_flag("--check", check, "Compare output hashes with the manifest");
  rep->add_flag("--force", force);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const json seed_json = seed ? json(*seed) : json(nullptr);
  try {
    if (*pre) {
      cfg = {{"seed", seed_json},     {"out", out},
             {"paths", paths},        {"t01_paths", t01_paths ? t01_paths : paths},
             {"cos_samples", cos_n},  {"alpha_samples", alpha_n},
             {"eta_samples", eta_n},  {"tau_samples", tau_n},
             {"eta_min", eta_min},    {"eta_max", eta_max},
             {"with_layered", with_layered}, {"refraction_paths", ref_paths},
             {"refraction_eta_samples", ref_eta_n}, {"refraction_alpha_samples", ref_alpha_n},
             {"threads", threads},    {"force", force}};
      run_command("precompute", cfg);
    } else if (*cmp) {
      cfg = {{"tables", tables}, {"out", out},     {"k_tau", k_tau},   {"k_alpha", k_alpha},
             {"second_axis", second_axis}, {"texel", texel}, {"threads", threads}, {"force", force}};
      run_command("compress", cfg);
    } else if (*ren) {
      cfg = {{"engine", engine}, {"out", out},         {"tables", tables},     {"compressed", compressed},
             {"refraction", refraction}, {"stack", stack}, {"eta", eta},       {"alpha", alpha},
             {"rho", rho},       {"tau", tau},         {"light", light},       {"radiance", radiance},
             {"width", width},   {"height", height},   {"paths", render_paths}, {"seed", seed_json},
             {"threads", threads}, {"force", force}};
      run_command("render", cfg);
    } else if (*cmpr) {
      cfg = {{"a", a}, {"b", b}, {"error", error}, {"max_relative_error", max_rel}, {"out", out},
             {"threads", threads}, {"force", force}};
      run_command("compare", cfg);
    } else if (*pro) {
      cfg = {{"seed", seed_json}, {"out", out},   {"etas", etas},       {"alphas", alphas},
             {"paths", profile_paths}, {"sigma_paths", sigma_paths}, {"tables", tables}, {"compressed", ""},
             {"bins", bins},      {"threads", threads}, {"force", force}};
      run_command("profile", cfg);
    } else if (*rep) {
      return run_replay(replay_path, replay_out, force, check);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "error: bad configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
