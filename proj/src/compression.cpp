// SPDX-License-Identifier: Apache-2.0
#include "coat/compression.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <json.hpp>

namespace coat {

namespace {

constexpr char kTexMagic[4] = {'C', 'L', 'T', 'X'};
constexpr std::uint32_t kTexVersion = 1;

void fix_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      if (std::abs(basis(i, j)) > 1e-12) {
        if (basis(i, j) < 0.0) basis.col(j) *= -1.0;
        break;
      }
    }
  }
}

// Value of a tabulated 1D function of `axis` at x, interpolated like TableNd.
template <typename Vec>
double lerp_axis(const Axis& axis, const Vec& v, double x) {
  const double p = axis.position(x);
  const int i0 = std::min(static_cast<int>(p), axis.count - 2);
  const double f = p - i0;
  return f == 0.0 ? v(i0) : (1.0 - f) * v(i0) + f * v(i0 + 1);
}

}  // namespace

PcaResult pca_reduce(const TableNd& table, const std::string& axis_name, int k) {
  const std::size_t r = table.axis_index(axis_name);
  if (table.rank() < 2) throw ShapeError("pca_reduce needs a table of rank >= 2");
  const Axis& axis = table.axis(r);
  if (k < 1 || k > axis.count) {
    throw ValidationError("basis count must be in [1, " + std::to_string(axis.count) + "] for axis '" +
                          axis_name + "'");
  }
  std::vector<Axis> others;
  for (std::size_t i = 0; i < table.rank(); ++i)
    if (i != r) others.push_back(table.axis(i));
  TableNd shape(others);
  const auto rows = static_cast<Eigen::Index>(shape.size());
  const Eigen::Index cols = axis.count;

  Eigen::MatrixXd m(rows, cols);
  std::vector<int> oidx(others.size());
  for (std::size_t f = 0; f < table.size(); ++f) {
    const auto idx = table.unravel(f);
    for (std::size_t i = 0, o = 0; i < idx.size(); ++i)
      if (i != r) oidx[o++] = idx[i];
    m(static_cast<Eigen::Index>(shape.flat_index(oidx)), idx[r]) = table.data()[f];
  }

  PcaResult out;
  out.axis = axis;
  out.mean = m.colwise().mean().transpose();
  m.rowwise() -= out.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success || !svd.singularValues().allFinite()) {
    std::ostringstream ss;
    ss << "SVD failed on a " << rows << "x" << cols << " matrix (norm " << m.norm() << ")";
    throw NumericalError(ss.str());
  }
  out.singular_values = svd.singularValues();
  out.basis = svd.matrixV().leftCols(k);
  fix_signs(out.basis);

  const Eigen::MatrixXd coef = m * out.basis;
  for (int j = 0; j < k; ++j) {
    TableNd t(others);
    for (Eigen::Index i = 0; i < rows; ++i) t.data()[i] = static_cast<float>(coef(i, j));
    t.provenance = table.provenance;
    out.coefficients.push_back(std::move(t));
  }
  return out;
}

CompressedTable::CompressedTable(std::vector<Axis> axes, std::vector<Level> levels, std::vector<TableNd> leaves)
    : axes_(std::move(axes)), levels_(std::move(levels)), leaves_(std::move(leaves)) {
  std::vector<bool> used(axes_.size(), false);
  std::size_t expect_nodes = 1;
  for (const auto& l : levels_) {
    std::size_t found = axes_.size();
    for (std::size_t i = 0; i < axes_.size(); ++i)
      if (axes_[i].name == l.axis.name) found = i;
    if (found == axes_.size() || used[found]) throw ShapeError("bad compressed level axis '" + l.axis.name + "'");
    used[found] = true;
    level_axis_.push_back(found);
    if (l.nodes.size() != expect_nodes) throw ShapeError("compressed level has the wrong node count");
    for (const auto& n : l.nodes) {
      if (n.mean.size() != l.axis.count || n.basis.rows() != l.axis.count || n.basis.cols() != l.k)
        throw ShapeError("compressed level basis has the wrong shape");
    }
    expect_nodes *= static_cast<std::size_t>(l.k);
  }
  if (leaves_.size() != expect_nodes) throw ShapeError("compressed table has the wrong leaf count");
  for (std::size_t i = 0; i < axes_.size(); ++i)
    if (!used[i]) leaf_axes_.push_back(i);
  for (const auto& leaf : leaves_) {
    if (leaf.rank() != leaf_axes_.size()) throw ShapeError("leaf rank mismatch");
    for (std::size_t i = 0; i < leaf_axes_.size(); ++i)
      if (!(leaf.axis(i) == axes_[leaf_axes_[i]])) throw ShapeError("leaf axis mismatch");
  }
}

CompressedTable CompressedTable::compress(const TableNd& table,
                                          const std::vector<std::pair<std::string, int>>& plan) {
  std::vector<TableNd> current{table};
  std::vector<Level> levels;
  for (const auto& [name, k] : plan) {
    Level level;
    level.axis = table.axis(table.axis_index(name));
    level.k = k;
    std::vector<TableNd> next;
    for (const auto& t : current) {
      PcaResult p = pca_reduce(t, name, k);
      level.nodes.push_back({std::move(p.mean), std::move(p.basis)});
      for (auto& c : p.coefficients) next.push_back(std::move(c));
    }
    levels.push_back(std::move(level));
    current = std::move(next);
  }
  return CompressedTable(table.axes(), std::move(levels), std::move(current));
}

double CompressedTable::eval(std::size_t level, std::size_t node, std::span<const double> coords) const {
  if (level == levels_.size()) {
    double lc[8];
    for (std::size_t i = 0; i < leaf_axes_.size(); ++i) lc[i] = coords[leaf_axes_[i]];
    return leaves_[node].lookup(std::span<const double>(lc, leaf_axes_.size()));
  }
  const Level& l = levels_[level];
  const Node& n = l.nodes[node];
  const double x = coords[level_axis_[level]];
  double v = lerp_axis(l.axis, n.mean, x);
  for (int j = 0; j < l.k; ++j) {
    v += lerp_axis(l.axis, n.basis.col(j), x) * eval(level + 1, node * l.k + j, coords);
  }
  return v;
}

double CompressedTable::reconstruct(std::span<const double> coords) const {
  if (coords.size() != axes_.size()) throw ShapeError("reconstruct rank does not match table rank");
  return eval(0, 0, coords);
}

TableNd CompressedTable::reconstruct_dense() const {
  TableNd out(axes_);
  std::vector<double> c(axes_.size());
  for (std::size_t f = 0; f < out.size(); ++f) {
    const auto idx = out.unravel(f);
    for (std::size_t i = 0; i < idx.size(); ++i) c[i] = axes_[i].node(idx[i]);
    out.data()[f] = static_cast<float>(reconstruct(c));
  }
  return out;
}

double relative_rms_error(const TableNd& table, const CompressedTable& ct) {
  const TableNd rec = ct.reconstruct_dense();
  if (rec.size() != table.size()) throw ShapeError("compressed table does not match the reference grid");
  double num = 0.0, den = 0.0;
  for (std::size_t f = 0; f < table.size(); ++f) {
    const double d = double(table.data()[f]) - double(rec.data()[f]);
    num += d * d;
    den += double(table.data()[f]) * double(table.data()[f]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

CompressedTable compress_T01(const TableNd& t01, int k_tau, int k_second, const std::string& second_axis) {
  if (t01.rank() != 4) throw ShapeError("compress_T01 expects a 4D table");
  return CompressedTable::compress(t01, {{kAxisTau, k_tau}, {second_axis, k_second}});
}

CompressedTable compress_3d(const TableNd& table, int k_tau) {
  if (table.rank() != 3) throw ShapeError("compress_3d expects a 3D table");
  return CompressedTable::compress(table, {{kAxisTau, k_tau}});
}

int plane_groups(const CompressedTable& ct) { return static_cast<int>((ct.leaves().size() + 3) / 4); }

// ---------------------------------------------------------------------------
// Texture layout

namespace {

struct Plane {
  std::string name;
  std::uint32_t width = 0, height = 0, channels = 0;
  std::vector<float> texels;  // row-major, channels interleaved
};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("texture file truncated");
  return v;
}

nlohmann::json axis_json(const Axis& a) {
  return {{"name", a.name}, {"count", a.count}, {"min", a.min}, {"max", a.max},
          {"spacing", a.spacing == Spacing::Log ? "log" : "linear"}};
}

Axis axis_from_json(const nlohmann::json& j) {
  return Axis(j.at("name").get<std::string>(), j.at("count").get<int>(), j.at("min").get<double>(),
              j.at("max").get<double>(), j.at("spacing").get<std::string>() == "log" ? Spacing::Log : Spacing::Linear);
}

std::string level_plane(std::size_t level, std::size_t node) {
  return "L" + std::to_string(level) + "N" + std::to_string(node);
}

}  // namespace

void export_texture_layout(const CompressedTable& ct, const std::filesystem::path& path, TexelType type) {
  const auto& leaves = ct.leaves();
  if (leaves.empty()) throw ValidationError("nothing to export");
  std::vector<Plane> planes;
  nlohmann::json side;
  side["format"] = "CLTX";
  side["version"] = kTexVersion;
  side["dtype"] = type == TexelType::F16 ? "f16" : "f32";
  side["axes"] = nlohmann::json::array();
  for (const auto& a : ct.axes()) side["axes"].push_back(axis_json(a));

  // Leaf axes: the last one runs along the plane width, the rest along its height.
  const auto& lax = leaves.front().axes();
  const std::uint32_t width = lax.back().count;
  const auto height = static_cast<std::uint32_t>(leaves.front().size() / width);
  side["leaf_axes"] = nlohmann::json::array();
  for (const auto& a : lax) side["leaf_axes"].push_back(a.name);
  side["leaf_planes"] = nlohmann::json::array();
  for (int g = 0; g < plane_groups(ct); ++g) {
    Plane p{"coef" + std::to_string(g), width, height, 4, {}};
    p.texels.assign(std::size_t(width) * height * 4, 0.0f);
    for (int c = 0; c < 4; ++c) {
      const std::size_t leaf = std::size_t(g) * 4 + c;
      if (leaf >= leaves.size()) break;
      for (std::size_t i = 0; i < leaves[leaf].size(); ++i) p.texels[i * 4 + c] = leaves[leaf].data()[i];
      side["leaf_planes"].push_back({{"leaf", leaf}, {"plane", p.name}, {"channel", c}});
    }
    planes.push_back(std::move(p));
  }

  side["levels"] = nlohmann::json::array();
  for (std::size_t l = 0; l < ct.levels().size(); ++l) {
    const auto& level = ct.levels()[l];
    nlohmann::json lj{{"axis", level.axis.name}, {"k", level.k}, {"planes", nlohmann::json::array()}};
    for (std::size_t n = 0; n < level.nodes.size(); ++n) {
      const auto& node = level.nodes[n];
      Plane p{level_plane(l, n), static_cast<std::uint32_t>(level.axis.count), 1,
              static_cast<std::uint32_t>(1 + level.k), {}};
      for (int i = 0; i < level.axis.count; ++i) {
        p.texels.push_back(static_cast<float>(node.mean(i)));
        for (int j = 0; j < level.k; ++j) p.texels.push_back(static_cast<float>(node.basis(i, j)));
      }
      lj["planes"].push_back(p.name);
      planes.push_back(std::move(p));
    }
    side["levels"].push_back(lj);
  }
  side["strip_channels"] = "channel 0: mean; channel 1+j: basis vector j";
  side["formula"] =
      "value = m_0(x_0) + sum_j b_0j(x_0) * [ m_1(x_1) + sum_k b_1k(x_1) * ( ... c_leaf(leaf axes) ) ], "
      "node of child j at a level is node * K + j, leaf index is the final node";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kTexMagic, 4);
  put(out, kTexVersion);
  put(out, static_cast<std::uint32_t>(planes.size()));
  for (const auto& p : planes) {
    put(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put(out, p.width);
    put(out, p.height);
    put(out, p.channels);
    put(out, static_cast<std::uint8_t>(type));
  }
  for (const auto& p : planes) {
    for (float v : p.texels) {
      if (type == TexelType::F16) {
        put(out, Eigen::half_impl::raw_half_as_uint16(Eigen::half(v)));
      } else {
        put(out, v);
      }
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
  std::ofstream js(path.string() + ".json");
  if (!js) throw IoError("cannot write " + path.string() + ".json");
  js << side.dump(2) << '\n';
}

CompressedTable import_texture_layout(const std::filesystem::path& path) {
  std::ifstream js(path.string() + ".json");
  if (!js) throw IoError("cannot open " + path.string() + ".json");
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("texture sidecar: ") + e.what());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTexMagic, 4) != 0) throw FormatError("not a CLTX file (bad magic)");
  if (get<std::uint32_t>(in) != kTexVersion) throw FormatError("unsupported CLTX version");
  const auto n_planes = get<std::uint32_t>(in);
  std::vector<Plane> planes(n_planes);
  std::vector<std::uint8_t> dtypes(n_planes);
  for (std::uint32_t i = 0; i < n_planes; ++i) {
    const auto len = get<std::uint32_t>(in);
    if (len > 4096) throw FormatError("bad CLTX plane name length");
    planes[i].name.resize(len);
    in.read(planes[i].name.data(), len);
    planes[i].width = get<std::uint32_t>(in);
    planes[i].height = get<std::uint32_t>(in);
    planes[i].channels = get<std::uint32_t>(in);
    dtypes[i] = get<std::uint8_t>(in);
    if (dtypes[i] > 1) throw FormatError("bad CLTX texel type");
  }
  std::map<std::string, std::size_t> by_name;
  for (std::uint32_t i = 0; i < n_planes; ++i) {
    auto& p = planes[i];
    const std::size_t n = std::size_t(p.width) * p.height * p.channels;
    p.texels.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      p.texels[t] = dtypes[i] == 0 ? float(Eigen::half(Eigen::half_impl::raw_uint16_to_half(get<std::uint16_t>(in))))
                                   : get<float>(in);
    }
    by_name[p.name] = i;
  }
  const auto plane = [&](const std::string& name) -> const Plane& {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("CLTX file lacks plane '" + name + "'");
    return planes[it->second];
  };

  try {
    std::vector<Axis> axes;
    for (const auto& a : side.at("axes")) axes.push_back(axis_from_json(a));
    std::vector<CompressedTable::Level> levels;
    for (const auto& lj : side.at("levels")) {
      CompressedTable::Level level;
      const auto name = lj.at("axis").get<std::string>();
      for (const auto& a : axes)
        if (a.name == name) level.axis = a;
      level.k = lj.at("k").get<int>();
      for (const auto& pn : lj.at("planes")) {
        const Plane& p = plane(pn.get<std::string>());
        if (p.width != std::uint32_t(level.axis.count) || p.channels != std::uint32_t(1 + level.k))
          throw FormatError("CLTX strip '" + p.name + "' has the wrong shape");
        CompressedTable::Node node{Eigen::VectorXd(level.axis.count), Eigen::MatrixXd(level.axis.count, level.k)};
        for (int i = 0; i < level.axis.count; ++i) {
          node.mean(i) = p.texels[std::size_t(i) * p.channels];
          for (int j = 0; j < level.k; ++j) node.basis(i, j) = p.texels[std::size_t(i) * p.channels + 1 + j];
        }
        level.nodes.push_back(std::move(node));
      }
      levels.push_back(std::move(level));
    }
    std::vector<Axis> leaf_axes;
    for (const auto& n : side.at("leaf_axes")) {
      for (const auto& a : axes)
        if (a.name == n.get<std::string>()) leaf_axes.push_back(a);
    }
    std::vector<TableNd> leaves(side.at("leaf_planes").size(), TableNd(leaf_axes));
    for (const auto& lp : side.at("leaf_planes")) {
      const auto leaf = lp.at("leaf").get<std::size_t>();
      const int c = lp.at("channel").get<int>();
      const Plane& p = plane(lp.at("plane").get<std::string>());
      if (leaf >= leaves.size() || std::size_t(p.width) * p.height != leaves[leaf].size() || p.channels != 4)
        throw FormatError("CLTX coefficient plane has the wrong shape");
      for (std::size_t i = 0; i < leaves[leaf].size(); ++i) leaves[leaf].data()[i] = p.texels[i * 4 + c];
    }
    return CompressedTable(std::move(axes), std::move(levels), std::move(leaves));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("texture sidecar: ") + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(std::string("texture layout: ") + e.what());
  }
}

double CompressedStatsTables::t01(double c, double a, double e, double t) const {
  return std::clamp(T01.reconstruct({c, a, e, t}), 0.0, 1.0);
}
double CompressedStatsTables::r10(double e, double a, double t) const {
  return std::clamp(R10.reconstruct({e, a, t}), 0.0, 1.0);
}
double CompressedStatsTables::t10(double e, double a, double t) const {
  return std::clamp(T10.reconstruct({e, a, t}), 0.0, 1.0);
}
double CompressedStatsTables::sigma2plus(double e, double a) const { return S2P.lookup({e, a}); }

}  // namespace coat
