// SPDX-License-Identifier: Apache-2.0
#include "coat/table.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace coat {

namespace {

constexpr char kMagic[4] = {'C', 'L', 'T', 'B'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "table IO assumes a little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, const T& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("table file truncated");
  }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> serialize_body(const std::vector<Axis>& axes, const std::vector<float>& data) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(axes.size()));
  for (const auto& a : axes) {
    put(out, static_cast<std::uint32_t>(a.name.size()));
    out.insert(out.end(), a.name.begin(), a.name.end());
    put(out, static_cast<std::uint32_t>(a.count));
    put(out, a.min);
    put(out, a.max);
    put(out, static_cast<std::uint8_t>(a.spacing));
  }
  const auto* p = reinterpret_cast<const std::uint8_t*>(data.data());
  out.insert(out.end(), p, p + data.size() * sizeof(float));
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Axis::Axis(std::string n, int c, double lo, double hi, Spacing s)
    : name(std::move(n)), count(c), min(lo), max(hi), spacing(s) {
  validate();
}

void Axis::validate() const {
  if (count < 2) throw ValidationError("axis '" + name + "' needs at least 2 samples");
  if (!(min < max)) throw ValidationError("axis '" + name + "' needs min < max");
  if (spacing == Spacing::Log && !(min > 0.0)) throw ValidationError("log axis '" + name + "' needs min > 0");
}

double Axis::node(int i) const {
  if (i == 0) return min;
  if (i == count - 1) return max;
  const double t = double(i) / double(count - 1);
  if (spacing == Spacing::Log) return std::exp(std::log(min) + t * (std::log(max) - std::log(min)));
  return min + t * (max - min);
}

double Axis::position(double x) const {
  double t;
  if (spacing == Spacing::Log) {
    t = x > 0.0 ? (std::log(x) - std::log(min)) / (std::log(max) - std::log(min)) : 0.0;
  } else {
    t = (x - min) / (max - min);
  }
  if (!(t > 0.0)) return 0.0;  // also maps NaN to the boundary
  return std::min(t, 1.0) * (count - 1);
}

TableNd::TableNd(std::vector<Axis> axes) : axes_(std::move(axes)) {
  std::size_t n = 1;
  strides_.assign(axes_.size(), 1);
  for (std::size_t i = axes_.size(); i-- > 0;) {
    axes_[i].validate();
    strides_[i] = n;
    n *= static_cast<std::size_t>(axes_[i].count);
  }
  data_.assign(axes_.empty() ? 0 : n, 0.0f);
}

TableNd::TableNd(std::vector<Axis> axes, std::vector<float> data) : TableNd(std::move(axes)) {
  if (data.size() != data_.size()) throw ShapeError("table data length does not match its axes");
  data_ = std::move(data);
}

std::size_t TableNd::axis_index(const std::string& name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i)
    if (axes_[i].name == name) return i;
  throw ShapeError("table has no axis '" + name + "'");
}

std::size_t TableNd::flat_index(std::span<const int> idx) const {
  if (idx.size() != axes_.size()) throw ShapeError("index rank does not match table rank");
  std::size_t f = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= axes_[i].count) throw ShapeError("table index out of range");
    f += strides_[i] * static_cast<std::size_t>(idx[i]);
  }
  return f;
}

std::vector<int> TableNd::unravel(std::size_t flat) const {
  std::vector<int> idx(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    idx[i] = static_cast<int>(flat / strides_[i]);
    flat %= strides_[i];
  }
  return idx;
}

double TableNd::lookup(std::span<const double> coords) const {
  const std::size_t r = axes_.size();
  if (coords.size() != r) throw ShapeError("lookup rank does not match table rank");
  std::size_t base = 0;
  double frac[8];
  std::size_t step[8];
  if (r > 8) throw ShapeError("lookup supports at most 8 axes");
  for (std::size_t i = 0; i < r; ++i) {
    const double p = axes_[i].position(coords[i]);
    const int i0 = std::min(static_cast<int>(p), axes_[i].count - 2);
    frac[i] = p - i0;
    step[i] = strides_[i];
    base += strides_[i] * static_cast<std::size_t>(i0);
  }
  double sum = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t(1) << r); ++corner) {
    double w = 1.0;
    std::size_t off = base;
    for (std::size_t i = 0; i < r; ++i) {
      if (corner & (std::size_t(1) << i)) {
        w *= frac[i];
        off += step[i];
      } else {
        w *= 1.0 - frac[i];
      }
    }
    if (w != 0.0) sum += w * double(data_[off]);
  }
  return sum;
}

std::uint64_t TableNd::content_hash() const { return fnv1a64(serialize_body(axes_, data_)); }

std::vector<std::uint8_t> serialize_table(const TableNd& table) {
  auto out = serialize_body(table.axes(), table.data());
  put(out, fnv1a64(out));
  return out;
}

TableNd deserialize_table(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.get_string(4) != std::string(kMagic, 4)) throw FormatError("not a CLTB table (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw FormatError("unsupported CLTB version " + std::to_string(version));
  const auto rank = r.get<std::uint32_t>();
  if (rank == 0 || rank > 8) throw FormatError("bad CLTB axis count");
  std::vector<Axis> axes;
  std::size_t n = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    Axis a;
    const auto len = r.get<std::uint32_t>();
    a.name = r.get_string(len);
    a.count = static_cast<int>(r.get<std::uint32_t>());
    a.min = r.get<double>();
    a.max = r.get<double>();
    const auto law = r.get<std::uint8_t>();
    if (law > 1) throw FormatError("bad CLTB spacing law");
    a.spacing = static_cast<Spacing>(law);
    try {
      a.validate();
    } catch (const ValidationError& e) {
      throw FormatError(std::string("bad CLTB axis: ") + e.what());
    }
    n *= static_cast<std::size_t>(a.count);
    axes.push_back(std::move(a));
  }
  r.need(n * sizeof(float) + 8);
  if (r.pos() + n * sizeof(float) + 8 != bytes.size()) throw FormatError("CLTB file has trailing bytes");
  std::vector<float> data(n);
  std::memcpy(data.data(), bytes.data() + r.pos(), n * sizeof(float));
  const std::size_t body = r.pos() + n * sizeof(float);
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, 8);
  if (stored != fnv1a64(bytes.first(body))) throw HashMismatchError("CLTB content hash mismatch");
  return TableNd(std::move(axes), std::move(data));
}

void save_table(const TableNd& table, const std::filesystem::path& path) {
  const auto bytes = serialize_table(table);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

TableNd load_table(const std::filesystem::path& path, std::size_t expected_rank) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  TableNd t = deserialize_table(bytes);
  if (expected_rank != 0 && t.rank() != expected_rank) {
    throw ShapeError(path.string() + ": expected a " + std::to_string(expected_rank) + "D table, got " +
                     std::to_string(t.rank()) + "D");
  }
  return t;
}

void write_table_csv(const TableNd& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& a : table.axes()) out << a.name << ',';
  out << "value\n";
  out.precision(9);
  for (std::size_t f = 0; f < table.size(); ++f) {
    const auto idx = table.unravel(f);
    for (std::size_t i = 0; i < idx.size(); ++i) out << table.axis(i).node(idx[i]) << ',';
    out << table.data()[f] << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace coat
