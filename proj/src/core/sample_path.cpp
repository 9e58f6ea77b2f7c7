#include "sectorial/core/sample_path.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sectorial/util/errors.hpp"
#include "sectorial/util/format.hpp"

namespace sectorial::core {

SamplePath::SamplePath(Grid grid, int d, std::vector<double> values, SeedLineage lineage)
    : grid_(std::move(grid)), d_(d), values_(std::move(values)), lineage_(lineage) {
  if (d_ < 1) throw DomainError("sample path needs d >= 1");
  if (values_.size() != grid_.size() * static_cast<std::size_t>(d_))
    throw DomainError("sample path value count must equal grid size times d");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("sample path values must be finite");
}

namespace {

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>)
      s += util::format_double(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

template <class T>
std::vector<T> split(const std::string& s) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if constexpr (std::is_floating_point_v<T>)
      out.push_back(std::stod(item));
    else
      out.push_back(static_cast<T>(std::stoull(item)));
  }
  return out;
}

std::string header_value(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# " + key + "=", 0) != 0)
    throw std::runtime_error("sample path CSV: expected header '" + key + "'");
  return line.substr(key.size() + 3);
}

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("sample path binary: truncated");
  return v;
}

}  // namespace

void write_csv(const SamplePath& path, std::ostream& out) {
  const Grid& g = path.grid();
  out << "# sectorial-sample-path v1\n";
  out << "# dim=" << g.dim() << "\n# d=" << path.d() << "\n";
  out << "# seed=" << path.lineage().master_seed << "\n# replicate=" << path.lineage().replicate << "\n";
  out << "# origin=" << join(g.origin()) << "\n# spacing=" << join(g.spacing()) << "\n";
  out << "# counts=" << join(g.counts()) << "\n";
  out << "index";
  for (std::size_t j = 0; j < g.dim(); ++j) out << ",x" << j;
  for (int c = 0; c < path.d(); ++c) out << ",v" << c;
  out << "\n";
  std::vector<double> x(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    out << i;
    for (double c : x) out << ',' << util::format_double(c);
    for (double v : path.at(i)) out << ',' << util::format_double(v);
    out << '\n';
  }
}

SamplePath read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# sectorial-sample-path v1")
    throw std::runtime_error("not a sample path CSV dump");
  const auto dim = std::stoul(header_value(in, "dim"));
  const int d = std::stoi(header_value(in, "d"));
  SeedLineage lin;
  lin.master_seed = std::stoull(header_value(in, "seed"));
  lin.replicate = std::stoull(header_value(in, "replicate"));
  auto origin = split<double>(header_value(in, "origin"));
  auto spacing = split<double>(header_value(in, "spacing"));
  auto counts = split<std::size_t>(header_value(in, "counts"));
  if (origin.size() != dim) throw std::runtime_error("sample path CSV: origin dimension mismatch");
  std::size_t total = 1;
  for (auto c : counts) total *= c;
  Grid grid(origin, spacing, counts, total);
  std::getline(in, line);  // column header
  std::vector<double> values;
  values.reserve(grid.size() * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("sample path CSV: truncated body");
    const auto row = split<double>(line);
    if (row.size() != 1 + dim + static_cast<std::size_t>(d)) throw std::runtime_error("sample path CSV: bad row");
    for (int c = 0; c < d; ++c) values.push_back(row[1 + dim + static_cast<std::size_t>(c)]);
  }
  return SamplePath(std::move(grid), d, std::move(values), lin);
}

void write_binary(const SamplePath& path, std::ostream& out) {
  const Grid& g = path.grid();
  out.write("SPTH", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(path.d()));
  put<std::uint64_t>(out, path.lineage().master_seed);
  put<std::uint64_t>(out, path.lineage().replicate);
  for (double o : g.origin()) put(out, o);
  for (double h : g.spacing()) put(out, h);
  for (auto c : g.counts()) put<std::uint64_t>(out, c);
  out.write(reinterpret_cast<const char*>(path.values().data()),
            static_cast<std::streamsize>(path.values().size() * sizeof(double)));
}

SamplePath read_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SPTH", 4) != 0) throw std::runtime_error("not a binary sample path");
  if (get<std::uint32_t>(in) != 1) throw std::runtime_error("unsupported sample path version");
  const auto dim = get<std::uint32_t>(in);
  const auto d = get<std::uint32_t>(in);
  SeedLineage lin;
  lin.master_seed = get<std::uint64_t>(in);
  lin.replicate = get<std::uint64_t>(in);
  std::vector<double> origin(dim), spacing(dim);
  std::vector<std::size_t> counts(dim);
  for (auto& o : origin) o = get<double>(in);
  for (auto& h : spacing) h = get<double>(in);
  std::size_t total = 1;
  for (auto& c : counts) total *= (c = get<std::uint64_t>(in));
  Grid grid(origin, spacing, counts, total);
  std::vector<double> values(grid.size() * d);
  if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double))))
    throw std::runtime_error("sample path binary: truncated values");
  return SamplePath(std::move(grid), static_cast<int>(d), std::move(values), lin);
}

SamplePath load_sample_path(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open sample path file " + file);
  char lead[4] = {};
  in.read(lead, 4);
  in.seekg(0);
  if (std::memcmp(lead, "SPTH", 4) == 0) return read_binary(in);
  return read_csv(in);
}

void save_sample_path(const SamplePath& path, const std::string& file, bool binary) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write sample path file " + file);
  if (binary)
    write_binary(path, out);
  else
    write_csv(path, out);
}

}  // namespace sectorial::core
