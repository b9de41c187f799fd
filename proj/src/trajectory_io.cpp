#include "fraflow/trajectory_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <vector>

namespace fraflow {

namespace {

constexpr char kMagic[4] = {'F', 'R', 'F', 'L'};
constexpr std::uint32_t kVersion = 1;
static_assert(std::endian::native == std::endian::little, "dump I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DumpError("dump truncated");
  return v;
}

void put_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  // Column j of the trajectory is node j; write node by node.
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) put<double>(os, m(i, j));
}

Eigen::MatrixXd get_matrix(std::istream& is, std::uint64_t dim, std::uint64_t nodes) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(nodes));
  std::vector<double> buf(dim);
  for (std::uint64_t j = 0; j < nodes; ++j) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim * sizeof(double))))
      throw DumpError("dump truncated");
    for (std::uint64_t i = 0; i < dim; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[i];
  }
  return m;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "j,t,norm,phi1,phi2_envelope,residual\n";
  for (std::size_t j = 0; j < tr.diagnostics.size(); ++j) {
    const auto& d = tr.diagnostics[j];
    os << j << ',' << format_double(tr.grid.time(j)) << ',' << format_double(d.norm) << ','
       << format_double(d.energy) << ',' << format_double(d.envelope) << ',' << format_double(d.residual) << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_trajectory_csv(os, tr);
}

void write_dump(std::ostream& os, const Trajectory& tr) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(tr.states.rows()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(tr.states.cols()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(tr.kernel.kind));
  put<double>(os, tr.kernel.parameter);
  put<double>(os, tr.grid.horizon());
  put<std::uint64_t>(os, static_cast<std::uint64_t>(tr.grid.steps()));
  put<double>(os, tr.metric.weight);
  put_matrix(os, tr.states);
  put_matrix(os, tr.selection);
  put_matrix(os, tr.perturbation);
  for (const auto& d : tr.diagnostics) {
    put<double>(os, d.energy);
    put<double>(os, d.envelope);
    put<double>(os, d.residual);
  }
}

void write_dump(const std::string& path, const Trajectory& tr) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_dump(os, tr);
  if (!os) throw std::runtime_error("write failed: " + path);
}

Trajectory read_dump(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4)) throw DumpError("dump truncated");
  if (std::memcmp(magic, kMagic, 4) != 0) throw DumpError("bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw DumpError("unsupported dump version");
  const auto dim = get<std::uint64_t>(is);
  const auto nodes = get<std::uint64_t>(is);
  const auto kind = get<std::uint32_t>(is);
  const double param = get<double>(is);
  const double horizon = get<double>(is);
  const auto steps = get<std::uint64_t>(is);
  const double weight = get<double>(is);
  if (dim == 0 || dim > (1u << 26) || nodes == 0 || nodes > steps + 1 || kind > 4)
    throw DumpError("inconsistent dump header");
  Trajectory tr;
  try {
    tr.grid = TimeGrid(horizon, static_cast<std::size_t>(steps));
  } catch (const std::invalid_argument&) {
    throw DumpError("inconsistent dump header");
  }
  tr.kernel = KernelTag{static_cast<KernelKind>(kind), param};
  tr.metric = Metric{weight};
  tr.states = get_matrix(is, dim, nodes);
  tr.selection = get_matrix(is, dim, nodes);
  tr.perturbation = get_matrix(is, dim, nodes);
  tr.diagnostics.resize(nodes);
  for (std::uint64_t j = 0; j < nodes; ++j) {
    auto& d = tr.diagnostics[j];
    d.energy = get<double>(is);
    d.envelope = get<double>(is);
    d.residual = get<double>(is);
    const auto col = tr.states.col(static_cast<Eigen::Index>(j));
    d.norm = tr.metric.norm(col);
    d.sup_norm = col.lpNorm<Eigen::Infinity>();
  }
  if (is.peek() != std::char_traits<char>::eof()) throw DumpError("trailing bytes after dump payload");
  return tr;
}

Trajectory read_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DumpError("cannot open " + path);
  return read_dump(is);
}

}  // namespace fraflow
