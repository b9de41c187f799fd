#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "fraflow/flow.hpp"

namespace fraflow {

/// Columns j,t,norm,phi1,phi2_envelope,residual; 17 significant digits, LF endings.
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
void write_trajectory_csv(const std::string& path, const Trajectory& tr);

class DumpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Little-endian binary dump:
///   "FRFL" | u32 version | u64 dim | u64 nodes | u32 kernel kind | f64 kernel parameter |
///   f64 T | u64 N | f64 metric weight | states (row-major, node by node) | selections |
///   perturbations | per node: f64 phi1, f64 envelope, f64 residual
void write_dump(std::ostream& os, const Trajectory& tr);
void write_dump(const std::string& path, const Trajectory& tr);
/// Throws DumpError on a bad magic, version, truncated payload or trailing bytes.
Trajectory read_dump(std::istream& is);
Trajectory read_dump(const std::string& path);

/// "%.17g" formatting.
std::string format_double(double x);

}  // namespace fraflow
