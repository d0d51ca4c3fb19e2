// Run configuration for the charfem command-line harness.

#ifndef CHARFEM_TOOLS_CONFIG_HPP
#define CHARFEM_TOOLS_CONFIG_HPP

#include "charfem/problems.hpp"
#include "charfem/quadrature.hpp"
#include "charfem/solver.hpp"
#include "charfem/time_basis.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace charfem::tools {

/// Bad or inconsistent configuration; maps to exit code 3.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string benchmark = "traveling_gaussian";
  int p = 1;
  std::string rule = "radau";
  std::string basis = "coincident";
  std::optional<int> elements;   ///< benchmark default when unset
  std::optional<int> partitions; ///< benchmark default when unset
  int levels = 4;
  std::optional<std::string> motion; ///< benchmark default when unset
  std::string reconfigure = "keep";
  double dt_ceiling = std::numeric_limits<double>::infinity();
  std::optional<double> t_final;
  int spatial_degree = 0;
  std::string out = "charfem_out";
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Flat key/value pairs; section names in the file only group keys.
using KeyValues = std::map<std::string, std::string>;

KeyValues read_config_file(const std::string& path);

/// Applies every recognised key; unknown keys and malformed values throw.
void apply(RunConfig& config, const KeyValues& values);

/// Everything a run needs, resolved from a RunConfig.
struct ResolvedRun {
  Benchmark benchmark;
  ReferenceRule rule;
  TimeBasis basis;
  VelocityField motion;
  std::string motion_name;
  int elements;
  int partitions;
  double t_final;
};

ReferenceRule parse_rule(const std::string& text, int p);
BasisNodePolicy parse_basis(const std::string& text);

/// Resolves the configuration at a refinement level: n 2^level elements and
/// m 2^level partitions.
ResolvedRun resolve(const RunConfig& config, int level = 0);

/// "keep", "uniform" or "uniform:K" (remesh every K-th partition).
RunOptions run_options(const RunConfig& config, const ResolvedRun& run);

} // namespace charfem::tools

#endif // CHARFEM_TOOLS_CONFIG_HPP
