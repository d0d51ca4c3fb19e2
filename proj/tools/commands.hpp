#ifndef CHARFEM_TOOLS_COMMANDS_HPP
#define CHARFEM_TOOLS_COMMANDS_HPP

#include "config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace charfem::tools {

inline constexpr int exit_ok = 0;
inline constexpr int exit_check_failed = 1;
inline constexpr int exit_solver_failure = 2;
inline constexpr int exit_config_error = 3;

/// Writes `content` to a temporary file beside `path` and renames it into place.
void write_atomically(const std::filesystem::path& path, const std::string& content);

/// solution.csv, step_reports.csv, error_report.csv. On a solver failure only
/// failure_report.csv is written.
int run_single(const RunConfig& config, std::ostream& log);

/// convergence.csv plus level_<l>_step_reports.csv for every level.
int run_convergence(const RunConfig& config, std::ostream& log);

/// mesh_trajectories.csv: partition,node,t,x at 20 samples per partition.
int inspect_mesh(const RunConfig& config, std::ostream& log);

/// Seeded randomized property checks; exit 1 when one fails.
int run_checks(const RunConfig& config, std::ostream& log);

} // namespace charfem::tools

#endif // CHARFEM_TOOLS_COMMANDS_HPP
