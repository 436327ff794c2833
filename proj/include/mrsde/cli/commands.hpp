#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrsde/cli/config.hpp"

namespace mrsde::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct RunContext {
  std::filesystem::path out_dir;
  int workers = 1;
};

void cmd_simulate(const RunConfig& config, const RunContext& ctx);
void cmd_skeleton(const RunConfig& config, const RunContext& ctx);
void cmd_rate(const RunConfig& config, const RunContext& ctx);
void cmd_malliavin(const RunConfig& config, const RunContext& ctx);
void cmd_ldp(const RunConfig& config, const RunContext& ctx);
void cmd_converge(const RunConfig& config, const RunContext& ctx);

/// Full command line without the program name, e.g.
/// {"simulate", "--config", "run.json", "--out", "out"}. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mrsde::cli
