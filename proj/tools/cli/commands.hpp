#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace cosymlab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's "seed"
};

/// demo-product, verify-cosym, tischler, obstruct, return-map.
const std::vector<std::string>& command_names();

/// Runs one command and writes report.json (plus crossings.csv and plot.svg
/// where applicable) into opts.out_dir. Returns the exit code.
int run_command(const std::string& command, const json& config, const CommandOptions& opts, std::ostream& err);

/// The report without its "timing" member, for determinism comparisons.
json strip_timing(json report);

}  // namespace cosymlab::cli
