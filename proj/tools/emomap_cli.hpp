#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "emomap/error.hpp"

namespace emomap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitUsage = 64;

inline constexpr const char* kTasks[] = {"monolingual", "crosslingual", "ablation", "shr-normalize",
                                         "build-lexicon"};

int exit_code(ErrorKind kind);

struct ManifestArgs {
  std::filesystem::path manifest;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  int jobs = 1;
};

/// Writes the diagnostics report to `out`; 0 when clean.
int cmd_validate(const ManifestArgs& args, std::ostream& out, std::ostream& err);

/// Writes the task's reports plus run_metadata.json into the output directory.
int cmd_run(const ManifestArgs& args, const std::string& task, std::ostream& out, std::ostream& err);

/// Full command line, argv[0] included. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace emomap::cli
