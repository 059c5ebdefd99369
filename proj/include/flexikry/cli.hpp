#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace flexikry::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command; `args` excludes the program name, e.g.
/// {"deblur-wavelet", "--size", "32", "--out", "results"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads a `key = value` file. Blank lines and lines starting with '#' are
/// ignored; keys are flag names without the leading dashes.
/// Throws std::runtime_error if the file cannot be read and
/// std::invalid_argument on a malformed line.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Inserts `--key=value` for every config entry whose flag is not already
/// present in `args`; command-line flags therefore win over the file.
std::vector<std::string> merge_config(std::vector<std::string> args,
                                      const std::map<std::string, std::string>& config);

}  // namespace flexikry::cli
