#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace topdog::cli {

// Exit codes: 0 success, 1 domain error, 2 usage or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Everything needed to repeat a run: the command line as given, the resolved
// parameters, the tool version and a SHA-256 of every input file.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256

  void add_input(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& path) const;
};

std::string sha256_file(const std::filesystem::path& path);

// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace topdog::cli
