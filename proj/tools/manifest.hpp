#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace mnlpm::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Record of one invocation, written when the run starts and rewritten when
/// it ends. Its "config" object can be fed back through --config.
class RunManifest {
 public:
  RunManifest(std::string command, nlohmann::json config, std::filesystem::path path);

  void add_input(const std::filesystem::path& input);
  void add_output(const std::filesystem::path& output);
  void start();
  void finish(int exit_code, const std::string& message = {});

 private:
  void write() const;

  std::filesystem::path path_;
  nlohmann::json doc_;
};

}  // namespace mnlpm::cli
