#include "manifest.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "mnlpm/network.hpp"

namespace mnlpm::cli {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 initialization failed");
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

RunManifest::RunManifest(std::string command, nlohmann::json config, fs::path path)
    : path_(std::move(path)) {
  doc_ = {{"command", std::move(command)},
          {"tool_version", kToolVersion},
          {"config", std::move(config)},
          {"inputs", nlohmann::json::array()},
          {"outputs", nlohmann::json::array()}};
  if (doc_["config"].contains("seed")) doc_["seed"] = doc_["config"]["seed"];
}

void RunManifest::add_input(const fs::path& input) {
  doc_["inputs"].push_back({{"path", input.string()}, {"sha256", sha256_file(input)}});
}

void RunManifest::add_output(const fs::path& output) { doc_["outputs"].push_back(output.string()); }

void RunManifest::start() {
  doc_["started"] = utc_now();
  doc_["status"] = "running";
  write();
}

void RunManifest::finish(int exit_code, const std::string& message) {
  doc_["finished"] = utc_now();
  doc_["status"] = exit_code == 0 ? "ok" : "failed";
  doc_["exit_code"] = exit_code;
  if (!message.empty()) doc_["message"] = message;
  write();
}

void RunManifest::write() const {
  if (path_.empty()) return;
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  std::ofstream out(path_);
  if (!out) throw DataError("cannot write manifest " + path_.string());
  out << doc_.dump(2) << '\n';
}

}  // namespace mnlpm::cli
