#include "dbn/pipeline/run_record.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dbn/error.hpp"

namespace dbn::pipeline {

std::string sha256_hex(std::span<const unsigned char> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericError("sha256 digest failed");
  static const char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

void RunRecord::add_artifact(const std::filesystem::path& base, const std::filesystem::path& path) {
  artifacts.emplace_back(std::filesystem::relative(path, base).generic_string(), sha256_file(path));
}

std::string RunRecord::text() const {
  std::string out = "command: " + command + "\n";
  out += std::string("tool_version: ") + tool_version + "\n";
  std::istringstream cfg(config_text);
  std::string line;
  while (std::getline(cfg, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out += "config." + line.substr(0, eq) + ": " + line.substr(eq + 3) + "\n";
  }
  char buf[64];
  for (const auto& [stage, secs] : durations) {
    std::snprintf(buf, sizeof buf, "%.3f", secs);
    out += "duration." + stage + ": " + buf + "\n";
  }
  for (const auto& [path, digest] : artifacts) out += "artifact: " + path + " sha256=" + digest + "\n";
  return out;
}

void RunRecord::write_atomic(const std::filesystem::path& path) const {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw DataError("cannot write " + tmp.string());
    f << text();
    if (!f) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> verify_run_record(const std::filesystem::path& record, const std::filesystem::path& base) {
  std::ifstream f(record, std::ios::binary);
  if (!f) throw DataError("cannot read " + record.string());
  std::vector<std::string> bad;
  std::string line;
  while (std::getline(f, line)) {
    if (line.rfind("artifact: ", 0) != 0) continue;
    const auto sep = line.rfind(" sha256=");
    if (sep == std::string::npos) throw DataError("malformed artifact line in " + record.string());
    const std::string rel = line.substr(10, sep - 10);
    const std::string digest = line.substr(sep + 8);
    const auto full = base / rel;
    if (!std::filesystem::exists(full) || sha256_file(full) != digest) bad.push_back(rel);
  }
  return bad;
}

}  // namespace dbn::pipeline
