#include <openssl/evp.h>

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "eisrank/harness.hpp"

namespace eisrank::harness {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw InternalConsistencyError("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

Cache::Cache(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

std::optional<nlohmann::json> Cache::get(const std::string& rel) const {
  const fs::path path = root_ / rel;
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    auto j = nlohmann::json::parse(ss.str());
    const auto& payload = j.at("payload");
    if (j.at("digest").get<std::string>() == sha256_hex(payload.dump())) return payload;
  } catch (const nlohmann::json::exception&) {
  }
  ++warnings_;
  std::cerr << "warning: cache file " << path.string() << " failed its digest check; recomputing\n";
  return std::nullopt;
}

void Cache::put(const std::string& rel, const nlohmann::json& payload) const {
  static std::atomic<unsigned long> counter{0};
  const fs::path path = root_ / rel;
  fs::create_directories(path.parent_path());
  const nlohmann::json file = {{"digest", sha256_hex(payload.dump())}, {"payload", payload}};
  std::ostringstream tag;
  tag << ".tmp." << ::getpid() << '.' << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.'
      << counter++;
  const fs::path tmp = path.string() + tag.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache file " + tmp.string());
    out << file.dump();
    if (!out.flush()) throw Error("cannot write cache file " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace eisrank::harness
