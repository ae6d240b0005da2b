#include "vdbench/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include "json.hpp"
#include "vdbench/error.hpp"
#include "vdbench/hashing.hpp"

namespace vdbench {

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void digest(const std::filesystem::path& path, std::vector<FileDigest>& out) {
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back({f.string(), sha256_file(f.string())});
    return;
  }
  out.push_back({path.string(), sha256_file(path.string())});
}

nlohmann::ordered_json digests(const std::vector<FileDigest>& files) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& f : files) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return arr;
}

}  // namespace

RunManifest::RunManifest(std::string subcommand, std::vector<std::string> argv)
    : subcommand_(std::move(subcommand)), argv_(std::move(argv)), started_(utc_now()) {}

void RunManifest::add_input(const std::filesystem::path& path) { digest(path, inputs_); }

void RunManifest::add_output(const std::filesystem::path& path) { digest(path, outputs_); }

void RunManifest::write(const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["tool"] = "vdbench";
  doc["version"] = kVersion;
  doc["subcommand"] = subcommand_;
  doc["argv"] = argv_;
  doc["seeds"] = seeds_;
  doc["inputs"] = digests(inputs_);
  doc["outputs"] = digests(outputs_);
  doc["started"] = started_;
  doc["finished"] = utc_now();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace vdbench
