#pragma once

// Reproducibility record written beside every CLI run's outputs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vdbench {

inline constexpr std::string_view kVersion = "0.1.0";

struct FileDigest {
  std::string path;
  std::string sha256;
};

class RunManifest {
 public:
  RunManifest(std::string subcommand, std::vector<std::string> argv);

  void set_seed(const std::string& name, std::uint64_t seed) { seeds_[name] = seed; }
  /// Directories are expanded to their regular files, sorted by path.
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  /// Stamps the finish time and writes JSON to `path`.
  void write(const std::filesystem::path& path);

  const std::vector<FileDigest>& inputs() const noexcept { return inputs_; }
  const std::vector<FileDigest>& outputs() const noexcept { return outputs_; }

 private:
  std::string subcommand_;
  std::vector<std::string> argv_;
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<FileDigest> inputs_;
  std::vector<FileDigest> outputs_;
  std::string started_;
};

}  // namespace vdbench
