#pragma once

// External detectors run as child processes speaking line-delimited JSON on
// stdin/stdout:
//
//   -> {"cmd":"train","data_path":"<jsonl>","seed":S}     <- {"status":"ready"}
//   -> {"cmd":"predict","id":"<id>","func":"<code>"}       <- {"id":"<id>","p":0.73}
//
// Any {"status":"error","msg":...} reply, a malformed reply, a probability
// outside [0,1] or a timeout raises ProtocolError.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>

#include "vdbench/model.hpp"

namespace vdbench {

struct AdapterOptions {
  std::string command;  // run through /bin/sh -c
  std::chrono::milliseconds timeout{60'000};  // per reply
  std::filesystem::path work_dir;  // where training files are staged; temp dir when empty
};

/// Owns one child process for the lifetime of the handle.
class AdapterProcess {
 public:
  explicit AdapterProcess(const std::string& command);
  ~AdapterProcess();
  AdapterProcess(const AdapterProcess&) = delete;
  AdapterProcess& operator=(const AdapterProcess&) = delete;

  void send_line(const std::string& line);
  /// Next line without the newline; throws ProtocolError on timeout or EOF.
  std::string read_line(std::chrono::milliseconds timeout);

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

class ExternalModel final : public ModelHandle {
 public:
  ExternalModel(std::unique_ptr<AdapterProcess> process, AdapterOptions options);

  std::string_view kind() const override { return "external"; }
  std::vector<double> predict(std::span<const CodeSample> samples) override;

 private:
  std::unique_ptr<AdapterProcess> process_;
  AdapterOptions options_;
};

/// Starts the adapter, stages `train` as JSONL and blocks until it reports ready.
std::unique_ptr<ExternalModel> adapter_train(const AdapterOptions& options, std::span<const CodeSample> train,
                                             std::uint64_t seed);

class AdapterTechnique final : public Technique {
 public:
  explicit AdapterTechnique(AdapterOptions options) : options_(std::move(options)) {}
  std::string describe() const override { return "adapter(" + options_.command + ")"; }
  std::unique_ptr<ModelHandle> train(std::span<const CodeSample> train, std::uint64_t seed,
                                     std::string_view tag) override;

 private:
  AdapterOptions options_;
};

}  // namespace vdbench
