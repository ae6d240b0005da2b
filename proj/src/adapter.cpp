#include "vdbench/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <thread>

#include "json.hpp"
#include "vdbench/error.hpp"
#include "vdbench/hashing.hpp"

namespace vdbench {

using json = nlohmann::json;

AdapterProcess::AdapterProcess(const std::string& command) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) throw ProtocolError(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  signal(SIGPIPE, SIG_IGN);
}

AdapterProcess::~AdapterProcess() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 100; ++i) {
      if (waitpid(pid_, &status, WNOHANG) == pid_) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, &status, 0);
  }
}

void AdapterProcess::send_line(const std::string& line) {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("adapter closed its input: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string AdapterProcess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw ProtocolError("adapter timed out after " + std::to_string(timeout.count()) + " ms");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("read: ") + std::strerror(errno));
    }
    if (n == 0) throw ProtocolError("adapter exited before replying");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

namespace {

json parse_reply(const std::string& line, const std::string& context) {
  json reply;
  try {
    reply = json::parse(line);
  } catch (const json::parse_error&) {
    throw ProtocolError(context + ": reply is not JSON: " + line);
  }
  if (!reply.is_object()) throw ProtocolError(context + ": reply is not an object: " + line);
  if (reply.contains("status") && reply["status"] == "error") {
    throw ProtocolError(context + ": adapter error: " + reply.value("msg", std::string("(no message)")));
  }
  return reply;
}

}  // namespace

ExternalModel::ExternalModel(std::unique_ptr<AdapterProcess> process, AdapterOptions options)
    : process_(std::move(process)), options_(std::move(options)) {}

std::vector<double> ExternalModel::predict(std::span<const CodeSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const CodeSample& s : samples) {
    json request = {{"cmd", "predict"}, {"id", s.id}, {"func", s.code}};
    process_->send_line(request.dump(-1, ' ', false, json::error_handler_t::replace));
    const std::string context = "record '" + s.id + "'";
    const json reply = parse_reply(process_->read_line(options_.timeout), context);
    if (!reply.contains("id") || !reply["id"].is_string() || reply["id"].get<std::string>() != s.id) {
      throw ProtocolError(context + ": reply id does not match: " + reply.dump());
    }
    if (!reply.contains("p") || !reply["p"].is_number()) {
      throw ProtocolError(context + ": non-numeric probability: " + reply.dump());
    }
    const double p = reply["p"].get<double>();
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ProtocolError(context + ": probability " + reply["p"].dump() + " outside [0,1]");
    }
    out.push_back(p);
  }
  return out;
}

std::unique_ptr<ExternalModel> adapter_train(const AdapterOptions& options, std::span<const CodeSample> train,
                                             std::uint64_t seed) {
  const std::string data = to_jsonl(train);
  const std::string hash = sha256_hex(data);
  const std::filesystem::path dir =
      options.work_dir.empty() ? std::filesystem::temp_directory_path() : options.work_dir;
  std::filesystem::create_directories(dir);
  const std::filesystem::path staged = dir / ("vdbench-train-" + hash.substr(0, 16) + ".jsonl");
  save_jsonl(train, staged);

  auto process = std::make_unique<AdapterProcess>(options.command);
  json request = {{"cmd", "train"}, {"data_path", staged.string()}, {"seed", seed}};
  process->send_line(request.dump());
  const json reply = parse_reply(process->read_line(options.timeout), "train");
  std::error_code ec;
  std::filesystem::remove(staged, ec);
  if (reply.value("status", std::string()) != "ready") {
    throw ProtocolError("train: expected {\"status\":\"ready\"}, got " + reply.dump());
  }
  auto model = std::make_unique<ExternalModel>(std::move(process), options);
  model->set_provenance(Provenance{"adapter(" + options.command + ")", hash, "", seed, 0});
  return model;
}

std::unique_ptr<ModelHandle> AdapterTechnique::train(std::span<const CodeSample> train, std::uint64_t seed,
                                                     std::string_view tag) {
  auto model = adapter_train(options_, train, seed);
  Provenance p = model->provenance();
  p.dataset_tag = std::string(tag);
  model->set_provenance(std::move(p));
  return model;
}

}  // namespace vdbench
