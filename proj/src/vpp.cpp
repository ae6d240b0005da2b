#include "vdbench/vpp.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "vdbench/clex.hpp"
#include "vdbench/error.hpp"
#include "vdbench/random.hpp"

namespace vdbench {

std::vector<std::string> find_functions(std::string_view source, std::string_view name) {
  std::vector<std::string> out;
  clex::TokenStream tokens;
  std::vector<clex::FunctionShape> shapes;
  try {
    tokens = clex::tokenize(source);
    shapes = clex::parse_function_shapes(tokens);
  } catch (const Error&) {
    return out;
  }
  for (const auto& s : shapes) {
    if (tokens[s.name].text != name) continue;
    std::string text;
    for (std::size_t i = s.decl_begin; i <= s.body_end; ++i) text += tokens[i].text;
    out.push_back(std::move(text));
  }
  return out;
}

namespace {

bool is_c_source(const std::string& path) {
  for (std::string_view ext : {".c", ".h", ".cc", ".cpp", ".cxx", ".hpp", ".hh"}) {
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0) return true;
  }
  return false;
}

PatchLookup match_in_files(const std::map<std::string, std::string>& files, const std::string& name) {
  PatchLookup r;
  std::vector<std::string> where;
  std::vector<std::string> found;
  for (const auto& [path, content] : files) {
    if (!is_c_source(path)) continue;
    for (std::string& f : find_functions(content, name)) {
      found.push_back(std::move(f));
      where.push_back(path);
    }
  }
  if (found.empty()) {
    r.status = PatchLookup::Status::kNotFound;
    r.detail = "no definition of " + name + " in " + std::to_string(files.size()) + " changed file(s)";
  } else if (found.size() > 1) {
    r.status = PatchLookup::Status::kAmbiguous;
    std::ostringstream d;
    d << found.size() << " definitions of " << name << " in";
    for (const auto& w : where) d << ' ' << w;
    r.detail = d.str();
  } else {
    r.status = PatchLookup::Status::kFound;
    r.code = std::move(found.front());
    r.detail = where.front();
  }
  return r;
}

struct CommandResult {
  int status = -1;
  std::string out;
};

// Runs argv directly (no shell) and captures stdout; stderr is discarded.
CommandResult run_command(const std::vector<std::string>& argv) {
  int fds[2];
  if (pipe(fds) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
  const pid_t pid = fork();
  if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    const int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(fds[1]);
  CommandResult r;
  char buf[8192];
  while (true) {
    const ssize_t n = read(fds[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    r.out.append(buf, static_cast<std::size_t>(n));
  }
  close(fds[0]);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

bool plausible_revision(const std::string& commit) {
  return !commit.empty() && commit.front() != '-' &&
         std::all_of(commit.begin(), commit.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

}  // namespace

void FixturePatchSource::add_commit(const std::string& commit, std::map<std::string, std::string> files) {
  commits_[commit] = std::move(files);
}

PatchLookup FixturePatchSource::lookup(const std::string& commit, const std::string& name) {
  auto it = commits_.find(commit);
  if (it == commits_.end()) return PatchLookup{PatchLookup::Status::kNoCommit, "", "unknown commit " + commit};
  return match_in_files(it->second, name);
}

GitPatchSource::GitPatchSource(std::filesystem::path repo) : repo_(std::move(repo)) {
  const auto r = run_command({"git", "-C", repo_.string(), "rev-parse", "--is-inside-work-tree"});
  if (r.status != 0) throw Error(repo_.string() + " is not a git work tree");
}

PatchLookup GitPatchSource::lookup(const std::string& commit, const std::string& name) {
  const std::string repo = repo_.string();
  if (!plausible_revision(commit) ||
      run_command({"git", "-C", repo, "rev-parse", "--verify", "--quiet", commit + "^{commit}"}).status != 0) {
    return PatchLookup{PatchLookup::Status::kNoCommit, "", "unknown commit " + commit};
  }
  const auto listing = run_command({"git", "-C", repo, "show", "--pretty=format:", "--name-only", commit});
  if (listing.status != 0) return PatchLookup{PatchLookup::Status::kNoCommit, "", "cannot list " + commit};
  std::map<std::string, std::string> files;
  std::istringstream lines(listing.out);
  for (std::string path; std::getline(lines, path);) {
    if (path.empty() || !is_c_source(path)) continue;
    const auto content = run_command({"git", "-C", repo, "show", commit + ":" + path});
    if (content.status == 0) files.emplace(path, content.out);  // deleted files have no post-image
  }
  return match_in_files(files, name);
}

PairResult build_pairs(std::span<const CodeSample> vulnerable, PatchSource& source) {
  PairResult out;
  for (const CodeSample& v : vulnerable) {
    if (v.label != 1) throw DataError("sample '" + v.id + "' is not labelled vulnerable");
  }
  for (const CodeSample& v : vulnerable) {
    const std::string commit = v.commit_id.value_or("");
    if (commit.empty()) {
      out.misses.push_back({v.id, commit, "no-commit", "sample has no commit_id"});
      continue;
    }
    std::string name;
    try {
      const auto tokens = clex::tokenize(v.code);
      name = tokens[clex::parse_function_shape(tokens).name].text;
    } catch (const Error& e) {
      out.misses.push_back({v.id, commit, "not-found", std::string("vulnerable function has no name: ") + e.what()});
      continue;
    }
    PatchLookup found = source.lookup(commit, name);
    switch (found.status) {
      case PatchLookup::Status::kNoCommit:
        out.misses.push_back({v.id, commit, "no-commit", found.detail});
        continue;
      case PatchLookup::Status::kNotFound:
        out.misses.push_back({v.id, commit, "not-found", found.detail});
        continue;
      case PatchLookup::Status::kAmbiguous:
        out.misses.push_back({v.id, commit, "ambiguous", found.detail});
        continue;
      case PatchLookup::Status::kFound:
        break;
    }
    if (found.code == v.code) {
      out.misses.push_back({v.id, commit, "identical", "post-commit function is byte-identical"});
      continue;
    }
    CodeSample vuln = v;
    CodeSample patch;
    patch.id = v.id + "#patch";
    patch.code = std::move(found.code);
    patch.label = 0;
    patch.project = v.project;
    patch.commit_id = v.commit_id;
    patch.pair_id = vuln.id;
    vuln.pair_id = patch.id;
    out.samples.push_back(std::move(vuln));
    out.samples.push_back(std::move(patch));
  }
  return out;
}

void write_misses(std::span<const PairMiss> misses, std::ostream& out) {
  for (const PairMiss& m : misses) out << m.id << '\t' << m.reason << '\t' << m.commit << '\t' << m.detail << '\n';
}

DatasetSplit derive_split(const DatasetSplit& source, std::span<const CodeSample> pairs) {
  std::unordered_map<std::string, std::vector<Part>> where;
  for (Part p : kAllParts) {
    for (const CodeSample& s : source[p]) where[s.id].push_back(p);
  }
  std::unordered_map<std::string, const CodeSample*> by_id;
  for (const CodeSample& s : pairs) {
    if (!by_id.emplace(s.id, &s).second) throw DataError("duplicate id '" + s.id + "' in pairs");
  }
  DatasetSplit out;
  for (const CodeSample& v : pairs) {
    if (v.label != 1) continue;
    if (!v.pair_id) throw DataError("vulnerable sample '" + v.id + "' has no pair_id");
    auto partner = by_id.find(*v.pair_id);
    if (partner == by_id.end()) throw DataError("pair_id of '" + v.id + "' does not resolve");
    auto it = where.find(v.id);
    if (it == where.end()) throw DataError("vulnerable sample '" + v.id + "' is not in the source split");
    if (it->second.size() != 1) throw DataError("vulnerable sample '" + v.id + "' is in several source parts");
    Dataset& part = out[it->second.front()];
    part.push_back(v);
    part.push_back(*partner->second);
  }
  return out;
}

std::vector<DiffLine> line_diff(std::string_view before, std::string_view after) {
  auto split = [](std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      lines.emplace_back(text.substr(pos, nl - pos));
      pos = nl + 1;
    }
    return lines;
  };
  const auto a = split(before);
  const auto b = split(after);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  std::vector<DiffLine> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      out.push_back({' ', a[i]});
      ++i;
      ++j;
    } else if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j])) {
      out.push_back({'+', b[j++]});
    } else {
      out.push_back({'-', a[i++]});
    }
  }
  return out;
}

std::string spotcheck_sample(std::span<const CodeSample> pairs, std::size_t n, std::uint64_t seed) {
  std::unordered_map<std::string, const CodeSample*> by_id;
  for (const CodeSample& s : pairs) by_id.emplace(s.id, &s);
  std::vector<std::pair<const CodeSample*, const CodeSample*>> all;
  for (const CodeSample& v : pairs) {
    if (v.label != 1 || !v.pair_id) continue;
    auto it = by_id.find(*v.pair_id);
    if (it != by_id.end()) all.emplace_back(&v, it->second);
  }
  if (n > all.size()) {
    throw DataError("asked for " + std::to_string(n) + " pairs but only " + std::to_string(all.size()) + " exist");
  }
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::derive(seed, "", "spotcheck");
  rng.shuffle(std::span<std::size_t>(order));

  std::ostringstream out;
  out << "# Vulnerability/patch spot check\n\n" << n << " of " << all.size() << " pairs, seed " << seed << ".\n";
  for (std::size_t k = 0; k < n; ++k) {
    const auto& [vuln, patch] = all[order[k]];
    out << "\n## " << k + 1 << ". " << vuln->id << " / " << patch->id << "\n\n";
    if (vuln->commit_id) out << "Commit: " << *vuln->commit_id << "\n\n";
    out << "- [ ] patch fixes the vulnerability\n\n```diff\n";
    for (const DiffLine& line : line_diff(vuln->code, patch->code)) out << line.op << line.text << '\n';
    out << "```\n";
  }
  return out.str();
}

}  // namespace vdbench
