#pragma once

// Throwaway git repository with five fixing commits, for pair-building tests.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdbench/corpus.hpp"

namespace vdbench::fixtures {

struct GitFixture {
  std::filesystem::path repo;
  std::vector<std::string> commits;  // the five fixing commits, in order
  Dataset vulnerable;                // one sample per fix, then the planted one
  std::string planted_id;
};

inline std::string run_capture(const std::string& command) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed: " + command);
  char buf[256];
  while (fgets(buf, sizeof buf, pipe)) out += buf;
  if (pclose(pipe) != 0) throw std::runtime_error("command failed: " + command);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out;
}

inline GitFixture make_git_fixture(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string git = "git -C '" + dir.string() + "' -c user.name=t -c user.email=t@example.com ";
  run_capture(git + "init -q");

  struct Fn {
    std::string file, name, before, after;
  };
  const std::vector<Fn> fns{
      {"buf.c", "copy_in", "int copy_in(char *d, const char *s, int n)\n{\n    memcpy(d, s, n);\n    return n;\n}\n",
       "int copy_in(char *d, const char *s, int n)\n{\n    if (n > 64)\n        return -1;\n    memcpy(d, s, n);\n    return n;\n}\n"},
      {"buf.c", "name_dup", "char *name_dup(const char *s)\n{\n    char *d = malloc(8);\n    strcpy(d, s);\n    return d;\n}\n",
       "char *name_dup(const char *s)\n{\n    char *d = malloc(strlen(s) + 1);\n    strcpy(d, s);\n    return d;\n}\n"},
      {"net.c", "read_len", "static int read_len(const unsigned char *p)\n{\n    return p[0] << 8 | p[1];\n}\n",
       "static int read_len(const unsigned char *p)\n{\n    if (!p)\n        return 0;\n    return p[0] << 8 | p[1];\n}\n"},
      {"net.c", "drop_conn", "void drop_conn(struct conn *c)\n{\n    free(c->buf);\n    free(c->buf);\n}\n",
       "void drop_conn(struct conn *c)\n{\n    free(c->buf);\n    c->buf = NULL;\n}\n"},
      {"io/fmt.c", "log_msg", "void log_msg(const char *m)\n{\n    printf(m);\n}\n",
       "void log_msg(const char *m)\n{\n    printf(\"%s\", m);\n}\n"},
  };

  auto write_files = [&](std::size_t fixed) {
    std::map<std::string, std::string> files;
    for (std::size_t i = 0; i < fns.size(); ++i) files[fns[i].file] += (i < fixed ? fns[i].after : fns[i].before) + "\n";
    for (const auto& [path, text] : files) {
      fs::create_directories((dir / path).parent_path());
      std::ofstream(dir / path) << "#include <string.h>\n\n" << text;
    }
  };
  write_files(0);
  std::ofstream(dir / "README") << "fixture\n";
  run_capture(git + "add -A");
  run_capture(git + "commit -q -m initial");

  GitFixture fx;
  fx.repo = dir;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    write_files(i + 1);
    run_capture(git + "commit -q -am 'fix " + fns[i].name + "'");
    fx.commits.push_back(run_capture(git + "rev-parse HEAD"));
    fx.vulnerable.push_back({"vuln-" + std::to_string(i), fns[i].before.substr(0, fns[i].before.size() - 1), 1,
                             "fixture", fx.commits.back(), std::nullopt});
  }
  fx.planted_id = "vuln-planted";
  fx.vulnerable.push_back(
      {fx.planted_id, fns[0].before, 1, "fixture", std::string("0123456789abcdef0123456789abcdef01234567"), std::nullopt});
  return fx;
}

}  // namespace vdbench::fixtures
