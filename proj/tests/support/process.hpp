#pragma once

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

namespace testproc {

struct Output {
  int code = -1;
  std::string out;
};

/// Runs a shell command, capturing stdout.
inline Output run(const std::string& cmd) {
  Output r;
  std::FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = ::pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

inline std::string cli(const std::string& args) { return std::string(HS_CLI_PATH) + " " + args; }

inline std::string tmp(const std::string& name) { return std::string(HS_TEST_TMP) + "/" + name; }

}  // namespace testproc
