#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace agribot::test {

struct Outcome {
  int status = -1;  // exit code, or -1 when the process did not exit normally
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') {
      q += "'\\''";
    } else {
      q += c;
    }
  }
  return q + "'";
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Runs `argv` through /bin/sh with stdout and stderr captured in `scratch`.
inline Outcome run(const std::vector<std::string>& argv, const std::filesystem::path& scratch) {
  std::string cmd;
  for (const auto& a : argv) cmd += shell_quote(a) + " ";
  const auto out = scratch / "stdout.txt";
  const auto err = scratch / "stderr.txt";
  cmd += ">" + shell_quote(out.string()) + " 2>" + shell_quote(err.string()) + " </dev/null";
  const int raw = std::system(cmd.c_str());
  Outcome o;
  o.status = (raw != -1 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

}  // namespace agribot::test
