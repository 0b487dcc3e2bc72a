#pragma once

// Independent reference implementations used only by the test suites.

#include <algorithm>
#include <clocale>
#include <cstdint>
#include <cwchar>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agribot::oracle {

// UTF-8 -> code points through the C library's multibyte conversion.
inline std::u32string code_points(std::string_view s) {
  static const bool locale_ok = std::setlocale(LC_CTYPE, "C.UTF-8") != nullptr ||
                                std::setlocale(LC_CTYPE, "C.utf8") != nullptr;
  if (!locale_ok) throw std::runtime_error("no UTF-8 locale");
  std::u32string out;
  std::mbstate_t state{};
  const char* p = s.data();
  std::size_t left = s.size();
  while (left > 0) {
    wchar_t wc = 0;
    const std::size_t n = std::mbrtowc(&wc, p, left, &state);
    if (n == static_cast<std::size_t>(-1) || n == static_cast<std::size_t>(-2)) {
      throw std::runtime_error("invalid UTF-8 in oracle input");
    }
    out.push_back(static_cast<char32_t>(wc));
    const std::size_t used = n == 0 ? 1 : n;
    p += used;
    left -= used;
  }
  return out;
}

// Straight from the recursive definition; exponential, keep inputs short.
inline std::size_t recursive_levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t cost = a.back() == b.back() ? 0 : 1;
  return std::min({recursive_levenshtein(a.substr(0, a.size() - 1), b) + 1,
                   recursive_levenshtein(a, b.substr(0, b.size() - 1)) + 1,
                   recursive_levenshtein(a.substr(0, a.size() - 1), b.substr(0, b.size() - 1)) +
                       cost});
}

// Full (|a|+1) x (|b|+1) Wagner-Fischer table.
inline std::size_t matrix_levenshtein(std::u32string_view a, std::u32string_view b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

inline std::size_t matrix_levenshtein(std::string_view a, std::string_view b) {
  return matrix_levenshtein(code_points(a), code_points(b));
}

}  // namespace agribot::oracle
