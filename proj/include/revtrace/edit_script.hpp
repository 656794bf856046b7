#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "revtrace/edit_ops.hpp"
#include "revtrace/tokenize.hpp"

namespace revtrace {

// Unit-cost Levenshtein distance over any two random-access sequences.
template <class Seq>
std::size_t levenshtein(const Seq& a, const Seq& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

// Minimal Insert/Delete/Substitute script turning `a` into `b` when applied
// left to right. Built from a suffix-distance table so each decision is taken
// at the leftmost unresolved position; ties prefer Substitute, then Delete,
// then Insert.
inline std::vector<EditOp> diff(const Sentence& a, const Sentence& b) {
  const std::size_t n = a.size(), m = b.size();
  // rest[i][j] = distance(a[i..], b[j..])
  std::vector<std::vector<std::size_t>> rest(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) rest[i][m] = n - i;
  for (std::size_t j = 0; j <= m; ++j) rest[n][j] = m - j;
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      const std::size_t sub = rest[i + 1][j + 1] + (a[i] == b[j] ? 0 : 1);
      rest[i][j] = std::min({sub, rest[i + 1][j] + 1, rest[i][j + 1] + 1});
    }
  }

  std::vector<EditOp> script;
  script.reserve(rest[0][0]);
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const std::size_t here = rest[i][j];
    if (i < n && j < m && a[i] == b[j] && here == rest[i + 1][j + 1]) {
      ++i, ++j;
    } else if (i < n && j < m && here == rest[i + 1][j + 1] + 1) {
      script.push_back(ops::substitute(j, b[j]));
      ++i, ++j;
    } else if (i < n && here == rest[i + 1][j] + 1) {
      script.push_back(ops::erase(j));
      ++i;
    } else {
      script.push_back(ops::insert(j, b[j]));
      ++j;
    }
  }
  return script;
}

}  // namespace revtrace
