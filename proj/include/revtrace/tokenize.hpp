#pragma once

#include <algorithm>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace revtrace {

struct Sentence {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

inline bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Characters split off the edges of a whitespace-delimited chunk.
inline bool is_detached_punct(char c) noexcept {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';':
    case ':': case '\'': case '"': case '(': case ')':
      return true;
    default:
      return false;
  }
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
  });
  return out;
}

inline Sentence tokenize(std::string_view text) {
  Sentence out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j == i) break;

    std::string_view chunk = text.substr(i, j - i);
    std::size_t lead = 0;
    while (lead < chunk.size() && is_detached_punct(chunk[lead])) ++lead;
    std::size_t trail = 0;
    while (trail < chunk.size() - lead && is_detached_punct(chunk[chunk.size() - 1 - trail])) ++trail;

    for (std::size_t k = 0; k < lead; ++k) out.tokens.emplace_back(1, chunk[k]);
    if (lead + trail < chunk.size())
      out.tokens.emplace_back(chunk.substr(lead, chunk.size() - lead - trail));
    for (std::size_t k = chunk.size() - trail; k < chunk.size(); ++k)
      out.tokens.emplace_back(1, chunk[k]);
    i = j;
  }
  return out;
}

inline std::string detokenize(const Sentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (i) out += ' ';
    out += s.tokens[i];
  }
  return out;
}

// A token that tokenize() would reproduce unchanged.
inline bool is_atomic_token(std::string_view t) {
  if (t.empty()) return false;
  if (std::any_of(t.begin(), t.end(), is_space)) return false;
  if (t.size() == 1) return true;
  return !is_detached_punct(t.front()) && !is_detached_punct(t.back());
}

inline Sentence lowercased(const Sentence& s) {
  Sentence out;
  out.tokens.reserve(s.size());
  for (const auto& t : s.tokens) out.tokens.push_back(to_lower(t));
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace detail

}  // namespace revtrace
