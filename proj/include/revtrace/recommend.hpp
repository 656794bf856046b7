#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "revtrace/embeddings.hpp"
#include "revtrace/errors.hpp"
#include "revtrace/ngram_lm.hpp"
#include "revtrace/tokenize.hpp"

namespace revtrace {

enum class RecommendKind { similarity, language_model };

inline std::string_view recommend_kind_name(RecommendKind k) {
  return k == RecommendKind::similarity ? "similarity" : "language_model";
}

struct Recommendation {
  std::string word;
  double score = 0;
  RecommendKind provider = RecommendKind::similarity;
  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

namespace detail {

// Sorted by descending score, ties by word; truncated to k.
inline std::vector<Recommendation> top_k(std::vector<Recommendation> all, std::size_t k) {
  auto better = [](const Recommendation& a, const Recommendation& b) {
    return a.score != b.score ? a.score > b.score : a.word < b.word;
  };
  if (k < all.size()) {
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
    all.resize(k);
  } else {
    std::sort(all.begin(), all.end(), better);
  }
  return all;
}

inline double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

// Nearest words by cosine similarity. Unknown query words get no suggestions.
inline std::vector<Recommendation> similar_words(std::string_view word, std::size_t k, const EmbeddingTable& emb) {
  if (k == 0) return {};
  const auto* q = emb.find(word);
  if (!q) return {};
  const double qn = detail::norm(*q);
  if (qn == 0) return {};
  const std::string self = to_lower(word);

  std::vector<Recommendation> all;
  for (const auto& [w, v] : emb.entries()) {
    if (w == self) continue;
    const double vn = detail::norm(v);
    if (vn == 0) continue;
    double dot = 0;
    for (std::size_t d = 0; d < v.size(); ++d) dot += (*q)[d] * v[d];
    all.push_back({w, std::clamp(dot / (qn * vn), -1.0, 1.0), RecommendKind::similarity});
  }
  return detail::top_k(std::move(all), k);
}

// Candidate replacements for s[position], scored by P(w | left context).
inline std::vector<Recommendation> lm_predict(const Sentence& s, std::size_t position, std::size_t k,
                                              const NGramLM& lm) {
  if (position >= s.size())
    throw PositionError("position " + std::to_string(position) + " outside sentence of length " +
                        std::to_string(s.size()));
  if (k == 0) return {};
  const std::vector<std::string> left(s.tokens.begin(), s.tokens.begin() + static_cast<std::ptrdiff_t>(position));
  const std::string current = to_lower(s[position]);

  std::vector<Recommendation> all;
  for (const auto& w : lm.vocabulary()) {
    if (is_reserved_symbol(w) || w == current) continue;
    all.push_back({w, lm.cond_prob(left, w), RecommendKind::language_model});
  }
  return detail::top_k(std::move(all), k);
}

}  // namespace revtrace
