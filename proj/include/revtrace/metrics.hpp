#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "revtrace/edit_script.hpp"
#include "revtrace/embeddings.hpp"
#include "revtrace/errors.hpp"
#include "revtrace/naive_bayes.hpp"
#include "revtrace/ngram_lm.hpp"
#include "revtrace/tokenize.hpp"
#include "revtrace/transport.hpp"

namespace revtrace {

// Word-level edit distance on surface forms (case-sensitive).
inline std::size_t edit_distance(const Sentence& a, const Sentence& b) { return levenshtein(a.tokens, b.tokens); }

// Lowercased in-vocabulary word types with their counts; OOV tokens land in
// `dropped`.
inline std::map<std::string, std::int64_t> nbow_counts(const Sentence& s, const EmbeddingTable& emb,
                                                       std::vector<std::string>& dropped) {
  std::map<std::string, std::int64_t> bag;
  for (const auto& t : s.tokens) {
    if (emb.contains(t))
      ++bag[to_lower(t)];
    else
      dropped.push_back(t);
  }
  return bag;
}

// Word mover's distance: exact optimal transport between the two normalized
// bag-of-words distributions under Euclidean ground cost. Masses are scaled
// to integers (a-side counts times |b|, b-side counts times |a|) so the
// transport is solved exactly and divided back at the end.
inline double wmd(const Sentence& a, const Sentence& b, const EmbeddingTable& emb) {
  std::vector<std::string> dropped;
  const auto bag_a = nbow_counts(a, emb, dropped);
  const auto bag_b = nbow_counts(b, emb, dropped);
  if (bag_a.empty() || bag_b.empty())
    throw CoverageError(std::string("no in-vocabulary words on the ") + (bag_a.empty() ? "first" : "second") +
                            " side",
                        dropped);

  std::int64_t total_a = 0, total_b = 0;
  for (const auto& [w, c] : bag_a) total_a += c;
  for (const auto& [w, c] : bag_b) total_b += c;

  std::vector<std::int64_t> supply, demand;
  std::vector<const std::vector<double>*> va, vb;
  for (const auto& [w, c] : bag_a) {
    supply.push_back(c * total_b);
    va.push_back(emb.find(w));
  }
  for (const auto& [w, c] : bag_b) {
    demand.push_back(c * total_a);
    vb.push_back(emb.find(w));
  }
  std::vector<std::vector<double>> cost(va.size(), std::vector<double>(vb.size()));
  for (std::size_t i = 0; i < va.size(); ++i)
    for (std::size_t j = 0; j < vb.size(); ++j) {
      double acc = 0;
      for (std::size_t d = 0; d < emb.dimension(); ++d) {
        const double diff = (*va[i])[d] - (*vb[j])[d];
        acc += diff * diff;
      }
      cost[i][j] = std::sqrt(acc);
    }
  const auto plan = min_cost_transport(supply, demand, cost);
  return plan.cost / (static_cast<double>(total_a) * static_cast<double>(total_b));
}

// exp of the mean negative log-probability of the lowercased tokens plus EOS.
// When every token has the same probability the common inverse probability is
// returned as is, so a uniform model scores exactly |V|.
inline double perplexity(const Sentence& s, const NGramLM& lm) {
  if (s.empty()) throw EmptyInputError("perplexity of an empty sentence");
  std::vector<std::string> stream = s.tokens;
  stream.emplace_back(kEos);
  std::vector<std::string> history;
  double nll = 0;
  bool constant = true;
  double first_inverse = 0;
  for (const auto& w : stream) {
    const auto t = lm.cond_terms(history, w);
    const double inverse = t.denominator / t.numerator;
    if (history.empty())
      first_inverse = inverse;
    else if (inverse != first_inverse)
      constant = false;
    nll += std::log(t.denominator) - std::log(t.numerator);
    history.push_back(w);
  }
  if (constant) return first_inverse;
  return std::exp(nll / static_cast<double>(stream.size()));
}

inline double class_score(const Sentence& s, const NaiveBayesClassifier& clf, std::string_view target) {
  const std::size_t y = clf.label_index(target);
  return clf.posterior(s)[y];
}

// Shannon entropy in nats; 0 * ln 0 is taken as 0.
inline double entropy(const std::vector<double>& p) {
  double sum = 0;
  for (double v : p) {
    if (!(v >= 0) || !std::isfinite(v)) throw DistributionError("negative or non-finite probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DistributionError("probabilities sum to " + std::to_string(sum));
  double h = 0;
  for (double v : p)
    if (v > 0) h -= v * std::log(v);
  return h;
}

struct SalienceVector {
  std::vector<double> scores;
  std::string target;
};

inline std::string argmax_label(const NaiveBayesClassifier& clf, const Sentence& s) {
  const auto p = clf.posterior(s);
  return clf.labels()[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
}

// Leave-one-out salience: P(target | s) - P(target | s without token i).
inline SalienceVector salience(const Sentence& s, const NaiveBayesClassifier& clf, std::string_view target) {
  if (s.empty()) throw EmptyInputError("salience of an empty sentence");
  const std::size_t y = clf.label_index(target);
  const double full = clf.posterior(s)[y];
  SalienceVector out{{}, std::string(target)};
  out.scores.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    Sentence without = s;
    without.tokens.erase(without.tokens.begin() + static_cast<std::ptrdiff_t>(i));
    out.scores.push_back(full - clf.posterior(without)[y]);
  }
  return out;
}

inline SalienceVector salience(const Sentence& s, const NaiveBayesClassifier& clf) {
  if (s.empty()) throw EmptyInputError("salience of an empty sentence");
  return salience(s, clf, argmax_label(clf, s));
}

}  // namespace revtrace
