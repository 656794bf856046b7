#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revtrace/errors.hpp"
#include "revtrace/ngram_lm.hpp"
#include "revtrace/tokenize.hpp"

namespace revtrace {

struct LabeledDoc {
  std::string label;
  std::string text;
};

using LabeledCorpus = std::vector<LabeledDoc>;

// One record per line: "label<TAB>text". Blank lines are skipped.
inline LabeledCorpus read_labeled_corpus(std::istream& in) {
  LabeledCorpus out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw FormatError("line " + std::to_string(lineno) + ": expected label<TAB>text");
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

// Multinomial naive Bayes over lowercased unigrams with add-beta smoothing.
// Vocabulary is the training types plus UNK.
class NaiveBayesClassifier {
 public:
  NaiveBayesClassifier(std::vector<std::string> labels, double beta) : labels_(std::move(labels)), beta_(beta) {
    if (labels_.size() < 2) throw TrainError("classifier needs at least two labels");
    if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size())
      throw TrainError("duplicate label");
    if (!(beta > 0)) throw TrainError("smoothing beta must be positive");
    doc_counts_.assign(labels_.size(), 0);
    token_totals_.assign(labels_.size(), 0);
    word_counts_.resize(labels_.size());
    vocab_.insert(std::string(kUnk));
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  double beta() const noexcept { return beta_; }
  const std::set<std::string>& vocabulary() const noexcept { return vocab_; }

  std::size_t label_index(std::string_view label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw LabelError("unknown label '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  std::string symbol(std::string_view word) const {
    std::string w = to_lower(word);
    return vocab_.count(w) ? w : std::string(kUnk);
  }

  double prior(std::size_t y) const {
    std::uint64_t total = 0;
    for (auto c : doc_counts_) total += c;
    return static_cast<double>(doc_counts_.at(y)) / static_cast<double>(total);
  }

  double likelihood(std::string_view word, std::size_t y) const {
    const std::string w = symbol(word);
    const auto& counts = word_counts_.at(y);
    auto it = counts.find(w);
    const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    return (c + beta_) / (static_cast<double>(token_totals_[y]) + beta_ * static_cast<double>(vocab_.size()));
  }

  // P(label | s), computed in log space. Evidence is grouped per word type
  // and summed in sorted order so the result ignores token order exactly.
  std::vector<double> posterior(const Sentence& s) const {
    std::map<std::string, std::uint64_t> bag;
    for (const auto& t : s.tokens) ++bag[symbol(t)];

    const std::size_t k = labels_.size();
    std::vector<double> logp(k);
    for (std::size_t y = 0; y < k; ++y) {
      double acc = std::log(prior(y));
      for (const auto& [w, c] : bag) acc += static_cast<double>(c) * std::log(likelihood(w, y));
      logp[y] = acc;
    }
    const double mx = *std::max_element(logp.begin(), logp.end());
    double z = 0;
    for (double v : logp) z += std::exp(v - mx);
    std::vector<double> out(k);
    for (std::size_t y = 0; y < k; ++y) out[y] = std::exp(logp[y] - mx) / z;
    return out;
  }

  void add_document(std::size_t y, const Sentence& s) {
    ++doc_counts_.at(y);
    for (const auto& t : s.tokens) {
      std::string w = to_lower(t);
      vocab_.insert(w);
      ++word_counts_[y][w];
      ++token_totals_[y];
    }
  }

  std::uint64_t doc_count(std::size_t y) const { return doc_counts_.at(y); }

  void save(std::ostream& out) const {
    nlohmann::json j;
    j["format"] = "revtrace-naive-bayes";
    j["version"] = 1;
    j["labels"] = labels_;
    j["beta"] = beta_;
    j["vocabulary"] = vocab_;
    j["doc_counts"] = doc_counts_;
    j["word_counts"] = word_counts_;
    out << j.dump() << '\n';
  }

  static NaiveBayesClassifier load(std::istream& in) {
    try {
      nlohmann::json j = nlohmann::json::parse(in);
      if (j.at("format") != "revtrace-naive-bayes") throw FormatError("not a naive Bayes model file");
      if (j.at("version") != 1) throw FormatError("unsupported naive Bayes model version");
      NaiveBayesClassifier clf(j.at("labels").get<std::vector<std::string>>(), j.at("beta").get<double>());
      clf.vocab_ = j.at("vocabulary").get<std::set<std::string>>();
      clf.vocab_.insert(std::string(kUnk));
      clf.doc_counts_ = j.at("doc_counts").get<std::vector<std::uint64_t>>();
      clf.word_counts_ = j.at("word_counts").get<std::vector<std::map<std::string, std::uint64_t>>>();
      if (clf.doc_counts_.size() != clf.labels_.size() || clf.word_counts_.size() != clf.labels_.size())
        throw FormatError("label count mismatch in naive Bayes model");
      for (std::size_t y = 0; y < clf.labels_.size(); ++y) {
        if (clf.doc_counts_[y] == 0) throw FormatError("label '" + clf.labels_[y] + "' has no documents");
        for (const auto& [w, c] : clf.word_counts_[y]) {
          if (!clf.vocab_.count(w)) throw FormatError("count for word outside vocabulary: '" + w + "'");
          clf.token_totals_[y] += c;
        }
      }
      return clf;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed naive Bayes model: ") + e.what());
    }
  }

  friend bool operator==(const NaiveBayesClassifier& a, const NaiveBayesClassifier& b) {
    return a.labels_ == b.labels_ && a.beta_ == b.beta_ && a.vocab_ == b.vocab_ && a.doc_counts_ == b.doc_counts_ &&
           a.word_counts_ == b.word_counts_;
  }

 private:
  std::vector<std::string> labels_;
  double beta_;
  std::set<std::string> vocab_;
  std::vector<std::uint64_t> doc_counts_;
  std::vector<std::map<std::string, std::uint64_t>> word_counts_;
  std::vector<std::uint64_t> token_totals_;
};

// Labels default to the sorted set seen in the corpus. Every label must
// have at least one document and every text at least one token.
inline NaiveBayesClassifier train_classifier(const LabeledCorpus& corpus, double beta = 1.0,
                                             std::optional<std::vector<std::string>> labels = std::nullopt) {
  if (!labels) {
    std::set<std::string> seen;
    for (const auto& d : corpus) seen.insert(d.label);
    labels = std::vector<std::string>(seen.begin(), seen.end());
  }
  NaiveBayesClassifier clf(*labels, beta);
  for (const auto& d : corpus) {
    std::size_t y;
    try {
      y = clf.label_index(d.label);
    } catch (const LabelError&) {
      throw TrainError("document label '" + d.label + "' is not in the label set");
    }
    Sentence s = tokenize(d.text);
    if (s.empty()) throw TrainError("document with no tokens (label '" + d.label + "')");
    clf.add_document(y, s);
  }
  for (std::size_t y = 0; y < clf.labels().size(); ++y)
    if (clf.doc_count(y) == 0) throw TrainError("label '" + clf.labels()[y] + "' has no training documents");
  return clf;
}

}  // namespace revtrace
