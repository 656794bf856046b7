#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revtrace/errors.hpp"
#include "revtrace/tokenize.hpp"

namespace revtrace {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

inline bool is_reserved_symbol(std::string_view w) { return w == kBos || w == kEos || w == kUnk; }

// Add-alpha smoothed n-gram model over lowercased words:
//   P(w | h) = (c(h, w) + alpha) / (c(h) + alpha * |V|)
// V holds the training word types plus UNK and EOS. BOS only pads histories.
class NGramLM {
 public:
  using History = std::vector<std::string>;

  NGramLM(int order, double alpha, std::set<std::string> vocabulary) : order_(order), alpha_(alpha) {
    if (order < 1) throw TrainError("n-gram order must be >= 1");
    if (!(alpha > 0)) throw TrainError("smoothing alpha must be positive");
    vocab_ = std::move(vocabulary);
    vocab_.erase(std::string(kBos));
    vocab_.insert(std::string(kUnk));
    vocab_.insert(std::string(kEos));
  }

  int order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  const std::set<std::string>& vocabulary() const noexcept { return vocab_; }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }
  const std::map<History, std::map<std::string, std::uint64_t>>& counts() const noexcept { return counts_; }

  // Maps a raw word to its model symbol (lowercased, or UNK).
  std::string symbol(std::string_view word) const {
    if (word == kBos) return std::string(kBos);
    std::string w = to_lower(word);
    return vocab_.count(w) ? w : std::string(kUnk);
  }

  // Keeps the last n-1 words, left-padding with BOS.
  History normalize_history(const std::vector<std::string>& raw) const {
    const std::size_t need = static_cast<std::size_t>(order_ - 1);
    History h(need, std::string(kBos));
    const std::size_t take = std::min(need, raw.size());
    for (std::size_t k = 0; k < take; ++k) h[need - take + k] = symbol(raw[raw.size() - take + k]);
    return h;
  }

  std::uint64_t count(const History& h, const std::string& w) const {
    auto it = counts_.find(h);
    if (it == counts_.end()) return 0;
    auto jt = it->second.find(w);
    return jt == it->second.end() ? 0 : jt->second;
  }

  std::uint64_t history_count(const History& h) const {
    auto it = totals_.find(h);
    return it == totals_.end() ? 0 : it->second;
  }

  struct SmoothedRatio {
    double numerator;
    double denominator;
  };

  // The two halves of the smoothed estimate, kept apart so callers can take
  // logs or reciprocals without an extra rounding step.
  SmoothedRatio cond_terms(const std::vector<std::string>& history, std::string_view word) const {
    const History h = normalize_history(history);
    const std::string w = symbol(word);
    return {static_cast<double>(count(h, w)) + alpha_,
            static_cast<double>(history_count(h)) + alpha_ * static_cast<double>(vocab_.size())};
  }

  double cond_prob(const std::vector<std::string>& history, std::string_view word) const {
    const auto t = cond_terms(history, word);
    return t.numerator / t.denominator;
  }

  void add_count(const History& h, const std::string& w, std::uint64_t c = 1) {
    counts_[h][w] += c;
    totals_[h] += c;
  }

  void save(std::ostream& out) const {
    nlohmann::json j;
    j["format"] = "revtrace-ngram-lm";
    j["version"] = 1;
    j["order"] = order_;
    j["alpha"] = alpha_;
    j["vocabulary"] = vocab_;
    auto& rows = j["counts"] = nlohmann::json::array();
    for (const auto& [h, conts] : counts_)
      for (const auto& [w, c] : conts) rows.push_back({h, w, c});
    out << j.dump() << '\n';
  }

  static NGramLM load(std::istream& in) {
    try {
      nlohmann::json j = nlohmann::json::parse(in);
      if (j.at("format") != "revtrace-ngram-lm") throw FormatError("not an n-gram model file");
      if (j.at("version") != 1) throw FormatError("unsupported n-gram model version");
      NGramLM lm(j.at("order").get<int>(), j.at("alpha").get<double>(),
                 j.at("vocabulary").get<std::set<std::string>>());
      for (const auto& row : j.at("counts"))
        lm.add_count(row.at(0).get<History>(), row.at(1).get<std::string>(), row.at(2).get<std::uint64_t>());
      return lm;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed n-gram model: ") + e.what());
    }
  }

  friend bool operator==(const NGramLM& a, const NGramLM& b) {
    return a.order_ == b.order_ && a.alpha_ == b.alpha_ && a.vocab_ == b.vocab_ && a.counts_ == b.counts_;
  }

 private:
  int order_;
  double alpha_;
  std::set<std::string> vocab_;
  std::map<History, std::map<std::string, std::uint64_t>> counts_;
  std::map<History, std::uint64_t> totals_;
};

inline NGramLM train_ngram(const std::vector<std::string>& texts, int order = 3, double alpha = 1.0) {
  if (order < 1) throw TrainError("n-gram order must be >= 1");
  if (!(alpha > 0)) throw TrainError("smoothing alpha must be positive");
  if (texts.empty()) throw TrainError("empty training corpus");

  std::vector<Sentence> sentences;
  std::set<std::string> types;
  for (const auto& t : texts) {
    sentences.push_back(lowercased(tokenize(t)));
    types.insert(sentences.back().tokens.begin(), sentences.back().tokens.end());
  }
  NGramLM lm(order, alpha, std::move(types));

  const std::size_t ctx = static_cast<std::size_t>(order - 1);
  for (const auto& s : sentences) {
    std::vector<std::string> stream(ctx, std::string(kBos));
    for (const auto& w : s.tokens) stream.push_back(lm.symbol(w));
    stream.emplace_back(kEos);
    for (std::size_t i = ctx; i < stream.size(); ++i)
      lm.add_count(NGramLM::History(stream.begin() + static_cast<std::ptrdiff_t>(i - ctx),
                                    stream.begin() + static_cast<std::ptrdiff_t>(i)),
                   stream[i]);
  }
  return lm;
}

}  // namespace revtrace
