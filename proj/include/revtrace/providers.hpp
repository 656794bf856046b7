#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "revtrace/history.hpp"
#include "revtrace/metrics.hpp"

namespace revtrace {

// Scores an edited sentence, optionally against the job's original.
class FeedbackProvider {
 public:
  virtual ~FeedbackProvider() = default;
  virtual std::string_view name() const = 0;
  virtual double score(const Sentence& original, const Sentence& edited) const = 0;
};

class EditDistanceProvider final : public FeedbackProvider {
 public:
  std::string_view name() const override { return "ed"; }
  double score(const Sentence& original, const Sentence& edited) const override {
    return static_cast<double>(edit_distance(original, edited));
  }
};

class WmdProvider final : public FeedbackProvider {
 public:
  explicit WmdProvider(std::shared_ptr<const EmbeddingTable> emb) : emb_(std::move(emb)) {}
  std::string_view name() const override { return "wmd"; }
  double score(const Sentence& original, const Sentence& edited) const override {
    return wmd(original, edited, *emb_);
  }

 private:
  std::shared_ptr<const EmbeddingTable> emb_;
};

class PerplexityProvider final : public FeedbackProvider {
 public:
  explicit PerplexityProvider(std::shared_ptr<const NGramLM> lm) : lm_(std::move(lm)) {}
  std::string_view name() const override { return "ppl"; }
  double score(const Sentence&, const Sentence& edited) const override { return perplexity(edited, *lm_); }

 private:
  std::shared_ptr<const NGramLM> lm_;
};

class ClassProvider final : public FeedbackProvider {
 public:
  ClassProvider(std::shared_ptr<const NaiveBayesClassifier> clf, std::string target)
      : clf_(std::move(clf)), target_(std::move(target)) {
    clf_->label_index(target_);
  }
  std::string_view name() const override { return "class"; }
  double score(const Sentence&, const Sentence& edited) const override {
    return class_score(edited, *clf_, target_);
  }

 private:
  std::shared_ptr<const NaiveBayesClassifier> clf_;
  std::string target_;
};

// Entropy of the classifier posterior; higher means the attribute is better hidden.
class EntropyProvider final : public FeedbackProvider {
 public:
  explicit EntropyProvider(std::shared_ptr<const NaiveBayesClassifier> clf) : clf_(std::move(clf)) {}
  std::string_view name() const override { return "entropy"; }
  double score(const Sentence&, const Sentence& edited) const override { return entropy(clf_->posterior(edited)); }

 private:
  std::shared_ptr<const NaiveBayesClassifier> clf_;
};

class ProviderRegistry {
 public:
  void add(std::shared_ptr<const FeedbackProvider> p) {
    for (const auto& q : providers_)
      if (q->name() == p->name()) throw ConflictError("provider '" + std::string(p->name()) + "' already registered");
    providers_.push_back(std::move(p));
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& p : providers_) out.emplace_back(p->name());
    return out;
  }

  std::size_t size() const noexcept { return providers_.size(); }

  // A provider that throws contributes a null entry instead of failing the batch.
  FeedbackMap score_all(const Sentence& original, const Sentence& edited) const {
    FeedbackMap out;
    for (const auto& p : providers_) {
      try {
        out[std::string(p->name())] = p->score(original, edited);
      } catch (const std::exception&) {
        out[std::string(p->name())] = std::nullopt;
      }
    }
    return out;
  }

 private:
  std::vector<std::shared_ptr<const FeedbackProvider>> providers_;
};

inline FeedbackMap score_all(const Sentence& original, const Sentence& edited, const ProviderRegistry& registry) {
  return registry.score_all(original, edited);
}

}  // namespace revtrace
