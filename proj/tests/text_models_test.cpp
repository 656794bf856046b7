#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "revtrace/embeddings.hpp"
#include "revtrace/naive_bayes.hpp"
#include "revtrace/ngram_lm.hpp"

using namespace revtrace;

// ---- embeddings --------------------------------------------------------------

TEST(Embeddings, LoadsPlainRows) {
  auto emb = load_embeddings("a 1 0\nB 0.5 -2\n");
  EXPECT_EQ(emb.dimension(), 2u);
  EXPECT_EQ(emb.size(), 2u);
  ASSERT_NE(emb.find("b"), nullptr);
  EXPECT_DOUBLE_EQ((*emb.find("b"))[1], -2.0);
  EXPECT_TRUE(emb.contains("A"));
  EXPECT_FALSE(emb.contains("c"));
}

TEST(Embeddings, SkipsCountHeader) {
  auto emb = load_embeddings("2 3\nx 1 2 3\ny 4 5 6\n");
  EXPECT_EQ(emb.dimension(), 3u);
  EXPECT_EQ(emb.size(), 2u);
}

TEST(Embeddings, LaterDuplicateWins) {
  auto emb = load_embeddings("a 1 0\nA 0 1\n");
  EXPECT_EQ(emb.size(), 1u);
  EXPECT_DOUBLE_EQ((*emb.find("a"))[1], 1.0);
}

TEST(Embeddings, RaggedRowIsFormatError) { EXPECT_THROW(load_embeddings("a 1 0\nb 1\n"), FormatError); }

TEST(Embeddings, BadNumberIsFormatError) { EXPECT_THROW(load_embeddings("a 1 x\n"), FormatError); }

TEST(Embeddings, EmptyInputIsFormatError) { EXPECT_THROW(load_embeddings(""), FormatError); }

// ---- n-gram LM ---------------------------------------------------------------

TEST(NGram, UnigramCounts) {
  auto lm = train_ngram({"a b"}, 1);
  const NGramLM::History none;
  EXPECT_EQ(lm.count(none, "a"), 1u);
  EXPECT_EQ(lm.count(none, "b"), 1u);
  EXPECT_EQ(lm.count(none, "</s>"), 1u);
  EXPECT_EQ(lm.history_count(none), 3u);
  // {a, b, <unk>, </s>}
  EXPECT_EQ(lm.vocab_size(), 4u);
  EXPECT_DOUBLE_EQ(lm.cond_prob({}, "a"), 2.0 / 7.0);
}

TEST(NGram, BigramCountsAndProbability) {
  auto lm = train_ngram({"a a"}, 2);
  EXPECT_EQ(lm.count({"<s>"}, "a"), 1u);
  EXPECT_EQ(lm.count({"a"}, "a"), 1u);
  EXPECT_EQ(lm.count({"a"}, "</s>"), 1u);
  EXPECT_EQ(lm.vocab_size(), 3u);
  // (1 + 1) / (2 + 3)
  EXPECT_DOUBLE_EQ(lm.cond_prob({"a"}, "a"), 0.4);
}

TEST(NGram, UnseenWordMapsToUnk) {
  auto lm = train_ngram({"a a"}, 2);
  EXPECT_EQ(lm.symbol("zzz"), "<unk>");
  EXPECT_EQ(lm.symbol("A"), "a");
  EXPECT_DOUBLE_EQ(lm.cond_prob({"a"}, "zzz"), 1.0 / 5.0);
}

TEST(NGram, ConditionalsSumToOne) {
  auto lm = train_ngram({"the cat sat", "the dog sat down", "a cat"}, 3, 0.5);
  for (const NGramLM::History& h : std::vector<NGramLM::History>{{}, {"the"}, {"the", "cat"}, {"zz", "qq"}}) {
    double sum = 0;
    for (const auto& w : lm.vocabulary()) sum += lm.cond_prob(h, w);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(NGram, TrainErrors) {
  EXPECT_THROW(train_ngram({}, 2), TrainError);
  EXPECT_THROW(train_ngram({"a"}, 0), TrainError);
  EXPECT_THROW(train_ngram({"a"}, 2, 0.0), TrainError);
}

TEST(NGram, SaveLoadRoundTrip) {
  auto lm = train_ngram({"my husband and i", "we enjoy the hotel"}, 3, 0.25);
  std::stringstream ss;
  lm.save(ss);
  auto back = NGramLM::load(ss);
  EXPECT_TRUE(back == lm);
  EXPECT_DOUBLE_EQ(back.cond_prob({"my", "husband"}, "and"), lm.cond_prob({"my", "husband"}, "and"));
}

TEST(NGram, LoadRejectsGarbage) {
  std::stringstream ss("{\"format\":\"something-else\"}");
  EXPECT_THROW(NGramLM::load(ss), FormatError);
  std::stringstream bad("not json");
  EXPECT_THROW(NGramLM::load(bad), FormatError);
}

// ---- naive Bayes -------------------------------------------------------------

namespace {

LabeledCorpus good_bad() { return {{"F", "good good"}, {"M", "bad"}}; }

}  // namespace

TEST(NaiveBayes, HandLikelihoods) {
  auto clf = train_classifier(good_bad(), 1.0);
  ASSERT_EQ(clf.labels(), (std::vector<std::string>{"F", "M"}));
  // |V| = {good, bad, <unk>}
  EXPECT_DOUBLE_EQ(clf.likelihood("good", 0), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(clf.likelihood("good", 1), 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(clf.prior(0), 0.5);
}

TEST(NaiveBayes, HandPosterior) {
  auto clf = train_classifier(good_bad(), 1.0);
  const auto p = clf.posterior(tokenize("good"));
  const double f = 0.5 * 0.6, m = 0.5 * 0.25;
  EXPECT_NEAR(p[0], f / (f + m), 1e-12);
  EXPECT_NEAR(p[1], m / (f + m), 1e-12);
}

TEST(NaiveBayes, PosteriorIgnoresTokenOrder) {
  auto clf = train_classifier({{"x", "red green blue"}, {"y", "green green yellow"}, {"z", "blue red red"}}, 0.5);
  const auto a = clf.posterior(tokenize("red green yellow blue red"));
  const auto b = clf.posterior(tokenize("red blue red yellow green"));
  EXPECT_EQ(a, b);
}

TEST(NaiveBayes, EmptySentenceGivesPrior) {
  auto clf = train_classifier({{"a", "x"}, {"a", "y"}, {"b", "z"}}, 1.0);
  const auto p = clf.posterior(Sentence{});
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-12);
}

TEST(NaiveBayes, TrainErrors) {
  EXPECT_THROW(train_classifier({{"F", "x"}}, 1.0), TrainError);
  EXPECT_THROW(train_classifier({{"F", "x"}, {"M", ""}}, 1.0), TrainError);
  EXPECT_THROW(train_classifier({{"F", "x"}, {"M", "y"}}, 0.0), TrainError);
  EXPECT_THROW(train_classifier({{"F", "x"}, {"M", "y"}}, 1.0, std::vector<std::string>{"F", "M", "N"}), TrainError);
  EXPECT_THROW(train_classifier({{"F", "x"}, {"Q", "y"}}, 1.0, std::vector<std::string>{"F", "M"}), TrainError);
}

TEST(NaiveBayes, UnknownLabelIsLabelError) {
  auto clf = train_classifier(good_bad());
  EXPECT_THROW(clf.label_index("N"), LabelError);
}

TEST(NaiveBayes, SaveLoadRoundTrip) {
  auto clf = train_classifier(good_bad(), 0.7);
  std::stringstream ss;
  clf.save(ss);
  auto back = NaiveBayesClassifier::load(ss);
  EXPECT_TRUE(back == clf);
  EXPECT_EQ(back.posterior(tokenize("good bad good")), clf.posterior(tokenize("good bad good")));
}

TEST(NaiveBayes, ReadsLabeledCorpus) {
  std::stringstream in("F\tgood good\n\nM\tbad\n");
  auto corpus = read_labeled_corpus(in);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[1].label, "M");
  EXPECT_EQ(corpus[1].text, "bad");
  std::stringstream bad("no tab here\n");
  EXPECT_THROW(read_labeled_corpus(bad), FormatError);
}

// Posteriors from a straight product of probabilities, no log space.
TEST(NaiveBayes, RandomPosteriorMatchesProductOracle) {
  std::mt19937 rng(7);
  const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "eps"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1), len(1, 5);
  LabeledCorpus corpus;
  for (int d = 0; d < 30; ++d) {
    std::string text;
    for (std::size_t k = len(rng); k > 0; --k) text += words[pick(rng)] + " ";
    corpus.push_back({d % 3 == 0 ? "p" : (d % 3 == 1 ? "q" : "r"), text});
  }
  auto clf = train_classifier(corpus, 1.0);

  std::map<std::string, std::map<std::string, double>> counts;
  std::map<std::string, double> totals, docs;
  for (const auto& d : corpus) {
    docs[d.label] += 1;
    for (const auto& t : tokenize(d.text).tokens) {
      counts[d.label][t] += 1;
      totals[d.label] += 1;
    }
  }
  const double v = static_cast<double>(words.size() + 1);
  for (int trial = 0; trial < 50; ++trial) {
    Sentence s;
    for (std::size_t k = len(rng); k > 0; --k) s.tokens.push_back(words[pick(rng)]);
    std::vector<double> joint;
    for (const auto& y : clf.labels()) {
      double p = docs[y] / static_cast<double>(corpus.size());
      for (const auto& t : s.tokens) p *= (counts[y][t] + 1.0) / (totals[y] + v);
      joint.push_back(p);
    }
    double z = 0;
    for (double j : joint) z += j;
    const auto got = clf.posterior(s);
    for (std::size_t y = 0; y < joint.size(); ++y) EXPECT_NEAR(got[y], joint[y] / z, 1e-9);
  }
}
