#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "revtrace/metrics.hpp"
#include "revtrace/providers.hpp"
#include "test_support.hpp"

using namespace revtrace;
using revtrace::testing::euclid;
using revtrace::testing::levenshtein_oracle;
using revtrace::testing::matching_oracle;

namespace {

EmbeddingTable random_table(std::mt19937& rng, std::size_t words, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  EmbeddingTable emb(dim);
  for (std::size_t w = 0; w < words; ++w) {
    std::vector<double> v(dim);
    for (auto& x : v) x = g(rng);
    emb.add("w" + std::to_string(w), std::move(v));
  }
  return emb;
}

Sentence nonempty_sentence(std::mt19937& rng, std::size_t max_len, std::size_t vocab) {
  Sentence s;
  while (s.empty()) s = revtrace::testing::random_sentence(rng, max_len, vocab);
  return s;
}

}  // namespace

// ---- edit distance -----------------------------------------------------------

TEST(EditDistance, Table1FinalAgainstOriginal) {
  const auto a = tokenize(revtrace::testing::kTable1Original);
  const auto b = tokenize(revtrace::testing::kRh2Texts.back());
  EXPECT_EQ(edit_distance(a, b), levenshtein_oracle(a.tokens, b.tokens));
  EXPECT_EQ(edit_distance(a, a), 0u);
}

TEST(EditDistance, CaseSensitive) { EXPECT_EQ(edit_distance(tokenize("The cat"), tokenize("the cat")), 1u); }

// ---- WMD ---------------------------------------------------------------------

TEST(Wmd, SingleWordIsEuclidean) {
  EmbeddingTable emb(2);
  emb.add("a", {0, 0});
  emb.add("b", {3, 4});
  EXPECT_NEAR(wmd(tokenize("a"), tokenize("b"), emb), 5.0, 1e-12);
}

TEST(Wmd, UnequalLengthsSplitMass) {
  EmbeddingTable emb(2);
  emb.add("a", {0, 0});
  emb.add("b", {3, 4});
  emb.add("c", {0, 1});
  // half of a's mass travels 5, the other half travels 1
  EXPECT_NEAR(wmd(tokenize("a"), tokenize("b c"), emb), 3.0, 1e-12);
}

TEST(Wmd, IgnoresOutOfVocabularyTokens) {
  EmbeddingTable emb(2);
  emb.add("a", {0, 0});
  emb.add("b", {3, 4});
  EXPECT_NEAR(wmd(tokenize("a zzz"), tokenize("b ."), emb), 5.0, 1e-12);
}

TEST(Wmd, NoCoverageThrowsWithDroppedWords) {
  EmbeddingTable emb(2);
  emb.add("a", {0, 0});
  try {
    wmd(tokenize("xx yy"), tokenize("a"), emb);
    FAIL() << "expected CoverageError";
  } catch (const CoverageError& e) {
    EXPECT_EQ(e.dropped(), (std::vector<std::string>{"xx", "yy"}));
  }
}

TEST(Wmd, RandomMetricProperties) {
  std::mt19937 rng(11);
  const auto emb = random_table(rng, 20, 8);
  for (int t = 0; t < 200; ++t) {
    const auto a = nonempty_sentence(rng, 8, 20);
    const auto b = nonempty_sentence(rng, 8, 20);
    const auto c = nonempty_sentence(rng, 8, 20);
    const double ab = wmd(a, b, emb), ba = wmd(b, a, emb);
    const double bc = wmd(b, c, emb), ac = wmd(a, c, emb);
    EXPECT_NEAR(ab, ba, 1e-9);
    EXPECT_LE(ac, ab + bc + 1e-9);
    EXPECT_GE(ab, 0.0);

    Sentence shuffled = a;
    std::shuffle(shuffled.tokens.begin(), shuffled.tokens.end(), rng);
    EXPECT_NEAR(wmd(a, shuffled, emb), 0.0, 1e-12);
  }
}

TEST(Wmd, UniformEqualCountMatchesPermutationOracle) {
  std::mt19937 rng(5);
  const auto emb = random_table(rng, 12, 8);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int t = 0; t < 25; ++t) {
      std::vector<std::string> pool;
      for (int w = 0; w < 12; ++w) pool.push_back("w" + std::to_string(w));
      std::shuffle(pool.begin(), pool.end(), rng);
      Sentence a, b;
      std::vector<std::vector<double>> left, right;
      for (std::size_t i = 0; i < n; ++i) {
        a.tokens.push_back(pool[i]);
        left.push_back(*emb.find(pool[i]));
        b.tokens.push_back(pool[n + i]);
        right.push_back(*emb.find(pool[n + i]));
      }
      EXPECT_NEAR(wmd(a, b, emb), matching_oracle(left, right), 1e-9) << "n=" << n;
    }
  }
}

// ---- perplexity --------------------------------------------------------------

TEST(Perplexity, HandBigram) {
  // V = {a, <unk>, </s>}; P(a|<s>) = 2/4, P(a|a) = 2/5, P(</s>|a) = 2/5
  auto lm = train_ngram({"a a"}, 2);
  const double p = 0.5 * 0.4 * 0.4;
  EXPECT_NEAR(perplexity(tokenize("a a"), lm), std::pow(1.0 / p, 1.0 / 3.0), 1e-9);
}

TEST(Perplexity, HandUnigramWithUnknown) {
  // V = {a, b, <unk>, </s>}, c = {a:1, b:1, </s>:1}: P(a) = 2/7, P(<unk>) = 1/7, P(</s>) = 2/7
  auto lm = train_ngram({"a b"}, 1);
  const double p = (2.0 / 7) * (1.0 / 7) * (2.0 / 7);
  EXPECT_NEAR(perplexity(tokenize("a q"), lm), std::pow(1.0 / p, 1.0 / 3.0), 1e-9);
}

TEST(Perplexity, UniformModelIsVocabularySizeExactly) {
  for (std::size_t types = 1; types <= 40; ++types) {
    std::set<std::string> vocab;
    for (std::size_t w = 0; w < types; ++w) vocab.insert("t" + std::to_string(w));
    NGramLM lm(3, 1.0, vocab);
    EXPECT_EQ(perplexity(tokenize("t0 t1 zz t0"), lm), static_cast<double>(types + 2));
  }
}

TEST(Perplexity, EmptySentenceThrows) {
  auto lm = train_ngram({"a"}, 2);
  EXPECT_THROW(perplexity(Sentence{}, lm), EmptyInputError);
}

// ---- entropy -----------------------------------------------------------------

TEST(Entropy, Examples) {
  EXPECT_EQ(entropy({1.0, 0.0}), 0.0);
  EXPECT_NEAR(entropy({0.5, 0.5}), std::log(2.0), 1e-12);
  EXPECT_NEAR(entropy({0.25, 0.75}), 0.5623351446, 1e-9);
}

TEST(Entropy, MaximalAtUniform) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 2; k <= 5; ++k) {
    const double top = entropy(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    EXPECT_NEAR(top, std::log(static_cast<double>(k)), 1e-12);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> p(k);
      double z = 0;
      for (auto& x : p) z += (x = u(rng));
      for (auto& x : p) x /= z;
      EXPECT_LE(entropy(p), top + 1e-12);
    }
  }
}

TEST(Entropy, RejectsNonDistributions) {
  EXPECT_THROW(entropy({0.5, 0.6}), DistributionError);
  EXPECT_THROW(entropy({-0.1, 1.1}), DistributionError);
  EXPECT_THROW(entropy({NAN, 1.0}), DistributionError);
}

// ---- class score and salience ------------------------------------------------

TEST(Salience, HandExample) {
  auto clf = train_classifier({{"F", "good good"}, {"M", "bad"}}, 1.0);
  const double pf = 0.3 / (0.3 + 0.125);
  EXPECT_NEAR(class_score(tokenize("good"), clf, "F"), pf, 1e-12);
  const auto s = salience(tokenize("good"), clf, "F");
  ASSERT_EQ(s.scores.size(), 1u);
  EXPECT_NEAR(s.scores[0], pf - 0.5, 1e-12);
  EXPECT_NEAR(s.scores[0], 0.206, 0.001);
}

TEST(Salience, DefaultTargetIsArgmax) {
  auto clf = train_classifier({{"F", "good good"}, {"M", "bad"}}, 1.0);
  EXPECT_EQ(salience(tokenize("bad bad"), clf).target, "M");
  EXPECT_EQ(salience(tokenize("good"), clf).target, "F");
}

TEST(Salience, DefinitionalIdentityOnRandomSentences) {
  std::mt19937 rng(17);
  LabeledCorpus corpus;
  for (int d = 0; d < 40; ++d) {
    auto s = nonempty_sentence(rng, 6, 15);
    corpus.push_back({d % 2 ? "A" : "B", detokenize(s)});
  }
  auto clf = train_classifier(corpus, 1.0);
  for (int t = 0; t < 100; ++t) {
    const auto s = nonempty_sentence(rng, 10, 18);
    const auto sal = salience(s, clf, "A");
    ASSERT_EQ(sal.scores.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      Sentence without;
      for (std::size_t j = 0; j < s.size(); ++j)
        if (j != i) without.tokens.push_back(s[j]);
      const double expect = clf.posterior(s)[0] - clf.posterior(without)[0];
      EXPECT_NEAR(sal.scores[i], expect, 1e-12);
    }
  }
}

TEST(Salience, EmptySentenceThrows) {
  auto clf = train_classifier({{"F", "good"}, {"M", "bad"}}, 1.0);
  EXPECT_THROW(salience(Sentence{}, clf, "F"), EmptyInputError);
}

// ---- providers ---------------------------------------------------------------

namespace {

class ThrowingProvider final : public FeedbackProvider {
 public:
  std::string_view name() const override { return "boom"; }
  double score(const Sentence&, const Sentence&) const override { throw std::runtime_error("no"); }
};

}  // namespace

TEST(Providers, ScoreAllCollectsEveryProvider) {
  auto emb = std::make_shared<EmbeddingTable>(2);
  emb->add("a", {0, 0});
  emb->add("b", {3, 4});
  auto lm = std::make_shared<NGramLM>(NGramLM(2, 1.0, {"a", "b"}));
  auto clf = std::make_shared<NaiveBayesClassifier>(train_classifier({{"F", "a"}, {"M", "b"}}));

  ProviderRegistry reg;
  reg.add(std::make_shared<EditDistanceProvider>());
  reg.add(std::make_shared<WmdProvider>(emb));
  reg.add(std::make_shared<PerplexityProvider>(lm));
  reg.add(std::make_shared<ClassProvider>(clf, "F"));
  reg.add(std::make_shared<EntropyProvider>(clf));
  EXPECT_EQ(reg.names(), (std::vector<std::string>{"ed", "wmd", "ppl", "class", "entropy"}));

  const auto fb = score_all(tokenize("a"), tokenize("b"), reg);
  ASSERT_EQ(fb.size(), 5u);
  EXPECT_EQ(*fb.at("ed"), 1.0);
  EXPECT_NEAR(*fb.at("wmd"), 5.0, 1e-12);
  EXPECT_EQ(*fb.at("ppl"), 4.0);
  EXPECT_NEAR(*fb.at("class"), class_score(tokenize("b"), *clf, "F"), 0.0);
  EXPECT_NEAR(*fb.at("entropy"), entropy(clf->posterior(tokenize("b"))), 0.0);
}

TEST(Providers, FailingProviderYieldsNull) {
  auto emb = std::make_shared<EmbeddingTable>(2);
  emb->add("a", {0, 0});
  ProviderRegistry reg;
  reg.add(std::make_shared<EditDistanceProvider>());
  reg.add(std::make_shared<WmdProvider>(emb));
  reg.add(std::make_shared<ThrowingProvider>());
  const auto fb = reg.score_all(tokenize("a"), tokenize("zz"));
  EXPECT_EQ(*fb.at("ed"), 1.0);
  EXPECT_FALSE(fb.at("wmd").has_value());
  EXPECT_FALSE(fb.at("boom").has_value());
}

TEST(Providers, DuplicateNameRejected) {
  ProviderRegistry reg;
  reg.add(std::make_shared<EditDistanceProvider>());
  EXPECT_THROW(reg.add(std::make_shared<EditDistanceProvider>()), ConflictError);
}

TEST(Providers, ClassProviderChecksTarget) {
  auto clf = std::make_shared<NaiveBayesClassifier>(train_classifier({{"F", "a"}, {"M", "b"}}));
  EXPECT_THROW(ClassProvider(clf, "N"), LabelError);
}
