#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "revtrace/embeddings.hpp"
#include "revtrace/errors.hpp"
#include "revtrace/naive_bayes.hpp"
#include "revtrace/ngram_lm.hpp"

namespace revtrace {

// Flat key=value service configuration. '#' starts a comment line.
//
//   listen = 127.0.0.1:8080          (env REVTRACE_LISTEN overrides)
//   store = ./data                   (env REVTRACE_STORE overrides)
//   embeddings = vectors.txt
//   lm = model.lm | lm_corpus = sentences.txt (+ lm_order, lm_alpha)
//   classifier = model.nb | classifier_corpus = labeled.tsv (+ classifier_beta)
//   providers = ed,wmd,ppl,class,entropy
//   recommend_k = 10
//   admin_token = secret
struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store_dir = "data";
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> lm;
  std::optional<std::filesystem::path> lm_corpus;
  int lm_order = 3;
  double lm_alpha = 1.0;
  std::optional<std::filesystem::path> classifier;
  std::optional<std::filesystem::path> classifier_corpus;
  double classifier_beta = 1.0;
  std::vector<std::string> providers{"ed"};
  std::size_t recommend_k = 10;
  std::string admin_token;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(s)};
  for (std::string part; std::getline(ss, part, ',');) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

inline void set_listen(ApiConfig& cfg, std::string_view v) {
  const auto colon = v.rfind(':');
  if (colon == std::string_view::npos) throw FormatError("listen must be host:port, got '" + std::string(v) + "'");
  cfg.host = std::string(v.substr(0, colon));
  if (!parse_number(v.substr(colon + 1), cfg.port) || cfg.port < 0 || cfg.port > 65535)
    throw FormatError("bad port in '" + std::string(v) + "'");
}

}  // namespace detail

inline ApiConfig parse_config(std::istream& in, const std::filesystem::path& base = {}) {
  ApiConfig cfg;
  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base.empty() ? base / p : p;
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(lineno) + ": expected key=value");
    const auto key = detail::trim(std::string_view(t).substr(0, eq));
    const auto val = detail::trim(std::string_view(t).substr(eq + 1));
    auto bad = [&] { return FormatError("config line " + std::to_string(lineno) + ": bad value for " + key); };
    if (key == "listen") detail::set_listen(cfg, val);
    else if (key == "store") cfg.store_dir = path_of(val);
    else if (key == "embeddings") cfg.embeddings = path_of(val);
    else if (key == "lm") cfg.lm = path_of(val);
    else if (key == "lm_corpus") cfg.lm_corpus = path_of(val);
    else if (key == "lm_order") { if (!detail::parse_number(val, cfg.lm_order)) throw bad(); }
    else if (key == "lm_alpha") { if (!detail::parse_number(val, cfg.lm_alpha)) throw bad(); }
    else if (key == "classifier") cfg.classifier = path_of(val);
    else if (key == "classifier_corpus") cfg.classifier_corpus = path_of(val);
    else if (key == "classifier_beta") { if (!detail::parse_number(val, cfg.classifier_beta)) throw bad(); }
    else if (key == "providers") cfg.providers = detail::split_list(val);
    else if (key == "recommend_k") { if (!detail::parse_number(val, cfg.recommend_k)) throw bad(); }
    else if (key == "admin_token") cfg.admin_token = val;
    else throw FormatError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return cfg;
}

inline void apply_env_overrides(ApiConfig& cfg) {
  if (const char* v = std::getenv("REVTRACE_LISTEN"); v && *v) detail::set_listen(cfg, v);
  if (const char* v = std::getenv("REVTRACE_STORE"); v && *v) cfg.store_dir = v;
}

inline ApiConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw NotFoundError("cannot open config " + file.string());
  auto cfg = parse_config(in, file.parent_path());
  apply_env_overrides(cfg);
  return cfg;
}

struct Models {
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::shared_ptr<const NGramLM> lm;
  std::shared_ptr<const NaiveBayesClassifier> classifier;
};

namespace detail {

inline std::ifstream open_or_throw(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw NotFoundError("cannot open " + p.string());
  return in;
}

}  // namespace detail

inline Models load_models(const ApiConfig& cfg) {
  Models m;
  if (cfg.embeddings) {
    auto in = detail::open_or_throw(*cfg.embeddings);
    m.embeddings = std::make_shared<const EmbeddingTable>(load_embeddings(in));
  }
  if (cfg.lm) {
    auto in = detail::open_or_throw(*cfg.lm);
    m.lm = std::make_shared<const NGramLM>(NGramLM::load(in));
  } else if (cfg.lm_corpus) {
    auto in = detail::open_or_throw(*cfg.lm_corpus);
    std::vector<std::string> texts;
    for (std::string line; std::getline(in, line);)
      if (!detail::trim(line).empty()) texts.push_back(line);
    m.lm = std::make_shared<const NGramLM>(train_ngram(texts, cfg.lm_order, cfg.lm_alpha));
  }
  if (cfg.classifier) {
    auto in = detail::open_or_throw(*cfg.classifier);
    m.classifier = std::make_shared<const NaiveBayesClassifier>(NaiveBayesClassifier::load(in));
  } else if (cfg.classifier_corpus) {
    auto in = detail::open_or_throw(*cfg.classifier_corpus);
    m.classifier = std::make_shared<const NaiveBayesClassifier>(
        train_classifier(read_labeled_corpus(in), cfg.classifier_beta));
  }
  return m;
}

}  // namespace revtrace
