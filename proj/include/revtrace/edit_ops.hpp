#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "revtrace/errors.hpp"
#include "revtrace/tokenize.hpp"

namespace revtrace {

// Where an operation came from. Recommended sources report as Substitution.
enum class OpSource { typed, similarity_recommended, lm_recommended, system };

// Insert and Substitute carry a phrase of one or more tokens; Delete and
// Substitute cover `length` consecutive tokens starting at `position`.
struct InsertOp {
  std::size_t position = 0;
  std::vector<std::string> tokens;
  friend bool operator==(const InsertOp&, const InsertOp&) = default;
};

struct DeleteOp {
  std::size_t position = 0;
  std::size_t length = 1;
  friend bool operator==(const DeleteOp&, const DeleteOp&) = default;
};

struct SubstituteOp {
  std::size_t position = 0;
  std::vector<std::string> tokens;
  std::size_t length = 1;
  friend bool operator==(const SubstituteOp&, const SubstituteOp&) = default;
};

// Moves token `from` so that it sits at index `to` of the result.
struct ReorderOp {
  std::size_t from = 0;
  std::size_t to = 0;
  friend bool operator==(const ReorderOp&, const ReorderOp&) = default;
};

struct ReplaceSentenceOp {
  std::string text;
  friend bool operator==(const ReplaceSentenceOp&, const ReplaceSentenceOp&) = default;
};

// -1 targets the original sentence.
struct RevertOp {
  long target = -1;
  friend bool operator==(const RevertOp&, const RevertOp&) = default;
};

using OpKind = std::variant<InsertOp, DeleteOp, SubstituteOp, ReorderOp, ReplaceSentenceOp, RevertOp>;

struct EditOp {
  OpKind kind;
  OpSource source = OpSource::typed;
  friend bool operator==(const EditOp&, const EditOp&) = default;
};

namespace ops {

inline EditOp insert(std::size_t pos, std::string token, OpSource src = OpSource::typed) {
  return {InsertOp{pos, {std::move(token)}}, src};
}
inline EditOp insert_phrase(std::size_t pos, std::vector<std::string> tokens, OpSource src = OpSource::typed) {
  return {InsertOp{pos, std::move(tokens)}, src};
}
inline EditOp erase(std::size_t pos, std::size_t length = 1, OpSource src = OpSource::typed) {
  return {DeleteOp{pos, length}, src};
}
inline EditOp substitute(std::size_t pos, std::string token, OpSource src = OpSource::typed) {
  return {SubstituteOp{pos, {std::move(token)}, 1}, src};
}
inline EditOp substitute_span(std::size_t pos, std::size_t length, std::vector<std::string> tokens,
                              OpSource src = OpSource::typed) {
  return {SubstituteOp{pos, std::move(tokens), length}, src};
}
inline EditOp reorder(std::size_t from, std::size_t to, OpSource src = OpSource::typed) {
  return {ReorderOp{from, to}, src};
}
inline EditOp replace_sentence(std::string text) {
  return {ReplaceSentenceOp{std::move(text)}, OpSource::typed};
}
inline EditOp revert(long target) { return {RevertOp{target}, OpSource::system}; }

}  // namespace ops

inline std::string_view kind_name(const EditOp& op) {
  constexpr std::string_view names[] = {"insert", "delete", "substitute", "reorder", "replace_sentence", "revert"};
  return names[op.kind.index()];
}

inline std::string_view source_name(OpSource s) {
  switch (s) {
    case OpSource::typed: return "typed";
    case OpSource::similarity_recommended: return "similarity_recommended";
    case OpSource::lm_recommended: return "lm_recommended";
    case OpSource::system: return "system";
  }
  return "typed";
}

inline OpSource parse_source(std::string_view s) {
  if (s == "typed") return OpSource::typed;
  if (s == "similarity_recommended") return OpSource::similarity_recommended;
  if (s == "lm_recommended") return OpSource::lm_recommended;
  if (s == "system") return OpSource::system;
  throw FormatError("unknown op source '" + std::string(s) + "'");
}

enum class ReportingCategory { WordTyping, Deletion, Substitution, Reordering, SentenceTyping };

inline constexpr ReportingCategory kAllCategories[] = {
    ReportingCategory::WordTyping, ReportingCategory::Deletion, ReportingCategory::Substitution,
    ReportingCategory::Reordering, ReportingCategory::SentenceTyping};

inline std::string_view category_name(ReportingCategory c) {
  switch (c) {
    case ReportingCategory::WordTyping: return "WordTyping";
    case ReportingCategory::Deletion: return "Deletion";
    case ReportingCategory::Substitution: return "Substitution";
    case ReportingCategory::Reordering: return "Reordering";
    case ReportingCategory::SentenceTyping: return "SentenceTyping";
  }
  return "";
}

inline ReportingCategory category_of(const EditOp& op) {
  struct Visitor {
    OpSource src;
    ReportingCategory operator()(const InsertOp&) const { return typed_or_recommended(); }
    ReportingCategory operator()(const SubstituteOp&) const { return typed_or_recommended(); }
    ReportingCategory operator()(const DeleteOp&) const { return ReportingCategory::Deletion; }
    ReportingCategory operator()(const ReorderOp&) const { return ReportingCategory::Reordering; }
    ReportingCategory operator()(const ReplaceSentenceOp&) const { return ReportingCategory::SentenceTyping; }
    ReportingCategory operator()(const RevertOp&) const {
      throw NotCategorizable("revert operations have no reporting category");
    }
    ReportingCategory typed_or_recommended() const {
      return src == OpSource::typed ? ReportingCategory::WordTyping : ReportingCategory::Substitution;
    }
  };
  return std::visit(Visitor{op.source}, op.kind);
}

namespace detail {

inline void check_phrase(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw InvalidOpError("operation carries no tokens");
  for (const auto& t : tokens)
    if (!is_atomic_token(t)) throw InvalidOpError("not a single token: '" + t + "'");
}

inline void check_span(std::size_t pos, std::size_t length, std::size_t size) {
  if (length == 0) throw InvalidOpError("span length must be positive");
  if (pos >= size || length > size - pos)
    throw PositionError("span [" + std::to_string(pos) + ", " + std::to_string(pos + length) +
                        ") outside sentence of length " + std::to_string(size));
}

}  // namespace detail

// Applies one word-level operation. Revert is resolved by RevisionHistory.
inline Sentence apply_op(const Sentence& s, const EditOp& op) {
  const std::size_t n = s.size();
  struct Visitor {
    const Sentence& s;
    std::size_t n;
    Sentence operator()(const InsertOp& o) const {
      if (o.position > n)
        throw PositionError("insert position " + std::to_string(o.position) + " beyond length " + std::to_string(n));
      detail::check_phrase(o.tokens);
      Sentence out = s;
      out.tokens.insert(out.tokens.begin() + static_cast<std::ptrdiff_t>(o.position), o.tokens.begin(),
                        o.tokens.end());
      return out;
    }
    Sentence operator()(const DeleteOp& o) const {
      detail::check_span(o.position, o.length, n);
      Sentence out = s;
      auto first = out.tokens.begin() + static_cast<std::ptrdiff_t>(o.position);
      out.tokens.erase(first, first + static_cast<std::ptrdiff_t>(o.length));
      return out;
    }
    Sentence operator()(const SubstituteOp& o) const {
      detail::check_span(o.position, o.length, n);
      detail::check_phrase(o.tokens);
      Sentence out;
      out.tokens.reserve(n - o.length + o.tokens.size());
      out.tokens.insert(out.tokens.end(), s.tokens.begin(), s.tokens.begin() + static_cast<std::ptrdiff_t>(o.position));
      out.tokens.insert(out.tokens.end(), o.tokens.begin(), o.tokens.end());
      out.tokens.insert(out.tokens.end(), s.tokens.begin() + static_cast<std::ptrdiff_t>(o.position + o.length),
                        s.tokens.end());
      return out;
    }
    Sentence operator()(const ReorderOp& o) const {
      if (o.from >= n || o.to >= n)
        throw PositionError("reorder " + std::to_string(o.from) + "->" + std::to_string(o.to) +
                            " outside sentence of length " + std::to_string(n));
      if (o.from == o.to) throw InvalidOpError("reorder source equals destination");
      Sentence out = s;
      std::string moved = std::move(out.tokens[o.from]);
      out.tokens.erase(out.tokens.begin() + static_cast<std::ptrdiff_t>(o.from));
      out.tokens.insert(out.tokens.begin() + static_cast<std::ptrdiff_t>(o.to), std::move(moved));
      return out;
    }
    Sentence operator()(const ReplaceSentenceOp& o) const { return tokenize(o.text); }
    Sentence operator()(const RevertOp&) const {
      throw InvalidOpError("revert must be applied through a revision history");
    }
  };
  return std::visit(Visitor{s, n}, op.kind);
}

}  // namespace revtrace
