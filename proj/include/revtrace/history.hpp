#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "revtrace/edit_ops.hpp"
#include "revtrace/edit_script.hpp"
#include "revtrace/timestamp.hpp"
#include "revtrace/tokenize.hpp"

namespace revtrace {

// Provider name -> score; nullopt marks a provider that failed on this input.
using FeedbackMap = std::map<std::string, std::optional<double>>;

struct Revision {
  std::size_t index = 0;
  EditOp op;
  Sentence result;
  Timestamp timestamp{};
  FeedbackMap feedback;
  // Word-level I/D/S decomposition, filled for ReplaceSentence revisions only.
  std::vector<EditOp> script;

  friend bool operator==(const Revision&, const Revision&) = default;
};

// Append-only record of one sentence's rewrites. Mutators either append a
// single revision or leave the history untouched.
class RevisionHistory {
 public:
  RevisionHistory() = default;
  explicit RevisionHistory(Sentence original) : original_(std::move(original)) {}

  const Sentence& original() const noexcept { return original_; }
  const std::vector<Revision>& revisions() const noexcept { return revisions_; }
  std::size_t size() const noexcept { return revisions_.size(); }
  bool empty() const noexcept { return revisions_.empty(); }

  const Sentence& current() const noexcept {
    return revisions_.empty() ? original_ : revisions_.back().result;
  }

  // Index of the last revision, -1 when nothing has been appended.
  long last_index() const noexcept { return static_cast<long>(revisions_.size()) - 1; }

  const Sentence& sentence_at(long index) const {
    if (index < -1 || index >= static_cast<long>(revisions_.size()))
      throw IndexError("revision " + std::to_string(index) + " out of range [-1, " +
                       std::to_string(revisions_.size()) + ")");
    return index == -1 ? original_ : revisions_[static_cast<std::size_t>(index)].result;
  }

  // Applies `op` to the current sentence. Revert ops are routed to revert().
  const Revision& append(const EditOp& op, FeedbackMap feedback, Timestamp at = now_utc()) {
    if (const auto* r = std::get_if<RevertOp>(&op.kind)) return revert(r->target, std::move(feedback), at);
    Revision rev;
    rev.index = revisions_.size();
    rev.op = op;
    rev.result = apply_op(current(), op);
    rev.timestamp = at;
    rev.feedback = std::move(feedback);
    if (std::holds_alternative<ReplaceSentenceOp>(op.kind)) rev.script = diff(current(), rev.result);
    revisions_.push_back(std::move(rev));
    return revisions_.back();
  }

  const Revision& revert(long target, FeedbackMap feedback, Timestamp at = now_utc()) {
    Revision rev;
    rev.result = sentence_at(target);
    rev.index = revisions_.size();
    rev.op = ops::revert(target);
    rev.timestamp = at;
    rev.feedback = std::move(feedback);
    revisions_.push_back(std::move(rev));
    return revisions_.back();
  }

  friend bool operator==(const RevisionHistory&, const RevisionHistory&) = default;

 private:
  Sentence original_;
  std::vector<Revision> revisions_;
};

inline RevisionHistory append_revision(RevisionHistory h, const EditOp& op, FeedbackMap feedback,
                                       Timestamp at = now_utc()) {
  h.append(op, std::move(feedback), at);
  return h;
}

inline RevisionHistory revert(RevisionHistory h, long target, FeedbackMap feedback = {},
                              Timestamp at = now_utc()) {
  h.revert(target, std::move(feedback), at);
  return h;
}

// Re-applies every stored op from the original; true when each stored result
// is reproduced exactly.
inline bool replay_consistent(const RevisionHistory& h) {
  std::vector<Sentence> seen;
  Sentence cur = h.original();
  for (const auto& rev : h.revisions()) {
    if (const auto* r = std::get_if<RevertOp>(&rev.op.kind)) {
      if (r->target < -1 || r->target >= static_cast<long>(seen.size())) return false;
      cur = r->target == -1 ? h.original() : seen[static_cast<std::size_t>(r->target)];
    } else {
      try {
        cur = apply_op(cur, rev.op);
      } catch (const Error&) {
        return false;
      }
    }
    if (cur != rev.result || rev.index != seen.size()) return false;
    seen.push_back(cur);
  }
  return true;
}

struct ReferenceCandidate {
  Sentence sentence;
  std::vector<std::size_t> indices;
  friend bool operator==(const ReferenceCandidate&, const ReferenceCandidate&) = default;
};

// Distinct revision results other than the original, in first-seen order.
inline std::vector<ReferenceCandidate> extract_references(const RevisionHistory& h) {
  std::vector<ReferenceCandidate> out;
  for (const auto& rev : h.revisions()) {
    if (rev.result == h.original()) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& c) { return c.sentence == rev.result; });
    if (it == out.end())
      out.push_back({rev.result, {rev.index}});
    else
      it->indices.push_back(rev.index);
  }
  return out;
}

}  // namespace revtrace
