#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "revtrace/history.hpp"

namespace revtrace {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Export format: JSON lines. A block per job is one header record
//   {"record":"job","job_id":..,"original_text":..,"task_id":..,
//    "sentence_index":..,"assignee":..,"status":..}
// followed by one record per revision
//   {"record":"revision","index":..,"op":{..},"result_text":..,
//    "timestamp":"RFC 3339","feedback":{name: number|null}[,"script":[op..]]}
// Keys are emitted sorted, so output is byte-deterministic.
// ---------------------------------------------------------------------------

inline json op_to_json(const EditOp& op) {
  json j;
  j["kind"] = std::string(kind_name(op));
  j["source"] = std::string(source_name(op.source));
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, InsertOp>) {
          j["position"] = o.position;
          j["tokens"] = o.tokens;
        } else if constexpr (std::is_same_v<T, DeleteOp>) {
          j["position"] = o.position;
          j["length"] = o.length;
        } else if constexpr (std::is_same_v<T, SubstituteOp>) {
          j["position"] = o.position;
          j["length"] = o.length;
          j["tokens"] = o.tokens;
        } else if constexpr (std::is_same_v<T, ReorderOp>) {
          j["from"] = o.from;
          j["to"] = o.to;
        } else if constexpr (std::is_same_v<T, ReplaceSentenceOp>) {
          j["text"] = o.text;
        } else {
          j["target"] = o.target;
        }
      },
      op.kind);
  return j;
}

namespace detail {

inline std::vector<std::string> phrase_from_json(const json& j) {
  if (j.contains("tokens")) return j.at("tokens").get<std::vector<std::string>>();
  if (j.contains("token")) return {j.at("token").get<std::string>()};
  throw FormatError("op is missing 'tokens'");
}

}  // namespace detail

// Accepts "token" as shorthand for a one-element "tokens" list and defaults
// "length" to 1 and "source" to typed.
inline EditOp op_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("op must be an object");
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const OpSource src = j.contains("source") ? parse_source(j.at("source").get<std::string>()) : OpSource::typed;
    const std::size_t length = j.value("length", std::size_t{1});
    if (kind == "insert") return {InsertOp{j.at("position").get<std::size_t>(), detail::phrase_from_json(j)}, src};
    if (kind == "delete") return {DeleteOp{j.at("position").get<std::size_t>(), length}, src};
    if (kind == "substitute")
      return {SubstituteOp{j.at("position").get<std::size_t>(), detail::phrase_from_json(j), length}, src};
    if (kind == "reorder") return {ReorderOp{j.at("from").get<std::size_t>(), j.at("to").get<std::size_t>()}, src};
    if (kind == "replace_sentence") return {ReplaceSentenceOp{j.at("text").get<std::string>()}, src};
    if (kind == "revert") return {RevertOp{j.at("target").get<long>()}, OpSource::system};
    throw FormatError("unknown op kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed op: ") + e.what());
  }
}

inline json feedback_to_json(const FeedbackMap& fb) {
  json j = json::object();
  for (const auto& [name, score] : fb) {
    if (score)
      j[name] = *score;
    else
      j[name] = nullptr;
  }
  return j;
}

inline FeedbackMap feedback_from_json(const json& j) {
  FeedbackMap fb;
  if (j.is_null()) return fb;
  if (!j.is_object()) throw FormatError("feedback must be an object");
  for (const auto& [name, v] : j.items()) {
    if (v.is_null())
      fb[name] = std::nullopt;
    else if (v.is_number())
      fb[name] = v.get<double>();
    else
      throw FormatError("feedback '" + name + "' is not a number");
  }
  return fb;
}

inline json revision_to_json(const Revision& rev) {
  json j;
  j["record"] = "revision";
  j["index"] = rev.index;
  j["op"] = op_to_json(rev.op);
  j["result_text"] = detokenize(rev.result);
  j["timestamp"] = format_rfc3339(rev.timestamp);
  j["feedback"] = feedback_to_json(rev.feedback);
  if (std::holds_alternative<ReplaceSentenceOp>(rev.op.kind)) {
    j["script"] = json::array();
    for (const auto& op : rev.script) j["script"].push_back(op_to_json(op));
  }
  return j;
}

enum class JobStatus { incomplete, complete };

inline std::string_view status_name(JobStatus s) { return s == JobStatus::complete ? "complete" : "incomplete"; }

inline JobStatus parse_status(std::string_view s) {
  if (s == "complete") return JobStatus::complete;
  if (s == "incomplete") return JobStatus::incomplete;
  throw FormatError("unknown job status '" + std::string(s) + "'");
}

struct JobHeader {
  std::string job_id;
  std::string task_id;
  std::size_t sentence_index = 0;
  std::string assignee;
  JobStatus status = JobStatus::incomplete;
  std::string original_text;
  friend bool operator==(const JobHeader&, const JobHeader&) = default;
};

struct ExportedJob {
  JobHeader header;
  RevisionHistory history;
  friend bool operator==(const ExportedJob&, const ExportedJob&) = default;
};

inline json header_to_json(const JobHeader& h) {
  return json{{"record", "job"},          {"job_id", h.job_id},       {"task_id", h.task_id},
              {"sentence_index", h.sentence_index}, {"assignee", h.assignee}, {"status", status_name(h.status)},
              {"original_text", h.original_text}};
}

inline void write_block(std::ostream& out, const ExportedJob& job) {
  out << header_to_json(job.header).dump() << '\n';
  for (const auto& rev : job.history.revisions()) out << revision_to_json(rev).dump() << '\n';
}

// Parses a whole export stream. Every revision is replayed against its
// block's history and must reproduce the recorded result_text.
inline std::vector<ExportedJob> read_export(std::istream& in) {
  std::vector<ExportedJob> jobs;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) { return FormatError("line " + std::to_string(lineno) + ": " + why); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw fail(std::string("invalid JSON: ") + e.what());
    }
    try {
      const std::string record = j.at("record").get<std::string>();
      if (record == "job") {
        JobHeader h;
        h.job_id = j.at("job_id").get<std::string>();
        h.task_id = j.value("task_id", std::string{});
        h.sentence_index = j.value("sentence_index", std::size_t{0});
        h.assignee = j.value("assignee", std::string{});
        h.status = parse_status(j.value("status", std::string{"incomplete"}));
        h.original_text = j.at("original_text").get<std::string>();
        RevisionHistory history(tokenize(h.original_text));
        jobs.push_back({std::move(h), std::move(history)});
      } else if (record == "revision") {
        if (jobs.empty()) throw fail("revision record before any job header");
        auto& history = jobs.back().history;
        if (j.at("index").get<std::size_t>() != history.size()) throw fail("non-contiguous revision index");
        const Revision& rev = history.append(op_from_json(j.at("op")), feedback_from_json(j.value("feedback", json())),
                                             parse_rfc3339(j.at("timestamp").get<std::string>()));
        if (detokenize(rev.result) != j.at("result_text").get<std::string>())
          throw fail("result_text does not match replayed operation");
      } else {
        throw fail("unknown record type '" + record + "'");
      }
    } catch (const json::exception& e) {
      throw fail(e.what());
    } catch (const FormatError& e) {
      if (std::string_view(e.what()).starts_with("line ")) throw;
      throw fail(e.what());
    } catch (const Error& e) {
      throw fail(e.what());
    }
  }
  return jobs;
}

}  // namespace revtrace
