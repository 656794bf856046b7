#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "revtrace/history_io.hpp"
#include "revtrace/metrics.hpp"

namespace revtrace {

// Reports over export files. All are pure functions of the parsed jobs.

struct OpDistribution {
  std::map<ReportingCategory, std::size_t> counts;
  std::size_t total = 0;

  double percent(ReportingCategory c) const {
    if (total == 0) return 0.0;
    auto it = counts.find(c);
    return 100.0 * static_cast<double>(it == counts.end() ? 0 : it->second) / static_cast<double>(total);
  }
  std::size_t count(ReportingCategory c) const {
    auto it = counts.find(c);
    return it == counts.end() ? 0 : it->second;
  }
};

inline OpDistribution op_distribution(const std::vector<ExportedJob>& jobs) {
  OpDistribution d;
  for (auto c : kAllCategories) d.counts[c] = 0;
  for (const auto& job : jobs)
    for (const auto& rev : job.history.revisions()) {
      if (std::holds_alternative<RevertOp>(rev.op.kind)) continue;
      ++d.counts[category_of(rev.op)];
      ++d.total;
    }
  return d;
}

// Word-level ops performed in the guided mode; reverts and whole-sentence
// typing are not counted.
inline bool is_auxiliary_op(const EditOp& op) {
  return !std::holds_alternative<RevertOp>(op.kind) && !std::holds_alternative<ReplaceSentenceOp>(op.kind);
}

struct EngagementReport {
  std::size_t jobs = 0;
  std::size_t modified_jobs = 0;
  std::size_t auxiliary_ops = 0;
  double fraction_modified = 0;
  double mean_ops = 0;
};

inline EngagementReport engagement_report(const std::vector<ExportedJob>& jobs) {
  EngagementReport r;
  r.jobs = jobs.size();
  for (const auto& job : jobs) {
    std::size_t n = 0;
    for (const auto& rev : job.history.revisions())
      if (is_auxiliary_op(rev.op)) ++n;
    if (n > 0) ++r.modified_jobs;
    r.auxiliary_ops += n;
  }
  if (r.jobs) {
    r.fraction_modified = static_cast<double>(r.modified_jobs) / static_cast<double>(r.jobs);
    r.mean_ops = static_cast<double>(r.auxiliary_ops) / static_cast<double>(r.jobs);
  }
  return r;
}

struct EntropyReport {
  std::size_t jobs = 0;
  double mean_original = 0;
  double mean_final = 0;
};

// Posterior entropy of each job's original and of its last revision.
inline EntropyReport entropy_report(const std::vector<ExportedJob>& jobs, const NaiveBayesClassifier& clf) {
  EntropyReport r;
  r.jobs = jobs.size();
  for (const auto& job : jobs) {
    r.mean_original += entropy(clf.posterior(job.history.original()));
    r.mean_final += entropy(clf.posterior(job.history.current()));
  }
  if (r.jobs) {
    r.mean_original /= static_cast<double>(r.jobs);
    r.mean_final /= static_cast<double>(r.jobs);
  }
  return r;
}

// Heuristic feedback filter for candidate references, e.g. "ppl<=120".
struct FeedbackThreshold {
  std::string provider;
  bool at_most = true;
  double value = 0;

  static FeedbackThreshold parse(std::string_view spec) {
    for (std::string_view op : {"<=", ">="}) {
      const auto pos = spec.find(op);
      if (pos == std::string_view::npos || pos == 0) continue;
      FeedbackThreshold t{std::string(spec.substr(0, pos)), op == "<=", 0};
      if (!detail::parse_number(spec.substr(pos + 2), t.value))
        throw ValidationError("bad threshold value in '" + std::string(spec) + "'");
      return t;
    }
    throw ValidationError("threshold must look like name<=value or name>=value, got '" + std::string(spec) + "'");
  }

  bool accepts(const FeedbackMap& fb) const {
    auto it = fb.find(provider);
    if (it == fb.end() || !it->second) return false;
    return at_most ? *it->second <= value : *it->second >= value;
  }
};

struct ReferenceCount {
  std::vector<std::pair<std::string, std::size_t>> per_job;
  double mean = 0;
};

// Candidate references per job; a candidate passes the filters when the
// feedback of its first occurrence satisfies every threshold.
inline ReferenceCount reference_count(const std::vector<ExportedJob>& jobs,
                                      const std::vector<FeedbackThreshold>& filters = {}) {
  ReferenceCount r;
  std::size_t total = 0;
  for (const auto& job : jobs) {
    std::size_t n = 0;
    for (const auto& cand : extract_references(job.history)) {
      const auto& fb = job.history.revisions()[cand.indices.front()].feedback;
      if (std::all_of(filters.begin(), filters.end(), [&](const auto& f) { return f.accepts(fb); })) ++n;
    }
    r.per_job.emplace_back(job.header.job_id, n);
    total += n;
  }
  if (!jobs.empty()) r.mean = static_cast<double>(total) / static_cast<double>(jobs.size());
  return r;
}

// ---- text rendering --------------------------------------------------------

enum class ReportFormat { table, tsv };

inline std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

namespace detail {

inline void emit_rows(std::ostream& out, ReportFormat f, const std::vector<std::vector<std::string>>& rows) {
  if (f == ReportFormat::tsv) {
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
      out << '\n';
    }
    return;
  }
  std::vector<std::size_t> width;
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], row[i].size());
    }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += "  ";
      line += row[i];
      if (i + 1 < row.size()) line.append(width[i] - row[i].size(), ' ');
    }
    out << line << '\n';
  }
}

}  // namespace detail

inline void render(std::ostream& out, const OpDistribution& d, ReportFormat f) {
  std::vector<std::vector<std::string>> rows{{"category", "count", "percent"}};
  for (auto c : kAllCategories)
    rows.push_back({std::string(category_name(c)), std::to_string(d.count(c)), fmt_fixed(d.percent(c), 2)});
  rows.push_back({"total", std::to_string(d.total), fmt_fixed(d.total ? 100.0 : 0.0, 2)});
  detail::emit_rows(out, f, rows);
}

inline void render(std::ostream& out, const EngagementReport& r, ReportFormat f) {
  detail::emit_rows(out, f,
                    {{"metric", "value"},
                     {"jobs", std::to_string(r.jobs)},
                     {"modified_jobs", std::to_string(r.modified_jobs)},
                     {"fraction_modified", fmt_fixed(r.fraction_modified, 4)},
                     {"mean_ops", fmt_fixed(r.mean_ops, 4)}});
}

inline void render(std::ostream& out, const EntropyReport& r, ReportFormat f) {
  detail::emit_rows(out, f,
                    {{"metric", "value"},
                     {"jobs", std::to_string(r.jobs)},
                     {"mean_entropy_original", fmt_fixed(r.mean_original, 6)},
                     {"mean_entropy_final", fmt_fixed(r.mean_final, 6)}});
}

inline void render(std::ostream& out, const ReferenceCount& r, ReportFormat f) {
  std::vector<std::vector<std::string>> rows{{"job_id", "candidates"}};
  for (const auto& [id, n] : r.per_job) rows.push_back({id, std::to_string(n)});
  rows.push_back({"mean", fmt_fixed(r.mean, 4)});
  detail::emit_rows(out, f, rows);
}

}  // namespace revtrace
