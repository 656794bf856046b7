#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include <boost/crc.hpp>
#include <nlohmann/json.hpp>

#include "revtrace/history.hpp"
#include "revtrace/history_io.hpp"

namespace revtrace {

enum class Role { annotator, administrator };

inline std::string_view role_name(Role r) { return r == Role::administrator ? "administrator" : "annotator"; }

inline Role parse_role(std::string_view s) {
  if (s == "annotator") return Role::annotator;
  if (s == "administrator") return Role::administrator;
  throw ValidationError("unknown role '" + std::string(s) + "'");
}

struct User {
  std::string id;
  std::string name;
  Role role = Role::annotator;
  std::string token;
  friend bool operator==(const User&, const User&) = default;
};

struct Task {
  std::string id;
  std::string title;
  std::vector<std::string> sentences;
  std::vector<std::string> providers;
  std::map<std::string, std::string> model_refs;
  std::vector<std::string> labels;
  std::string target_label;
  friend bool operator==(const Task&, const Task&) = default;
};

struct Job {
  std::string id;
  std::string task_id;
  std::size_t sentence_index = 0;
  std::string assignee;
  JobStatus status = JobStatus::incomplete;
  RevisionHistory history;
  friend bool operator==(const Job&, const Job&) = default;
};

// The parent index a client sent no longer matches the job's last revision.
class StaleParentError : public ConflictError {
 public:
  StaleParentError(long expected, Job current)
      : ConflictError("stale parent revision " + std::to_string(expected) + ", current is " +
                      std::to_string(current.history.last_index())),
        current_(std::move(current)) {}
  const Job& current() const noexcept { return current_; }

 private:
  Job current_;
};

inline bool valid_id(std::string_view id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](unsigned char c) {
           return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
         });
}

inline std::string make_job_id(std::string_view task, std::size_t sentence_index, std::string_view user) {
  return std::string(task) + "-" + std::to_string(sentence_index) + "-" + std::string(user);
}

inline std::uint32_t crc32_of(std::string_view s) {
  boost::crc_32_type crc;
  crc.process_bytes(s.data(), s.size());
  return crc.checksum();
}

inline JobHeader header_of(const Job& job) {
  return {job.id, job.task_id, job.sentence_index, job.assignee, job.status, detokenize(job.history.original())};
}

struct ExportFilter {
  std::optional<std::string> user;
  std::optional<std::string> task;
};

// ---------------------------------------------------------------------------
// Directory-backed store:
//   users.tsv        id<TAB>name<TAB>role<TAB>token, one user per line
//   tasks/<id>.task  JSON lines: a "task" record then one "sentence" record each
//   jobs/<id>.log    append-only event log, lines "seq<TAB>crc32<TAB>json"
// Every write is fsync'ed before the call returns. Appends to one job are
// serialized by a per-job mutex; different jobs proceed independently.
// ---------------------------------------------------------------------------
class Store {
 public:
  explicit Store(std::filesystem::path root) : root_(std::move(root)) {
    namespace fs = std::filesystem;
    fs::create_directories(root_ / "tasks");
    fs::create_directories(root_ / "jobs");
    load_users();
    for (const auto& entry : fs::directory_iterator(root_ / "tasks"))
      if (entry.path().extension() == ".task") {
        Task t = read_task(entry.path());
        tasks_.emplace(t.id, std::move(t));
      }
    for (const auto& entry : fs::directory_iterator(root_ / "jobs"))
      if (entry.path().extension() == ".log") {
        const auto lines = read_log_lines(entry.path(), 1);
        if (lines.empty()) throw CorruptLogError(entry.path().string(), 1, "missing creation record");
        Job meta = job_from_created(entry.path().stem().string(), lines.front());
        job_index_.emplace(meta.id, std::move(meta));
      }
  }

  const std::filesystem::path& root() const noexcept { return root_; }

  // ---- users -------------------------------------------------------------

  User create_user(User u) {
    if (!valid_id(u.id)) throw ValidationError("invalid user id '" + u.id + "'");
    if (u.name.empty()) u.name = u.id;
    if (u.name.find_first_of("\t\r\n") != std::string::npos || u.token.find_first_of("\t\r\n ") != std::string::npos)
      throw ValidationError("user name and token must not contain tabs or newlines");
    if (u.token.empty()) u.token = random_token();
    std::unique_lock lock(meta_mutex_);
    if (users_.count(u.id)) throw ConflictError("user '" + u.id + "' already exists");
    for (const auto& [id, other] : users_)
      if (other.token == u.token) throw ConflictError("token already in use");
    append_durably(root_ / "users.tsv",
                   u.id + "\t" + u.name + "\t" + std::string(role_name(u.role)) + "\t" + u.token + "\n");
    users_.emplace(u.id, u);
    return u;
  }

  std::optional<User> find_user(const std::string& id) const {
    std::shared_lock lock(meta_mutex_);
    auto it = users_.find(id);
    if (it == users_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<User> user_by_token(const std::string& token) const {
    std::shared_lock lock(meta_mutex_);
    for (const auto& [id, u] : users_)
      if (!token.empty() && u.token == token) return u;
    return std::nullopt;
  }

  std::vector<User> users() const {
    std::shared_lock lock(meta_mutex_);
    std::vector<User> out;
    for (const auto& [id, u] : users_) out.push_back(u);
    return out;
  }

  // ---- tasks -------------------------------------------------------------

  Task create_task(Task t) {
    if (!valid_id(t.id)) throw ValidationError("invalid task id '" + t.id + "'");
    if (t.sentences.empty()) throw ValidationError("task needs at least one sentence");
    if (!t.target_label.empty() && std::find(t.labels.begin(), t.labels.end(), t.target_label) == t.labels.end())
      throw ValidationError("target label '" + t.target_label + "' is not in the task's label set");
    std::unique_lock lock(meta_mutex_);
    if (tasks_.count(t.id)) throw ConflictError("task '" + t.id + "' already exists");
    write_durably(root_ / "tasks" / (t.id + ".task"), task_to_text(t));
    tasks_.emplace(t.id, t);
    return t;
  }

  std::optional<Task> find_task(const std::string& id) const {
    std::shared_lock lock(meta_mutex_);
    auto it = tasks_.find(id);
    if (it == tasks_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<Task> tasks() const {
    std::shared_lock lock(meta_mutex_);
    std::vector<Task> out;
    for (const auto& [id, t] : tasks_) out.push_back(t);
    return out;
  }

  // ---- jobs --------------------------------------------------------------

  // One job per (sentence, user). All-or-nothing: any existing job aborts.
  std::vector<Job> assign_jobs(const std::string& task_id, const std::vector<std::string>& user_ids) {
    std::unique_lock lock(meta_mutex_);
    auto tit = tasks_.find(task_id);
    if (tit == tasks_.end()) throw NotFoundError("unknown task '" + task_id + "'");
    const Task& task = tit->second;
    for (const auto& u : user_ids)
      if (!users_.count(u)) throw NotFoundError("unknown user '" + u + "'");
    std::vector<Job> created;
    for (const auto& u : user_ids)
      for (std::size_t i = 0; i < task.sentences.size(); ++i) {
        Job job{make_job_id(task_id, i, u), task_id, i, u, JobStatus::incomplete,
                RevisionHistory(tokenize(task.sentences[i]))};
        if (job_index_.count(job.id) || std::any_of(created.begin(), created.end(), [&](const Job& j) {
              return j.id == job.id;
            }))
          throw ConflictError("job '" + job.id + "' already exists");
        created.push_back(std::move(job));
      }
    for (const auto& job : created) {
      write_durably(log_path(job.id), log_line(1, created_record(job)));
      job_index_.emplace(job.id, job);
    }
    return created;
  }

  bool has_job(const std::string& job_id) const {
    std::shared_lock lock(meta_mutex_);
    return job_index_.count(job_id) > 0;
  }

  std::vector<std::string> job_ids(const ExportFilter& filter = {}) const {
    std::shared_lock lock(meta_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, meta] : job_index_) {
      if (filter.user && meta.assignee != *filter.user) continue;
      if (filter.task && meta.task_id != *filter.task) continue;
      out.push_back(id);
    }
    return out;
  }

  // Rebuilds the job by replaying its event log.
  Job load_job(const std::string& job_id) const {
    if (!has_job(job_id)) throw NotFoundError("unknown job '" + job_id + "'");
    std::lock_guard lock(job_mutex(job_id));
    return replay(job_id);
  }

  // Appends an edit (or revert) after checking the caller's view is current.
  // `feedback_for` sees the original and the would-be result and runs under
  // the job lock; nothing is written if it or the op throws.
  Job append_op(const std::string& job_id, const EditOp& op, std::optional<long> expected_parent,
                const std::function<FeedbackMap(const Sentence&, const Sentence&)>& feedback_for = {}) {
    if (!has_job(job_id)) throw NotFoundError("unknown job '" + job_id + "'");
    std::lock_guard lock(job_mutex(job_id));
    Job job = replay(job_id);
    if (expected_parent && *expected_parent != job.history.last_index())
      throw StaleParentError(*expected_parent, std::move(job));
    RevisionHistory probe = job.history;
    const Timestamp at = now_utc();
    const Revision& rev = probe.append(op, {}, at);
    FeedbackMap fb = feedback_for ? feedback_for(job.history.original(), rev.result) : FeedbackMap{};
    job.history.append(op, fb, at);
    append_event(job_id, op_record(job.history.revisions().back()));
    return job;
  }

  Job append_op(const std::string& job_id, const EditOp& op, FeedbackMap feedback) {
    return append_op(job_id, op, std::nullopt,
                     [&](const Sentence&, const Sentence&) { return feedback; });
  }

  Job set_status(const std::string& job_id, JobStatus status) {
    if (!has_job(job_id)) throw NotFoundError("unknown job '" + job_id + "'");
    std::lock_guard lock(job_mutex(job_id));
    Job job = replay(job_id);
    append_event(job_id, nlohmann::json{{"type", "status"},
                                        {"status", status_name(status)},
                                        {"timestamp", format_rfc3339(now_utc())}});
    job.status = status;
    return job;
  }

  // ---- export / import ---------------------------------------------------

  void export_histories(std::ostream& out, const ExportFilter& filter = {}) const {
    for (const auto& id : job_ids(filter)) {
      Job job = load_job(id);
      write_block(out, {header_of(job), job.history});
    }
  }

  // Recreates exported jobs, timestamps included. Users and tasks must
  // already exist; existing jobs are a conflict. Validates everything first.
  std::size_t import_histories(std::istream& in) {
    const auto jobs = read_export(in);
    std::unique_lock lock(meta_mutex_);
    {
      for (const auto& ej : jobs) {
        const auto& h = ej.header;
        if (!valid_id(h.task_id) || !valid_id(h.assignee) ||
            h.job_id != make_job_id(h.task_id, h.sentence_index, h.assignee))
          throw ValidationError("job id '" + h.job_id + "' does not match its task/sentence/assignee");
        auto tit = tasks_.find(h.task_id);
        if (tit == tasks_.end()) throw NotFoundError("unknown task '" + h.task_id + "'");
        if (!users_.count(h.assignee)) throw NotFoundError("unknown user '" + h.assignee + "'");
        if (h.sentence_index >= tit->second.sentences.size() ||
            tokenize(tit->second.sentences[h.sentence_index]) != ej.history.original())
          throw ValidationError("job '" + h.job_id + "' original does not match its task sentence");
        if (job_index_.count(h.job_id)) throw ConflictError("job '" + h.job_id + "' already exists");
      }
    }
    for (const auto& ej : jobs) {
      Job job{ej.header.job_id, ej.header.task_id, ej.header.sentence_index, ej.header.assignee, ej.header.status,
              ej.history};
      std::string text = log_line(1, created_record(job));
      std::size_t seq = 2;
      for (const auto& rev : job.history.revisions()) text += log_line(seq++, op_record(rev));
      if (job.status == JobStatus::complete)
        text += log_line(seq++, nlohmann::json{{"type", "status"},
                                               {"status", "complete"},
                                               {"timestamp", format_rfc3339(now_utc())}});
      write_durably(log_path(job.id), text);
      job_index_.emplace(job.id, std::move(job));
    }
    return jobs.size();
  }

  struct State {
    std::vector<User> users;
    std::vector<Task> tasks;
    std::vector<Job> jobs;
    friend bool operator==(const State&, const State&) = default;
  };

  State snapshot() const {
    State s{users(), tasks(), {}};
    for (const auto& id : job_ids()) s.jobs.push_back(load_job(id));
    return s;
  }

 private:
  std::filesystem::path log_path(const std::string& job_id) const { return root_ / "jobs" / (job_id + ".log"); }

  std::mutex& job_mutex(const std::string& job_id) const {
    std::lock_guard lock(lock_table_mutex_);
    auto& m = job_locks_[job_id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
  }

  static std::string random_token() {
    std::random_device rd;
    std::uniform_int_distribution<int> hex(0, 15);
    std::string out;
    for (int i = 0; i < 32; ++i) out += "0123456789abcdef"[hex(rd)];
    return out;
  }

  static void fsync_fd_or_throw(int fd, const std::filesystem::path& p) {
    if (::fsync(fd) != 0) {
      ::close(fd);
      throw Error("fsync failed for " + p.string());
    }
  }

  static void write_all(int fd, std::string_view data, const std::filesystem::path& p) {
    while (!data.empty()) {
      const ssize_t n = ::write(fd, data.data(), data.size());
      if (n < 0) {
        if (errno == EINTR) continue;
        ::close(fd);
        throw Error("write failed for " + p.string());
      }
      data.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  static void append_durably(const std::filesystem::path& p, std::string_view data) {
    const int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw Error("cannot open " + p.string());
    write_all(fd, data, p);
    fsync_fd_or_throw(fd, p);
    ::close(fd);
  }

  // New files only: written to a temporary name, synced, then renamed.
  static void write_durably(const std::filesystem::path& p, std::string_view data) {
    const auto tmp = p.string() + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw Error("cannot open " + tmp);
    write_all(fd, data, tmp);
    fsync_fd_or_throw(fd, tmp);
    ::close(fd);
    std::filesystem::rename(tmp, p);
    const int dfd = ::open(p.parent_path().c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (dfd >= 0) {
      ::fsync(dfd);
      ::close(dfd);
    }
  }

  static std::string log_line(std::size_t seq, const nlohmann::json& body) {
    const std::string text = body.dump();
    char crc[9];
    std::snprintf(crc, sizeof crc, "%08x", crc32_of(text));
    return std::to_string(seq) + "\t" + crc + "\t" + text + "\n";
  }

  // Reads and verifies up to `limit` lines (0 = all).
  static std::vector<nlohmann::json> read_log_lines(const std::filesystem::path& p, std::size_t limit = 0) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + p.string());
    std::vector<nlohmann::json> out;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0, lineno = 0;
    while (pos < content.size() && (limit == 0 || out.size() < limit)) {
      ++lineno;
      const auto nl = content.find('\n', pos);
      if (nl == std::string::npos) throw CorruptLogError(p.string(), lineno, "truncated line (no terminator)");
      const std::string_view line(content.data() + pos, nl - pos);
      pos = nl + 1;
      const auto t1 = line.find('\t');
      const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
      if (t2 == std::string_view::npos) throw CorruptLogError(p.string(), lineno, "missing fields");
      std::size_t seq = 0;
      std::uint32_t crc = 0;
      const auto seq_s = line.substr(0, t1), crc_s = line.substr(t1 + 1, t2 - t1 - 1);
      const auto body = line.substr(t2 + 1);
      if (!detail::parse_number(seq_s, seq) || seq != lineno)
        throw CorruptLogError(p.string(), lineno, "bad sequence number");
      if (crc_s.size() != 8 || std::from_chars(crc_s.data(), crc_s.data() + 8, crc, 16).ptr != crc_s.data() + 8 ||
          crc != crc32_of(body))
        throw CorruptLogError(p.string(), lineno, "checksum mismatch");
      try {
        out.push_back(nlohmann::json::parse(body));
      } catch (const nlohmann::json::exception&) {
        throw CorruptLogError(p.string(), lineno, "unparseable record");
      }
    }
    return out;
  }

  static nlohmann::json created_record(const Job& job) {
    return {{"type", "created"},
            {"job_id", job.id},
            {"task_id", job.task_id},
            {"sentence_index", job.sentence_index},
            {"assignee", job.assignee},
            {"original_text", detokenize(job.history.original())}};
  }

  static Job job_from_created(const std::string& file_id, const nlohmann::json& j) {
    try {
      if (j.at("type") != "created") throw FormatError("first record is not a creation record");
      Job job{j.at("job_id").get<std::string>(), j.at("task_id").get<std::string>(),
              j.at("sentence_index").get<std::size_t>(), j.at("assignee").get<std::string>(),
              JobStatus::incomplete, RevisionHistory(tokenize(j.at("original_text").get<std::string>()))};
      if (job.id != file_id) throw FormatError("job id does not match file name");
      return job;
    } catch (const std::exception& e) {
      throw CorruptLogError(file_id + ".log", 1, e.what());
    }
  }

  static nlohmann::json op_record(const Revision& rev) {
    nlohmann::json j = revision_to_json(rev);
    j.erase("record");
    j.erase("script");
    j["type"] = "op";
    return j;
  }

  void append_event(const std::string& job_id, const nlohmann::json& body) {
    const auto p = log_path(job_id);
    // Sequence numbers continue from the current line count.
    std::ifstream in(p, std::ios::binary);
    std::size_t lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    append_durably(p, log_line(lines + 1, body));
  }

  Job replay(const std::string& job_id) const {
    const auto p = log_path(job_id);
    const auto records = read_log_lines(p);
    if (records.empty()) throw CorruptLogError(p.string(), 1, "missing creation record");
    Job job = job_from_created(job_id, records.front());
    for (std::size_t k = 1; k < records.size(); ++k) {
      const auto& r = records[k];
      const std::size_t lineno = k + 1;
      try {
        const std::string type = r.at("type").get<std::string>();
        if (type == "op") {
          if (r.at("index").get<std::size_t>() != job.history.size()) throw FormatError("non-contiguous index");
          const Revision& rev = job.history.append(op_from_json(r.at("op")), feedback_from_json(r.at("feedback")),
                                                   parse_rfc3339(r.at("timestamp").get<std::string>()));
          if (detokenize(rev.result) != r.at("result_text").get<std::string>())
            throw FormatError("recorded result does not match replay");
        } else if (type == "status") {
          job.status = parse_status(r.at("status").get<std::string>());
        } else {
          throw FormatError("unknown event type '" + type + "'");
        }
      } catch (const CorruptLogError&) {
        throw;
      } catch (const std::exception& e) {
        throw CorruptLogError(p.string(), lineno, e.what());
      }
    }
    return job;
  }

  void load_users() {
    std::ifstream in(root_ / "users.tsv");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string part; std::getline(ss, part, '\t');) f.push_back(part);
      if (f.size() != 4) throw FormatError("users.tsv line " + std::to_string(lineno) + ": expected 4 fields");
      User u{f[0], f[1], parse_role(f[2]), f[3]};
      users_.emplace(u.id, std::move(u));
    }
  }

  static std::string task_to_text(const Task& t) {
    nlohmann::json head{{"record", "task"},        {"id", t.id},         {"title", t.title},
                        {"providers", t.providers}, {"models", t.model_refs}, {"labels", t.labels},
                        {"target_label", t.target_label}};
    std::string out = head.dump() + "\n";
    for (const auto& s : t.sentences) out += nlohmann::json{{"record", "sentence"}, {"text", s}}.dump() + "\n";
    return out;
  }

  static Task read_task(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string line;
    Task t;
    std::size_t lineno = 0;
    try {
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        if (j.at("record") == "task") {
          t.id = j.at("id").get<std::string>();
          t.title = j.value("title", std::string{});
          t.providers = j.value("providers", std::vector<std::string>{});
          t.model_refs = j.value("models", std::map<std::string, std::string>{});
          t.labels = j.value("labels", std::vector<std::string>{});
          t.target_label = j.value("target_label", std::string{});
        } else if (j.at("record") == "sentence") {
          t.sentences.push_back(j.at("text").get<std::string>());
        } else {
          throw FormatError("unknown record");
        }
      }
    } catch (const std::exception& e) {
      throw FormatError(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (t.id != p.stem().string()) throw FormatError(p.string() + ": task id does not match file name");
    return t;
  }

  std::filesystem::path root_;
  mutable std::shared_mutex meta_mutex_;
  std::map<std::string, User> users_;
  std::map<std::string, Task> tasks_;
  std::map<std::string, Job> job_index_;  // metadata only; histories come from the logs
  mutable std::mutex lock_table_mutex_;
  mutable std::map<std::string, std::unique_ptr<std::mutex>> job_locks_;
};

}  // namespace revtrace
