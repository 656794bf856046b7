#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "revtrace/config.hpp"
#include "revtrace/history_io.hpp"
#include "revtrace/providers.hpp"
#include "revtrace/recommend.hpp"
#include "revtrace/store.hpp"

namespace revtrace {

// HTTP controller over a Store and read-only models. Request and response
// bodies are JSON; field names are listed in docs/api.md.
class Service {
 public:
  struct Options {
    std::vector<std::string> providers{"ed"};
    std::size_t recommend_k = 10;
    std::string admin_token;
  };

  Service(std::shared_ptr<Store> store, Models models, Options opts)
      : store_(std::move(store)), models_(std::move(models)), opts_(std::move(opts)) {
    // Fail fast on provider names the loaded models cannot back.
    build_registry(opts_.providers, std::nullopt);
    routes();
  }

  explicit Service(const ApiConfig& cfg)
      : Service(std::make_shared<Store>(cfg.store_dir), load_models(cfg),
                Options{cfg.providers, cfg.recommend_k, cfg.admin_token}) {}

  httplib::Server& server() noexcept { return server_; }
  Store& store() noexcept { return *store_; }

  // Binds an ephemeral port on `host` and serves from a background thread.
  int start_background(const std::string& host = "127.0.0.1") {
    const int port = server_.bind_to_any_port(host);
    if (port < 0) throw Error("cannot bind " + host);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  ~Service() { stop(); }

  // Builds the provider set for a task (or the configured default list).
  ProviderRegistry build_registry(const std::vector<std::string>& names, const std::optional<Task>& task) const {
    ProviderRegistry reg;
    for (const auto& name : names) {
      if (name == "ed") {
        reg.add(std::make_shared<EditDistanceProvider>());
      } else if (name == "wmd") {
        if (!models_.embeddings) throw ValidationError("provider 'wmd' needs embeddings");
        reg.add(std::make_shared<WmdProvider>(models_.embeddings));
      } else if (name == "ppl") {
        if (!models_.lm) throw ValidationError("provider 'ppl' needs a language model");
        reg.add(std::make_shared<PerplexityProvider>(models_.lm));
      } else if (name == "class") {
        if (!models_.classifier) throw ValidationError("provider 'class' needs a classifier");
        reg.add(std::make_shared<ClassProvider>(models_.classifier, class_target(task)));
      } else if (name == "entropy") {
        if (!models_.classifier) throw ValidationError("provider 'entropy' needs a classifier");
        reg.add(std::make_shared<EntropyProvider>(models_.classifier));
      } else {
        throw ValidationError("unknown feedback provider '" + name + "'");
      }
    }
    return reg;
  }

 private:
  using json = nlohmann::json;
  using Req = httplib::Request;
  using Res = httplib::Response;

  // ---- helpers -----------------------------------------------------------

  static void reply(Res& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void fail(Res& res, int status, const std::string& msg) { reply(res, status, json{{"error", msg}}); }

  std::string class_target(const std::optional<Task>& task) const {
    if (task && !task->target_label.empty()) return task->target_label;
    return models_.classifier->labels().front();
  }

  static std::optional<std::string> bearer(const Req& req) {
    const auto h = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    if (h.size() <= prefix.size() || h.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
    return h.substr(prefix.size());
  }

  bool is_admin_token(const std::string& tok) const {
    if (!opts_.admin_token.empty() && tok == opts_.admin_token) return true;
    auto u = store_->user_by_token(tok);
    return u && u->role == Role::administrator;
  }

  // 401 without a known token, 403 when the token belongs to someone else.
  bool authorize_user(const Req& req, Res& res, const std::string& user_id) const {
    auto tok = bearer(req);
    if (!tok) return fail(res, 401, "missing bearer token"), false;
    if (is_admin_token(*tok)) return true;
    auto u = store_->user_by_token(*tok);
    if (!u) return fail(res, 401, "unknown token"), false;
    if (u->id != user_id) return fail(res, 403, "token does not belong to this user"), false;
    return true;
  }

  bool authorize_admin(const Req& req, Res& res) const {
    auto tok = bearer(req);
    if (!tok || !is_admin_token(*tok)) return fail(res, 401, "administrator token required"), false;
    return true;
  }

  std::optional<Job> job_for(const Req& req, Res& res) const {
    const std::string id = req.matches[1];
    if (!store_->has_job(id)) return fail(res, 404, "unknown job '" + id + "'"), std::nullopt;
    Job job = store_->load_job(id);
    if (!authorize_user(req, res, job.assignee)) return std::nullopt;
    return job;
  }

  static std::optional<json> body_json(const Req& req, Res& res) {
    try {
      return json::parse(req.body.empty() ? std::string("{}") : req.body);
    } catch (const json::exception&) {
      fail(res, 400, "request body is not valid JSON");
      return std::nullopt;
    }
  }

  std::optional<json> salience_json(const Job& job, const std::optional<Task>& task) const {
    const Sentence& cur = job.history.current();
    if (!models_.classifier || cur.empty()) return std::nullopt;
    const SalienceVector sv = task && !task->target_label.empty()
                                  ? salience(cur, *models_.classifier, task->target_label)
                                  : salience(cur, *models_.classifier);
    return json{{"target", sv.target}, {"scores", sv.scores}};
  }

  json job_json(const Job& job, const std::optional<Task>& task) const {
    json revs = json::array();
    for (const auto& r : job.history.revisions()) revs.push_back(revision_to_json(r));
    json tokens = json::array();
    const auto& cur = job.history.current();
    for (std::size_t i = 0; i < cur.size(); ++i) tokens.push_back({{"index", i}, {"text", cur[i]}});
    json j{{"id", job.id},
           {"task_id", job.task_id},
           {"sentence_index", job.sentence_index},
           {"assignee", job.assignee},
           {"status", status_name(job.status)},
           {"original_text", detokenize(job.history.original())},
           {"current_text", detokenize(cur)},
           {"tokens", tokens},
           {"last_index", job.history.last_index()},
           {"revisions", revs}};
    auto sal = salience_json(job, task);
    j["salience"] = sal ? *sal : json(nullptr);
    return j;
  }

  ProviderRegistry registry_for(const std::optional<Task>& task) const {
    return build_registry(task && !task->providers.empty() ? task->providers : opts_.providers, task);
  }

  // Shared tail of /ops and /revert.
  void append_and_reply(const Job& job, const EditOp& op, long parent, Res& res) {
    const auto task = store_->find_task(job.task_id);
    const ProviderRegistry reg = registry_for(task);
    try {
      Job updated = store_->append_op(job.id, op, parent, [&](const Sentence& original, const Sentence& edited) {
        return reg.score_all(original, edited);
      });
      const Revision& rev = updated.history.revisions().back();
      json body = job_json(updated, task);
      body["revision"] = revision_to_json(rev);
      body["feedback"] = feedback_to_json(rev.feedback);
      reply(res, 200, body);
    } catch (const StaleParentError& e) {
      json body{{"error", e.what()}, {"current", job_json(e.current(), task)}};
      reply(res, 409, body);
    } catch (const PositionError& e) {
      fail(res, 422, e.what());
    } catch (const InvalidOpError& e) {
      fail(res, 422, e.what());
    } catch (const IndexError& e) {
      fail(res, 422, e.what());
    }
  }

  template <class F>
  auto guarded(F f) {
    return [f](const Req& req, Res& res) {
      try {
        f(req, res);
      } catch (const NotFoundError& e) {
        fail(res, 404, e.what());
      } catch (const ConflictError& e) {
        fail(res, 409, e.what());
      } catch (const ValidationError& e) {
        fail(res, 422, e.what());
      } catch (const FormatError& e) {
        fail(res, 422, e.what());
      } catch (const LabelError& e) {
        fail(res, 422, e.what());
      } catch (const json::exception& e) {
        fail(res, 422, e.what());
      } catch (const std::exception& e) {
        fail(res, 500, e.what());
      }
    };
  }

  // ---- routes ------------------------------------------------------------

  void routes() {
    server_.Get("/health", [](const Req&, Res& res) { reply(res, 200, json{{"status", "ok"}}); });

    server_.Get("/jobs", guarded([this](const Req& req, Res& res) {
      if (!req.has_param("user")) return fail(res, 400, "missing 'user' parameter");
      const std::string user = req.get_param_value("user");
      if (!store_->find_user(user)) return fail(res, 404, "unknown user '" + user + "'");
      if (!authorize_user(req, res, user)) return;
      json list = json::array();
      for (const auto& id : store_->job_ids({user, std::nullopt})) {
        const Job job = store_->load_job(id);
        list.push_back({{"id", job.id},
                        {"task_id", job.task_id},
                        {"sentence_index", job.sentence_index},
                        {"original_text", detokenize(job.history.original())},
                        {"status", status_name(job.status)},
                        {"revisions", job.history.size()}});
      }
      reply(res, 200, json{{"jobs", list}});
    }));

    server_.Get(R"(/jobs/([A-Za-z0-9_\-]+))", guarded([this](const Req& req, Res& res) {
      auto job = job_for(req, res);
      if (!job) return;
      reply(res, 200, job_json(*job, store_->find_task(job->task_id)));
    }));

    server_.Post(R"(/jobs/([A-Za-z0-9_\-]+)/ops)", guarded([this](const Req& req, Res& res) {
      auto job = job_for(req, res);
      if (!job) return;
      auto body = body_json(req, res);
      if (!body) return;
      if (!body->contains("op") || !body->contains("parent_revision_index"))
        return fail(res, 422, "body needs 'op' and 'parent_revision_index'");
      EditOp op;
      try {
        op = op_from_json(body->at("op"));
        if (body->contains("source")) op.source = parse_source(body->at("source").get<std::string>());
      } catch (const std::exception& e) {
        return fail(res, 422, e.what());
      }
      if (std::holds_alternative<RevertOp>(op.kind)) return fail(res, 422, "use /revert to roll back");
      append_and_reply(*job, op, body->at("parent_revision_index").get<long>(), res);
    }));

    server_.Post(R"(/jobs/([A-Za-z0-9_\-]+)/revert)", guarded([this](const Req& req, Res& res) {
      auto job = job_for(req, res);
      if (!job) return;
      auto body = body_json(req, res);
      if (!body) return;
      if (!body->contains("target_revision_index") || !body->contains("parent_revision_index"))
        return fail(res, 422, "body needs 'target_revision_index' and 'parent_revision_index'");
      append_and_reply(*job, ops::revert(body->at("target_revision_index").get<long>()),
                       body->at("parent_revision_index").get<long>(), res);
    }));

    server_.Get(R"(/jobs/([A-Za-z0-9_\-]+)/recommend)", guarded([this](const Req& req, Res& res) {
      auto job = job_for(req, res);
      if (!job) return;
      std::size_t position = 0, k = opts_.recommend_k;
      if (!req.has_param("position") || !detail::parse_number(req.get_param_value("position"), position))
        return fail(res, 422, "missing or invalid 'position'");
      if (req.has_param("k") && !detail::parse_number(req.get_param_value("k"), k))
        return fail(res, 422, "invalid 'k'");
      const std::string kind = req.has_param("kind") ? req.get_param_value("kind") : "similarity";
      const Sentence& cur = job->history.current();
      if (position >= cur.size()) return fail(res, 422, "position outside the current sentence");
      std::vector<Recommendation> recs;
      if (kind == "similarity") {
        if (!models_.embeddings) return fail(res, 422, "no embeddings loaded");
        recs = similar_words(cur[position], k, *models_.embeddings);
      } else if (kind == "lm") {
        if (!models_.lm) return fail(res, 422, "no language model loaded");
        recs = lm_predict(cur, position, k, *models_.lm);
      } else {
        return fail(res, 422, "kind must be 'similarity' or 'lm'");
      }
      json list = json::array();
      for (const auto& r : recs)
        list.push_back({{"word", r.word}, {"score", r.score}, {"provider", recommend_kind_name(r.provider)}});
      reply(res, 200, json{{"position", position}, {"kind", kind}, {"recommendations", list}});
    }));

    auto status_route = [this](JobStatus status) {
      return guarded([this, status](const Req& req, Res& res) {
        auto job = job_for(req, res);
        if (!job) return;
        Job updated = store_->set_status(job->id, status);
        reply(res, 200, json{{"id", updated.id}, {"status", status_name(updated.status)}});
      });
    };
    server_.Post(R"(/jobs/([A-Za-z0-9_\-]+)/complete)", status_route(JobStatus::complete));
    server_.Post(R"(/jobs/([A-Za-z0-9_\-]+)/reopen)", status_route(JobStatus::incomplete));

    server_.Post("/users", guarded([this](const Req& req, Res& res) {
      if (!authorize_admin(req, res)) return;
      auto body = body_json(req, res);
      if (!body) return;
      User u{body->value("id", std::string{}), body->value("name", std::string{}),
             parse_role(body->value("role", std::string{"annotator"})), body->value("token", std::string{})};
      u = store_->create_user(std::move(u));
      reply(res, 201, json{{"id", u.id}, {"name", u.name}, {"role", role_name(u.role)}, {"token", u.token}});
    }));

    server_.Post("/tasks", guarded([this](const Req& req, Res& res) {
      if (!authorize_admin(req, res)) return;
      auto body = body_json(req, res);
      if (!body) return;
      Task t;
      try {
        t.id = body->value("id", std::string{});
        t.title = body->value("title", std::string{});
        t.sentences = body->value("sentences", std::vector<std::string>{});
        t.providers = body->value("providers", std::vector<std::string>{});
        t.model_refs = body->value("models", std::map<std::string, std::string>{});
        t.labels = body->value("labels", std::vector<std::string>{});
        t.target_label = body->value("target_label", std::string{});
      } catch (const json::exception& e) {
        return fail(res, 422, e.what());
      }
      if (!t.providers.empty()) build_registry(t.providers, t);
      if (!t.target_label.empty() && models_.classifier) models_.classifier->label_index(t.target_label);
      t = store_->create_task(std::move(t));
      reply(res, 201, json{{"id", t.id}, {"sentences", t.sentences.size()}});
    }));

    server_.Post(R"(/tasks/([A-Za-z0-9_]+)/assign)", guarded([this](const Req& req, Res& res) {
      if (!authorize_admin(req, res)) return;
      auto body = body_json(req, res);
      if (!body) return;
      const auto users = body->value("users", std::vector<std::string>{});
      const auto jobs = store_->assign_jobs(req.matches[1], users);
      json ids = json::array();
      for (const auto& j : jobs) ids.push_back(j.id);
      reply(res, 201, json{{"count", jobs.size()}, {"jobs", ids}});
    }));
  }

  std::shared_ptr<Store> store_;
  Models models_;
  Options opts_;
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace revtrace
