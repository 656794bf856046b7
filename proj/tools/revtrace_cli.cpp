// Administration and revision-history analysis.
//
// Exit codes: 0 ok, 1 domain or API error, 2 usage error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "revtrace/analysis.hpp"
#include "revtrace/store.hpp"

using namespace revtrace;
using json = nlohmann::json;

namespace {

struct Target {
  std::string store;
  std::string server;
  std::string token;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_target_flags(CLI::App* cmd, Target& t) {
  cmd->add_option("--store", t.store, "Store directory (offline mode)");
  cmd->add_option("--server", t.server, "Service base URL, e.g. http://127.0.0.1:8080");
  cmd->add_option("--token", t.token, "Administrator bearer token for --server");
}

void check_target(const Target& t) {
  if (t.store.empty() == t.server.empty()) throw UsageError("give exactly one of --store or --server");
}

// POSTs to the admin API; non-2xx responses become errors carrying the
// server's message.
json post_admin(const Target& t, const std::string& path, const json& body) {
  httplib::Client client(t.server);
  client.set_connection_timeout(5);
  httplib::Headers headers;
  if (!t.token.empty()) headers.emplace("Authorization", "Bearer " + t.token);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw Error("cannot reach " + t.server + ": " + httplib::to_string(res.error()));
  json reply = json::parse(res->body, nullptr, false);
  if (res->status / 100 != 2) {
    const std::string msg = reply.is_object() && reply.contains("error") ? reply["error"].get<std::string>() : res->body;
    throw Error("server returned " + std::to_string(res->status) + ": " + msg);
  }
  return reply;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<ExportedJob> load_export(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return read_export(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"revtrace administration and analysis"};
  app.require_subcommand(1);

  std::string format = "table";
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"table", "tsv"}));
  auto fmt = [&] { return format == "tsv" ? ReportFormat::tsv : ReportFormat::table; };

  Target target;
  std::string export_file;

  // ---- administration ------------------------------------------------------

  std::string user_id, user_name, user_role = "annotator", user_token;
  auto* create_user = app.add_subcommand("create-user", "Create a user and print its id and token");
  add_target_flags(create_user, target);
  create_user->add_option("--id", user_id)->required();
  create_user->add_option("--name", user_name);
  create_user->add_option("--role", user_role)->check(CLI::IsMember({"annotator", "administrator"}));
  create_user->add_option("--user-token", user_token, "Token to give the new user (random if omitted)");

  std::string task_id, task_title, sentences_file, target_label;
  std::vector<std::string> task_providers, task_labels;
  auto* create_task = app.add_subcommand("create-task", "Create a task from a file of sentences, one per line");
  add_target_flags(create_task, target);
  create_task->add_option("--id", task_id)->required();
  create_task->add_option("--title", task_title);
  create_task->add_option("--sentences", sentences_file)->required();
  create_task->add_option("--providers", task_providers)->delimiter(',');
  create_task->add_option("--labels", task_labels)->delimiter(',');
  create_task->add_option("--target-label", target_label);

  std::vector<std::string> assign_users;
  auto* assign = app.add_subcommand("assign", "Assign every sentence of a task to each user");
  add_target_flags(assign, target);
  assign->add_option("--task", task_id)->required();
  assign->add_option("--users", assign_users)->delimiter(',')->required();

  std::string filter_user, filter_task, out_file;
  auto* export_cmd = app.add_subcommand("export", "Write revision histories from a store");
  export_cmd->add_option("--store", target.store)->required();
  export_cmd->add_option("--user", filter_user);
  export_cmd->add_option("--task", filter_task);
  export_cmd->add_option("--out", out_file, "Output file (default stdout)");

  auto* import_cmd = app.add_subcommand("import", "Load revision histories into a store");
  import_cmd->add_option("--store", target.store)->required();
  import_cmd->add_option("--export", export_file)->required();

  // ---- model training ------------------------------------------------------

  std::string corpus_file;
  int lm_order = 3;
  double smoothing = 1.0;
  auto* train_lm = app.add_subcommand("train-lm", "Train an n-gram model from one sentence per line");
  train_lm->add_option("--corpus", corpus_file)->required();
  train_lm->add_option("--order", lm_order);
  train_lm->add_option("--alpha", smoothing);
  train_lm->add_option("--out", out_file)->required();

  auto* train_clf = app.add_subcommand("train-classifier", "Train a naive Bayes model from label<TAB>text lines");
  train_clf->add_option("--corpus", corpus_file)->required();
  train_clf->add_option("--beta", smoothing);
  train_clf->add_option("--out", out_file)->required();

  // ---- analysis ------------------------------------------------------------

  auto* op_dist = app.add_subcommand("op-distribution", "Count revisions per operation category");
  op_dist->add_option("--export", export_file)->required();

  auto* engagement = app.add_subcommand("engagement-report", "Share of jobs edited word by word, ops per job");
  engagement->add_option("--export", export_file)->required();

  std::string classifier_file;
  auto* entropy_cmd = app.add_subcommand("entropy-report", "Mean posterior entropy of originals and finals");
  entropy_cmd->add_option("--export", export_file)->required();
  auto* clf_opt = entropy_cmd->add_option("--classifier", classifier_file, "Saved classifier");
  auto* corpus_opt = entropy_cmd->add_option("--classifier-corpus", corpus_file, "label<TAB>text training file");
  entropy_cmd->add_option("--beta", smoothing);
  clf_opt->excludes(corpus_opt);

  std::vector<std::string> filters;
  auto* refs = app.add_subcommand("reference-count", "Distinct candidate references per job");
  refs->add_option("--export", export_file)->required();
  refs->add_option("--filter", filters, "Heuristic feedback threshold such as ppl<=120 (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*create_user) {
      check_target(target);
      User u{user_id, user_name, parse_role(user_role), user_token};
      if (!target.store.empty()) {
        u = Store(target.store).create_user(u);
      } else {
        const auto r = post_admin(target, "/users",
                                  json{{"id", u.id}, {"name", u.name}, {"role", user_role}, {"token", u.token}});
        u.token = r.at("token").get<std::string>();
      }
      std::cout << u.id << '\t' << u.token << '\n';
    } else if (*create_task) {
      check_target(target);
      Task t{task_id, task_title, read_lines(sentences_file), task_providers, {}, task_labels, target_label};
      if (!target.store.empty()) {
        Store(target.store).create_task(t);
      } else {
        post_admin(target, "/tasks",
                   json{{"id", t.id},
                        {"title", t.title},
                        {"sentences", t.sentences},
                        {"providers", t.providers},
                        {"labels", t.labels},
                        {"target_label", t.target_label}});
      }
      std::cout << t.id << '\t' << t.sentences.size() << '\n';
    } else if (*assign) {
      check_target(target);
      std::size_t count = 0;
      if (!target.store.empty())
        count = Store(target.store).assign_jobs(task_id, assign_users).size();
      else
        count = post_admin(target, "/tasks/" + task_id + "/assign", json{{"users", assign_users}})
                    .at("count")
                    .get<std::size_t>();
      std::cout << count << '\n';
    } else if (*export_cmd) {
      ExportFilter f;
      if (!filter_user.empty()) f.user = filter_user;
      if (!filter_task.empty()) f.task = filter_task;
      Store store(target.store);
      if (out_file.empty()) {
        store.export_histories(std::cout, f);
      } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw Error("cannot write " + out_file);
        store.export_histories(out, f);
      }
    } else if (*import_cmd) {
      std::ifstream in(export_file);
      if (!in) throw NotFoundError("cannot open " + export_file);
      std::cout << Store(target.store).import_histories(in) << '\n';
    } else if (*train_lm) {
      auto lm = train_ngram(read_lines(corpus_file), lm_order, smoothing);
      std::ofstream out(out_file);
      lm.save(out);
    } else if (*train_clf) {
      std::ifstream in(corpus_file);
      if (!in) throw NotFoundError("cannot open " + corpus_file);
      auto clf = train_classifier(read_labeled_corpus(in), smoothing);
      std::ofstream out(out_file);
      clf.save(out);
    } else if (*op_dist) {
      render(std::cout, op_distribution(load_export(export_file)), fmt());
    } else if (*engagement) {
      render(std::cout, engagement_report(load_export(export_file)), fmt());
    } else if (*entropy_cmd) {
      if (classifier_file.empty() && corpus_file.empty())
        throw UsageError("entropy-report needs --classifier or --classifier-corpus");
      std::optional<NaiveBayesClassifier> clf;
      if (!classifier_file.empty()) {
        std::ifstream in(classifier_file);
        if (!in) throw NotFoundError("cannot open " + classifier_file);
        clf = NaiveBayesClassifier::load(in);
      } else {
        std::ifstream in(corpus_file);
        if (!in) throw NotFoundError("cannot open " + corpus_file);
        clf = train_classifier(read_labeled_corpus(in), smoothing);
      }
      const auto jobs = load_export(export_file);
      if (jobs.empty()) std::cerr << "warning: export contains no jobs\n";
      render(std::cout, entropy_report(jobs, *clf), fmt());
    } else if (*refs) {
      std::vector<FeedbackThreshold> parsed;
      for (const auto& f : filters) parsed.push_back(FeedbackThreshold::parse(f));
      if (!parsed.empty()) std::cerr << "note: feedback filters are a heuristic, not human validity judgments\n";
      render(std::cout, reference_count(load_export(export_file), parsed), fmt());
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
