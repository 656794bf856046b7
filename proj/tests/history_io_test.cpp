#include <gtest/gtest.h>

#include <sstream>

#include "revtrace/history_io.hpp"
#include "test_support.hpp"

using namespace revtrace;
using namespace revtrace::testing;

namespace {

Timestamp at(int seconds) { return parse_rfc3339("2024-05-01T10:00:00Z") + std::chrono::seconds(seconds); }

std::string dump(const std::vector<ExportedJob>& jobs) {
  std::ostringstream out;
  for (const auto& j : jobs) write_block(out, j);
  return out.str();
}

}  // namespace

TEST(Timestamp, FormatsWithMicroseconds) {
  const auto t = parse_rfc3339("2024-05-01T10:00:07.000123Z");
  EXPECT_EQ(format_rfc3339(t), "2024-05-01T10:00:07.000123Z");
}

TEST(Timestamp, AcceptsOffsets) {
  EXPECT_EQ(parse_rfc3339("2024-05-01T12:30:00+02:30"), parse_rfc3339("2024-05-01T10:00:00Z"));
  EXPECT_EQ(parse_rfc3339("2024-05-01T10:00:00.5Z"), parse_rfc3339("2024-05-01T10:00:00.500000Z"));
}

TEST(Timestamp, RejectsGarbage) {
  EXPECT_THROW(parse_rfc3339("yesterday"), FormatError);
  EXPECT_THROW(parse_rfc3339("2024-05-01 10:00:00"), FormatError);
}

TEST(OpJson, RoundTripsEveryKind) {
  const std::vector<EditOp> all = {
      ops::insert(2, "x"),
      ops::insert_phrase(0, {"in", "Los", "Angeles"}, OpSource::similarity_recommended),
      ops::erase(1, 2),
      ops::substitute(3, "love", OpSource::lm_recommended),
      ops::substitute_span(0, 4, {"Family"}, OpSource::lm_recommended),
      ops::reorder(0, 3),
      ops::replace_sentence("All family members love it ."),
      ops::revert(-1),
  };
  for (const auto& op : all) EXPECT_EQ(op_from_json(op_to_json(op)), op) << op_to_json(op).dump();
}

TEST(OpJson, ShorthandsAndDefaults) {
  const auto op = op_from_json(nlohmann::json::parse(R"({"kind":"substitute","position":4,"token":"love"})"));
  EXPECT_EQ(op, ops::substitute(4, "love"));
  EXPECT_THROW(op_from_json(nlohmann::json::parse(R"({"kind":"teleport"})")), FormatError);
  EXPECT_THROW(op_from_json(nlohmann::json::parse(R"({"kind":"insert","position":0})")), FormatError);
  EXPECT_THROW(op_from_json(nlohmann::json::parse(R"([1,2])")), FormatError);
}

TEST(Export, Table1FixtureReplays) {
  const auto jobs = read_export_file(fixture("table1.jsonl"));
  ASSERT_EQ(jobs.size(), 2u);
  EXPECT_EQ(jobs[0].header.job_id, "table1-0-rh1");
  EXPECT_EQ(jobs[1].header.assignee, "rh2");
  for (const auto& [job, texts] : {std::pair{jobs[0], kRh1Texts}, std::pair{jobs[1], kRh2Texts}}) {
    ASSERT_EQ(job.history.size(), texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i)
      EXPECT_EQ(detokenize(job.history.revisions()[i].result), detokenize(tokenize(texts[i])));
  }
}

TEST(Export, FixtureIsCanonical) {
  const auto text = read_file(fixture("table1.jsonl"));
  std::istringstream in(text);
  EXPECT_EQ(dump(read_export(in)), text);
}

TEST(Export, ReplaceSentenceCarriesScript) {
  RevisionHistory h(tokenize("a b c"));
  h.append(ops::replace_sentence("a x c d"), {{"ed", 2.0}}, at(1));
  const std::string text = dump({{JobHeader{"t-0-u", "t", 0, "u", JobStatus::incomplete, "a b c"}, h}});
  EXPECT_NE(text.find("\"script\":["), std::string::npos);
  std::istringstream in(text);
  const auto back = read_export(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].history, h);
}

TEST(Export, NullFeedbackSurvives) {
  RevisionHistory h(tokenize("a b"));
  h.append(ops::erase(0), {{"ed", 1.0}, {"wmd", std::nullopt}}, at(2));
  const std::string text = dump({{JobHeader{"t-0-u", "t", 0, "u", JobStatus::complete, "a b"}, h}});
  EXPECT_NE(text.find("\"wmd\":null"), std::string::npos);
  std::istringstream in(text);
  EXPECT_EQ(read_export(in)[0].history.revisions()[0].feedback, h.revisions()[0].feedback);
}

TEST(Export, EmptyStreamHasNoJobs) {
  std::istringstream in("");
  EXPECT_TRUE(read_export(in).empty());
}

namespace {

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    read_export(in);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Export, ErrorsNameTheLine) {
  auto lines = read_file(fixture("table1.jsonl"));
  // Break line 3 by tampering with its result text.
  std::vector<std::string> rows;
  std::istringstream in(lines);
  for (std::string l; std::getline(in, l);) rows.push_back(l);
  const auto pos = rows[2].find("Family enjoy Hilton");
  ASSERT_NE(pos, std::string::npos);
  rows[2].replace(pos, 6, "Friend");
  std::string tampered;
  for (const auto& r : rows) tampered += r + "\n";
  EXPECT_EQ(error_of(tampered).rfind("line 3:", 0), 0u) << error_of(tampered);

  EXPECT_EQ(error_of("{\"record\":\"revision\"}\n").rfind("line 1:", 0), 0u);
  EXPECT_EQ(error_of(rows[0] + "\nnot json\n").rfind("line 2:", 0), 0u);
  EXPECT_EQ(error_of(rows[0] + "\n" + rows[2] + "\n").rfind("line 2:", 0), 0u);
}
