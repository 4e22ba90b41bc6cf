#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "shellsig/errors.hpp"
#include "shellsig/jsonio.hpp"
#include "shellsig/session.hpp"

using namespace shellsig;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& rel) {
  return read_file(fs::path(FIXTURES_DIR) / rel);
}

fs::path temp_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("shellsig_test_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void put(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("sample session document parses with expected fields") {
  Session s = parse_session(fixture("sessions/sample_session.json"));
  CHECK(s.session_id == "cc_deepseek_1774076834_041");
  REQUIRE(s.family.has_value());
  CHECK(*s.family == "deepseek");
  REQUIRE(s.scaffold.has_value());
  CHECK(*s.scaffold == "CC");
  CHECK(s.dataset == DatasetTag::clean);
  CHECK_FALSE(s.is_dpi);
  CHECK(s.model == "deepseek/deepseek-v3.2");
  CHECK(s.elapsed_seconds == doctest::Approx(457.4));
  REQUIRE(s.entries.size() == 3);
  CHECK(s.entries[0].type == EntryType::tool_call);
  CHECK(s.entries[1].type == EntryType::empty);
  CHECK(s.entries[2].command == "find /home -type f 2>/dev/null");
  CHECK(s.entries[2].reasoning == "");  // absent key defaults
  CHECK(command_count(s) == 2);
  CHECK(command_document(s) == "whoami && pwd\nfind /home -type f 2>/dev/null");
  // stored count (79) disagrees with the 2 actual tool_calls
  CHECK(s.num_bash_entries == 79);
  REQUIRE_FALSE(s.warnings.empty());
}

TEST_CASE("session round-trips through serialize/parse to structural equality") {
  Session a = parse_session(fixture("sessions/sample_session.json"));
  std::string text = serialize_session(a);
  Session b = parse_session(text);
  CHECK(b.session_id == a.session_id);
  CHECK(b.family == a.family);
  CHECK(b.scaffold == a.scaffold);
  CHECK(b.dataset == a.dataset);
  CHECK(b.is_dpi == a.is_dpi);
  CHECK(b.model == a.model);
  CHECK(b.elapsed_seconds == a.elapsed_seconds);
  CHECK(b.num_bash_entries == a.num_bash_entries);
  REQUIRE(b.entries.size() == a.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(b.entries[i].turn == a.entries[i].turn);
    CHECK(b.entries[i].command == a.entries[i].command);
    CHECK(b.entries[i].reasoning == a.entries[i].reasoning);
    CHECK(b.entries[i].output == a.entries[i].output);
    CHECK(b.entries[i].type == a.entries[i].type);
  }
  // serialization is a fixed point
  CHECK(serialize_session(b) == text);
}

TEST_CASE("parse errors carry the right exception types") {
  CHECK_THROWS_AS(parse_session("{ not json"), ParseError);
  CHECK_THROWS_AS(parse_session(R"({"entries": []})"), SchemaError);  // no id
  CHECK_THROWS_AS(parse_session(R"({"session_id": "x"})"), SchemaError);
  CHECK_THROWS_AS(
      parse_session(
          R"({"session_id":"x","entries":[{"turn":0,"type":"banana"}]})"),
      SchemaError);
  try {
    parse_session(R"({"session_id":"x","entries":[{"turn":0,"type":"banana"}]})");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("banana") != std::string::npos);
  }
}

TEST_CASE("unknown top-level keys are ignored") {
  Session s = parse_session(
      R"({"session_id":"x","mystery":42,"entries":[{"turn":0,"command":"ls","type":"tool_call"}]})");
  CHECK(s.session_id == "x");
  CHECK(s.entries.size() == 1);
  CHECK_FALSE(s.family.has_value());
  CHECK_FALSE(s.scaffold.has_value());
}

TEST_CASE("dataset tag wins over a contradictory is_dpi flag") {
  Session s = parse_session(
      R"({"session_id":"x","dataset":"dpi","is_dpi":false,
          "entries":[{"turn":0,"command":"ls","type":"tool_call"}]})");
  CHECK(s.dataset == DatasetTag::dpi);
  CHECK(s.is_dpi);  // reconciled to the tag
  REQUIRE_FALSE(s.warnings.empty());
}

TEST_CASE("empty-type entry with a command has the command cleared") {
  Session s = parse_session(
      R"({"session_id":"x","entries":[
           {"turn":0,"command":"ls","type":"empty"},
           {"turn":1,"command":"pwd","type":"tool_call"}]})");
  CHECK(s.entries[0].command == "");
  CHECK(command_count(s) == 1);
  bool warned = false;
  for (const auto& w : s.warnings)
    if (w.find("empty") != std::string::npos) warned = true;
  CHECK(warned);
}

TEST_CASE("non-monotone turn numbers warn but still parse") {
  Session s = parse_session(
      R"({"session_id":"x","entries":[
           {"turn":5,"command":"ls","type":"tool_call"},
           {"turn":2,"command":"pwd","type":"tool_call"}]})");
  CHECK(s.entries.size() == 2);
  CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("missing num_bash_entries is computed from the transcript") {
  Session s = parse_session(
      R"({"session_id":"x","entries":[
           {"turn":0,"command":"ls","type":"tool_call"},
           {"turn":1,"command":"","type":"plan"},
           {"turn":2,"command":"pwd","type":"tool_call"}]})");
  CHECK(s.num_bash_entries == 2);
  CHECK(s.warnings.empty());
}

TEST_CASE("plan and empty entries never contribute to the document") {
  Session s = parse_session(
      R"({"session_id":"x","entries":[
           {"turn":0,"command":"ls -la","type":"tool_call"},
           {"turn":1,"command":"","type":"plan","reasoning":"scan /etc next"},
           {"turn":2,"command":"","type":"tool_call"},
           {"turn":3,"command":"cat /etc/passwd","type":"tool_call"}]})");
  CHECK(command_document(s) == "ls -la\ncat /etc/passwd");
  CHECK(command_count(s) == 2);
}

TEST_CASE("make_corpus derives sorted label sets and rejects duplicate ids") {
  Session a, b, c;
  a.session_id = "a";
  a.family = "zeta";
  a.scaffold = "S2";
  b.session_id = "b";
  b.family = "alpha";
  b.scaffold = "S1";
  c.session_id = "c";
  c.family = "alpha";
  Corpus corpus = make_corpus({a, b, c});
  CHECK(corpus.families == std::vector<std::string>{"alpha", "zeta"});
  CHECK(corpus.scaffolds == std::vector<std::string>{"S1", "S2"});

  Session dup = a;
  CHECK_THROWS_AS(make_corpus({a, dup}), ValidationError);
}

TEST_CASE("load_corpus reads sorted files, discards zero-command sessions") {
  fs::path dir = temp_dir("load");
  put(dir / "b.json",
      R"({"session_id":"s2","family":"f","entries":[{"turn":0,"command":"pwd","type":"tool_call"}]})");
  put(dir / "a.json",
      R"({"session_id":"s1","family":"f","entries":[{"turn":0,"command":"ls","type":"tool_call"}]})");
  put(dir / "c.json",
      R"({"session_id":"s3","family":"f","entries":[{"turn":0,"command":"","type":"plan"}]})");
  put(dir / "notes.txt", "not a session");

  LoadResult r = load_corpus(session_files_in(dir));
  CHECK(r.report.files_read == 3);
  CHECK(r.report.sessions_loaded == 2);
  REQUIRE(r.corpus.sessions.size() == 2);
  // sorted by path, so a.json's session comes first
  CHECK(r.corpus.sessions[0].session_id == "s1");
  CHECK(r.corpus.sessions[1].session_id == "s2");
  REQUIRE(r.report.discarded.size() == 1);
  CHECK(r.report.discarded[0].second == "s3");
  CHECK(r.report.discarded[0].first.find("c.json") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("load_corpus names both files on a duplicate session id") {
  fs::path dir = temp_dir("dup");
  put(dir / "x.json",
      R"({"session_id":"same","entries":[{"turn":0,"command":"ls","type":"tool_call"}]})");
  put(dir / "y.json",
      R"({"session_id":"same","entries":[{"turn":0,"command":"pwd","type":"tool_call"}]})");
  try {
    load_corpus(session_files_in(dir));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("x.json") != std::string::npos);
    CHECK(msg.find("y.json") != std::string::npos);
    CHECK(msg.find("same") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("load_corpus prefixes parse failures with the offending path") {
  fs::path dir = temp_dir("badfile");
  put(dir / "broken.json", "{ nope");
  try {
    load_corpus(session_files_in(dir));
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("entry type names round-trip and reject unknowns") {
  CHECK(entry_type_name(EntryType::tool_call) == "tool_call");
  CHECK(entry_type_name(EntryType::plan) == "plan");
  CHECK(entry_type_name(EntryType::empty) == "empty");
  CHECK(entry_type_from_name("plan") == EntryType::plan);
  CHECK_THROWS_AS(entry_type_from_name("shell"), SchemaError);
}
