#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace shellsig {

enum class EntryType { tool_call, plan, empty };

std::string_view entry_type_name(EntryType t);
EntryType entry_type_from_name(std::string_view name);  // throws SchemaError

// One turn of an agent session transcript.
struct Entry {
  std::int64_t turn = 0;
  std::string command;    // shell command issued this turn ("" when none)
  std::string reasoning;  // free-text thinking, if the scaffold logs it
  std::string output;     // captured command output
  EntryType type = EntryType::tool_call;
};

enum class DatasetTag { clean, dpi };

// A full session transcript plus labels. `family` is the model-family label
// used for supervision; `scaffold` identifies the agent harness.
struct Session {
  std::string session_id;
  std::optional<std::string> family;
  std::optional<std::string> scaffold;
  DatasetTag dataset = DatasetTag::clean;
  bool is_dpi = false;
  std::string model;
  double elapsed_seconds = 0.0;
  std::int64_t num_bash_entries = 0;
  std::vector<Entry> entries;

  // Load-time diagnostics (count mismatches etc.). Not serialized.
  std::vector<std::string> warnings;
};

// Parses one session from JSON text.
//   - malformed JSON            -> ParseError
//   - missing session_id/entries-> SchemaError
//   - unknown entry type string -> SchemaError (names the value)
// Unknown keys are ignored. Missing optional fields default (reasoning and
// output to "", family/scaffold to absent). A stored num_bash_entries that
// disagrees with the actual tool_call count becomes a warning, not an error.
Session parse_session(std::string_view raw);

// Inverse of parse_session (warnings are not emitted).
std::string serialize_session(const Session& s);

// Number of non-empty tool_call commands.
std::int64_t command_count(const Session& s);

// The classification document: non-empty tool_call commands joined by "\n",
// in transcript order. Reasoning, outputs, plan and empty entries are
// excluded by design; only agent-issued commands carry the fingerprint.
std::string command_document(const Session& s);

// A labeled collection of sessions. `families` and `scaffolds` are the
// sorted unique label sets actually present.
struct Corpus {
  std::vector<Session> sessions;
  std::vector<std::string> families;
  std::vector<std::string> scaffolds;
};

// Builds a Corpus from sessions: rejects duplicate session ids
// (ValidationError naming the id) and derives the label sets.
Corpus make_corpus(std::vector<Session> sessions);

struct LoadReport {
  std::size_t files_read = 0;
  std::size_t sessions_loaded = 0;
  // (path, session_id) of sessions discarded for having zero commands.
  std::vector<std::pair<std::string, std::string>> discarded;
  std::vector<std::string> warnings;
};

struct LoadResult {
  Corpus corpus;
  LoadReport report;
};

// Loads every path (sorted order), discarding sessions whose classification
// document is empty; such discards are reported, not silently dropped.
// Duplicate session ids across files are an error naming both paths.
LoadResult load_corpus(std::vector<std::filesystem::path> paths);

// Convenience: all *.json files under dir (non-recursive), sorted.
std::vector<std::filesystem::path> session_files_in(const std::filesystem::path& dir);

}  // namespace shellsig
