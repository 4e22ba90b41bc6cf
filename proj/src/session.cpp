#include "shellsig/session.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "shellsig/errors.hpp"
#include "shellsig/jsonio.hpp"

namespace shellsig {

std::string_view entry_type_name(EntryType t) {
  switch (t) {
    case EntryType::tool_call: return "tool_call";
    case EntryType::plan: return "plan";
    case EntryType::empty: return "empty";
  }
  return "tool_call";
}

EntryType entry_type_from_name(std::string_view name) {
  if (name == "tool_call") return EntryType::tool_call;
  if (name == "plan") return EntryType::plan;
  if (name == "empty") return EntryType::empty;
  throw SchemaError("unknown entry type: '" + std::string(name) + "'");
}

namespace {

std::string get_string(const Json& j, const char* key, const std::string& fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

Session parse_session(std::string_view raw) {
  Json j = parse_json(raw, "session");
  if (!j.is_object()) throw SchemaError("session document must be a JSON object");

  Session s;
  if (!j.contains("session_id") || !j["session_id"].is_string())
    throw SchemaError("session is missing required field 'session_id'");
  s.session_id = j["session_id"].get<std::string>();

  if (!j.contains("entries") || !j["entries"].is_array())
    throw SchemaError("session is missing required field 'entries'");

  if (j.contains("family") && j["family"].is_string())
    s.family = j["family"].get<std::string>();
  if (j.contains("scaffold") && j["scaffold"].is_string())
    s.scaffold = j["scaffold"].get<std::string>();

  std::string dataset = get_string(j, "dataset", "clean");
  if (dataset == "clean") {
    s.dataset = DatasetTag::clean;
  } else if (dataset == "dpi") {
    s.dataset = DatasetTag::dpi;
  } else {
    throw SchemaError("unknown dataset tag: '" + dataset + "'");
  }
  s.is_dpi = (s.dataset == DatasetTag::dpi);
  if (j.contains("is_dpi") && j["is_dpi"].is_boolean()) {
    bool claimed = j["is_dpi"].get<bool>();
    if (claimed != s.is_dpi) {
      s.warnings.push_back("session '" + s.session_id +
                           "': is_dpi flag disagrees with dataset tag; dataset wins");
    }
  }

  s.model = get_string(j, "model", "");
  if (j.contains("elapsed_seconds") && j["elapsed_seconds"].is_number())
    s.elapsed_seconds = j["elapsed_seconds"].get<double>();

  std::int64_t turn_prev = std::numeric_limits<std::int64_t>::min();
  for (const auto& je : j["entries"]) {
    if (!je.is_object()) throw SchemaError("entry must be a JSON object");
    Entry e;
    if (je.contains("turn") && je["turn"].is_number_integer())
      e.turn = je["turn"].get<std::int64_t>();
    e.command = get_string(je, "command", "");
    e.reasoning = get_string(je, "reasoning", "");
    e.output = get_string(je, "output", "");
    e.type = entry_type_from_name(get_string(je, "type", "tool_call"));
    if (e.type == EntryType::empty && !e.command.empty()) {
      s.warnings.push_back("session '" + s.session_id + "': entry at turn " +
                           std::to_string(e.turn) +
                           " typed 'empty' carried a command; command cleared");
      e.command.clear();
    }
    if (e.turn < turn_prev) {
      s.warnings.push_back("session '" + s.session_id +
                           "': turn numbers decrease at turn " + std::to_string(e.turn));
    }
    turn_prev = e.turn;
    s.entries.push_back(std::move(e));
  }

  std::int64_t actual = command_count(s);
  if (j.contains("num_bash_entries") && j["num_bash_entries"].is_number_integer()) {
    s.num_bash_entries = j["num_bash_entries"].get<std::int64_t>();
    if (s.num_bash_entries != actual) {
      s.warnings.push_back("session '" + s.session_id + "': num_bash_entries says " +
                           std::to_string(s.num_bash_entries) + " but " +
                           std::to_string(actual) + " tool_call commands present");
    }
  } else {
    s.num_bash_entries = actual;
  }
  return s;
}

std::string serialize_session(const Session& s) {
  Json j;
  j["session_id"] = s.session_id;
  if (s.family) j["family"] = *s.family;
  if (s.scaffold) j["scaffold"] = *s.scaffold;
  j["dataset"] = (s.dataset == DatasetTag::dpi) ? "dpi" : "clean";
  j["is_dpi"] = s.is_dpi;
  j["model"] = s.model;
  j["elapsed_seconds"] = s.elapsed_seconds;
  j["num_bash_entries"] = s.num_bash_entries;
  j["entries"] = Json::array();
  for (const Entry& e : s.entries) {
    Json je;
    je["turn"] = e.turn;
    je["command"] = e.command;
    je["reasoning"] = e.reasoning;
    je["output"] = e.output;
    je["type"] = std::string(entry_type_name(e.type));
    j["entries"].push_back(std::move(je));
  }
  return j.dump(2) + "\n";
}

std::int64_t command_count(const Session& s) {
  std::int64_t n = 0;
  for (const Entry& e : s.entries)
    if (e.type == EntryType::tool_call && !e.command.empty()) ++n;
  return n;
}

std::string command_document(const Session& s) {
  std::string doc;
  for (const Entry& e : s.entries) {
    if (e.type != EntryType::tool_call || e.command.empty()) continue;
    if (!doc.empty()) doc += '\n';
    doc += e.command;
  }
  return doc;
}

Corpus make_corpus(std::vector<Session> sessions) {
  std::set<std::string> ids;
  std::set<std::string> families;
  std::set<std::string> scaffolds;
  for (const Session& s : sessions) {
    if (!ids.insert(s.session_id).second)
      throw ValidationError("duplicate session_id: '" + s.session_id + "'");
    if (s.family) families.insert(*s.family);
    if (s.scaffold) scaffolds.insert(*s.scaffold);
  }
  Corpus c;
  c.sessions = std::move(sessions);
  c.families.assign(families.begin(), families.end());
  c.scaffolds.assign(scaffolds.begin(), scaffolds.end());
  return c;
}

LoadResult load_corpus(std::vector<std::filesystem::path> paths) {
  std::sort(paths.begin(), paths.end());
  LoadResult result;
  std::vector<Session> kept;
  std::map<std::string, std::string> id_to_path;
  for (const auto& path : paths) {
    std::string raw = read_file(path);
    Session s;
    try {
      s = parse_session(raw);
    } catch (const Error& e) {
      throw SchemaError(path.string() + ": " + e.what());
    }
    ++result.report.files_read;
    auto [it, fresh] = id_to_path.emplace(s.session_id, path.string());
    if (!fresh) {
      throw ValidationError("duplicate session_id '" + s.session_id + "' in " +
                            it->second + " and " + path.string());
    }
    for (const auto& w : s.warnings) result.report.warnings.push_back(w);
    if (command_count(s) == 0) {
      result.report.discarded.emplace_back(path.string(), s.session_id);
      continue;
    }
    kept.push_back(std::move(s));
  }
  result.corpus = make_corpus(std::move(kept));
  result.report.sessions_loaded = result.corpus.sessions.size();
  return result;
}

std::vector<std::filesystem::path> session_files_in(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace shellsig
