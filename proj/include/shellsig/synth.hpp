#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shellsig/jsonio.hpp"
#include "shellsig/session.hpp"

namespace shellsig {

struct WeightedCommand {
  std::string text;
  double weight = 1.0;
};

// Generative profile for one model family: a pool of signature command
// templates (idioms), a pool shared with every other family, the idiom draw
// probability, and an optional fixed opening command.
struct FamilyProfile {
  std::string family;
  std::vector<WeightedCommand> idiom_commands;
  std::vector<WeightedCommand> shared_commands;
  double idiom_rate = 0.6;
  std::optional<std::string> opener;
};

// How a scaffold shapes the transcript around the commands.
//   permissive:           one tool_call entry per command, nothing else
//   phased:               plan entries at coarse phase boundaries
//   one_command_per_turn: a plan entry before every tool_call (ReAct-like)
enum class ScaffoldTransform { permissive, phased, one_command_per_turn };

std::string_view scaffold_transform_name(ScaffoldTransform t);
ScaffoldTransform scaffold_transform_from_name(std::string_view name);

struct ScaffoldSpec {
  std::string label;
  ScaffoldTransform transform = ScaffoldTransform::permissive;
  // Strips every generated command to its verb, suppressing family idioms.
  bool suppress_idioms = false;
};

// Full corpus recipe: one cell per (family, scaffold). `overlap` is the
// probability that an idiom draw comes from a merged idiom pool instead of
// the family's own: merged over `overlap_pair` when set (and only those two
// families bleed), else over all families. Deterministic given seed.
struct CorpusSpec {
  std::vector<FamilyProfile> families;
  std::vector<ScaffoldSpec> scaffolds;
  int sessions_per_cell = 50;
  int commands_min = 8;
  int commands_max = 25;
  double overlap = 0.0;
  std::optional<std::pair<std::string, std::string>> overlap_pair;
  std::uint64_t seed = 42;
};

void validate(const CorpusSpec& spec);

// Generates one session: exactly `length` tool_call entries (the opener, if
// any, is the first), structured per the scaffold transform. Deterministic
// given (profile, scaffold, length, seed).
Session generate_session(const FamilyProfile& profile,
                         const ScaffoldSpec& scaffold,
                         int length,
                         std::uint64_t seed);

// Generates sessions_per_cell sessions per (family, scaffold) cell with
// per-cell derived seeds, so any cell can be regenerated independently.
// Session ids encode (scaffold, family, index) and are unique.
Corpus generate_corpus(const CorpusSpec& spec);

// The built-in seven-family, three-scaffold recipe with signature idioms
// per family (chained-find parallelism, exec-grep pipelines, verb-only
// openers, CJK annotations, ...). Profiles are plain data and fully
// editable through the JSON form below.
CorpusSpec default_spec();

Json spec_to_json(const CorpusSpec& spec);
CorpusSpec spec_from_json(const Json& j);

// One session file per session ("<session_id>.json") under dir.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace shellsig
