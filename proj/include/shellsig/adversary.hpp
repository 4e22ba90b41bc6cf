#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "shellsig/classifier.hpp"
#include "shellsig/session.hpp"

namespace shellsig {

enum class AttackMode { inject, scrub, combined };

std::string_view attack_mode_name(AttackMode m);
AttackMode attack_mode_from_name(std::string_view name);

struct AttackConfig {
  int inject_k = 10;     // commands appended per session
  int inject_top = 25;   // how many of the target's top bigrams to cycle
  int scrub_top = 25;    // how many of the own family's top bigrams to match
  bool scrub_unigrams = false;  // also match top unigrams when scrubbing
};

// Renders a vocabulary term as an executable-looking command. White-box
// mimicry uses the identity rendering: the space-joined term is the command
// ("exec grep" -> command "exec grep"), which guarantees the tokenizer
// recovers exactly the targeted n-gram.
std::string render_bigram_command(const std::string& term);

// Appends k tool_call entries whose commands cycle through target_terms.
// Turn numbers continue from the last entry. k = 0 returns the session
// unchanged. Errors: k < 0, or empty target_terms with k > 0.
Session inject(const Session& s, const std::vector<std::string>& target_terms, int k);

// Removes every tool_call entry whose own tokenization (this command only,
// no cross-command adjacency) produces any term in `signature`. Surviving
// entries keep their order.
Session scrub(const Session& s, const std::set<std::string>& signature);

struct PairResult {
  std::string source;
  std::string target;
  double spoof_rate = 0.0;    // fraction predicted as target
  double evasion_rate = 0.0;  // fraction predicted as anything but source
  int sessions = 0;
};

struct ScrubResult {
  std::string family;
  double baseline_recall = 0.0;
  double scrubbed_recall = 0.0;
  double drop_pp = 0.0;  // percentage points
  int sessions = 0;
};

struct AttackReport {
  AttackMode mode = AttackMode::inject;
  AttackConfig config;
  std::string rendering = "identity";
  std::vector<PairResult> pairs;    // inject / combined
  std::vector<ScrubResult> scrubs;  // scrub
  double mean_spoof_rate = 0.0;
  double mean_evasion_rate = 0.0;
  double mean_drop_pp = 0.0;
  int sessions_attacked = 0;
};

// White-box attack sweep against a model trained on clean data.
//   inject:   for every directed (source, target) family pair, append
//             inject_k rendered top-bigram commands of the target and
//             re-classify every source session.
//   scrub:    for every family, delete the commands carrying its own top
//             bigrams and measure the recall drop.
//   combined: scrub the source signature, then inject the target's.
// Per-pair spoof_rate <= evasion_rate always holds (a session predicted as
// the target is in particular not predicted as the source). Families in the
// corpus must be covered by the model's classes.
AttackReport run_attack(const Corpus& corpus,
                        const LinearModel& model,
                        const AttackConfig& config,
                        AttackMode mode);

Json attack_report_to_json(const AttackReport& r);
std::string attack_report_table(const AttackReport& r);

}  // namespace shellsig
