#include "shellsig/adversary.hpp"

#include <algorithm>
#include <map>

#include "shellsig/errors.hpp"
#include "shellsig/tables.hpp"

namespace shellsig {

std::string_view attack_mode_name(AttackMode m) {
  switch (m) {
    case AttackMode::inject: return "inject";
    case AttackMode::scrub: return "scrub";
    case AttackMode::combined: return "combined";
  }
  return "inject";
}

AttackMode attack_mode_from_name(std::string_view name) {
  if (name == "inject") return AttackMode::inject;
  if (name == "scrub") return AttackMode::scrub;
  if (name == "combined") return AttackMode::combined;
  throw ValidationError("unknown attack mode: '" + std::string(name) + "'");
}

std::string render_bigram_command(const std::string& term) {
  // Identity rendering: the space-joined n-gram already tokenizes back to
  // itself, which makes the injection a tight upper bound on what a shell-
  // plausible wrapping of the same n-gram could achieve.
  return term;
}

Session inject(const Session& s, const std::vector<std::string>& target_terms, int k) {
  if (k < 0) throw ValidationError("inject: k must be >= 0");
  if (k > 0 && target_terms.empty())
    throw ValidationError("inject: no target terms to inject");
  Session out = s;
  std::int64_t turn = out.entries.empty() ? 0 : out.entries.back().turn + 1;
  for (int i = 0; i < k; ++i) {
    Entry e;
    e.turn = turn++;
    e.command = render_bigram_command(target_terms[static_cast<std::size_t>(i) %
                                                   target_terms.size()]);
    e.type = EntryType::tool_call;
    out.entries.push_back(std::move(e));
  }
  out.num_bash_entries = command_count(out);
  return out;
}

namespace {

int max_arity(const std::set<std::string>& signature) {
  int arity = 1;
  for (const std::string& term : signature) {
    int tokens = 1;
    for (char c : term)
      if (c == ' ') ++tokens;
    arity = std::max(arity, tokens);
  }
  return arity;
}

}  // namespace

Session scrub(const Session& s, const std::set<std::string>& signature) {
  Session out = s;
  out.entries.clear();
  if (signature.empty()) {
    out.entries = s.entries;
    return out;
  }
  const int hi = max_arity(signature);
  for (const Entry& e : s.entries) {
    bool drop = false;
    if (e.type == EntryType::tool_call && !e.command.empty()) {
      // Match against this command's own terms only; adjacency with
      // neighboring commands is not this command's fault.
      for (const std::string& term : ngrams(tokenize(e.command), 1, hi)) {
        if (signature.count(term)) {
          drop = true;
          break;
        }
      }
    }
    if (!drop) out.entries.push_back(e);
  }
  out.num_bash_entries = command_count(out);
  return out;
}

namespace {

std::vector<std::string> signature_terms(const LinearModel& model,
                                         const std::string& family,
                                         std::size_t top,
                                         bool include_unigrams) {
  auto all = top_features(model, family, model.vocab.size());
  std::vector<std::string> bigrams;
  std::vector<std::string> any_arity;
  for (auto& [term, coef] : all) {
    (void)coef;
    any_arity.push_back(term);
    if (term.find(' ') != std::string::npos) bigrams.push_back(term);
    if (!include_unigrams && bigrams.size() >= top) break;
    if (include_unigrams && any_arity.size() >= top) break;
  }
  std::vector<std::string>& chosen = include_unigrams ? any_arity : bigrams;
  if (chosen.empty()) chosen = any_arity;  // degenerate model: fall back
  if (chosen.size() > top) chosen.resize(top);
  return chosen;
}

}  // namespace

AttackReport run_attack(const Corpus& corpus,
                        const LinearModel& model,
                        const AttackConfig& config,
                        AttackMode mode) {
  if (config.inject_k < 0) throw ValidationError("attack: inject_k must be >= 0");
  if (config.inject_top < 1 || config.scrub_top < 1)
    throw ValidationError("attack: top-term counts must be >= 1");
  for (const std::string& f : corpus.families) {
    if (!std::binary_search(model.classes.begin(), model.classes.end(), f))
      throw ValidationError("attack: corpus family '" + f + "' unknown to the model");
  }

  // Per-family signatures from the model's own coefficients (white box).
  std::map<std::string, std::vector<std::string>> inject_terms;
  std::map<std::string, std::set<std::string>> scrub_terms;
  for (const std::string& f : corpus.families) {
    inject_terms[f] = signature_terms(model, f, static_cast<std::size_t>(config.inject_top),
                                      false);
    auto scrub_list = signature_terms(model, f, static_cast<std::size_t>(config.scrub_top),
                                      config.scrub_unigrams);
    scrub_terms[f] = std::set<std::string>(scrub_list.begin(), scrub_list.end());
  }

  // Baseline predictions on untouched sessions.
  std::map<std::string, std::vector<const Session*>> by_family;
  std::map<const Session*, std::string> baseline;
  for (const Session& s : corpus.sessions) {
    if (!s.family)
      throw ValidationError("attack: session '" + s.session_id + "' has no family label");
    by_family[*s.family].push_back(&s);
    baseline[&s] = predict(model, vectorize(command_document(s), model.vocab));
  }

  AttackReport report;
  report.mode = mode;
  report.config = config;

  if (mode == AttackMode::scrub) {
    double drop_sum = 0.0;
    for (const std::string& f : corpus.families) {
      const auto& sessions = by_family[f];
      ScrubResult r;
      r.family = f;
      r.sessions = static_cast<int>(sessions.size());
      int base_hits = 0, scrub_hits = 0;
      for (const Session* s : sessions) {
        if (baseline[s] == f) ++base_hits;
        Session scrubbed = scrub(*s, scrub_terms[f]);
        if (predict(model, vectorize(command_document(scrubbed), model.vocab)) == f)
          ++scrub_hits;
      }
      r.baseline_recall = static_cast<double>(base_hits) / static_cast<double>(r.sessions);
      r.scrubbed_recall = static_cast<double>(scrub_hits) / static_cast<double>(r.sessions);
      r.drop_pp = (r.baseline_recall - r.scrubbed_recall) * 100.0;
      drop_sum += r.drop_pp;
      report.sessions_attacked += r.sessions;
      report.scrubs.push_back(std::move(r));
    }
    report.mean_drop_pp = drop_sum / static_cast<double>(report.scrubs.size());
    return report;
  }

  double spoof_sum = 0.0, evasion_sum = 0.0;
  for (const std::string& source : corpus.families) {
    for (const std::string& target : corpus.families) {
      if (target == source) continue;
      const auto& sessions = by_family[source];
      PairResult r;
      r.source = source;
      r.target = target;
      r.sessions = static_cast<int>(sessions.size());
      int spoofed = 0, evaded = 0;
      for (const Session* s : sessions) {
        Session attacked = (mode == AttackMode::combined) ? scrub(*s, scrub_terms[source]) : *s;
        attacked = inject(attacked, inject_terms[target], config.inject_k);
        std::string pred =
            predict(model, vectorize(command_document(attacked), model.vocab));
        if (pred == target) ++spoofed;
        if (pred != source) ++evaded;
      }
      r.spoof_rate = static_cast<double>(spoofed) / static_cast<double>(r.sessions);
      r.evasion_rate = static_cast<double>(evaded) / static_cast<double>(r.sessions);
      spoof_sum += r.spoof_rate;
      evasion_sum += r.evasion_rate;
      report.sessions_attacked += r.sessions;
      report.pairs.push_back(std::move(r));
    }
  }
  report.mean_spoof_rate = spoof_sum / static_cast<double>(report.pairs.size());
  report.mean_evasion_rate = evasion_sum / static_cast<double>(report.pairs.size());
  return report;
}

Json attack_report_to_json(const AttackReport& r) {
  Json j;
  j["mode"] = std::string(attack_mode_name(r.mode));
  j["rendering"] = r.rendering;
  j["config"] = {{"inject_k", r.config.inject_k},
                 {"inject_top", r.config.inject_top},
                 {"scrub_top", r.config.scrub_top},
                 {"scrub_unigrams", r.config.scrub_unigrams}};
  j["sessions_attacked"] = r.sessions_attacked;
  if (!r.pairs.empty()) {
    Json pairs = Json::array();
    for (const PairResult& p : r.pairs) {
      pairs.push_back({{"source", p.source},
                       {"target", p.target},
                       {"spoof_rate", p.spoof_rate},
                       {"evasion_rate", p.evasion_rate},
                       {"sessions", p.sessions}});
    }
    j["pairs"] = std::move(pairs);
    j["mean_spoof_rate"] = r.mean_spoof_rate;
    j["mean_evasion_rate"] = r.mean_evasion_rate;
  }
  if (!r.scrubs.empty()) {
    Json scrubs = Json::array();
    for (const ScrubResult& s : r.scrubs) {
      scrubs.push_back({{"family", s.family},
                        {"baseline_recall", s.baseline_recall},
                        {"scrubbed_recall", s.scrubbed_recall},
                        {"drop_pp", s.drop_pp},
                        {"sessions", s.sessions}});
    }
    j["scrubs"] = std::move(scrubs);
    j["mean_drop_pp"] = r.mean_drop_pp;
  }
  return j;
}

std::string attack_report_table(const AttackReport& r) {
  TextTable t;
  std::string out = "mode: " + std::string(attack_mode_name(r.mode)) +
                    "  rendering: " + r.rendering + "\n";
  if (!r.pairs.empty()) {
    t.header({"Source", "Target", "Spoof", "Evasion", "n"});
    for (const PairResult& p : r.pairs) {
      t.row({p.source, p.target, format_percent(p.spoof_rate, 1),
             format_percent(p.evasion_rate, 1), std::to_string(p.sessions)});
    }
    t.separator();
    t.row({"mean", "", format_percent(r.mean_spoof_rate, 1),
           format_percent(r.mean_evasion_rate, 1), std::to_string(r.sessions_attacked)});
    out += t.str();
  }
  if (!r.scrubs.empty()) {
    TextTable ts;
    ts.header({"Family", "Recall", "Scrubbed", "Drop (pp)", "n"});
    for (const ScrubResult& s : r.scrubs) {
      ts.row({s.family, format_double(s.baseline_recall, 3),
              format_double(s.scrubbed_recall, 3), format_double(s.drop_pp, 1),
              std::to_string(s.sessions)});
    }
    ts.separator();
    ts.row({"mean", "", "", format_double(r.mean_drop_pp, 1),
            std::to_string(r.sessions_attacked)});
    out += ts.str();
  }
  return out;
}

}  // namespace shellsig
