#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "shellsig/adversary.hpp"
#include "shellsig/classifier.hpp"
#include "shellsig/errors.hpp"
#include "shellsig/evaluation.hpp"
#include "shellsig/featurizer.hpp"
#include "shellsig/synth.hpp"

using namespace shellsig;

namespace {

Session three_commands() {
  Session s;
  s.session_id = "att";
  s.family = "fam";
  s.entries = {
      {0, "find / -exec grep secret {} \\;", "", "", EntryType::tool_call},
      {1, "", "planning", "", EntryType::plan},
      {2, "pwd", "", "", EntryType::tool_call},
      {7, "uname -a", "", "", EntryType::tool_call},
  };
  s.num_bash_entries = 3;
  return s;
}

struct TrainedSetup {
  Corpus corpus;
  LinearModel model;
};

TrainedSetup trained_default(int per_cell, double idiom_rate = 0.6) {
  CorpusSpec spec = default_spec();
  spec.sessions_per_cell = per_cell;
  spec.commands_min = 8;
  spec.commands_max = 14;
  for (auto& f : spec.families) f.idiom_rate = idiom_rate;
  Corpus corpus = generate_corpus(spec);
  std::vector<std::string> docs, labels;
  for (const Session& s : corpus.sessions) {
    docs.push_back(command_document(s));
    labels.push_back(*s.family);
  }
  NgramVocabulary vocab = fit_vocabulary(docs, FeaturizerConfig{});
  std::vector<FeatureVector> vecs;
  for (const auto& d : docs) vecs.push_back(vectorize(d, vocab));
  LinearModel model = train(vecs, labels, TrainingConfig{}, std::move(vocab));
  return {std::move(corpus), std::move(model)};
}

}  // namespace

TEST_CASE("identity rendering returns the term as the command") {
  CHECK(render_bigram_command("exec grep") == "exec grep");
  CHECK(render_bigram_command("sudo") == "sudo");
}

TEST_CASE("inject appends cycled commands with continuing turns") {
  Session s = three_commands();
  Session out = inject(s, {"exec grep", "maxdepth name"}, 5);
  REQUIRE(out.entries.size() == s.entries.size() + 5);
  CHECK(out.num_bash_entries == 8);
  for (int i = 0; i < 5; ++i) {
    const Entry& e = out.entries[s.entries.size() + static_cast<std::size_t>(i)];
    CHECK(e.type == EntryType::tool_call);
    CHECK(e.command == (i % 2 == 0 ? "exec grep" : "maxdepth name"));
    CHECK(e.turn == 8 + i);  // last original turn was 7
  }
  // the original is untouched
  CHECK(s.entries.size() == 4);
}

TEST_CASE("inject with k = 0 is the identity") {
  Session s = three_commands();
  Session out = inject(s, {"exec grep"}, 0);
  CHECK(serialize_session(out) == serialize_session(s));
  Session out2 = inject(s, {}, 0);
  CHECK(serialize_session(out2) == serialize_session(s));
}

TEST_CASE("inject validates its arguments") {
  Session s = three_commands();
  CHECK_THROWS_AS(inject(s, {"x"}, -1), ValidationError);
  CHECK_THROWS_AS(inject(s, {}, 3), ValidationError);
}

TEST_CASE("scrub removes only entries carrying signature terms") {
  Session s = three_commands();
  Session out = scrub(s, {"exec grep"});
  REQUIRE(out.entries.size() == 3);  // the find command went away
  CHECK(out.entries[0].type == EntryType::plan);
  CHECK(out.entries[1].command == "pwd");
  CHECK(out.entries[2].command == "uname -a");
  CHECK(out.num_bash_entries == 2);

  // unigram signatures only hit when the signature carries unigrams
  Session out2 = scrub(s, {"pwd"});
  CHECK(command_count(out2) == 2);
  CHECK(command_document(out2).find("pwd") == std::string::npos);
}

TEST_CASE("scrub matches per-command terms, never across commands") {
  Session s;
  s.session_id = "x";
  s.entries = {
      {0, "alpha", "", "", EntryType::tool_call},
      {1, "beta", "", "", EntryType::tool_call},
  };
  // "alpha beta" only arises from cross-command adjacency in the document,
  // so a bigram signature must not remove either command
  Session out = scrub(s, {"alpha beta"});
  CHECK(command_count(out) == 2);
}

TEST_CASE("attack mode names round-trip") {
  CHECK(attack_mode_name(AttackMode::combined) == "combined");
  CHECK(attack_mode_from_name("scrub") == AttackMode::scrub);
  CHECK_THROWS_AS(attack_mode_from_name("noise"), ValidationError);
}

TEST_CASE("inject sweep covers every directed pair and bounds spoof by evasion") {
  TrainedSetup t = trained_default(4);
  AttackConfig cfg;
  cfg.inject_k = 12;
  AttackReport r = run_attack(t.corpus, t.model, cfg, AttackMode::inject);
  CHECK(r.mode == AttackMode::inject);
  CHECK(r.rendering == "identity");
  CHECK(r.pairs.size() == 7 * 6);
  for (const PairResult& p : r.pairs) {
    CHECK(p.source != p.target);
    CHECK(p.sessions == 12);  // 4 sessions x 3 scaffolds per family
    CHECK(p.spoof_rate <= p.evasion_rate + 1e-12);
    CHECK(p.spoof_rate >= 0.0);
    CHECK(p.evasion_rate <= 1.0);
  }
  CHECK(r.sessions_attacked == 7 * 6 * 12);
}

TEST_CASE("injecting zero commands reproduces the clean baseline") {
  TrainedSetup t = trained_default(3);
  AttackConfig cfg;
  cfg.inject_k = 0;
  AttackReport r = run_attack(t.corpus, t.model, cfg, AttackMode::inject);
  // an uninjected session is predicted as its own family (clean training
  // data, perfectly separable corpus), so nothing is ever spoofed or evaded
  CHECK(r.mean_spoof_rate == doctest::Approx(0.0));
  CHECK(r.mean_evasion_rate == doctest::Approx(0.0));
}

TEST_CASE("scrub sweep reports per-family recall drops") {
  TrainedSetup t = trained_default(4);
  AttackReport r = run_attack(t.corpus, t.model, AttackConfig{}, AttackMode::scrub);
  CHECK(r.mode == AttackMode::scrub);
  REQUIRE(r.scrubs.size() == 7);
  for (const ScrubResult& sr : r.scrubs) {
    CHECK(sr.baseline_recall >= sr.scrubbed_recall - 1e-12);
    CHECK(sr.drop_pp ==
          doctest::Approx(100.0 * (sr.baseline_recall - sr.scrubbed_recall)));
    CHECK(sr.sessions == 12);
  }
  CHECK(r.pairs.empty());
}

TEST_CASE("combined mode scrubs the source before injecting the target") {
  TrainedSetup t = trained_default(3);
  AttackConfig cfg;
  cfg.inject_k = 12;
  AttackReport inj = run_attack(t.corpus, t.model, cfg, AttackMode::inject);
  AttackReport comb = run_attack(t.corpus, t.model, cfg, AttackMode::combined);
  REQUIRE(comb.pairs.size() == inj.pairs.size());
  // removing the source's own signature can only help the impersonation
  CHECK(comb.mean_evasion_rate + 1e-9 >= inj.mean_evasion_rate);
}

TEST_CASE("run_attack rejects corpora with families outside the model") {
  TrainedSetup t = trained_default(3);
  t.corpus.sessions[0].family = "imposter";
  Corpus broken = make_corpus(std::move(t.corpus.sessions));
  CHECK_THROWS_AS(run_attack(broken, t.model, AttackConfig{}, AttackMode::inject),
                  ValidationError);
}

TEST_CASE("attack reports serialize with their configuration") {
  TrainedSetup t = trained_default(3);
  AttackConfig cfg;
  cfg.inject_k = 5;
  AttackReport r = run_attack(t.corpus, t.model, cfg, AttackMode::inject);
  Json j = attack_report_to_json(r);
  CHECK(j["mode"] == "inject");
  CHECK(j["config"]["inject_k"] == 5);
  CHECK(j["rendering"] == "identity");
  CHECK(j["pairs"].size() == 42);
  std::string table = attack_report_table(r);
  CHECK(table.find("deepseek") != std::string::npos);
  CHECK(table.find("mean") != std::string::npos);
}
