// shellsig: fingerprint AI agent terminal sessions by their shell-command
// style, evaluate attribution robustness, and drive payload forensics.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shellsig/adversary.hpp"
#include "shellsig/classifier.hpp"
#include "shellsig/errors.hpp"
#include "shellsig/evaluation.hpp"
#include "shellsig/featurizer.hpp"
#include "shellsig/forensics.hpp"
#include "shellsig/jsonio.hpp"
#include "shellsig/session.hpp"
#include "shellsig/synth.hpp"
#include "shellsig/tables.hpp"

namespace ss = shellsig;

namespace {

struct Options {
  std::string config_path;
  std::string format = "table";  // or "json"
  std::string out_dir;
  ss::FeaturizerConfig featurizer;
  ss::TrainingConfig training;
  int k_folds = 5;
  std::uint64_t seed = 42;
  bool seed_from_flag = false;
};

// Config file < flags. The file carries the same keys the flags expose.
void apply_config_file(Options& o) {
  if (o.config_path.empty()) return;
  ss::Json j = ss::parse_json(ss::read_file(o.config_path), o.config_path);
  if (!j.is_object()) throw ss::SchemaError("config file must be a JSON object");
  if (j.contains("featurizer")) {
    const ss::Json& f = j["featurizer"];
    if (f.contains("ngram_lo")) o.featurizer.ngram_lo = f["ngram_lo"].get<int>();
    if (f.contains("ngram_hi")) o.featurizer.ngram_hi = f["ngram_hi"].get<int>();
    if (f.contains("max_features")) o.featurizer.max_features = f["max_features"].get<int>();
    if (f.contains("sublinear_tf")) o.featurizer.sublinear_tf = f["sublinear_tf"].get<bool>();
    if (f.contains("min_token_len")) o.featurizer.min_token_len = f["min_token_len"].get<int>();
  }
  if (j.contains("training")) {
    const ss::Json& t = j["training"];
    if (t.contains("c")) o.training.c = t["c"].get<double>();
    if (t.contains("tol")) o.training.tol = t["tol"].get<double>();
    if (t.contains("max_iter")) o.training.max_iter = t["max_iter"].get<int>();
    if (t.contains("seed")) o.training.seed = t["seed"].get<std::uint64_t>();
  }
  if (j.contains("seed")) o.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("k_folds")) o.k_folds = j["k_folds"].get<int>();
  if (j.contains("format")) o.format = j["format"].get<std::string>();
  if (j.contains("out_dir")) o.out_dir = j["out_dir"].get<std::string>();
}

ss::Json effective_config_json(const Options& o) {
  return ss::Json{
      {"featurizer",
       {{"ngram_lo", o.featurizer.ngram_lo},
        {"ngram_hi", o.featurizer.ngram_hi},
        {"max_features", o.featurizer.max_features},
        {"sublinear_tf", o.featurizer.sublinear_tf},
        {"min_token_len", o.featurizer.min_token_len}}},
      {"training",
       {{"c", o.training.c},
        {"tol", o.training.tol},
        {"max_iter", o.training.max_iter},
        {"seed", o.training.seed}}},
      {"k_folds", o.k_folds},
      {"seed", o.seed}};
}

ss::Corpus load_corpus_dir(const std::string& dir, bool print_report,
                           const std::string& format) {
  ss::LoadResult r = ss::load_corpus(ss::session_files_in(dir));
  if (print_report) {
    if (format == "json") {
      ss::Json j;
      j["files_read"] = r.report.files_read;
      j["sessions_loaded"] = r.report.sessions_loaded;
      j["families"] = r.corpus.families;
      j["scaffolds"] = r.corpus.scaffolds;
      ss::Json discarded = ss::Json::array();
      for (const auto& [path, id] : r.report.discarded)
        discarded.push_back({{"path", path}, {"session_id", id}});
      j["discarded_zero_command"] = std::move(discarded);
      j["warnings"] = r.report.warnings;
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "files read:       " << r.report.files_read << "\n"
                << "sessions loaded:  " << r.report.sessions_loaded << "\n"
                << "families:         " << r.corpus.families.size() << "\n"
                << "scaffolds:        " << r.corpus.scaffolds.size() << "\n";
      for (const auto& [path, id] : r.report.discarded)
        std::cout << "discarded (zero commands): " << id << " [" << path << "]\n";
      for (const auto& w : r.report.warnings) std::cout << "warning: " << w << "\n";
    }
  } else {
    for (const auto& [path, id] : r.report.discarded)
      std::cerr << "note: discarded zero-command session " << id << " [" << path << "]\n";
  }
  return std::move(r.corpus);
}

void write_or_print(const ss::Json& payload, const std::string& out_path,
                    const std::string& rendered, const std::string& format) {
  if (!out_path.empty()) ss::atomic_write_file(out_path, payload.dump(2) + "\n");
  if (format == "json")
    std::cout << payload.dump(2) << "\n";
  else
    std::cout << rendered;
}

int run(int argc, char** argv) {
  CLI::App app{"shell-command fingerprinting and DPI forensics toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Options opt;
  app.add_option("--config", opt.config_path, "JSON config file (flags override it)");
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "seed for folds, training and synthesis");
  std::optional<std::string> format_flag;
  app.add_option("--format", format_flag, "output format")
      ->check(CLI::IsMember({"json", "table"}));
  std::optional<int> kfolds_flag, ngram_hi_flag, max_features_flag;
  app.add_option("--k-folds", kfolds_flag, "cross-validation fold count");
  app.add_option("--ngram-hi", ngram_hi_flag, "n-gram upper bound");
  app.add_option("--max-features", max_features_flag, "vocabulary cap");

  // train
  auto* cmd_train = app.add_subcommand("train", "fit a model on a session corpus");
  std::string train_corpus, train_out;
  cmd_train->add_option("--corpus", train_corpus, "directory of session .json files")
      ->required();
  cmd_train->add_option("--out", train_out, "model artifact path (default model.json)");

  // predict
  auto* cmd_predict = app.add_subcommand("predict", "attribute sessions and route payloads");
  std::string predict_model;
  std::vector<std::string> predict_sessions;
  int first_n = 0;
  std::string dpi_complied_str;
  cmd_predict->add_option("--model", predict_model, "model artifact path")->required();
  cmd_predict->add_option("session", predict_sessions, "session .json file(s)")->required();
  cmd_predict->add_option("--first-n", first_n, "classify only the first N commands");
  cmd_predict->add_option("--dpi-complied", dpi_complied_str,
                          "DPI compliance evidence for two-stage attribution")
      ->check(CLI::IsMember({"true", "false"}));

  // evaluate
  auto* cmd_eval = app.add_subcommand("evaluate", "run an evaluation protocol");
  std::string eval_corpus, eval_mode = "cv", eval_out, verb_protocol = "cv";
  std::vector<int> eval_ns{5, 10, 30};
  cmd_eval->add_option("--corpus", eval_corpus, "directory of session .json files")
      ->required();
  cmd_eval->add_option("--mode", eval_mode, "protocol")
      ->check(CLI::IsMember({"cv", "loso", "early", "verbonly"}));
  cmd_eval->add_option("--ns", eval_ns, "truncation points for early mode")->delimiter(',');
  cmd_eval->add_option("--protocol", verb_protocol, "verbonly inner protocol")
      ->check(CLI::IsMember({"cv", "loso"}));
  cmd_eval->add_option("--out", eval_out, "also write the JSON report here");

  // attack
  auto* cmd_attack = app.add_subcommand("attack", "white-box mimicry sweep");
  std::string attack_corpus, attack_model, attack_mode = "inject", attack_out;
  ss::AttackConfig attack_cfg;
  cmd_attack->add_option("--corpus", attack_corpus, "directory of session .json files")
      ->required();
  cmd_attack->add_option("--model", attack_model, "model artifact path")->required();
  cmd_attack->add_option("--mode", attack_mode, "attack mode")
      ->check(CLI::IsMember({"inject", "scrub", "combined"}));
  cmd_attack->add_option("--inject-k", attack_cfg.inject_k, "commands injected per session");
  cmd_attack->add_option("--inject-top", attack_cfg.inject_top,
                         "target bigrams cycled during injection");
  cmd_attack->add_option("--scrub-top", attack_cfg.scrub_top, "own bigrams matched by scrub");
  cmd_attack->add_flag("--scrub-unigrams", attack_cfg.scrub_unigrams,
                       "also scrub top unigrams");
  cmd_attack->add_option("--out", attack_out, "also write the JSON report here");

  // plant
  auto* cmd_plant = app.add_subcommand("plant", "render a payload bundle to a directory");
  std::string plant_variant = "fc", plant_out;
  cmd_plant->add_option("--variant", plant_variant, "payload variant")
      ->check(CLI::IsMember({"vanilla", "m2", "fc"}));
  cmd_plant->add_option("--out", plant_out, "target directory")->required();

  // extract
  auto* cmd_extract = app.add_subcommand("extract", "scan sessions for extraction writes");
  std::string extract_corpus, extract_ground_truth, extract_out;
  cmd_extract->add_option("--corpus", extract_corpus, "directory of session .json files")
      ->required();
  cmd_extract->add_option("--ground-truth", extract_ground_truth,
                          "file holding the true prompt text")
      ->required();
  cmd_extract->add_option("--out", extract_out, "also write the JSON report here");

  // synth
  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
  std::string synth_spec, synth_out;
  bool synth_default = false;
  std::optional<int> synth_sessions;
  std::optional<double> synth_overlap;
  cmd_synth->add_option("--spec", synth_spec, "corpus spec JSON file");
  cmd_synth->add_flag("--default-spec", synth_default, "use the built-in seven-family spec");
  cmd_synth->add_option("--out", synth_out, "target directory")->required();
  cmd_synth->add_option("--sessions-per-cell", synth_sessions, "override sessions per cell");
  cmd_synth->add_option("--overlap", synth_overlap, "override idiom overlap");

  // ingest
  auto* cmd_ingest = app.add_subcommand("ingest", "load a corpus and report its shape");
  std::string ingest_corpus;
  cmd_ingest->add_option("--corpus", ingest_corpus, "directory of session .json files")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // exit() prints help (for --help, code 0) or the usage error itself.
    return app.exit(e) == 0 ? 0 : 1;
  }

  apply_config_file(opt);
  if (seed_flag) {
    opt.seed = *seed_flag;
    opt.training.seed = *seed_flag;
    opt.seed_from_flag = true;
  }
  if (format_flag) opt.format = *format_flag;
  if (kfolds_flag) opt.k_folds = *kfolds_flag;
  if (ngram_hi_flag) opt.featurizer.ngram_hi = *ngram_hi_flag;
  if (max_features_flag) opt.featurizer.max_features = *max_features_flag;
  if (const char* env_out = std::getenv("SHELLSIG_OUT_DIR"))
    if (opt.out_dir.empty()) opt.out_dir = env_out;
  validate(opt.featurizer);
  validate(opt.training);

  auto in_out_dir = [&](const std::string& name) {
    if (opt.out_dir.empty()) return name;
    return (std::filesystem::path(opt.out_dir) / name).string();
  };

  if (*cmd_train) {
    ss::Corpus corpus = load_corpus_dir(train_corpus, false, opt.format);
    std::vector<std::string> docs, labels;
    for (const ss::Session& s : corpus.sessions) {
      if (!s.family)
        throw ss::ValidationError("session '" + s.session_id + "' has no family label");
      docs.push_back(ss::command_document(s));
      labels.push_back(*s.family);
    }
    ss::NgramVocabulary vocab = ss::fit_vocabulary(docs, opt.featurizer);
    std::vector<ss::FeatureVector> vecs;
    vecs.reserve(docs.size());
    for (const std::string& d : docs) vecs.push_back(ss::vectorize(d, vocab));
    ss::LinearModel model = ss::train(vecs, labels, opt.training, std::move(vocab));
    std::string out = train_out.empty() ? in_out_dir("model.json") : train_out;
    ss::save_model(model, out);
    std::cout << "trained " << model.classes.size() << " classes over "
              << model.vocab.size() << " features from " << docs.size()
              << " sessions -> " << out << "\n";
    for (const auto& w : model.convergence_warnings) std::cout << "warning: " << w << "\n";
    return 0;
  }

  if (*cmd_predict) {
    ss::LinearModel model = ss::load_model(predict_model);
    ss::RoutingPolicy policy = ss::default_policy();
    std::optional<bool> complied;
    if (!dpi_complied_str.empty()) complied = (dpi_complied_str == "true");

    ss::Json results = ss::Json::array();
    ss::TextTable table;
    table.header({"Session", "Predicted", "Route"});
    for (const std::string& path : predict_sessions) {
      ss::Session s = ss::parse_session(ss::read_file(path));
      if (first_n > 0) s = ss::truncate(s, first_n);
      ss::FeatureVector v = ss::vectorize(ss::command_document(s), model.vocab);
      std::string warning;
      std::string predicted = complied.has_value()
                                  ? ss::two_stage_predict(model, v, complied, &warning)
                                  : ss::predict(model, v);
      ss::RoutingAction action = ss::route(policy, predicted);
      std::string route_str =
          action.deploy ? "deploy:" + std::string(ss::payload_variant_name(action.variant))
                        : "no-payload";

      ss::Json rec;
      rec["session_id"] = s.session_id;
      rec["predicted"] = predicted;
      std::vector<double> scores = ss::decision(model, v);
      ss::Json score_obj;
      for (std::size_t i = 0; i < model.classes.size(); ++i)
        score_obj[model.classes[i]] = scores[i];
      rec["scores"] = std::move(score_obj);
      rec["routing"] = route_str;
      if (complied.has_value()) rec["dpi_complied"] = *complied;
      if (!warning.empty()) rec["warning"] = warning;
      results.push_back(std::move(rec));
      table.row({s.session_id, predicted, route_str});
      if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
    }
    ss::Json payload;
    payload["command"] = "predict";
    payload["effective_config"] = effective_config_json(opt);
    payload["results"] = std::move(results);
    write_or_print(payload, "", table.str(), opt.format);
    return 0;
  }

  if (*cmd_eval) {
    ss::Corpus corpus = load_corpus_dir(eval_corpus, false, opt.format);
    ss::Json payload;
    payload["command"] = "evaluate";
    payload["mode"] = eval_mode;
    payload["effective_config"] = effective_config_json(opt);
    std::string rendered;
    if (eval_mode == "cv") {
      ss::EvalReport r =
          ss::cross_validate(corpus, opt.k_folds, opt.featurizer, opt.training, opt.seed);
      payload["report"] = ss::eval_report_to_json(r);
      rendered = ss::eval_report_table(r);
    } else if (eval_mode == "loso") {
      ss::LosoReport r = ss::scaffold_loso(corpus, opt.featurizer, opt.training);
      payload["report"] = ss::loso_report_to_json(r);
      rendered = ss::loso_report_table(r);
    } else if (eval_mode == "early") {
      auto points = ss::early_detection(corpus, eval_ns, opt.k_folds, opt.featurizer,
                                        opt.training, opt.seed);
      ss::Json rows = ss::Json::array();
      ss::TextTable t;
      t.header({"First N", "Accuracy"});
      for (const auto& p : points) {
        rows.push_back({{"n", p.n}, {"accuracy", p.accuracy}});
        t.row({std::to_string(p.n), ss::format_percent(p.accuracy, 1)});
      }
      payload["report"] = {{"points", std::move(rows)}};
      rendered = t.str();
    } else {  // verbonly
      ss::Protocol proto =
          (verb_protocol == "loso") ? ss::Protocol::loso : ss::Protocol::kfold;
      ss::EvalReport r = ss::verb_only_eval(corpus, opt.featurizer.ngram_hi, proto,
                                            opt.k_folds, opt.featurizer, opt.training,
                                            opt.seed);
      payload["report"] = ss::eval_report_to_json(r);
      rendered = ss::eval_report_table(r);
    }
    write_or_print(payload, eval_out, rendered, opt.format);
    return 0;
  }

  if (*cmd_attack) {
    ss::Corpus corpus = load_corpus_dir(attack_corpus, false, opt.format);
    ss::LinearModel model = ss::load_model(attack_model);
    ss::AttackReport r =
        ss::run_attack(corpus, model, attack_cfg, ss::attack_mode_from_name(attack_mode));
    ss::Json payload;
    payload["command"] = "attack";
    payload["effective_config"] = effective_config_json(opt);
    payload["report"] = ss::attack_report_to_json(r);
    write_or_print(payload, attack_out, ss::attack_report_table(r), opt.format);
    return 0;
  }

  if (*cmd_plant) {
    ss::PayloadBundle bundle =
        ss::render_bundle(ss::payload_variant_from_name(plant_variant));
    ss::write_bundle(bundle, plant_out);
    std::cout << "planted " << plant_variant << " bundle ("
              << bundle.audit_file_name << " + 3 environment layers) in " << plant_out
              << "\n";
    return 0;
  }

  if (*cmd_extract) {
    ss::Corpus corpus = load_corpus_dir(extract_corpus, false, opt.format);
    std::string ground_truth = ss::read_file(extract_ground_truth);
    std::vector<ss::ExtractionRecord> records;
    std::vector<ss::FidelityScore> scores;
    for (const ss::Session& s : corpus.sessions) {
      ss::ExtractionRecord rec = ss::detect_extraction(s);
      scores.push_back(ss::fidelity(rec.extracted_text, ground_truth));
      records.push_back(std::move(rec));
    }
    ss::ExtractionStats stats = ss::extraction_stats(records, scores);

    ss::Json payload;
    payload["command"] = "extract";
    payload["effective_config"] = effective_config_json(opt);
    ss::Json recs = ss::Json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
      ss::Json r = ss::extraction_record_to_json(records[i]);
      r["fidelity"] = scores[i].value;
      recs.push_back(std::move(r));
    }
    payload["records"] = std::move(recs);
    payload["stats"] = ss::extraction_stats_to_json(stats);

    ss::TextTable t;
    t.header({"Sessions", "Ext.", "Fidelity", "Avg. chars", ">256 tok"});
    t.row({std::to_string(stats.sessions), ss::format_percent(stats.extraction_rate, 1),
           stats.mean_fidelity ? ss::format_double(*stats.mean_fidelity, 3) : "-",
           stats.mean_extracted_chars ? ss::format_double(*stats.mean_extracted_chars, 0)
                                      : "-",
           std::to_string(stats.over_256_tokens)});
    write_or_print(payload, extract_out, t.str(), opt.format);
    return 0;
  }

  if (*cmd_synth) {
    ss::CorpusSpec spec;
    if (!synth_spec.empty())
      spec = ss::spec_from_json(ss::parse_json(ss::read_file(synth_spec), synth_spec));
    else
      spec = ss::default_spec();
    (void)synth_default;  // --default-spec is the explicit form of the fallback
    if (opt.seed_from_flag) spec.seed = opt.seed;
    if (synth_sessions) spec.sessions_per_cell = *synth_sessions;
    if (synth_overlap) spec.overlap = *synth_overlap;
    ss::Corpus corpus = ss::generate_corpus(spec);
    ss::write_corpus(corpus, synth_out);
    std::cout << "generated " << corpus.sessions.size() << " sessions ("
              << corpus.families.size() << " families x " << corpus.scaffolds.size()
              << " scaffolds) in " << synth_out << "\n";
    return 0;
  }

  if (*cmd_ingest) {
    load_corpus_dir(ingest_corpus, true, opt.format);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ss::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
