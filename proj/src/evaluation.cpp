#include "shellsig/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "shellsig/errors.hpp"
#include "shellsig/tables.hpp"

namespace shellsig {

namespace {

// Two-sided 95% Student t critical values for df = 1..30; 1.96 beyond.
double t_critical_95(int df) {
  static const double table[30] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return 0.0;
  if (df <= 30) return table[df - 1];
  return 1.96;
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::string digest_configs(const FeaturizerConfig& fc, const TrainingConfig& tc,
                           int k, std::uint64_t seed) {
  Json j = {{"featurizer",
             {{"ngram_lo", fc.ngram_lo},
              {"ngram_hi", fc.ngram_hi},
              {"max_features", fc.max_features},
              {"sublinear_tf", fc.sublinear_tf},
              {"min_token_len", fc.min_token_len}}},
            {"training",
             {{"c", tc.c}, {"tol", tc.tol}, {"max_iter", tc.max_iter}, {"seed", tc.seed}}},
            {"k", k},
            {"seed", seed}};
  return fnv1a64_hex(j.dump());
}

struct LabeledDocs {
  std::vector<std::string> docs;
  std::vector<std::string> labels;
};

LabeledDocs labeled_documents(const Corpus& corpus) {
  LabeledDocs out;
  out.docs.reserve(corpus.sessions.size());
  out.labels.reserve(corpus.sessions.size());
  for (const Session& s : corpus.sessions) {
    if (!s.family)
      throw ValidationError("session '" + s.session_id + "' has no family label");
    out.docs.push_back(command_document(s));
    out.labels.push_back(*s.family);
  }
  return out;
}

// Fits on the train slice only, trains, predicts the test slice.
void eval_split(const LabeledDocs& data,
                const std::vector<std::size_t>& train_idx,
                const std::vector<std::size_t>& test_idx,
                const FeaturizerConfig& fc,
                const TrainingConfig& tc,
                std::vector<std::string>& truth_out,
                std::vector<std::string>& pred_out) {
  std::vector<std::string> train_docs;
  std::vector<std::string> train_labels;
  train_docs.reserve(train_idx.size());
  train_labels.reserve(train_idx.size());
  for (std::size_t i : train_idx) {
    train_docs.push_back(data.docs[i]);
    train_labels.push_back(data.labels[i]);
  }
  NgramVocabulary vocab = fit_vocabulary(train_docs, fc);
  std::vector<FeatureVector> train_vecs;
  train_vecs.reserve(train_docs.size());
  for (const std::string& d : train_docs) train_vecs.push_back(vectorize(d, vocab));
  LinearModel model = train(train_vecs, train_labels, tc, std::move(vocab));
  for (std::size_t i : test_idx) {
    truth_out.push_back(data.labels[i]);
    pred_out.push_back(predict(model, vectorize(data.docs[i], model.vocab)));
  }
}

FoldStats make_fold_stats(const std::vector<FoldScore>& scores) {
  FoldStats st;
  std::vector<double> accs, f1s;
  for (const FoldScore& s : scores) {
    accs.push_back(s.accuracy);
    f1s.push_back(s.macro_f1);
  }
  auto mean = [](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    return xs.empty() ? 0.0 : m / static_cast<double>(xs.size());
  };
  st.mean_accuracy = mean(accs);
  st.std_accuracy = sample_std(accs, st.mean_accuracy);
  st.mean_macro_f1 = mean(f1s);
  st.std_macro_f1 = sample_std(f1s, st.mean_macro_f1);
  const int n = static_cast<int>(scores.size());
  if (n >= 2) {
    double half = t_critical_95(n - 1) * st.std_macro_f1 / std::sqrt(static_cast<double>(n));
    st.ci95_macro_f1_lo = st.mean_macro_f1 - half;
    st.ci95_macro_f1_hi = st.mean_macro_f1 + half;
  } else {
    st.ci95_macro_f1_lo = st.ci95_macro_f1_hi = st.mean_macro_f1;
  }
  return st;
}

Corpus transform_verb_only(const Corpus& corpus) {
  Corpus out = corpus;
  for (Session& s : out.sessions) {
    for (Entry& e : s.entries) {
      if (e.type == EntryType::tool_call && !e.command.empty())
        e.command = command_verb(e.command);
    }
  }
  return out;
}

}  // namespace

EvalReport score(const std::vector<std::string>& truth,
                 const std::vector<std::string>& predicted,
                 const std::vector<std::string>& classes) {
  if (truth.size() != predicted.size())
    throw ValidationError("score: truth and predicted differ in length");
  if (truth.empty()) throw ValidationError("score: no predictions to score");
  if (classes.empty()) throw ValidationError("score: empty class list");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;
  if (index.size() != classes.size())
    throw ValidationError("score: duplicate class label");

  EvalReport r;
  r.confusion.classes = classes;
  std::sort(r.confusion.classes.begin(), r.confusion.classes.end());
  for (std::size_t i = 0; i < r.confusion.classes.size(); ++i)
    index[r.confusion.classes[i]] = i;
  const std::size_t k = r.confusion.classes.size();
  r.confusion.counts.assign(k, std::vector<std::int64_t>(k, 0));

  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto it = index.find(truth[i]);
    if (it == index.end())
      throw ValidationError("score: true label '" + truth[i] + "' outside class set");
    auto ip = index.find(predicted[i]);
    if (ip == index.end())
      throw ValidationError("score: predicted label '" + predicted[i] +
                            "' outside class set");
    ++r.confusion.counts[it->second][ip->second];
  }

  double f1_sum = 0.0;
  double weighted_sum = 0.0;
  std::int64_t correct = 0;
  const auto total = static_cast<std::int64_t>(truth.size());
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t tp = r.confusion.counts[c][c];
    std::int64_t fp = 0, fn = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += r.confusion.counts[o][c];
      fn += r.confusion.counts[c][o];
    }
    correct += tp;
    ClassReport cr;
    cr.label = r.confusion.classes[c];
    cr.support = tp + fn;
    cr.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    cr.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    cr.f1 = (cr.precision + cr.recall) > 0.0
                ? 2.0 * cr.precision * cr.recall / (cr.precision + cr.recall)
                : 0.0;
    f1_sum += cr.f1;
    weighted_sum += cr.f1 * static_cast<double>(cr.support);
    r.per_class.push_back(std::move(cr));
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  r.macro_f1 = f1_sum / static_cast<double>(k);
  r.weighted_f1 = weighted_sum / static_cast<double>(total);
  return r;
}

std::vector<FoldSplit> stratified_kfold(const std::vector<std::string>& labels,
                                        int k,
                                        std::uint64_t seed) {
  if (k < 2) throw ValidationError("stratified_kfold: k must be >= 2");
  if (labels.empty()) throw ValidationError("stratified_kfold: no labels");

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, idxs] : by_class) {
    if (idxs.size() < static_cast<std::size_t>(k))
      throw ValidationError("stratified_kfold: class '" + label + "' has " +
                            std::to_string(idxs.size()) + " members, fewer than k=" +
                            std::to_string(k));
  }

  std::mt19937_64 rng(mix_seed(seed, 0xf01d));
  std::vector<std::vector<std::size_t>> test_sets(static_cast<std::size_t>(k));
  std::size_t class_pos = 0;
  for (auto& [label, idxs] : by_class) {
    (void)label;
    for (std::size_t i = idxs.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(idxs[i - 1], idxs[j]);
    }
    // Rotate the starting fold per class so remainders spread evenly.
    std::size_t offset = class_pos % static_cast<std::size_t>(k);
    for (std::size_t j = 0; j < idxs.size(); ++j)
      test_sets[(offset + j) % static_cast<std::size_t>(k)].push_back(idxs[j]);
    ++class_pos;
  }

  std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::sort(test_sets[f].begin(), test_sets[f].end());
    folds[f].test = test_sets[f];
    std::set<std::size_t> in_test(test_sets[f].begin(), test_sets[f].end());
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (!in_test.count(i)) folds[f].train.push_back(i);
  }
  return folds;
}

EvalReport cross_validate(const Corpus& corpus,
                          int k,
                          const FeaturizerConfig& fc,
                          const TrainingConfig& tc,
                          std::uint64_t seed) {
  LabeledDocs data = labeled_documents(corpus);
  std::vector<FoldSplit> folds = stratified_kfold(data.labels, k, seed);

  std::vector<std::string> truth, pred;
  std::vector<FoldScore> fold_scores;
  for (const FoldSplit& fold : folds) {
    std::vector<std::string> ft, fp;
    eval_split(data, fold.train, fold.test, fc, tc, ft, fp);
    EvalReport fold_report = score(ft, fp, corpus.families);
    fold_scores.push_back({fold_report.accuracy, fold_report.macro_f1});
    truth.insert(truth.end(), ft.begin(), ft.end());
    pred.insert(pred.end(), fp.begin(), fp.end());
  }

  EvalReport r = score(truth, pred, corpus.families);
  r.fold_scores = fold_scores;
  r.fold_stats = make_fold_stats(fold_scores);
  r.metadata.protocol = "stratified-" + std::to_string(k) + "fold";
  r.metadata.seed = seed;
  r.metadata.config_digest = digest_configs(fc, tc, k, seed);
  return r;
}

LosoReport scaffold_loso(const Corpus& corpus,
                         const FeaturizerConfig& fc,
                         const TrainingConfig& tc) {
  LabeledDocs data = labeled_documents(corpus);
  for (const Session& s : corpus.sessions)
    if (!s.scaffold)
      throw ValidationError("session '" + s.session_id + "' has no scaffold label");
  if (corpus.scaffolds.size() < 2)
    throw ValidationError("scaffold_loso: need at least two scaffold labels");

  LosoReport out;
  for (const std::string& held : corpus.scaffolds) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < corpus.sessions.size(); ++i) {
      if (*corpus.sessions[i].scaffold == held)
        test_idx.push_back(i);
      else
        train_idx.push_back(i);
    }
    std::vector<std::string> ft, fp;
    eval_split(data, train_idx, test_idx, fc, tc, ft, fp);
    EvalReport r = score(ft, fp, corpus.families);
    r.metadata.protocol = "scaffold-loso:held-out=" + held;
    r.metadata.seed = tc.seed;
    r.metadata.config_digest = digest_configs(fc, tc, 0, tc.seed);
    out.mean_accuracy += r.accuracy;
    out.mean_macro_f1 += r.macro_f1;
    out.per_scaffold.emplace_back(held, std::move(r));
  }
  const auto n = static_cast<double>(out.per_scaffold.size());
  out.mean_accuracy /= n;
  out.mean_macro_f1 /= n;
  return out;
}

std::vector<EarlyPoint> early_detection(const Corpus& corpus,
                                        const std::vector<int>& ns,
                                        int k,
                                        const FeaturizerConfig& fc,
                                        const TrainingConfig& tc,
                                        std::uint64_t seed) {
  if (ns.empty()) throw ValidationError("early_detection: no truncation points");
  std::vector<EarlyPoint> out;
  for (int n : ns) {
    if (n < 1) throw ValidationError("early_detection: truncation points must be >= 1");
    Corpus truncated = corpus;
    for (Session& s : truncated.sessions) s = truncate(s, n);
    EvalReport r = cross_validate(truncated, k, fc, tc, seed);
    out.push_back({n, r.accuracy});
  }
  return out;
}

EvalReport verb_only_eval(const Corpus& corpus,
                          int ngram_hi,
                          Protocol protocol,
                          int k,
                          const FeaturizerConfig& fc,
                          const TrainingConfig& tc,
                          std::uint64_t seed) {
  FeaturizerConfig vfc = fc;
  vfc.ngram_hi = ngram_hi;
  if (vfc.ngram_lo > vfc.ngram_hi) vfc.ngram_lo = 1;
  validate(vfc);
  Corpus verbs = transform_verb_only(corpus);

  if (protocol == Protocol::kfold) {
    EvalReport r = cross_validate(verbs, k, vfc, tc, seed);
    r.metadata.protocol = "verb-only-" + r.metadata.protocol;
    return r;
  }

  LosoReport loso = scaffold_loso(verbs, vfc, tc);
  // Pool the per-hold confusion into one report; keep per-hold scores.
  std::vector<std::string> truth, pred;
  std::vector<FoldScore> holds;
  for (const auto& [held, r] : loso.per_scaffold) {
    (void)held;
    holds.push_back({r.accuracy, r.macro_f1});
    for (std::size_t t = 0; t < r.confusion.classes.size(); ++t)
      for (std::size_t p = 0; p < r.confusion.classes.size(); ++p)
        for (std::int64_t c = 0; c < r.confusion.counts[t][p]; ++c) {
          truth.push_back(r.confusion.classes[t]);
          pred.push_back(r.confusion.classes[p]);
        }
  }
  EvalReport pooled = score(truth, pred, verbs.families);
  pooled.fold_scores = holds;
  pooled.fold_stats = make_fold_stats(holds);
  pooled.metadata.protocol = "verb-only-scaffold-loso";
  pooled.metadata.seed = tc.seed;
  pooled.metadata.config_digest = digest_configs(vfc, tc, 0, tc.seed);
  return pooled;
}

Json eval_report_to_json(const EvalReport& r) {
  Json j;
  j["protocol"] = r.metadata.protocol;
  j["seed"] = r.metadata.seed;
  j["config_digest"] = r.metadata.config_digest;
  j["accuracy"] = r.accuracy;
  j["macro_f1"] = r.macro_f1;
  j["weighted_f1"] = r.weighted_f1;
  Json classes = Json::array();
  for (const ClassReport& c : r.per_class) {
    classes.push_back({{"label", c.label},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support}});
  }
  j["classes"] = std::move(classes);
  j["confusion"] = {{"classes", r.confusion.classes}, {"counts", r.confusion.counts}};
  if (r.fold_scores) {
    Json folds = Json::array();
    for (const FoldScore& f : *r.fold_scores)
      folds.push_back({{"accuracy", f.accuracy}, {"macro_f1", f.macro_f1}});
    j["folds"] = std::move(folds);
  }
  if (r.fold_stats) {
    const FoldStats& st = *r.fold_stats;
    j["fold_stats"] = {{"mean_accuracy", st.mean_accuracy},
                       {"std_accuracy", st.std_accuracy},
                       {"mean_macro_f1", st.mean_macro_f1},
                       {"std_macro_f1", st.std_macro_f1},
                       {"ci95_macro_f1", {st.ci95_macro_f1_lo, st.ci95_macro_f1_hi}}};
  }
  return j;
}

Json loso_report_to_json(const LosoReport& r) {
  Json j;
  Json holds = Json::array();
  for (const auto& [held, report] : r.per_scaffold) {
    Json h = eval_report_to_json(report);
    h["held_out"] = held;
    holds.push_back(std::move(h));
  }
  j["per_scaffold"] = std::move(holds);
  j["mean_accuracy"] = r.mean_accuracy;
  j["mean_macro_f1"] = r.mean_macro_f1;
  return j;
}

std::string eval_report_table(const EvalReport& r) {
  TextTable t;
  t.header({"Family", "Prec.", "Rec.", "F1", "n"});
  for (const ClassReport& c : r.per_class) {
    t.row({c.label, format_double(c.precision, 3), format_double(c.recall, 3),
           format_double(c.f1, 3), std::to_string(c.support)});
  }
  t.separator();
  std::int64_t total = 0;
  for (const ClassReport& c : r.per_class) total += c.support;
  t.row({"macro avg", "", "", format_double(r.macro_f1, 3), std::to_string(total)});
  t.row({"weighted avg", "", "", format_double(r.weighted_f1, 3), std::to_string(total)});
  std::string out = t.str();
  out += "\naccuracy: " + format_double(r.accuracy, 4);
  if (r.fold_stats) {
    out += "\nfold macro F1: " + format_double(r.fold_stats->mean_macro_f1, 4) + " +/- " +
           format_double(r.fold_stats->std_macro_f1, 4) + " (std), 95% CI [" +
           format_double(r.fold_stats->ci95_macro_f1_lo, 4) + ", " +
           format_double(r.fold_stats->ci95_macro_f1_hi, 4) + "]";
  }
  out += "\nprotocol: " + r.metadata.protocol + "\n";
  return out;
}

std::string loso_report_table(const LosoReport& r) {
  TextTable t;
  t.header({"Held-out", "Acc.", "Macro F1"});
  for (const auto& [held, report] : r.per_scaffold)
    t.row({held, format_double(report.accuracy, 3), format_double(report.macro_f1, 3)});
  t.separator();
  t.row({"Mean", format_double(r.mean_accuracy, 3), format_double(r.mean_macro_f1, 3)});
  return t.str();
}

}  // namespace shellsig
