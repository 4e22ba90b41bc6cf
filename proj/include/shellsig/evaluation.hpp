#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shellsig/classifier.hpp"
#include "shellsig/session.hpp"

namespace shellsig {

// Row = true class, column = predicted class; classes sorted ascending.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::int64_t>> counts;
};

struct ClassReport {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct FoldScore {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

// Mean, sample (n-1) std and two-sided 95% t-interval over fold scores.
// Reported both ways because a +/- band alone is ambiguous.
struct FoldStats {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
  double std_macro_f1 = 0.0;
  double ci95_macro_f1_lo = 0.0;
  double ci95_macro_f1_hi = 0.0;
};

struct EvalMetadata {
  std::string protocol;
  std::uint64_t seed = 0;
  std::string config_digest;
};

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  std::vector<ClassReport> per_class;  // ascending label order
  ConfusionMatrix confusion;
  std::optional<std::vector<FoldScore>> fold_scores;
  std::optional<FoldStats> fold_stats;
  EvalMetadata metadata;
};

// Computes every metric from aligned truth/predicted label sequences over a
// fixed class universe. Zero-support classes score 0 for precision, recall
// and F1 and still count in the macro mean. Errors: length mismatch, empty
// input, or any label outside `classes` (ValidationError).
EvalReport score(const std::vector<std::string>& truth,
                 const std::vector<std::string>& predicted,
                 const std::vector<std::string>& classes);

// Stratified k-fold assignment: returns k (train, test) index pairs.
// Per-class fold counts differ by at most one; deterministic given seed.
// Errors: k < 2, or any class with fewer than k members (named).
struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
std::vector<FoldSplit> stratified_kfold(const std::vector<std::string>& labels,
                                        int k,
                                        std::uint64_t seed);

// Stratified k-fold cross-validation over a labeled corpus. Each fold fits
// its vocabulary on the training partition only (the held-out fold never
// leaks into document frequencies), trains, and predicts the held-out
// sessions. The headline metrics pool predictions across folds; fold_scores
// and fold_stats carry the per-fold spread.
EvalReport cross_validate(const Corpus& corpus,
                          int k,
                          const FeaturizerConfig& fc,
                          const TrainingConfig& tc,
                          std::uint64_t seed);

// Leave-one-scaffold-out: for every scaffold label, train on all other
// scaffolds and test on the held-out one. Requires >= 2 scaffold labels and
// a scaffold on every session.
struct LosoReport {
  std::vector<std::pair<std::string, EvalReport>> per_scaffold;
  double mean_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
};
LosoReport scaffold_loso(const Corpus& corpus,
                         const FeaturizerConfig& fc,
                         const TrainingConfig& tc);

// Early-detection curve: for each n, truncates every session (training and
// test alike, so the featurizer never sees more than the detector would)
// to its first n commands and runs k-fold CV. Returns (n, pooled accuracy).
struct EarlyPoint {
  int n = 0;
  double accuracy = 0.0;
};
std::vector<EarlyPoint> early_detection(const Corpus& corpus,
                                        const std::vector<int>& ns,
                                        int k,
                                        const FeaturizerConfig& fc,
                                        const TrainingConfig& tc,
                                        std::uint64_t seed);

enum class Protocol { kfold, loso };

// Ablation: reduces every command to its verb (first token), then evaluates
// with n-grams up to ngram_hi under the chosen protocol. For the LOSO
// protocol the headline metrics pool predictions across the holds and
// fold_scores carries the per-hold numbers.
EvalReport verb_only_eval(const Corpus& corpus,
                          int ngram_hi,
                          Protocol protocol,
                          int k,
                          const FeaturizerConfig& fc,
                          const TrainingConfig& tc,
                          std::uint64_t seed);

Json eval_report_to_json(const EvalReport& r);
Json loso_report_to_json(const LosoReport& r);

// Aligned text rendering: per-class precision/recall/F1/support table plus
// accuracy and averages; LOSO variant lists one row per held-out scaffold.
std::string eval_report_table(const EvalReport& r);
std::string loso_report_table(const LosoReport& r);

}  // namespace shellsig
