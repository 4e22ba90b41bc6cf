#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "shellsig/jsonio.hpp"
#include "shellsig/session.hpp"

namespace shellsig {

// Feature extraction settings. The defaults are the reference configuration
// used throughout: word (1,2)-grams, 10k vocabulary cap, sublinear TF.
struct FeaturizerConfig {
  int ngram_lo = 1;
  int ngram_hi = 2;
  int max_features = 10000;
  bool sublinear_tf = true;
  int min_token_len = 2;
};

// Throws ValidationError when bounds are inconsistent (ngram_lo < 1,
// ngram_lo > ngram_hi, max_features < 1, min_token_len < 1).
void validate(const FeaturizerConfig& config);

bool operator==(const FeaturizerConfig& a, const FeaturizerConfig& b);

// A fitted n-gram vocabulary. Dense indices are assigned in ascending
// lexicographic term order and are contiguous from 0, so `terms` (an ordered
// map) iterates exactly in index order. doc_freq/idf are indexed by the
// dense index.
struct NgramVocabulary {
  std::map<std::string, std::uint32_t> terms;
  std::vector<std::int64_t> doc_freq;
  std::vector<double> idf;
  std::int64_t n_docs = 0;
  FeaturizerConfig config;

  std::uint32_t size() const { return static_cast<std::uint32_t>(terms.size()); }
};

// Sparse L2-normalized feature vector. Entries are sorted by strictly
// increasing index and every stored weight is positive. `dim` is the
// vocabulary size the vector was produced against.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  std::uint32_t dim = 0;

  double norm() const;
  bool empty() const { return entries.empty(); }
};

double dot(const FeatureVector& a, const FeatureVector& b);

// Lowercases and splits into maximal runs of word characters. Word
// characters are ASCII letters/digits/underscore plus every non-ASCII byte,
// so multi-byte scripts (e.g. CJK) survive shell-punctuation splitting.
// Runs shorter than min_token_len Unicode code points are dropped.
//
//   "find /home -type f 2>/dev/null" -> [find, home, type, dev, null]
//   "cat > /tmp/.sysextract"         -> [cat, tmp, sysextract]
std::vector<std::string> tokenize(std::string_view text, int min_token_len = 2);

// Contiguous n-grams for n in [lo, hi], rendered space-joined, emitted in
// (position, n) order:  [exec, grep] with (1,2) -> [exec, exec grep, grep].
// Token lists shorter than n contribute no n-grams for that n.
std::vector<std::string> ngrams(const std::vector<std::string>& tokens, int lo, int hi);

// tokenize + ngrams under one config.
std::vector<std::string> extract_terms(std::string_view text, const FeaturizerConfig& config);

// Fits document frequencies over docs. When the distinct term count exceeds
// max_features, keeps the top max_features by descending document frequency,
// breaking ties by ascending lexicographic order. idf(t) uses the smoothed
// form ln((1+N)/(1+df)) + 1. Empty docs list -> FitError.
NgramVocabulary fit_vocabulary(const std::vector<std::string>& docs,
                               const FeaturizerConfig& config);

// TF-IDF weights for one document under a fitted vocabulary:
// weight = (1 + ln tf) * idf when sublinear_tf, else tf * idf, then L2
// normalization. Unknown terms are ignored; a document with no in-vocabulary
// terms yields the zero vector (norm 0), which downstream code accepts.
FeatureVector vectorize(std::string_view doc, const NgramVocabulary& vocab);

// Keeps entries up to and including the n-th non-empty tool_call command
// (n >= 1, else ValidationError); every later entry is dropped. Sessions
// with fewer than n commands come back unchanged. num_bash_entries is
// updated to the surviving command count.
Session truncate(const Session& s, int n);

// First whitespace-delimited token of a command ("" for blank input).
std::string command_verb(std::string_view command);

// The classification document with every command reduced to its verb.
std::string verb_only(const Session& s);

// Versioned vocabulary serialization: config, n_docs and one
// [term, index, doc_freq, idf] row per term, sorted by index.
Json vocabulary_to_json(const NgramVocabulary& vocab);
NgramVocabulary vocabulary_from_json(const Json& j);

}  // namespace shellsig
