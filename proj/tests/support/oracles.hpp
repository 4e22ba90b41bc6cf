// Brute-force reference implementations used to cross-check the library.
// Everything here is written independently of the code under test: dense
// maps instead of sparse vectors, UTF-8 lead-byte decoding instead of
// continuation-byte counting, and straight-line math.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

// Number of UTF-8 code points, decoding lead bytes and skipping what they
// announce. Invalid sequences just advance one byte and count one.
inline std::size_t codepoints(const std::string& s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (c >= 0xF0)
      len = 4;
    else if (c >= 0xE0)
      len = 3;
    else if (c >= 0xC0)
      len = 2;
    i += len;
    ++n;
  }
  return n;
}

inline std::vector<std::string> tokenize(const std::string& text, int min_len = 2) {
  std::string spaced;
  spaced.reserve(text.size());
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    bool word = (c >= 0x80) || c == '_' || std::isalnum(c);
    spaced += word ? static_cast<char>(std::tolower(c)) : ' ';
  }
  std::istringstream in(spaced);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok)
    if (codepoints(tok) >= static_cast<std::size_t>(min_len)) out.push_back(tok);
  return out;
}

inline std::vector<std::string> ngrams(const std::vector<std::string>& toks,
                                       int lo, int hi) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    for (int n = lo; n <= hi; ++n) {
      if (i + static_cast<std::size_t>(n) > toks.size()) continue;
      std::string g = toks[i];
      for (int j = 1; j < n; ++j) g += " " + toks[i + static_cast<std::size_t>(j)];
      out.push_back(g);
    }
  }
  return out;
}

struct TfidfModel {
  std::vector<std::string> vocab;       // index order
  std::map<std::string, double> idf;    // per kept term
};

// Vocabulary selection: document frequency descending, ties broken by the
// lexicographically smaller term; the kept terms are then indexed in
// lexicographic order. Smoothed idf: ln((1+N)/(1+df)) + 1.
inline TfidfModel fit(const std::vector<std::string>& docs, int lo, int hi,
                      std::size_t max_features, int min_len = 2) {
  std::map<std::string, int> df;
  for (const std::string& d : docs) {
    std::set<std::string> seen;
    for (const std::string& g : ngrams(tokenize(d, min_len), lo, hi)) seen.insert(g);
    for (const std::string& g : seen) ++df[g];
  }
  std::vector<std::pair<std::string, int>> ranked(df.begin(), df.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > max_features) ranked.resize(max_features);
  TfidfModel m;
  for (const auto& [term, count] : ranked) {
    m.vocab.push_back(term);
    m.idf[term] =
        std::log((1.0 + static_cast<double>(docs.size())) / (1.0 + count)) + 1.0;
  }
  std::sort(m.vocab.begin(), m.vocab.end());
  return m;
}

// Dense tf-idf row: sublinear tf, then L2 normalization.
inline std::map<std::string, double> transform(const TfidfModel& m,
                                               const std::string& doc, int lo,
                                               int hi, int min_len = 2) {
  std::map<std::string, int> tf;
  for (const std::string& g : ngrams(tokenize(doc, min_len), lo, hi))
    if (m.idf.count(g)) ++tf[g];
  std::map<std::string, double> w;
  double sq = 0.0;
  for (const auto& [term, count] : tf) {
    double v = (1.0 + std::log(static_cast<double>(count))) * m.idf.at(term);
    w[term] = v;
    sq += v * v;
  }
  if (sq > 0.0) {
    double norm = std::sqrt(sq);
    for (auto& [term, v] : w) v /= norm;
  }
  return w;
}

inline double cosine(const std::map<std::string, double>& a,
                     const std::map<std::string, double>& b) {
  double dot = 0.0;
  for (const auto& [term, v] : a) {
    auto it = b.find(term);
    if (it != b.end()) dot += v * it->second;
  }
  return dot;
}

struct ClassScores {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  int support = 0;
};

struct MetricScores {
  std::map<std::string, ClassScores> per_class;
  double accuracy = 0.0, macro_f1 = 0.0, weighted_f1 = 0.0;
};

inline MetricScores metrics(const std::vector<std::string>& truth,
                            const std::vector<std::string>& pred,
                            const std::vector<std::string>& classes) {
  MetricScores out;
  int correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i] == pred[i]) ++correct;
  out.accuracy = truth.empty() ? 0.0 : static_cast<double>(correct) / truth.size();

  double macro_sum = 0.0, weighted_sum = 0.0;
  for (const std::string& c : classes) {
    int tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == c) ++support;
      if (pred[i] == c && truth[i] == c) ++tp;
      if (pred[i] == c && truth[i] != c) ++fp;
      if (pred[i] != c && truth[i] == c) ++fn;
    }
    ClassScores s;
    s.support = support;
    s.precision = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
    s.recall = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
    s.f1 = (s.precision + s.recall > 0.0)
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    macro_sum += s.f1;
    weighted_sum += s.f1 * support;
    out.per_class[c] = s;
  }
  out.macro_f1 = classes.empty() ? 0.0 : macro_sum / classes.size();
  out.weighted_f1 = truth.empty() ? 0.0 : weighted_sum / truth.size();
  return out;
}

}  // namespace oracle
