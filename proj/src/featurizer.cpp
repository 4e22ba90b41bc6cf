#include "shellsig/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "shellsig/errors.hpp"

namespace shellsig {

void validate(const FeaturizerConfig& config) {
  if (config.ngram_lo < 1)
    throw ValidationError("ngram_lo must be >= 1");
  if (config.ngram_lo > config.ngram_hi)
    throw ValidationError("ngram_lo must not exceed ngram_hi");
  if (config.max_features < 1)
    throw ValidationError("max_features must be >= 1");
  if (config.min_token_len < 1)
    throw ValidationError("min_token_len must be >= 1");
}

bool operator==(const FeaturizerConfig& a, const FeaturizerConfig& b) {
  return a.ngram_lo == b.ngram_lo && a.ngram_hi == b.ngram_hi &&
         a.max_features == b.max_features && a.sublinear_tf == b.sublinear_tf &&
         a.min_token_len == b.min_token_len;
}

double FeatureVector::norm() const {
  double s = 0.0;
  for (const auto& [idx, w] : entries) {
    (void)idx;
    s += w * w;
  }
  return std::sqrt(s);
}

double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      s += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return s;
}

namespace {

inline bool is_word_byte(unsigned char c) {
  // ASCII letters, digits, underscore; every non-ASCII byte counts as a word
  // byte so multi-byte UTF-8 sequences stay glued together.
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

inline bool is_continuation_byte(unsigned char c) { return (c & 0xC0) == 0x80; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text, int min_token_len) {
  if (min_token_len < 1) throw ValidationError("min_token_len must be >= 1");
  std::vector<std::string> out;
  std::string cur;
  int codepoints = 0;
  auto flush = [&] {
    if (codepoints >= min_token_len) out.push_back(cur);
    cur.clear();
    codepoints = 0;
  };
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      cur.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32)
                                           : static_cast<char>(c));
      if (!is_continuation_byte(c)) ++codepoints;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, int lo, int hi) {
  if (lo < 1) throw ValidationError("ngram lower bound must be >= 1");
  if (lo > hi) throw ValidationError("ngram lower bound must not exceed upper bound");
  std::vector<std::string> out;
  const int n_tok = static_cast<int>(tokens.size());
  for (int pos = 0; pos < n_tok; ++pos) {
    for (int n = lo; n <= hi && pos + n <= n_tok; ++n) {
      std::string term = tokens[static_cast<std::size_t>(pos)];
      for (int k = 1; k < n; ++k) {
        term += ' ';
        term += tokens[static_cast<std::size_t>(pos + k)];
      }
      out.push_back(std::move(term));
    }
  }
  return out;
}

std::vector<std::string> extract_terms(std::string_view text, const FeaturizerConfig& config) {
  return ngrams(tokenize(text, config.min_token_len), config.ngram_lo, config.ngram_hi);
}

NgramVocabulary fit_vocabulary(const std::vector<std::string>& docs,
                               const FeaturizerConfig& config) {
  validate(config);
  if (docs.empty()) throw FitError("fit_vocabulary: document list is empty");

  // Ordered map keeps terms in ascending lexicographic order throughout, so
  // tie-breaking and index assignment fall out of iteration order.
  std::map<std::string, std::int64_t> df;
  for (const std::string& doc : docs) {
    std::vector<std::string> terms = extract_terms(doc, config);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (std::string& t : terms) ++df[std::move(t)];
  }

  NgramVocabulary vocab;
  vocab.config = config;
  vocab.n_docs = static_cast<std::int64_t>(docs.size());

  std::vector<const std::pair<const std::string, std::int64_t>*> selected;
  selected.reserve(df.size());
  for (const auto& kv : df) selected.push_back(&kv);
  if (selected.size() > static_cast<std::size_t>(config.max_features)) {
    // Highest document frequency first; stable sort keeps the map's
    // lexicographic order within equal frequencies.
    std::stable_sort(selected.begin(), selected.end(),
                     [](const auto* a, const auto* b) { return a->second > b->second; });
    selected.resize(static_cast<std::size_t>(config.max_features));
  }

  std::vector<std::pair<std::string, std::int64_t>> rows;
  rows.reserve(selected.size());
  for (const auto* kv : selected) rows.emplace_back(kv->first, kv->second);
  std::sort(rows.begin(), rows.end());

  vocab.doc_freq.reserve(rows.size());
  vocab.idf.reserve(rows.size());
  std::uint32_t index = 0;
  const double n = static_cast<double>(vocab.n_docs);
  for (auto& [term, freq] : rows) {
    vocab.terms.emplace(std::move(term), index++);
    vocab.doc_freq.push_back(freq);
    vocab.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(freq))) + 1.0);
  }
  return vocab;
}

FeatureVector vectorize(std::string_view doc, const NgramVocabulary& vocab) {
  std::unordered_map<std::uint32_t, std::int64_t> tf;
  for (const std::string& term : extract_terms(doc, vocab.config)) {
    auto it = vocab.terms.find(term);
    if (it != vocab.terms.end()) ++tf[it->second];
  }

  FeatureVector v;
  v.dim = vocab.size();
  v.entries.reserve(tf.size());
  for (const auto& [idx, count] : tf) {
    double w = vocab.config.sublinear_tf ? 1.0 + std::log(static_cast<double>(count))
                                         : static_cast<double>(count);
    v.entries.emplace_back(idx, w * vocab.idf[idx]);
  }
  std::sort(v.entries.begin(), v.entries.end());
  double norm = v.norm();
  if (norm > 0.0) {
    for (auto& [idx, w] : v.entries) {
      (void)idx;
      w /= norm;
    }
  }
  return v;
}

Session truncate(const Session& s, int n) {
  if (n < 1) throw ValidationError("truncate: n must be >= 1");
  Session out = s;
  out.entries.clear();
  std::int64_t commands = 0;
  for (const Entry& e : s.entries) {
    out.entries.push_back(e);
    if (e.type == EntryType::tool_call && !e.command.empty() && ++commands == n) break;
  }
  out.num_bash_entries = command_count(out);
  return out;
}

std::string command_verb(std::string_view command) {
  std::size_t start = command.find_first_not_of(" \t\r\n\v\f");
  if (start == std::string_view::npos) return "";
  std::size_t end = command.find_first_of(" \t\r\n\v\f", start);
  if (end == std::string_view::npos) end = command.size();
  return std::string(command.substr(start, end - start));
}

std::string verb_only(const Session& s) {
  std::string doc;
  for (const Entry& e : s.entries) {
    if (e.type != EntryType::tool_call || e.command.empty()) continue;
    std::string verb = command_verb(e.command);
    if (verb.empty()) continue;
    if (!doc.empty()) doc += '\n';
    doc += verb;
  }
  return doc;
}

Json vocabulary_to_json(const NgramVocabulary& vocab) {
  Json j;
  j["format_version"] = 1;
  j["config"] = {{"ngram_lo", vocab.config.ngram_lo},
                 {"ngram_hi", vocab.config.ngram_hi},
                 {"max_features", vocab.config.max_features},
                 {"sublinear_tf", vocab.config.sublinear_tf},
                 {"min_token_len", vocab.config.min_token_len}};
  j["n_docs"] = vocab.n_docs;
  Json rows = Json::array();
  for (const auto& [term, idx] : vocab.terms) {
    rows.push_back(Json::array({term, idx, vocab.doc_freq[idx], vocab.idf[idx]}));
  }
  j["terms"] = std::move(rows);
  return j;
}

NgramVocabulary vocabulary_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("format_version"))
    throw SchemaError("vocabulary document is missing format_version");
  int version = j["format_version"].get<int>();
  if (version != 1)
    throw SchemaError("unsupported vocabulary format_version: " + std::to_string(version));
  if (!j.contains("config") || !j.contains("n_docs") || !j.contains("terms"))
    throw SchemaError("vocabulary document is missing config/n_docs/terms");

  NgramVocabulary vocab;
  const Json& c = j["config"];
  vocab.config.ngram_lo = c.at("ngram_lo").get<int>();
  vocab.config.ngram_hi = c.at("ngram_hi").get<int>();
  vocab.config.max_features = c.at("max_features").get<int>();
  vocab.config.sublinear_tf = c.at("sublinear_tf").get<bool>();
  vocab.config.min_token_len = c.at("min_token_len").get<int>();
  validate(vocab.config);
  vocab.n_docs = j["n_docs"].get<std::int64_t>();

  const Json& rows = j["terms"];
  vocab.doc_freq.resize(rows.size());
  vocab.idf.resize(rows.size());
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != 4)
      throw SchemaError("vocabulary term row must be [term, index, doc_freq, idf]");
    std::string term = row[0].get<std::string>();
    auto idx = row[1].get<std::uint32_t>();
    if (idx >= rows.size())
      throw SchemaError("vocabulary term index out of range: " + std::to_string(idx));
    vocab.doc_freq[idx] = row[2].get<std::int64_t>();
    vocab.idf[idx] = row[3].get<double>();
    if (!vocab.terms.emplace(std::move(term), idx).second)
      throw SchemaError("duplicate vocabulary term");
  }
  // Indices must be the contiguous lexicographic enumeration.
  std::uint32_t expect = 0;
  for (const auto& [term, idx] : vocab.terms) {
    (void)term;
    if (idx != expect++)
      throw SchemaError("vocabulary indices are not in lexicographic order");
  }
  return vocab;
}

}  // namespace shellsig
