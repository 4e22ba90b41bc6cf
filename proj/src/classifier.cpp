#include "shellsig/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "shellsig/errors.hpp"

namespace shellsig {

void validate(const TrainingConfig& config) {
  if (!(config.c > 0.0)) throw ValidationError("training c must be > 0");
  if (!(config.tol > 0.0)) throw ValidationError("training tol must be > 0");
  if (config.max_iter < 1) throw ValidationError("training max_iter must be >= 1");
}

std::map<std::string, double> balanced_weights(const std::vector<std::string>& labels) {
  if (labels.empty()) throw ValidationError("balanced_weights: no labels");
  std::map<std::string, std::int64_t> counts;
  for (const auto& l : labels) ++counts[l];
  const double n = static_cast<double>(labels.size());
  const double k = static_cast<double>(counts.size());
  std::map<std::string, double> out;
  for (const auto& [label, count] : counts)
    out[label] = n / (k * static_cast<double>(count));
  return out;
}

namespace {

// Dual coordinate descent for one binary L2-regularized squared-hinge SVM:
//
//   min_w 1/2 w.w + sum_i C_i max(0, 1 - y_i w.x_i)^2
//
// over samples augmented with a constant 1.0 bias feature. The dual has
// a diagonal damping D_ii = 1/(2 C_i) and no upper bound on alpha. One pass
// visits samples in a seeded random permutation; the projected-gradient
// spread across a full pass is the convergence measure.
struct BinarySolveResult {
  std::vector<double> w;  // size dim + 1; last component is the bias
  bool converged = false;
  int iterations = 0;
};

BinarySolveResult solve_binary(const std::vector<FeatureVector>& x,
                               const std::vector<signed char>& y,
                               const std::vector<double>& c_i,
                               std::uint32_t dim,
                               double tol,
                               int max_iter,
                               std::uint64_t seed) {
  const std::size_t n = x.size();
  BinarySolveResult res;
  res.w.assign(dim + 1, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> d_ii(n);
  std::vector<double> q_ii(n);
  for (std::size_t i = 0; i < n; ++i) {
    d_ii[i] = 1.0 / (2.0 * c_i[i]);
    double sq = 1.0;  // bias feature contributes 1.0^2
    for (const auto& [idx, w] : x[i].entries) {
      (void)idx;
      sq += w * w;
    }
    q_ii[i] = sq + d_ii[i];
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  auto shuffle = [&] {
    // Fisher-Yates with explicit modulo draws; std::shuffle's draw pattern
    // is implementation-defined and would break cross-toolchain determinism.
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }
  };

  double* w = res.w.data();
  for (int iter = 0; iter < max_iter; ++iter) {
    shuffle();
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t oi = 0; oi < n; ++oi) {
      const std::size_t i = order[oi];
      double score = w[dim];
      for (const auto& [idx, val] : x[i].entries) score += w[idx] * val;
      const double yi = static_cast<double>(y[i]);
      const double g = yi * score - 1.0 + d_ii[i] * alpha[i];
      double pg = g;
      if (alpha[i] == 0.0) pg = std::min(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::fabs(pg) > 1e-12) {
        const double a_old = alpha[i];
        const double a_new = std::max(a_old - g / q_ii[i], 0.0);
        alpha[i] = a_new;
        const double delta = (a_new - a_old) * yi;
        for (const auto& [idx, val] : x[i].entries) w[idx] += delta * val;
        w[dim] += delta;
      }
    }
    res.iterations = iter + 1;
    if (pg_max - pg_min < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace

LinearModel train(const std::vector<FeatureVector>& vectors,
                  const std::vector<std::string>& labels,
                  const TrainingConfig& config,
                  NgramVocabulary vocab,
                  const std::vector<double>& sample_weights) {
  validate(config);
  if (vectors.size() != labels.size())
    throw TrainingError("train: vectors and labels differ in length");
  if (vectors.size() < 2) throw TrainingError("train: need at least two samples");
  if (!sample_weights.empty() && sample_weights.size() != vectors.size())
    throw TrainingError("train: sample_weights length mismatch");

  const std::uint32_t dim = vocab.size();
  for (const FeatureVector& v : vectors) {
    if (v.dim != dim)
      throw DimensionError("train: vector dimensionality " + std::to_string(v.dim) +
                           " does not match vocabulary size " + std::to_string(dim));
  }

  std::set<std::string> class_set(labels.begin(), labels.end());
  if (class_set.size() < 2)
    throw TrainingError("train: need at least two distinct labels");

  LinearModel m;
  m.config = config;
  m.classes.assign(class_set.begin(), class_set.end());
  m.vocab = std::move(vocab);

  std::vector<double> s_i(vectors.size());
  if (sample_weights.empty()) {
    auto table = balanced_weights(labels);
    for (std::size_t i = 0; i < labels.size(); ++i) s_i[i] = table[labels[i]];
  } else {
    for (double w : sample_weights)
      if (!(w > 0.0)) throw TrainingError("train: sample weights must be > 0");
    s_i = sample_weights;
  }

  std::vector<double> c_i(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) c_i[i] = config.c * s_i[i];

  m.weights.resize(m.classes.size());
  m.bias.resize(m.classes.size());
  for (std::size_t ci = 0; ci < m.classes.size(); ++ci) {
    std::vector<signed char> y(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i)
      y[i] = (labels[i] == m.classes[ci]) ? 1 : -1;
    BinarySolveResult r = solve_binary(vectors, y, c_i, dim, config.tol,
                                       config.max_iter, mix_seed(config.seed, ci));
    if (!r.converged) {
      m.convergence_warnings.push_back(
          "class '" + m.classes[ci] + "' did not reach tol " +
          std::to_string(config.tol) + " within " + std::to_string(config.max_iter) +
          " iterations");
    }
    m.bias[ci] = r.w[dim];
    r.w.resize(dim);
    m.weights[ci] = std::move(r.w);
  }
  return m;
}

std::vector<double> decision(const LinearModel& m, const FeatureVector& v) {
  if (v.dim != m.vocab.size())
    throw DimensionError("decision: vector dimensionality " + std::to_string(v.dim) +
                         " does not match model vocabulary size " +
                         std::to_string(m.vocab.size()));
  std::vector<double> scores(m.classes.size());
  for (std::size_t ci = 0; ci < m.classes.size(); ++ci) {
    double s = m.bias[ci];
    const std::vector<double>& w = m.weights[ci];
    for (const auto& [idx, val] : v.entries) s += w[idx] * val;
    scores[ci] = s;
  }
  return scores;
}

std::string predict(const LinearModel& m, const FeatureVector& v) {
  std::vector<double> scores = decision(m, v);
  // classes are sorted ascending, so keeping strictly-greater scores makes
  // an exact tie resolve to the lexicographically smaller label.
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return m.classes[best];
}

std::vector<std::pair<std::string, double>> top_features(const LinearModel& m,
                                                         const std::string& cls,
                                                         std::size_t k) {
  auto it = std::find(m.classes.begin(), m.classes.end(), cls);
  if (it == m.classes.end())
    throw ValidationError("top_features: unknown class '" + cls + "'");
  const std::vector<double>& w =
      m.weights[static_cast<std::size_t>(it - m.classes.begin())];

  std::vector<const std::string*> term_by_index(m.vocab.size());
  for (const auto& [term, idx] : m.vocab.terms) term_by_index[idx] = &term;

  std::vector<std::pair<std::string, double>> positive;
  for (std::uint32_t idx = 0; idx < w.size(); ++idx)
    if (w[idx] > 0.0) positive.emplace_back(*term_by_index[idx], w[idx]);
  std::sort(positive.begin(), positive.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (positive.size() > k) positive.resize(k);
  return positive;
}

Json model_to_json(const LinearModel& m) {
  Json j;
  j["format_version"] = m.format_version;
  j["training_config"] = {{"c", m.config.c},
                          {"tol", m.config.tol},
                          {"max_iter", m.config.max_iter},
                          {"seed", m.config.seed}};
  j["classes"] = m.classes;
  j["weights"] = m.weights;
  j["bias"] = m.bias;
  j["convergence_warnings"] = m.convergence_warnings;
  j["vocabulary"] = vocabulary_to_json(m.vocab);
  return j;
}

LinearModel model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("format_version"))
    throw SchemaError("model document is missing format_version");
  int version = j["format_version"].get<int>();
  if (version != 1)
    throw SchemaError("unsupported model format_version: " + std::to_string(version));
  for (const char* key : {"training_config", "classes", "weights", "bias", "vocabulary"})
    if (!j.contains(key))
      throw SchemaError(std::string("model document is missing field '") + key + "'");

  LinearModel m;
  m.format_version = version;
  const Json& tc = j["training_config"];
  m.config.c = tc.at("c").get<double>();
  m.config.tol = tc.at("tol").get<double>();
  m.config.max_iter = tc.at("max_iter").get<int>();
  m.config.seed = tc.at("seed").get<std::uint64_t>();
  validate(m.config);
  m.classes = j["classes"].get<std::vector<std::string>>();
  m.weights = j["weights"].get<std::vector<std::vector<double>>>();
  m.bias = j["bias"].get<std::vector<double>>();
  if (j.contains("convergence_warnings"))
    m.convergence_warnings = j["convergence_warnings"].get<std::vector<std::string>>();
  m.vocab = vocabulary_from_json(j["vocabulary"]);

  if (m.classes.size() < 2 || m.weights.size() != m.classes.size() ||
      m.bias.size() != m.classes.size())
    throw SchemaError("model classes/weights/bias are inconsistent");
  if (!std::is_sorted(m.classes.begin(), m.classes.end()))
    throw SchemaError("model classes must be sorted");
  for (const auto& w : m.weights)
    if (w.size() != m.vocab.size())
      throw SchemaError("model weight row does not match vocabulary size");
  return m;
}

void save_model(const LinearModel& m, const std::filesystem::path& path) {
  atomic_write_file(path, model_to_json(m).dump(2) + "\n");
}

LinearModel load_model(const std::filesystem::path& path) {
  return model_from_json(parse_json(read_file(path), path.string()));
}

}  // namespace shellsig
