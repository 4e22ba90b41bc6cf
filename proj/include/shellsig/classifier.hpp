#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shellsig/featurizer.hpp"
#include "shellsig/jsonio.hpp"

namespace shellsig {

// Linear SVM training settings (squared hinge, one-vs-rest). `seed` drives
// the coordinate-descent visit order; identical inputs and seed reproduce
// bit-identical weights.
struct TrainingConfig {
  double c = 1.0;
  double tol = 1e-4;
  int max_iter = 1000;
  std::uint64_t seed = 0;
};

void validate(const TrainingConfig& config);

// One-vs-rest linear model over a fitted vocabulary. weights[k] has one
// coefficient per vocabulary term; decision score for class k is
// dot(weights[k], v) + bias[k]. Classes are sorted ascending.
struct LinearModel {
  int format_version = 1;
  TrainingConfig config;
  std::vector<std::string> classes;
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
  NgramVocabulary vocab;
  // One note per class that hit max_iter before reaching tol. Training
  // treats non-convergence as a warning, never an error.
  std::vector<std::string> convergence_warnings;
};

// Balanced class weights: weight(c) = n_samples / (n_classes * count(c)).
std::map<std::string, double> balanced_weights(const std::vector<std::string>& labels);

// Trains one binary squared-hinge SVM per class by dual coordinate descent:
//
//   min_w  1/2 ||w||^2 + C * sum_i s_i * max(0, 1 - y_i (w.x_i + b))^2
//
// with s_i the balanced weight of sample i's label (or the caller-provided
// per-sample weights). The bias rides along as an appended constant feature
// of value 1.0, so it lives inside the regularized weight vector exactly as
// in the reference implementation of this estimator. Deterministic given
// config.seed. Errors: size mismatch or fewer than two samples / distinct
// labels -> TrainingError; vector dim != vocab size -> DimensionError.
LinearModel train(const std::vector<FeatureVector>& vectors,
                  const std::vector<std::string>& labels,
                  const TrainingConfig& config,
                  NgramVocabulary vocab,
                  const std::vector<double>& sample_weights = {});

// Per-class decision scores aligned with model.classes.
// DimensionError when v.dim != |vocab|.
std::vector<double> decision(const LinearModel& m, const FeatureVector& v);

// Argmax of decision(); an exact score tie goes to the lexicographically
// smaller label. Note: predictions are invariant under positive rescaling of
// a test vector only when all biases are zero; with nonzero biases the
// scaling shifts the argmax, so inputs must stay L2-normalized.
std::string predict(const LinearModel& m, const FeatureVector& v);

// The k highest positive coefficients for one class, descending, ties by
// ascending term. k larger than the vocabulary returns every
// positive-coefficient term. Unknown class -> ValidationError.
std::vector<std::pair<std::string, double>> top_features(const LinearModel& m,
                                                         const std::string& cls,
                                                         std::size_t k);

// Versioned model artifact: config, classes, dense weights, biases and the
// embedded vocabulary. Round-trips decision values exactly.
Json model_to_json(const LinearModel& m);
LinearModel model_from_json(const Json& j);

void save_model(const LinearModel& m, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace shellsig
