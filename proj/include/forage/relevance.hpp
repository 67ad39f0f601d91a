/*
 * Copyright 2026 The Forage Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "forage/dataset.hpp"

namespace forage {

enum class LabelSource { kBookmark, kIrrelevantFlag, kOracle };

std::string to_string(LabelSource s);
LabelSource label_source_from_string(const std::string& s);

struct Observation {
  PointId point_id = 0;
  int label = 0;  // 0 or 1
  LabelSource source = LabelSource::kOracle;
  std::int64_t at_ms = 0;
};

// The labeled set D. One entry per point; insertion order is kept.
class ObservationSet {
 public:
  ObservationSet() = default;

  // Replaces any existing entry for the same point. Throws ValidationError
  // if the label is not 0/1.
  void upsert(const Observation& obs);
  bool erase(PointId id);

  const Observation* find(PointId id) const;
  bool contains(PointId id) const { return pos_.count(id) != 0; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const Observation> entries() const { return entries_; }

  // u(D): number of positive labels.
  std::size_t utility() const;

  friend bool operator==(const ObservationSet& a, const ObservationSet& b);

 private:
  std::vector<Observation> entries_;
  std::unordered_map<PointId, std::size_t> pos_;
};

enum class Attribute { kText, kLocation };
enum class Metric { kCosine, kEuclidean };

// Smoothed k-NN over the k nearest *labeled* points under one attribute.
struct AttributeModel {
  Attribute attribute = Attribute::kText;
  std::size_t k = 50;
  double gamma = 1.0;  // pseudocount
  double pi = 0.05;    // prior relevance

  // cosine for text, euclidean for location
  Metric metric() const {
    return attribute == Attribute::kText ? Metric::kCosine : Metric::kEuclidean;
  }
  // Throws ConfigError unless k >= 1, gamma > 0 and 0 < pi <= 1.
  void validate() const;
};

struct RelevanceModel {
  AttributeModel text{Attribute::kText};
  AttributeModel location{Attribute::kLocation};
  double q = 0.5;  // weight of the text model

  void validate() const;
};

// Distance under the attribute's metric. Cosine distance is 1 - <a, b> on
// the stored (unit or zero) embeddings; a point without an embedding acts as
// the zero vector.
double attribute_distance(const AttributeModel& model, const DataPoint& a, const DataPoint& b);

// (gamma * pi + positives) / (gamma + neighbors). Every posterior in the
// library goes through this one expression.
inline double smoothed_posterior(const AttributeModel& model, std::size_t positives,
                                 std::size_t neighbors) {
  return (model.gamma * model.pi + static_cast<double>(positives)) /
         (model.gamma + static_cast<double>(neighbors));
}

// q * p_text + (1 - q) * p_location, exact at q in {0, 1} and when both
// inputs agree, and clamped into [min, max] of the inputs.
double fuse(double q, double p_text, double p_location);

struct KnnEstimate {
  double probability = 0.0;
  std::size_t neighbors = 0;
  std::size_t positives = 0;
  // Text query point had a degenerate (or missing) embedding: prior returned.
  bool fallback = false;
};

// Pr(y=1 | x, D) under one attribute model. If x itself has an entry in D it
// is left out, which makes this the leave-one-out prediction for labeled x.
// Neighbor ties are broken by ascending point id.
KnnEstimate knn_probability(const AttributeModel& model, const DataPoint& x,
                            const ObservationSet& observations, const Dataset& ds);

struct FusedEstimate {
  double probability = 0.0;
  double text = 0.0;
  double location = 0.0;
  bool fallback = false;
};

FusedEstimate fused_probability(const RelevanceModel& rm, const DataPoint& x,
                                const ObservationSet& observations, const Dataset& ds);

// Leave-one-out predictions of each attribute model for one labeled point.
struct LooPrediction {
  PointId point_id = 0;
  int label = 0;
  double text = 0.0;
  double location = 0.0;
};

struct FusionFit {
  double q = 0.5;
  double log_likelihood = 0.0;
  bool uninformed = false;  // |D| = 0, default returned
};

inline constexpr std::size_t kFusionGridSteps = 100;  // q in {0, 0.01, ..., 1}
inline constexpr double kLikelihoodClamp = 1e-6;

inline double fusion_grid_value(std::size_t i) {
  return static_cast<double>(i) / static_cast<double>(kFusionGridSteps);
}

// Sum of log[y P + (1 - y)(1 - P)] with P = fuse(q, text, location) clamped
// to [1e-6, 1 - 1e-6]. Predictions are summed in ascending point-id order.
double loo_log_likelihood(std::span<const LooPrediction> predictions, double q);

// Grid argmax of loo_log_likelihood; ties go to the smallest q.
FusionFit fit_fusion_weight(std::span<const LooPrediction> predictions);
FusionFit fit_fusion_weight(const RelevanceModel& rm, const ObservationSet& observations,
                            const Dataset& ds);

std::vector<LooPrediction> loo_predictions(const RelevanceModel& rm,
                                           const ObservationSet& observations, const Dataset& ds);

struct ScoredPoint {
  PointId id = 0;
  double score = 0.0;
  friend bool operator==(const ScoredPoint&, const ScoredPoint&) = default;
};

// Descending score, ties by ascending id.
inline bool score_order(const ScoredPoint& a, const ScoredPoint& b) {
  return a.score != b.score ? a.score > b.score : a.id < b.id;
}

// Fused posterior of every unlabeled point, sorted by score_order.
std::vector<ScoredPoint> rank_unlabeled(const RelevanceModel& rm, const ObservationSet& observations,
                                        const Dataset& ds);

}  // namespace forage
