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

#include "forage/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "forage/error.hpp"

namespace forage {

std::string to_string(LabelSource s) {
  switch (s) {
    case LabelSource::kBookmark: return "bookmark";
    case LabelSource::kIrrelevantFlag: return "irrelevant_flag";
    case LabelSource::kOracle: return "oracle";
  }
  return "oracle";
}

LabelSource label_source_from_string(const std::string& s) {
  if (s == "bookmark") return LabelSource::kBookmark;
  if (s == "irrelevant_flag") return LabelSource::kIrrelevantFlag;
  if (s == "oracle") return LabelSource::kOracle;
  throw ValidationError("unknown label source '" + s + "'");
}

void ObservationSet::upsert(const Observation& obs) {
  if (obs.label != 0 && obs.label != 1) {
    throw ValidationError("label for point " + std::to_string(obs.point_id) + " must be 0 or 1");
  }
  auto it = pos_.find(obs.point_id);
  if (it != pos_.end()) {
    entries_[it->second] = obs;
    return;
  }
  pos_.emplace(obs.point_id, entries_.size());
  entries_.push_back(obs);
}

bool ObservationSet::erase(PointId id) {
  auto it = pos_.find(id);
  if (it == pos_.end()) return false;
  const std::size_t at = it->second;
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(at));
  pos_.erase(it);
  for (auto& [_, p] : pos_) {
    if (p > at) --p;
  }
  return true;
}

const Observation* ObservationSet::find(PointId id) const {
  auto it = pos_.find(id);
  return it == pos_.end() ? nullptr : &entries_[it->second];
}

std::size_t ObservationSet::utility() const {
  std::size_t u = 0;
  for (const auto& o : entries_) u += static_cast<std::size_t>(o.label);
  return u;
}

bool operator==(const ObservationSet& a, const ObservationSet& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.point_id != y.point_id || x.label != y.label || x.source != y.source || x.at_ms != y.at_ms) {
      return false;
    }
  }
  return true;
}

void AttributeModel::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be > 0");
  if (!(pi > 0.0 && pi <= 1.0)) throw ConfigError("pi must lie in (0, 1]");
}

void RelevanceModel::validate() const {
  if (text.attribute != Attribute::kText || location.attribute != Attribute::kLocation) {
    throw ConfigError("relevance model needs one text and one location model");
  }
  text.validate();
  location.validate();
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("fusion weight q must lie in [0, 1]");
}

double attribute_distance(const AttributeModel& model, const DataPoint& a, const DataPoint& b) {
  if (model.metric() == Metric::kEuclidean) {
    const double dx = a.location.x - b.location.x;
    const double dy = a.location.y - b.location.y;
    return std::sqrt(dx * dx + dy * dy);
  }
  if (a.embedding.empty() || b.embedding.empty()) return 1.0;
  double dot = 0.0;
  const std::size_t n = std::min(a.embedding.size(), b.embedding.size());
  for (std::size_t i = 0; i < n; ++i) dot += a.embedding[i] * b.embedding[i];
  return 1.0 - dot;
}

double fuse(double q, double p_text, double p_location) {
  if (p_text == p_location) return p_text;
  if (q == 0.0) return p_location;
  if (q == 1.0) return p_text;
  const double v = q * p_text + (1.0 - q) * p_location;
  return std::clamp(v, std::min(p_text, p_location), std::max(p_text, p_location));
}

namespace {

bool text_fallback(const AttributeModel& model, const DataPoint& x) {
  return model.attribute == Attribute::kText && (x.degenerate || x.embedding.empty());
}

}  // namespace

KnnEstimate knn_probability(const AttributeModel& model, const DataPoint& x,
                            const ObservationSet& observations, const Dataset& ds) {
  KnnEstimate est;
  if (text_fallback(model, x)) {
    est.probability = model.pi;
    est.fallback = true;
    return est;
  }
  struct Cand {
    double dist;
    PointId id;
    int label;
  };
  std::vector<Cand> cands;
  cands.reserve(observations.size());
  for (const auto& o : observations.entries()) {
    if (o.point_id == x.id) continue;
    cands.push_back({attribute_distance(model, x, ds.at(o.point_id)), o.point_id, o.label});
  }
  if (cands.empty()) {
    est.probability = model.pi;
    return est;
  }
  const std::size_t take = std::min(model.k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take), cands.end(),
                    [](const Cand& a, const Cand& b) { return std::tie(a.dist, a.id) < std::tie(b.dist, b.id); });
  for (std::size_t i = 0; i < take; ++i) est.positives += static_cast<std::size_t>(cands[i].label);
  est.neighbors = take;
  est.probability = smoothed_posterior(model, est.positives, est.neighbors);
  return est;
}

FusedEstimate fused_probability(const RelevanceModel& rm, const DataPoint& x,
                                const ObservationSet& observations, const Dataset& ds) {
  const auto t = knn_probability(rm.text, x, observations, ds);
  const auto l = knn_probability(rm.location, x, observations, ds);
  return {fuse(rm.q, t.probability, l.probability), t.probability, l.probability, t.fallback};
}

double loo_log_likelihood(std::span<const LooPrediction> predictions, double q) {
  std::vector<const LooPrediction*> order;
  order.reserve(predictions.size());
  for (const auto& p : predictions) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const LooPrediction* a, const LooPrediction* b) { return a->point_id < b->point_id; });
  double ll = 0.0;
  for (const auto* p : order) {
    const double fused =
        std::clamp(fuse(q, p->text, p->location), kLikelihoodClamp, 1.0 - kLikelihoodClamp);
    ll += std::log(p->label == 1 ? fused : 1.0 - fused);
  }
  return ll;
}

FusionFit fit_fusion_weight(std::span<const LooPrediction> predictions) {
  FusionFit fit;
  if (predictions.empty()) {
    fit.uninformed = true;
    return fit;
  }
  fit.q = 0.0;
  fit.log_likelihood = loo_log_likelihood(predictions, 0.0);
  for (std::size_t i = 1; i <= kFusionGridSteps; ++i) {
    const double q = fusion_grid_value(i);
    const double ll = loo_log_likelihood(predictions, q);
    if (ll > fit.log_likelihood) {
      fit.q = q;
      fit.log_likelihood = ll;
    }
  }
  return fit;
}

std::vector<LooPrediction> loo_predictions(const RelevanceModel& rm,
                                           const ObservationSet& observations, const Dataset& ds) {
  std::vector<LooPrediction> out;
  out.reserve(observations.size());
  for (const auto& o : observations.entries()) {
    const auto& x = ds.at(o.point_id);
    out.push_back({o.point_id, o.label, knn_probability(rm.text, x, observations, ds).probability,
                   knn_probability(rm.location, x, observations, ds).probability});
  }
  return out;
}

FusionFit fit_fusion_weight(const RelevanceModel& rm, const ObservationSet& observations,
                            const Dataset& ds) {
  const auto loo = loo_predictions(rm, observations, ds);
  return fit_fusion_weight(loo);
}

std::vector<ScoredPoint> rank_unlabeled(const RelevanceModel& rm, const ObservationSet& observations,
                                        const Dataset& ds) {
  std::vector<ScoredPoint> out;
  out.reserve(ds.size() - std::min(ds.size(), observations.size()));
  for (const auto& p : ds.points()) {
    if (observations.contains(p.id)) continue;
    out.push_back({p.id, fused_probability(rm, p, observations, ds).probability});
  }
  std::sort(out.begin(), out.end(), score_order);
  return out;
}

}  // namespace forage
