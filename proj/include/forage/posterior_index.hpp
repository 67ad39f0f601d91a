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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "forage/dataset.hpp"
#include "forage/relevance.hpp"

namespace forage {

// Precomputed pairwise distances for both attribute models, stored as full
// rows so one point's distances to all others are contiguous. Values come
// from attribute_distance() and are bitwise identical to on-the-fly
// evaluation. Immutable; share one instance across runs over one dataset.
class DistanceCache {
 public:
  DistanceCache(const Dataset& ds, const RelevanceModel& rm);

  double text(std::size_t i, std::size_t j) const { return text_[i * n_ + j]; }
  double location(std::size_t i, std::size_t j) const { return location_[i * n_ + j]; }
  const double* text_row(std::size_t i) const { return text_.data() + i * n_; }
  const double* location_row(std::size_t i) const { return location_.data() + i * n_; }
  std::size_t size() const { return n_; }

  // Datasets up to this size get a cache by default (about 50 MB per model).
  static constexpr std::size_t kDefaultMaxPoints = 2500;

 private:
  std::size_t n_;
  std::vector<double> text_;
  std::vector<double> location_;
};

// Incrementally maintained k-NN posterior over a fixed dataset.
//
// For every point (labeled or not) and each attribute model the index keeps
// the k nearest labeled points other than the point itself, so labeled points
// carry their leave-one-out prediction for free and adding a label costs one
// distance per point. Results equal the stateless functions in relevance.hpp
// exactly. The dataset must outlive the index.
class PosteriorIndex {
 public:
  PosteriorIndex(const Dataset& ds, const RelevanceModel& rm,
                 std::shared_ptr<const DistanceCache> cache = nullptr);
  PosteriorIndex(const Dataset& ds, const RelevanceModel& rm, const ObservationSet& observations,
                 std::shared_ptr<const DistanceCache> cache = nullptr);

  const Dataset& dataset() const { return *ds_; }
  const RelevanceModel& model() const { return rm_; }

  void set_q(double q);
  // Fits q on the cached leave-one-out predictions and adopts it.
  FusionFit refit();

  // Adds a label for an unlabeled point. Throws ValidationError if the point
  // is already labeled or the label is not 0/1.
  void observe(std::size_t idx, int label);
  // Recomputes everything for a new observation set (after removals or
  // relabels, which are not incremental).
  void rebuild(const ObservationSet& observations);

  bool labeled(std::size_t idx) const { return labels_[idx] >= 0; }
  int label(std::size_t idx) const { return labels_[idx]; }
  std::size_t labeled_count() const { return labeled_count_; }
  std::size_t unlabeled_count() const { return ds_->size() - labeled_count_; }
  std::size_t size() const { return ds_->size(); }

  double text_probability(std::size_t idx) const;
  double location_probability(std::size_t idx) const;
  // Fused with the current q.
  double probability(std::size_t idx) const;
  bool text_fallback(std::size_t idx) const { return degenerate_[idx]; }

  std::vector<LooPrediction> loo_predictions() const;
  std::vector<std::size_t> unlabeled_indices() const;
  // Unlabeled points by score_order.
  std::vector<ScoredPoint> ranked_unlabeled() const;

  // Fused posterior of another unlabeled point after hypothetically labeling
  // `candidate` positive / negative, q held fixed.
  struct Shift {
    std::size_t idx;
    double if_positive;
    double if_negative;
  };
  // Per-point outcomes of a hypothetical label, valid until the next
  // observe / rebuild / set_q. Build once, then query many candidates.
  class Lookahead;
  Lookahead prepare_lookahead() const;

  // Appends one Shift for every unlabeled point (other than the candidate)
  // whose posterior would change; all other points keep probability().
  void lookahead(std::size_t candidate, std::vector<Shift>& out) const;
  void lookahead(std::size_t candidate, const Lookahead& table, std::vector<Shift>& out) const;
  // Calls f(idx, changed, if_positive, if_negative) for every unlabeled point
  // other than the candidate; unchanged points report probability() twice.
  template <class F>
  void visit_lookahead(std::size_t candidate, const Lookahead& table, F&& f) const;

 private:
  struct Neighbor {
    double dist;
    PointId id;
    int label;
  };
  struct Slot {
    std::vector<Neighbor> nn;  // ascending (dist, id), at most k
    std::size_t positives = 0;
  };

  double distance(int model, std::size_t i, std::size_t j) const;
  void offer(Slot& slot, const Neighbor& nb, std::size_t k);
  void reset_slots();

  const Dataset* ds_;
  RelevanceModel rm_;
  std::shared_ptr<const DistanceCache> cache_;
  std::vector<std::int8_t> labels_;
  std::vector<bool> degenerate_;
  std::vector<Slot> text_;
  std::vector<Slot> location_;
  std::size_t labeled_count_ = 0;
};

class PosteriorIndex::Lookahead {
 public:
  // Per point, the largest value it can take after a positive / negative
  // label on any candidate (its current posterior included).
  void maxima(std::vector<double>& if_positive, std::vector<double>& if_negative) const {
    if_positive.clear();
    if_negative.clear();
    for (const auto& e : entries_) {
      if_positive.push_back(std::max({e.base, e.text_only[0], e.location_only[0], e.both[0]}));
      if_negative.push_back(std::max({e.base, e.text_only[1], e.location_only[1], e.both[1]}));
    }
  }

 private:
  friend class PosteriorIndex;
  struct Entry {
    std::size_t idx;
    double base;
    // Candidate enters the k nearest iff (dist, id) < (t_dist, t_id).
    double t_dist;
    PointId t_id;
    double l_dist;
    PointId l_id;
    // Fused values (if positive, if negative) when the candidate enters the
    // text list only, the location list only, or both.
    double text_only[2];
    double location_only[2];
    double both[2];
  };
  std::vector<Entry> entries_;
};

template <class F>
void PosteriorIndex::visit_lookahead(std::size_t candidate, const Lookahead& table, F&& f) const {
  const PointId cid = (*ds_)[candidate].id;
  const double* trow = cache_ ? cache_->text_row(candidate) : nullptr;
  const double* lrow = cache_ ? cache_->location_row(candidate) : nullptr;
  const auto& cp = (*ds_)[candidate];
  for (const auto& e : table.entries_) {
    if (e.idx == candidate) continue;
    bool enters_t = false;
    if (e.t_dist != -std::numeric_limits<double>::infinity()) {
      const double d = trow ? trow[e.idx] : attribute_distance(rm_.text, (*ds_)[e.idx], cp);
      enters_t = d < e.t_dist || (d == e.t_dist && cid < e.t_id);
    }
    const double d = lrow ? lrow[e.idx] : attribute_distance(rm_.location, (*ds_)[e.idx], cp);
    const bool enters_l = d < e.l_dist || (d == e.l_dist && cid < e.l_id);
    if (enters_t && enters_l) f(e.idx, true, e.both[0], e.both[1]);
    else if (enters_t) f(e.idx, true, e.text_only[0], e.text_only[1]);
    else if (enters_l) f(e.idx, true, e.location_only[0], e.location_only[1]);
    else f(e.idx, false, e.base, e.base);
  }
}

}  // namespace forage
