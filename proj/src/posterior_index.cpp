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

#include "forage/posterior_index.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "forage/error.hpp"

namespace forage {

namespace {

constexpr int kText = 0;
constexpr int kLocation = 1;

}  // namespace

DistanceCache::DistanceCache(const Dataset& ds, const RelevanceModel& rm) : n_(ds.size()) {
  text_.assign(n_ * n_, 0.0);
  location_.assign(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      text_[i * n_ + j] = text_[j * n_ + i] = attribute_distance(rm.text, ds[i], ds[j]);
      location_[i * n_ + j] = location_[j * n_ + i] = attribute_distance(rm.location, ds[i], ds[j]);
    }
  }
}

PosteriorIndex::PosteriorIndex(const Dataset& ds, const RelevanceModel& rm,
                               std::shared_ptr<const DistanceCache> cache)
    : ds_(&ds), rm_(rm), cache_(std::move(cache)) {
  rm_.validate();
  if (cache_ && cache_->size() != ds.size()) throw ConfigError("distance cache does not match dataset");
  degenerate_.resize(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    degenerate_[i] = ds[i].degenerate || ds[i].embedding.empty();
  }
  reset_slots();
}

PosteriorIndex::PosteriorIndex(const Dataset& ds, const RelevanceModel& rm,
                               const ObservationSet& observations,
                               std::shared_ptr<const DistanceCache> cache)
    : PosteriorIndex(ds, rm, std::move(cache)) {
  rebuild(observations);
}

void PosteriorIndex::reset_slots() {
  labels_.assign(ds_->size(), -1);
  text_.assign(ds_->size(), Slot{});
  location_.assign(ds_->size(), Slot{});
  labeled_count_ = 0;
}

double PosteriorIndex::distance(int model, std::size_t i, std::size_t j) const {
  if (cache_) return model == kText ? cache_->text(i, j) : cache_->location(i, j);
  const auto& am = model == kText ? rm_.text : rm_.location;
  return attribute_distance(am, (*ds_)[i], (*ds_)[j]);
}

void PosteriorIndex::offer(Slot& slot, const Neighbor& nb, std::size_t k) {
  auto less = [](const Neighbor& a, const Neighbor& b) {
    return std::tie(a.dist, a.id) < std::tie(b.dist, b.id);
  };
  if (slot.nn.size() == k) {
    if (!less(nb, slot.nn.back())) return;
    slot.positives -= static_cast<std::size_t>(slot.nn.back().label);
    slot.nn.pop_back();
  }
  slot.nn.insert(std::upper_bound(slot.nn.begin(), slot.nn.end(), nb, less), nb);
  slot.positives += static_cast<std::size_t>(nb.label);
}

void PosteriorIndex::set_q(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("fusion weight q must lie in [0, 1]");
  rm_.q = q;
}

FusionFit PosteriorIndex::refit() {
  const auto fit = fit_fusion_weight(loo_predictions());
  rm_.q = fit.q;
  return fit;
}

void PosteriorIndex::observe(std::size_t idx, int label) {
  if (label != 0 && label != 1) throw ValidationError("label must be 0 or 1");
  if (labeled(idx)) {
    throw ValidationError("point " + std::to_string((*ds_)[idx].id) + " is already labeled");
  }
  labels_[idx] = static_cast<std::int8_t>(label);
  ++labeled_count_;
  const PointId id = (*ds_)[idx].id;
  const double* trow = cache_ ? cache_->text_row(idx) : nullptr;
  const double* lrow = cache_ ? cache_->location_row(idx) : nullptr;
  for (std::size_t p = 0; p < ds_->size(); ++p) {
    if (p == idx) continue;
    offer(text_[p], {trow ? trow[p] : distance(kText, p, idx), id, label}, rm_.text.k);
    offer(location_[p], {lrow ? lrow[p] : distance(kLocation, p, idx), id, label}, rm_.location.k);
  }
}

void PosteriorIndex::rebuild(const ObservationSet& observations) {
  reset_slots();
  std::vector<std::size_t> labeled;
  labeled.reserve(observations.size());
  for (const auto& o : observations.entries()) {
    const auto idx = ds_->index_of(o.point_id);
    labels_[idx] = static_cast<std::int8_t>(o.label);
    labeled.push_back(idx);
  }
  labeled_count_ = labeled.size();
  auto less = [](const Neighbor& a, const Neighbor& b) {
    return std::tie(a.dist, a.id) < std::tie(b.dist, b.id);
  };
  std::vector<Neighbor> buf;
  buf.reserve(labeled.size());
  auto fill = [&](Slot& slot, int model, std::size_t p, std::size_t k) {
    buf.clear();
    for (auto z : labeled) {
      if (z == p) continue;
      buf.push_back({distance(model, p, z), (*ds_)[z].id, labels_[z]});
    }
    const std::size_t take = std::min(k, buf.size());
    std::partial_sort(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(take), buf.end(), less);
    slot.nn.assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(take));
    slot.positives = 0;
    for (const auto& nb : slot.nn) slot.positives += static_cast<std::size_t>(nb.label);
  };
  for (std::size_t p = 0; p < ds_->size(); ++p) {
    fill(text_[p], kText, p, rm_.text.k);
    fill(location_[p], kLocation, p, rm_.location.k);
  }
}

double PosteriorIndex::text_probability(std::size_t idx) const {
  if (degenerate_[idx]) return rm_.text.pi;
  const auto& s = text_[idx];
  if (s.nn.empty()) return rm_.text.pi;
  return smoothed_posterior(rm_.text, s.positives, s.nn.size());
}

double PosteriorIndex::location_probability(std::size_t idx) const {
  const auto& s = location_[idx];
  if (s.nn.empty()) return rm_.location.pi;
  return smoothed_posterior(rm_.location, s.positives, s.nn.size());
}

double PosteriorIndex::probability(std::size_t idx) const {
  return fuse(rm_.q, text_probability(idx), location_probability(idx));
}

std::vector<LooPrediction> PosteriorIndex::loo_predictions() const {
  std::vector<LooPrediction> out;
  out.reserve(labeled_count_);
  for (std::size_t i = 0; i < ds_->size(); ++i) {
    if (!labeled(i)) continue;
    out.push_back({(*ds_)[i].id, labels_[i], text_probability(i), location_probability(i)});
  }
  return out;
}

std::vector<std::size_t> PosteriorIndex::unlabeled_indices() const {
  std::vector<std::size_t> out;
  out.reserve(unlabeled_count());
  for (std::size_t i = 0; i < ds_->size(); ++i) {
    if (!labeled(i)) out.push_back(i);
  }
  return out;
}

std::vector<ScoredPoint> PosteriorIndex::ranked_unlabeled() const {
  std::vector<ScoredPoint> out;
  out.reserve(unlabeled_count());
  for (std::size_t i = 0; i < ds_->size(); ++i) {
    if (!labeled(i)) out.push_back({(*ds_)[i].id, probability(i)});
  }
  std::sort(out.begin(), out.end(), score_order);
  return out;
}

PosteriorIndex::Lookahead PosteriorIndex::prepare_lookahead() const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr PointId kMaxId = std::numeric_limits<PointId>::max();
  Lookahead table;
  table.entries_.reserve(unlabeled_count());
  for (std::size_t p = 0; p < ds_->size(); ++p) {
    if (labeled(p)) continue;
    Lookahead::Entry e{};
    e.idx = p;
    e.base = probability(p);
    const double t_base = text_probability(p);
    const double l_base = location_probability(p);
    double t_pos = t_base, t_neg = t_base;
    if (degenerate_[p]) {
      e.t_dist = -kInf;  // never enters
      e.t_id = kMaxId;
    } else {
      const auto& s = text_[p];
      std::size_t n = s.nn.size() + 1, pos_if_neg = s.positives;
      if (s.nn.size() < rm_.text.k) {
        e.t_dist = kInf;
        e.t_id = kMaxId;
      } else {
        e.t_dist = s.nn.back().dist;
        e.t_id = s.nn.back().id;
        n = rm_.text.k;
        pos_if_neg = s.positives - static_cast<std::size_t>(s.nn.back().label);
      }
      t_pos = smoothed_posterior(rm_.text, pos_if_neg + 1, n);
      t_neg = smoothed_posterior(rm_.text, pos_if_neg, n);
    }
    double l_pos, l_neg;
    {
      const auto& s = location_[p];
      std::size_t n = s.nn.size() + 1, pos_if_neg = s.positives;
      if (s.nn.size() < rm_.location.k) {
        e.l_dist = kInf;
        e.l_id = kMaxId;
      } else {
        e.l_dist = s.nn.back().dist;
        e.l_id = s.nn.back().id;
        n = rm_.location.k;
        pos_if_neg = s.positives - static_cast<std::size_t>(s.nn.back().label);
      }
      l_pos = smoothed_posterior(rm_.location, pos_if_neg + 1, n);
      l_neg = smoothed_posterior(rm_.location, pos_if_neg, n);
    }
    const double q = rm_.q;
    e.text_only[0] = fuse(q, t_pos, l_base);
    e.text_only[1] = fuse(q, t_neg, l_base);
    e.location_only[0] = fuse(q, t_base, l_pos);
    e.location_only[1] = fuse(q, t_base, l_neg);
    e.both[0] = fuse(q, t_pos, l_pos);
    e.both[1] = fuse(q, t_neg, l_neg);
    table.entries_.push_back(e);
  }
  return table;
}

void PosteriorIndex::lookahead(std::size_t candidate, std::vector<Shift>& out) const {
  lookahead(candidate, prepare_lookahead(), out);
}

void PosteriorIndex::lookahead(std::size_t candidate, const Lookahead& table,
                               std::vector<Shift>& out) const {
  visit_lookahead(candidate, table, [&](std::size_t idx, bool changed, double pos, double neg) {
    if (changed) out.push_back({idx, pos, neg});
  });
}

}  // namespace forage
