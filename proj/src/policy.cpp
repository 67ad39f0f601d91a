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

#include "forage/policy.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>

#include "forage/error.hpp"
#include "forage/rng.hpp"

namespace forage {

void PolicySpec::validate() const {
  switch (kind) {
    case PolicyKind::kEllStep:
      if (ell < 1 || ell > 2) throw ConfigError("ell_step supports ell in {1, 2}; use ens for longer horizons");
      break;
    case PolicyKind::kEns:
      if (budget < 1) throw ConfigError("ens budget must be >= 1");
      if (candidate_cap < 1) throw ConfigError("ens candidate_cap must be >= 1");
      break;
    default:
      break;
  }
}

PolicySpec PolicySpec::parse(const std::string& text) {
  std::string name = text;
  std::string arg;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    name = text.substr(0, colon);
    arg = text.substr(colon + 1);
  } else if (text.rfind("ens-", 0) == 0 || text.rfind("ENS-", 0) == 0) {
    name = "ens";
    arg = text.substr(4);
  }
  auto number = [&](const char* what) -> long long {
    char* end = nullptr;
    const long long v = std::strtoll(arg.c_str(), &end, 10);
    if (arg.empty() || *end != '\0') throw ConfigError(std::string("bad ") + what + " in policy '" + text + "'");
    return v;
  };
  PolicySpec spec;
  if (name == "none" || name == "control") {
    spec.kind = PolicyKind::kNone;
  } else if (name == "random") {
    spec.kind = PolicyKind::kRandom;
    if (!arg.empty()) spec.seed = static_cast<std::uint64_t>(number("seed"));
  } else if (name == "one_step" || name == "one-step" || name == "greedy") {
    spec.kind = PolicyKind::kOneStep;
  } else if (name == "ell_step" || name == "ell-step") {
    spec.kind = PolicyKind::kEllStep;
    spec.ell = arg.empty() ? 2 : static_cast<int>(number("ell"));
  } else if (name == "ens" || name == "ENS") {
    spec.kind = PolicyKind::kEns;
    if (!arg.empty()) spec.budget = static_cast<int>(number("budget"));
  } else {
    throw ConfigError("unknown policy '" + text + "'");
  }
  spec.validate();
  return spec;
}

std::string PolicySpec::to_string() const {
  switch (kind) {
    case PolicyKind::kNone: return "none";
    case PolicyKind::kRandom: return "random";
    case PolicyKind::kOneStep: return "one_step";
    case PolicyKind::kEllStep: return "ell_step:" + std::to_string(ell);
    case PolicyKind::kEns: return "ens:" + std::to_string(budget);
  }
  return "none";
}

namespace {

std::vector<PointId> unlabeled_ids(const Dataset& ds, const ObservationSet& observations) {
  std::vector<PointId> ids;
  for (const auto& p : ds.points()) {
    if (!observations.contains(p.id)) ids.push_back(p.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Unlabeled dataset indices in ascending point-id order.
std::vector<std::size_t> unlabeled_by_id(const PosteriorIndex& index) {
  auto idx = index.unlabeled_indices();
  const auto& ds = index.dataset();
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return ds[a].id < ds[b].id; });
  return idx;
}

void require_unlabeled(std::size_t count) {
  if (count == 0) throw ExhaustedError("no unlabeled points left to query");
}

std::shared_ptr<const DistanceCache> maybe_cache(const Dataset& ds, const RelevanceModel& rm) {
  if (ds.size() > DistanceCache::kDefaultMaxPoints) return nullptr;
  return std::make_shared<const DistanceCache>(ds, rm);
}

// Argmax with ties to the smaller point id.
struct Best {
  std::size_t idx = std::numeric_limits<std::size_t>::max();
  PointId id = 0;
  double score = -std::numeric_limits<double>::infinity();
  void offer(std::size_t i, PointId pid, double s) {
    if (idx == std::numeric_limits<std::size_t>::max() || s > score || (s == score && pid < id)) {
      idx = i;
      id = pid;
      score = s;
    }
  }
};

}  // namespace

PointId select_random(const Dataset& ds, const ObservationSet& observations, std::uint64_t seed,
                      std::uint64_t step) {
  const auto ids = unlabeled_ids(ds, observations);
  require_unlabeled(ids.size());
  Rng rng(derive_seed(seed, {step}));
  return ids[uniform_index(rng, ids.size())];
}

PointId select_one_step(const RelevanceModel& rm, const ObservationSet& observations,
                        const Dataset& ds) {
  const auto ranked = rank_unlabeled(rm, observations, ds);
  require_unlabeled(ranked.size());
  return ranked.front().id;
}

// ---- ENS ------------------------------------------------------------------

EnsScorer::EnsScorer(const PosteriorIndex& index)
    : index_(index), table_(index.prepare_lookahead()), prob_(index.size(), 0.0) {
  const auto& ds = index.dataset();
  order_ = index.unlabeled_indices();
  for (auto i : order_) prob_[i] = index.probability(i);
  std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return prob_[a] != prob_[b] ? prob_[a] > prob_[b] : ds[a].id < ds[b].id;
  });
}

std::vector<std::size_t> EnsScorer::candidates(std::size_t cap) const {
  return {order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(std::min(cap, order_.size()))};
}

namespace {

// Min-heap holding the r largest values seen.
class TopValues {
 public:
  void reset(std::size_t r, std::vector<double>& storage) {
    r_ = r;
    heap_ = &storage;
    heap_->clear();
    floor_ = -std::numeric_limits<double>::infinity();
  }
  void offer(double v) {
    if (heap_->size() < r_) {
      heap_->push_back(v);
      std::push_heap(heap_->begin(), heap_->end(), std::greater<>());
      if (heap_->size() == r_) floor_ = heap_->front();
    } else if (v > floor_) {
      std::pop_heap(heap_->begin(), heap_->end(), std::greater<>());
      heap_->back() = v;
      std::push_heap(heap_->begin(), heap_->end(), std::greater<>());
      floor_ = heap_->front();
    }
  }
  // Summed largest first, so the result does not depend on visiting order.
  double sum() {
    std::sort(heap_->begin(), heap_->end(), std::greater<>());
    double s = 0.0;
    for (double v : *heap_) s += v;
    return s;
  }

 private:
  std::size_t r_ = 0;
  std::vector<double>* heap_ = nullptr;
  double floor_ = 0.0;
};

}  // namespace

double EnsScorer::upper_bound(std::size_t candidate, int budget) {
  const double p = prob_[candidate];
  if (budget <= 1) return p;
  if (budget != bound_budget_) {
    const std::size_t r = static_cast<std::size_t>(budget - 1);
    std::vector<double> pos_max, neg_max;
    table_.maxima(pos_max, neg_max);
    TopValues pos, neg;
    pos.reset(r, top_pos_);
    neg.reset(r, top_neg_);
    for (double v : pos_max) pos.offer(v);
    for (double v : neg_max) neg.offer(v);
    bound_pos_ = pos.sum();
    bound_neg_ = neg.sum();
    bound_budget_ = budget;
  }
  return lookahead_value(p, bound_pos_, bound_neg_);
}

double EnsScorer::score(std::size_t candidate, int budget) {
  const double p = prob_[candidate];
  if (budget <= 1) return p;
  const std::size_t r = static_cast<std::size_t>(budget - 1);

  // The r largest posteriors among the other remaining points, after the
  // candidate is labeled positive / negative.
  TopValues pos, neg;
  pos.reset(r, top_pos_);
  neg.reset(r, top_neg_);
  index_.visit_lookahead(candidate, table_, [&](std::size_t, bool, double if_pos, double if_neg) {
    pos.offer(if_pos);
    neg.offer(if_neg);
  });
  const double s_pos = pos.sum();
  const double s_neg = neg.sum();
  return lookahead_value(p, s_pos, s_neg);
}

namespace {

std::size_t select_ens_index(const PosteriorIndex& index, int budget, std::size_t cap) {
  require_unlabeled(index.unlabeled_count());
  EnsScorer scorer(index);
  Best best;
  for (auto c : scorer.candidates(cap)) {
    if (best.idx != std::numeric_limits<std::size_t>::max() && scorer.upper_bound(c, budget) < best.score) {
      continue;
    }
    best.offer(c, index.dataset()[c].id, scorer.score(c, budget));
  }
  return best.idx;
}

std::size_t select_one_step_index(const PosteriorIndex& index) {
  require_unlabeled(index.unlabeled_count());
  Best best;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (!index.labeled(i)) best.offer(i, index.dataset()[i].id, index.probability(i));
  }
  return best.idx;
}

}  // namespace

double ens_score(const RelevanceModel& rm, const ObservationSet& observations, const Dataset& ds,
                 PointId x, int budget) {
  if (budget < 1) throw ConfigError("ens budget must be >= 1");
  if (observations.contains(x)) throw ValidationError("point " + std::to_string(x) + " is already labeled");
  PosteriorIndex index(ds, rm, observations, maybe_cache(ds, rm));
  EnsScorer scorer(index);
  return scorer.score(ds.index_of(x), budget);
}

PointId select_ens(const RelevanceModel& rm, const ObservationSet& observations, const Dataset& ds,
                   const PolicySpec& spec) {
  spec.validate();
  PosteriorIndex index(ds, rm, observations, maybe_cache(ds, rm));
  return ds[select_ens_index(index, spec.budget, spec.candidate_cap)].id;
}

// ---- exact two-step ----------------------------------------------------------

double two_step_value(const RelevanceModel& rm, const ObservationSet& observations,
                      const Dataset& ds, PointId x) {
  const auto& px = ds.at(x);
  const double p = fused_probability(rm, px, observations, ds).probability;
  double best[2] = {0.0, 0.0};  // [negative, positive]
  for (int y = 0; y <= 1; ++y) {
    ObservationSet conditioned = observations;
    conditioned.upsert({x, y, LabelSource::kOracle, 0});
    bool any = false;
    for (const auto& other : ds.points()) {
      if (other.id == x || observations.contains(other.id)) continue;
      const double v = fused_probability(rm, other, conditioned, ds).probability;
      if (!any || v > best[y]) best[y] = v;
      any = true;
    }
  }
  return lookahead_value(p, best[1], best[0]);
}

PointId select_two_step_exact(const RelevanceModel& rm, const ObservationSet& observations,
                              const Dataset& ds) {
  Best best;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto id = ds[i].id;
    if (observations.contains(id)) continue;
    best.offer(i, id, two_step_value(rm, observations, ds, id));
  }
  require_unlabeled(best.idx == std::numeric_limits<std::size_t>::max() ? 0 : 1);
  return best.id;
}

// ---- dispatch ----------------------------------------------------------------

std::size_t select_next(const PosteriorIndex& index, const PolicySpec& spec, std::uint64_t step) {
  spec.validate();
  switch (spec.kind) {
    case PolicyKind::kNone:
      throw ConfigError("policy 'none' never selects queries");
    case PolicyKind::kRandom: {
      const auto ids = unlabeled_by_id(index);
      require_unlabeled(ids.size());
      Rng rng(derive_seed(spec.seed, {step}));
      return ids[uniform_index(rng, ids.size())];
    }
    case PolicyKind::kOneStep:
      return select_one_step_index(index);
    case PolicyKind::kEllStep:
      if (spec.ell == 1) return select_one_step_index(index);
      return select_ens_index(index, 2, index.size());
    case PolicyKind::kEns:
      return select_ens_index(index, spec.budget, spec.candidate_cap);
  }
  throw ConfigError("unhandled policy kind");
}

std::vector<ScoredPoint> select_batch(const PosteriorIndex& index, const PolicySpec& spec,
                                      std::size_t batch, std::uint64_t step) {
  spec.validate();
  std::vector<ScoredPoint> out;
  if (spec.kind == PolicyKind::kNone || batch == 0) return out;
  const auto& ds = index.dataset();

  auto lookahead_batch = [&](int budget, std::size_t cap) {
    EnsScorer scorer(index);
    for (auto c : scorer.candidates(cap)) out.push_back({ds[c].id, scorer.score(c, budget)});
    std::sort(out.begin(), out.end(), score_order);
    if (out.size() > batch) out.resize(batch);
  };

  switch (spec.kind) {
    case PolicyKind::kRandom: {
      auto ids = unlabeled_by_id(index);
      Rng rng(derive_seed(spec.seed, {step}));
      const std::size_t take = std::min(batch, ids.size());
      for (std::size_t i = 0; i < take; ++i) {
        std::swap(ids[i], ids[i + uniform_index(rng, ids.size() - i)]);
        out.push_back({ds[ids[i]].id, index.probability(ids[i])});
      }
      std::sort(out.begin(), out.end(), score_order);
      break;
    }
    case PolicyKind::kEllStep:
      if (spec.ell == 2) {
        lookahead_batch(2, index.size());
        break;
      }
      [[fallthrough]];
    case PolicyKind::kOneStep:
      out = index.ranked_unlabeled();
      if (out.size() > batch) out.resize(batch);
      break;
    case PolicyKind::kEns:
      lookahead_batch(spec.budget, std::max(spec.candidate_cap, batch));
      break;
    case PolicyKind::kNone:
      break;
  }
  return out;
}

}  // namespace forage
