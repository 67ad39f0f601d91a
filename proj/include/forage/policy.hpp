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
#include <string>
#include <vector>

#include "forage/dataset.hpp"
#include "forage/posterior_index.hpp"
#include "forage/relevance.hpp"

namespace forage {

// kNone is the control condition of an interactive session: no queries.
enum class PolicyKind { kNone, kRandom, kOneStep, kEllStep, kEns };

struct PolicySpec {
  PolicyKind kind = PolicyKind::kOneStep;
  int ell = 1;         // kEllStep only, 1 or 2
  int budget = 50;     // kEns only: assumed remaining queries
  std::uint64_t seed = 0;  // kRandom only
  std::size_t candidate_cap = 500;  // kEns pruning

  void validate() const;

  // "none", "random", "random:SEED", "one_step", "ell_step:L", "ens:K";
  // also accepts "greedy" and "ens-K".
  static PolicySpec parse(const std::string& text);
  std::string to_string() const;

  static PolicySpec random(std::uint64_t seed) { return {PolicyKind::kRandom, 1, 50, seed, 500}; }
  static PolicySpec one_step() { return {PolicyKind::kOneStep, 1, 50, 0, 500}; }
  static PolicySpec ell_step(int ell) { return {PolicyKind::kEllStep, ell, 50, 0, 500}; }
  static PolicySpec ens(int budget, std::size_t cap = 500) {
    return {PolicyKind::kEns, 1, budget, 0, cap};
  }
};

// ---- stateless entry points ------------------------------------------------
// Each throws ExhaustedError when no unlabeled point is left.

// Uniform over unlabeled points; deterministic in (seed, step).
PointId select_random(const Dataset& ds, const ObservationSet& observations, std::uint64_t seed,
                      std::uint64_t step = 0);

// Highest fused posterior, ties by ascending id.
PointId select_one_step(const RelevanceModel& rm, const ObservationSet& observations,
                        const Dataset& ds);

// p (1 + S+) + (1 - p) S-, where S+ / S- is the sum of the top (budget - 1)
// posteriors of the remaining unlabeled points after conditioning on x being
// positive / negative. q is held fixed while conditioning.
double ens_score(const RelevanceModel& rm, const ObservationSet& observations, const Dataset& ds,
                 PointId x, int budget);

PointId select_ens(const RelevanceModel& rm, const ObservationSet& observations, const Dataset& ds,
                   const PolicySpec& spec);

// Exact two-step lookahead by exhaustive enumeration: every candidate, both of
// its labels, and the best successor under each, each conditioned posterior
// recomputed from scratch. Meant for small n (it is O(n^2 |D|)).
PointId select_two_step_exact(const RelevanceModel& rm, const ObservationSet& observations,
                              const Dataset& ds);
double two_step_value(const RelevanceModel& rm, const ObservationSet& observations,
                      const Dataset& ds, PointId x);

// The lookahead value shared by ENS and the exact two-step search.
inline double lookahead_value(double p, double best_if_positive, double best_if_negative) {
  return p * (1.0 + best_if_positive) + (1.0 - p) * best_if_negative;
}

// ---- index-backed variants (used by the simulator and sessions) -----------

// Scores the current candidate set under ENS with the given budget.
class EnsScorer {
 public:
  explicit EnsScorer(const PosteriorIndex& index);
  double score(std::size_t candidate, int budget);
  // Never below score(candidate, budget); O(1) after the first call per
  // budget. Lets callers skip candidates that cannot win.
  double upper_bound(std::size_t candidate, int budget);
  // Top `cap` unlabeled points by posterior (score_order).
  std::vector<std::size_t> candidates(std::size_t cap) const;

 private:
  const PosteriorIndex& index_;
  PosteriorIndex::Lookahead table_;
  std::vector<std::size_t> order_;  // unlabeled, by descending posterior
  std::vector<double> prob_;        // posterior per dataset index
  std::vector<double> top_pos_;
  std::vector<double> top_neg_;
  int bound_budget_ = 0;
  double bound_pos_ = 0.0;
  double bound_neg_ = 0.0;
};

// Single next query. `step` feeds the random policy's stream.
std::size_t select_next(const PosteriorIndex& index, const PolicySpec& spec, std::uint64_t step);

// Top `batch` unlabeled points under the policy's own score (posterior for
// one-step and random, lookahead value for ENS / ell-step). Random batches
// are drawn uniformly and reported with their posterior. Empty for kNone.
std::vector<ScoredPoint> select_batch(const PosteriorIndex& index, const PolicySpec& spec,
                                      std::size_t batch, std::uint64_t step);

}  // namespace forage
