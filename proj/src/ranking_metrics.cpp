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

#include "forage/ranking_metrics.hpp"

#include <algorithm>
#include <vector>

#include "forage/error.hpp"

namespace forage {

double auc_roc(std::span<const ScoredLabel> scored) {
  std::vector<ScoredLabel> s(scored.begin(), scored.end());
  std::sort(s.begin(), s.end(), [](const ScoredLabel& a, const ScoredLabel& b) { return a.score < b.score; });
  double pos_total = 0.0, neg_total = 0.0;
  for (const auto& x : s) (x.truth ? pos_total : neg_total) += 1.0;
  if (pos_total == 0.0 || neg_total == 0.0) throw UndefinedError("AUC needs both classes");

  // Walk groups of equal score from the bottom; each positive beats every
  // negative below its group and ties half of the negatives inside it.
  double wins = 0.0, neg_below = 0.0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    double pos = 0.0, neg = 0.0;
    while (j < s.size() && s[j].score == s[i].score) {
      (s[j].truth ? pos : neg) += 1.0;
      ++j;
    }
    wins += pos * neg_below + 0.5 * pos * neg;
    neg_below += neg;
    i = j;
  }
  return wins / (pos_total * neg_total);
}

double precision_at_k(std::span<const ScoredLabel> scored, std::size_t k) {
  if (k == 0) throw RangeError("precision@k needs k >= 1");
  if (k > scored.size()) throw RangeError("precision@k: k exceeds the number of scored points");
  std::vector<ScoredLabel> s(scored.begin(), scored.end());
  auto order = [](const ScoredLabel& a, const ScoredLabel& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  };
  std::partial_sort(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k), s.end(), order);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += s[i].truth ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

}  // namespace forage
