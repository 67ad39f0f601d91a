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
#include <span>

#include "forage/dataset.hpp"

namespace forage {

struct ScoredLabel {
  PointId id = 0;
  double score = 0.0;
  bool truth = false;
};

// Probability that a random positive outscores a random negative, ties
// counting one half. O(n log n). Throws UndefinedError unless both classes
// are present.
double auc_roc(std::span<const ScoredLabel> scored);

// Fraction of positives among the k highest scores, ties by ascending id.
// Throws RangeError for k == 0 or k > size.
double precision_at_k(std::span<const ScoredLabel> scored, std::size_t k);

}  // namespace forage
