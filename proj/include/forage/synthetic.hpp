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

#include "forage/dataset.hpp"

namespace forage {

// Microblog-like benchmark data with a known answer. Positives are split
// evenly across `clusters` outbreak sites: each site has a spatial center and
// its own symptom vocabulary, so positives cluster in both location and text
// embedding. Negatives are scattered uniformly with background chatter that
// never matches the builtin lexicon. Ids are shuffled so they carry no class
// signal. Embeddings come from HashEmbedding(embedding_dim, seed).
struct SyntheticConfig {
  std::size_t n = 2000;
  double incidence = 0.05;
  std::size_t clusters = 2;
  std::uint64_t seed = 0;
  std::size_t embedding_dim = 32;
  double map_size = 100.0;
  double cluster_sigma = 4.0;
};

Dataset make_clustered_dataset(const SyntheticConfig& cfg);

}  // namespace forage
