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

#include "forage/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "forage/error.hpp"
#include "forage/rng.hpp"

namespace forage {

namespace {

const std::vector<std::string>& background_words() {
  static const std::vector<std::string> words = {
      "coffee",  "game",     "traffic",  "weather",  "music",    "movie",   "lunch",   "work",
      "happy",   "weekend",  "park",     "beach",    "friends",  "party",   "shopping", "dinner",
      "rain",    "sunny",    "bus",      "train",    "school",   "class",   "dog",     "cat",
      "pizza",   "concert",  "football", "baseball", "news",     "phone",   "laptop",  "office",
      "meeting", "garden",   "book",     "library",  "church",   "market",  "bridge",  "river",
      "city",    "mall",     "gym",      "running",  "bike",     "car",     "road",    "festival",
      "night",   "morning",  "birthday", "family",   "vacation", "hotel",   "airport", "tea",
      "breakfast", "sandwich", "museum", "theater",  "game",     "tickets", "sale",    "picnic"};
  return words;
}

const std::vector<std::vector<std::string>>& symptom_groups() {
  static const std::vector<std::vector<std::string>> groups = {
      {"fever", "cough", "chills", "sore throat", "short of breath", "pneumonia"},
      {"diarrhea", "nausea", "vomiting", "stomach ache", "sick"},
      {"headache", "fatigue", "flu", "fever"},
  };
  return groups;
}

double gaussian(Rng& rng) {
  double u1 = uniform_unit(rng);
  while (u1 <= 0.0) u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string pick(Rng& rng, const std::vector<std::string>& words) {
  return words[uniform_index(rng, words.size())];
}

}  // namespace

Dataset make_clustered_dataset(const SyntheticConfig& cfg) {
  if (cfg.n == 0) throw ConfigError("synthetic dataset needs n >= 1");
  if (!(cfg.incidence >= 0.0 && cfg.incidence <= 1.0)) throw ConfigError("incidence must lie in [0, 1]");
  if (cfg.clusters == 0) throw ConfigError("synthetic dataset needs at least one cluster");

  Rng rng(derive_seed(cfg.seed, {0xda7a}));
  const auto positives = static_cast<std::size_t>(std::llround(cfg.incidence * static_cast<double>(cfg.n)));

  std::vector<Location> centers;
  for (std::size_t c = 0; c < cfg.clusters; ++c) {
    const double margin = 0.15 * cfg.map_size;
    centers.push_back({margin + uniform_unit(rng) * (cfg.map_size - 2 * margin),
                       margin + uniform_unit(rng) * (cfg.map_size - 2 * margin)});
  }

  // shuffled ids 1..n
  std::vector<PointId> ids(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) ids[i] = static_cast<PointId>(i + 1);
  for (std::size_t i = cfg.n; i > 1; --i) std::swap(ids[i - 1], ids[uniform_index(rng, i)]);

  const auto& bg = background_words();
  const auto& groups = symptom_groups();
  std::vector<DataPoint> points;
  points.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    std::string text;
    auto add = [&](const std::string& w) {
      if (!text.empty()) text += ' ';
      text += w;
    };
    double x, y;
    const bool positive = i < positives;
    if (positive) {
      const std::size_t c = i % cfg.clusters;
      const auto& group = groups[c % groups.size()];
      x = centers[c].x + cfg.cluster_sigma * gaussian(rng);
      y = centers[c].y + cfg.cluster_sigma * gaussian(rng);
      add("feeling");
      const std::size_t symptoms = 1 + uniform_index(rng, 2);
      for (std::size_t s = 0; s < symptoms; ++s) add(pick(rng, group));
      const std::size_t filler = 1 + uniform_index(rng, 3);
      for (std::size_t s = 0; s < filler; ++s) add(pick(rng, bg));
    } else {
      x = uniform_unit(rng) * cfg.map_size;
      y = uniform_unit(rng) * cfg.map_size;
      const std::size_t words = 3 + uniform_index(rng, 4);
      for (std::size_t s = 0; s < words; ++s) add(pick(rng, bg));
    }
    points.push_back(make_point(ids[i], x, y, std::move(text), positive));
  }
  return Dataset(std::move(points)).with_embeddings(HashEmbedding(cfg.embedding_dim, cfg.seed));
}

}  // namespace forage
