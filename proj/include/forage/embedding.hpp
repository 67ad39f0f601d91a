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
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace forage {

// Source of per-term vectors. All vectors a source returns share dim().
class TermVectors {
 public:
  virtual ~TermVectors() = default;
  virtual std::size_t dim() const = 0;
  virtual std::optional<std::vector<double>> lookup(std::string_view term) const = 0;
};

// Pretrained vectors read from a whitespace-separated text file:
//   term v1 v2 ... vd
// An optional word2vec-style "count dim" header line is skipped.
class EmbeddingTable final : public TermVectors {
 public:
  EmbeddingTable() = default;

  static EmbeddingTable load(std::istream& in);
  static EmbeddingTable load_file(const std::string& path);

  // Throws ConfigError if the vector size disagrees with earlier entries.
  void insert(std::string term, std::vector<double> vec);

  std::size_t dim() const override { return dim_; }
  std::size_t size() const { return table_.size(); }
  std::optional<std::vector<double>> lookup(std::string_view term) const override;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
};

// Deterministic pseudo-embedding: each term maps to a fixed vector with
// components uniform in [-1, 1), derived from a 64-bit hash of the term and
// the seed. Every term is "found". Lets the whole pipeline run without
// pretrained vectors.
class HashEmbedding final : public TermVectors {
 public:
  explicit HashEmbedding(std::size_t dim = 32, std::uint64_t seed = 0);
  std::size_t dim() const override { return dim_; }
  std::optional<std::vector<double>> lookup(std::string_view term) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

struct TextEmbedding {
  std::vector<double> vector;  // unit norm, or all zeros when degenerate
  bool degenerate = false;
};

// Normalized sum (equivalently normalized mean) of the vectors of the tokens
// present in `vectors`. Empty input, all-miss, or exact cancellation yields
// the zero vector flagged degenerate.
TextEmbedding embed_text(std::span<const std::string> tokens, const TermVectors& vectors);

}  // namespace forage
