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
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "forage/embedding.hpp"

namespace forage {

using PointId = std::int64_t;

struct Location {
  double x = 0.0;
  double y = 0.0;
};

struct DataPoint {
  PointId id = 0;
  Location location;
  std::string text;
  std::vector<std::string> tokens;
  // Unit norm, or zeros with `degenerate` set. Empty until embedded.
  std::vector<double> embedding;
  bool degenerate = false;
  std::optional<bool> truth;
};

// Builds a point with tokens derived from `text`.
DataPoint make_point(PointId id, double x, double y, std::string text,
                     std::optional<bool> truth = std::nullopt);

// Immutable, validated collection of points. Every transformation returns a
// new Dataset, so instances can be shared freely between threads.
class Dataset {
 public:
  Dataset() = default;
  // Throws ValidationError on duplicate ids, non-finite locations, or an
  // embedding that is neither unit-norm nor a flagged zero vector.
  explicit Dataset(std::vector<DataPoint> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::span<const DataPoint> points() const { return points_; }
  const DataPoint& operator[](std::size_t i) const { return points_[i]; }

  // Throws NotFoundError.
  const DataPoint& at(PointId id) const;
  std::size_t index_of(PointId id) const;
  std::optional<std::size_t> find(PointId id) const;

  // Fraction of truth=1 among points carrying truth; nullopt if none do.
  std::optional<double> incidence() const { return incidence_; }
  bool fully_labeled() const;
  std::size_t positive_count() const;

  bool has_embeddings() const { return embedding_dim_ > 0; }
  std::size_t embedding_dim() const { return embedding_dim_; }

  Dataset with_embeddings(const TermVectors& vectors) const;

 private:
  std::vector<DataPoint> points_;
  std::unordered_map<PointId, std::size_t> index_;
  std::optional<double> incidence_;
  std::size_t embedding_dim_ = 0;
};

enum class DataFormat { kCsv, kJsonl };

// CSV needs a header naming at least id,x,y,text (truth optional, any column
// order; quoted fields per RFC 4180). JSONL takes one object per line with
// the same keys. Embeddings are computed when `vectors` is given.
// Throws ParseError (with the record's line number) or ValidationError.
Dataset load_dataset(std::istream& in, DataFormat format, const TermVectors* vectors = nullptr);
Dataset load_dataset_file(const std::string& path, const TermVectors* vectors = nullptr);
DataFormat format_from_path(const std::string& path);

// id,x,y,text[,truth] with round-trip float precision.
void write_dataset_csv(std::ostream& out, const Dataset& ds);

// Phrases are stored token-normalized with the same tokenizer applied to
// point text, so "short of breath" matches exactly what tokenization keeps.
class KeywordLexicon {
 public:
  // Throws ConfigError if no phrase survives normalization.
  explicit KeywordLexicon(const std::vector<std::string>& phrases);

  static KeywordLexicon load(std::istream& in);
  static KeywordLexicon load_file(const std::string& path);
  static KeywordLexicon builtin();
  static const std::vector<std::string>& builtin_phrases();

  std::size_t size() const { return phrases_.size(); }
  const std::vector<std::string>& phrase(std::size_t i) const { return phrases_[i]; }
  const std::string& label(std::size_t i) const { return labels_[i]; }

  // Indices of phrases occurring as a contiguous token run in `tokens`.
  std::vector<std::size_t> matches(std::span<const std::string> tokens) const;
  bool any_match(std::span<const std::string> tokens) const;

 private:
  std::vector<std::vector<std::string>> phrases_;
  std::vector<std::string> labels_;
};

// truth := any lexicon phrase matches the point's tokens.
Dataset apply_label_heuristic(const Dataset& ds, const KeywordLexicon& lexicon);

// Uniform sample of n points without replacement, returned in the parent's
// order. Throws RangeError if n > ds.size().
Dataset sample_points(const Dataset& ds, std::size_t n, std::uint64_t seed);

}  // namespace forage
