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

#include "forage/embedding.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "forage/error.hpp"
#include "forage/rng.hpp"

namespace forage {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

EmbeddingTable EmbeddingTable::load(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string term;
    if (!(fields >> term)) continue;
    std::vector<double> vec;
    std::string tok;
    while (fields >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw ParseError(lineno, "bad vector component '" + tok + "'");
      }
      vec.push_back(v);
    }
    // "count dim" header
    if (lineno == 1 && vec.size() == 1 && term.find_first_not_of("0123456789") == std::string::npos) {
      continue;
    }
    if (vec.empty()) throw ParseError(lineno, "term '" + term + "' has no vector");
    if (table.dim_ != 0 && vec.size() != table.dim_) {
      throw ConfigError("embedding table line " + std::to_string(lineno) + ": expected " +
                        std::to_string(table.dim_) + " components, got " +
                        std::to_string(vec.size()));
    }
    table.insert(std::move(term), std::move(vec));
  }
  return table;
}

EmbeddingTable EmbeddingTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open embedding table " + path);
  return load(in);
}

void EmbeddingTable::insert(std::string term, std::vector<double> vec) {
  if (vec.empty()) throw ConfigError("empty vector for term '" + term + "'");
  if (dim_ == 0) {
    dim_ = vec.size();
  } else if (vec.size() != dim_) {
    throw ConfigError("term '" + term + "' has dimension " + std::to_string(vec.size()) +
                      ", table has " + std::to_string(dim_));
  }
  table_.insert_or_assign(std::move(term), std::move(vec));
}

std::optional<std::vector<double>> EmbeddingTable::lookup(std::string_view term) const {
  auto it = table_.find(std::string(term));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

HashEmbedding::HashEmbedding(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0) throw ConfigError("hash embedding dimension must be >= 1");
}

std::optional<std::vector<double>> HashEmbedding::lookup(std::string_view term) const {
  std::vector<double> v(dim_);
  std::uint64_t state = splitmix64(fnv1a(term) ^ splitmix64(seed_));
  for (auto& x : v) {
    state = splitmix64(state);
    x = static_cast<double>(state >> 11) * 0x1.0p-52 - 1.0;
  }
  return v;
}

TextEmbedding embed_text(std::span<const std::string> tokens, const TermVectors& vectors) {
  const std::size_t dim = vectors.dim();
  TextEmbedding out;
  out.vector.assign(dim, 0.0);
  bool any = false;
  for (const auto& t : tokens) {
    auto v = vectors.lookup(t);
    if (!v) continue;
    if (v->size() != dim) {
      throw ConfigError("vector for '" + t + "' has dimension " + std::to_string(v->size()) +
                        ", expected " + std::to_string(dim));
    }
    for (std::size_t i = 0; i < dim; ++i) out.vector[i] += (*v)[i];
    any = true;
  }
  double norm2 = 0.0;
  for (double x : out.vector) norm2 += x * x;
  const double norm = std::sqrt(norm2);
  if (!any || norm == 0.0 || !std::isfinite(norm)) {
    out.vector.assign(dim, 0.0);
    out.degenerate = true;
    return out;
  }
  for (auto& x : out.vector) x /= norm;
  return out;
}

}  // namespace forage
