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

#include "forage/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "forage/csv.hpp"
#include "forage/error.hpp"
#include "forage/rng.hpp"
#include "forage/text.hpp"

namespace forage {

namespace {

constexpr double kNormTolerance = 1e-9;

double parse_coord(const std::string& s, std::size_t line, const char* name) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end == s.c_str() || *end != '\0') {
    throw ParseError(line, std::string("field '") + name + "' is not a number: '" + s + "'");
  }
  return v;
}

PointId parse_id(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw ParseError(line, "field 'id' is not an integer: '" + s + "'");
  return static_cast<PointId>(v);
}

std::optional<bool> parse_truth(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  if (s == "1" || s == "true" || s == "True") return true;
  if (s == "0" || s == "false" || s == "False") return false;
  throw ParseError(line, "field 'truth' must be 0/1/true/false: '" + s + "'");
}

Dataset load_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return Dataset{};
  int col_id = -1, col_x = -1, col_y = -1, col_text = -1, col_truth = -1;
  for (std::size_t i = 0; i < header->fields.size(); ++i) {
    const auto& h = header->fields[i];
    const int c = static_cast<int>(i);
    if (h == "id") col_id = c;
    else if (h == "x") col_x = c;
    else if (h == "y") col_y = c;
    else if (h == "text") col_text = c;
    else if (h == "truth") col_truth = c;
  }
  if (col_id < 0 || col_x < 0 || col_y < 0 || col_text < 0) {
    throw ParseError(header->line, "header must name columns id,x,y,text");
  }
  std::vector<DataPoint> points;
  while (auto rec = reader.next()) {
    if (rec->fields.size() != header->fields.size()) {
      throw ParseError(rec->line, "expected " + std::to_string(header->fields.size()) +
                                      " fields, got " + std::to_string(rec->fields.size()));
    }
    const auto& f = rec->fields;
    std::optional<bool> truth;
    if (col_truth >= 0) truth = parse_truth(f[col_truth], rec->line);
    points.push_back(make_point(parse_id(f[col_id], rec->line),
                                parse_coord(f[col_x], rec->line, "x"),
                                parse_coord(f[col_y], rec->line, "y"), f[col_text], truth));
  }
  return Dataset(std::move(points));
}

Dataset load_jsonl(std::istream& in) {
  std::vector<DataPoint> points;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(lineno, e.what());
    }
    if (!rec.is_object()) throw ParseError(lineno, "record is not an object");
    for (const char* key : {"id", "x", "y", "text"}) {
      if (!rec.contains(key)) throw ParseError(lineno, std::string("missing field '") + key + "'");
    }
    if (!rec["id"].is_number_integer()) throw ParseError(lineno, "field 'id' is not an integer");
    if (!rec["x"].is_number() || !rec["y"].is_number()) {
      throw ParseError(lineno, "fields 'x' and 'y' must be numbers");
    }
    if (!rec["text"].is_string()) throw ParseError(lineno, "field 'text' is not a string");
    std::optional<bool> truth;
    if (rec.contains("truth") && !rec["truth"].is_null()) {
      const auto& t = rec["truth"];
      if (t.is_boolean()) truth = t.get<bool>();
      else if (t.is_number_integer() && (t.get<int>() == 0 || t.get<int>() == 1)) truth = t.get<int>() == 1;
      else throw ParseError(lineno, "field 'truth' must be boolean or 0/1");
    }
    points.push_back(make_point(rec["id"].get<PointId>(), rec["x"].get<double>(),
                                rec["y"].get<double>(), rec["text"].get<std::string>(), truth));
  }
  return Dataset(std::move(points));
}

}  // namespace

DataPoint make_point(PointId id, double x, double y, std::string text, std::optional<bool> truth) {
  DataPoint p;
  p.id = id;
  p.location = {x, y};
  p.tokens = tokenize(text);
  p.text = std::move(text);
  p.truth = truth;
  return p;
}

Dataset::Dataset(std::vector<DataPoint> points) : points_(std::move(points)) {
  index_.reserve(points_.size());
  std::size_t with_truth = 0, positives = 0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!index_.emplace(p.id, i).second) {
      throw ValidationError("duplicate point id " + std::to_string(p.id));
    }
    if (!std::isfinite(p.location.x) || !std::isfinite(p.location.y)) {
      throw ValidationError("point id " + std::to_string(p.id) + " has a non-finite location");
    }
    if (!p.embedding.empty()) {
      if (i == 0) {
        embedding_dim_ = p.embedding.size();
      } else if (p.embedding.size() != embedding_dim_) {
        throw ValidationError("point id " + std::to_string(p.id) + " has embedding dimension " +
                              std::to_string(p.embedding.size()));
      }
      double n2 = 0.0;
      for (double v : p.embedding) n2 += v * v;
      const double norm = std::sqrt(n2);
      const bool ok = p.degenerate ? norm == 0.0 : std::abs(norm - 1.0) <= kNormTolerance;
      if (!ok) {
        throw ValidationError("point id " + std::to_string(p.id) + " embedding norm " +
                              std::to_string(norm) + " violates the unit-norm invariant");
      }
    } else if (embedding_dim_ != 0) {
      throw ValidationError("point id " + std::to_string(p.id) + " is missing its embedding");
    }
    if (p.truth) {
      ++with_truth;
      if (*p.truth) ++positives;
    }
  }
  if (with_truth > 0) incidence_ = static_cast<double>(positives) / static_cast<double>(with_truth);
}

const DataPoint& Dataset::at(PointId id) const { return points_[index_of(id)]; }

std::size_t Dataset::index_of(PointId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("no point with id " + std::to_string(id));
  return it->second;
}

std::optional<std::size_t> Dataset::find(PointId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Dataset::fully_labeled() const {
  return std::all_of(points_.begin(), points_.end(), [](const DataPoint& p) { return p.truth.has_value(); });
}

std::size_t Dataset::positive_count() const {
  return static_cast<std::size_t>(std::count_if(points_.begin(), points_.end(), [](const DataPoint& p) {
    return p.truth.value_or(false);
  }));
}

Dataset Dataset::with_embeddings(const TermVectors& vectors) const {
  std::vector<DataPoint> pts = points_;
  for (auto& p : pts) {
    auto e = embed_text(p.tokens, vectors);
    p.embedding = std::move(e.vector);
    p.degenerate = e.degenerate;
  }
  return Dataset(std::move(pts));
}

DataFormat format_from_path(const std::string& path) {
  auto ends_with = [&](const std::string& suf) {
    return path.size() >= suf.size() && path.compare(path.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends_with(".jsonl") || ends_with(".ndjson") || ends_with(".json")) return DataFormat::kJsonl;
  return DataFormat::kCsv;
}

Dataset load_dataset(std::istream& in, DataFormat format, const TermVectors* vectors) {
  Dataset ds = format == DataFormat::kCsv ? load_csv(in) : load_jsonl(in);
  if (vectors != nullptr) return ds.with_embeddings(*vectors);
  return ds;
}

Dataset load_dataset_file(const std::string& path, const TermVectors* vectors) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open dataset " + path);
  return load_dataset(in, format_from_path(path), vectors);
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  const bool with_truth = std::any_of(ds.points().begin(), ds.points().end(),
                                      [](const DataPoint& p) { return p.truth.has_value(); });
  out << "id,x,y,text" << (with_truth ? ",truth" : "") << '\n';
  for (const auto& p : ds.points()) {
    out << p.id << ',' << csv::format_double(p.location.x) << ','
        << csv::format_double(p.location.y) << ',' << csv::escape(p.text);
    if (with_truth) {
      out << ',';
      if (p.truth) out << (*p.truth ? '1' : '0');
    }
    out << '\n';
  }
}

// --- lexicon ---------------------------------------------------------------

const std::vector<std::string>& KeywordLexicon::builtin_phrases() {
  static const std::vector<std::string> phrases = {
      "sore throat", "diarrhea", "pneumonia", "fever",   "cough",          "flu",          "headache",
      "nausea",      "vomiting", "chills",    "fatigue", "short of breath", "stomach ache", "sick"};
  return phrases;
}

KeywordLexicon KeywordLexicon::builtin() { return KeywordLexicon(builtin_phrases()); }

KeywordLexicon::KeywordLexicon(const std::vector<std::string>& phrases) {
  for (const auto& raw : phrases) {
    auto toks = tokenize(raw);
    if (toks.empty()) continue;
    if (std::find(phrases_.begin(), phrases_.end(), toks) != phrases_.end()) continue;
    phrases_.push_back(std::move(toks));
    labels_.push_back(raw);
  }
  if (phrases_.empty()) throw ConfigError("keyword lexicon is empty");
}

KeywordLexicon KeywordLexicon::load(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line.substr(first));
  }
  return KeywordLexicon(lines);
}

KeywordLexicon KeywordLexicon::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open lexicon " + path);
  return load(in);
}

std::vector<std::size_t> KeywordLexicon::matches(std::span<const std::string> tokens) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < phrases_.size(); ++i) {
    const auto& ph = phrases_[i];
    if (std::search(tokens.begin(), tokens.end(), ph.begin(), ph.end()) != tokens.end()) {
      out.push_back(i);
    }
  }
  return out;
}

bool KeywordLexicon::any_match(std::span<const std::string> tokens) const {
  return std::any_of(phrases_.begin(), phrases_.end(), [&](const std::vector<std::string>& ph) {
    return std::search(tokens.begin(), tokens.end(), ph.begin(), ph.end()) != tokens.end();
  });
}

Dataset apply_label_heuristic(const Dataset& ds, const KeywordLexicon& lexicon) {
  std::vector<DataPoint> pts(ds.points().begin(), ds.points().end());
  for (auto& p : pts) p.truth = lexicon.any_match(p.tokens);
  return Dataset(std::move(pts));
}

Dataset sample_points(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (n > ds.size()) {
    throw RangeError("cannot sample " + std::to_string(n) + " of " + std::to_string(ds.size()) + " points");
  }
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, {0x5a4d}));
  // partial Fisher-Yates
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + uniform_index(rng, ds.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<DataPoint> pts;
  pts.reserve(n);
  for (auto i : idx) pts.push_back(ds[i]);
  return Dataset(std::move(pts));
}

}  // namespace forage
