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

#include "forage/text.hpp"

#include <algorithm>

namespace forage {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_numeral(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) {
    return c >= '0' && c <= '9';
  });
}

}  // namespace

const std::vector<std::string>& stop_words() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> w = {
        "a",       "about",   "above",  "after",  "again",   "against",
        "all",     "am",      "an",     "and",    "any",     "are",
        "as",      "at",      "be",     "because", "been",   "before",
        "being",   "below",   "between", "both",  "but",     "by",
        "can",     "could",   "did",    "do",     "does",    "doing",
        "dont",    "down",    "during", "each",   "few",     "for",
        "from",    "further", "had",    "has",    "have",    "having",
        "he",      "her",     "here",   "hers",   "herself", "him",
        "himself", "his",     "how",    "i",      "if",      "im",
        "in",      "into",    "is",     "it",     "its",     "itself",
        "just",    "me",      "more",   "most",   "my",      "myself",
        "no",      "nor",     "not",    "now",    "of",      "off",
        "on",      "once",    "only",   "or",     "other",   "our",
        "ours",    "ourselves", "out",  "over",   "own",     "rt",
        "s",       "same",    "she",    "should", "so",      "some",
        "such",    "t",       "than",   "that",   "the",     "their",
        "theirs",  "them",    "themselves", "then", "there", "these",
        "they",    "this",    "those",  "through", "to",     "too",
        "u",       "under",   "until",  "up",     "very",    "was",
        "we",      "were",    "what",   "when",   "where",   "which",
        "while",   "who",     "whom",   "why",    "will",    "with",
        "would",   "you",     "your",   "yours",  "yourself", "yourselves"};
    std::sort(w.begin(), w.end());
    return w;
  }();
  return words;
}

bool is_stop_word(std::string_view token) {
  const auto& w = stop_words();
  return std::binary_search(w.begin(), w.end(), token);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !is_numeral(cur) && !is_stop_word(cur)) {
      out.push_back(cur);
    }
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                         : static_cast<char>(c));
    } else if (c == '\'' && !cur.empty() && i + 1 < text.size() &&
               is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      // in-word apostrophe: joined
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace forage
