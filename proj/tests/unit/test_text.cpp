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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "forage/embedding.hpp"
#include "forage/error.hpp"
#include "forage/text.hpp"

namespace forage {
namespace {

TEST(Tokenize, LowercasesAndSplits) {
  EXPECT_EQ(tokenize("Sore THROAT, fever!"), (std::vector<std::string>{"sore", "throat", "fever"}));
}

TEST(Tokenize, DropsStopWordsNumbersAndApostrophes) {
  EXPECT_EQ(tokenize("Bob's 2 the flu"), (std::vector<std::string>{"bobs", "flu"}));
  EXPECT_TRUE(is_stop_word("the"));
  EXPECT_FALSE(is_stop_word("fever"));
  EXPECT_TRUE(std::is_sorted(stop_words().begin(), stop_words().end()));
}

TEST(Tokenize, KeepsUtf8) {
  const auto t = tokenize("caf\xc3\xa9 fi\xc3\xa8vre");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], "caf\xc3\xa9");
}

TEST(Tokenize, Empty) { EXPECT_TRUE(tokenize("  ,.;  ").empty()); }

EmbeddingTable table(const std::string& text) {
  std::istringstream in(text);
  return EmbeddingTable::load(in);
}

TEST(EmbedText, SingleTokenNormalized) {
  const auto t = table("a 3 4\n");
  const std::vector<std::string> toks = {"a"};
  const auto e = embed_text(toks, t);
  EXPECT_FALSE(e.degenerate);
  EXPECT_DOUBLE_EQ(e.vector[0], 0.6);
  EXPECT_DOUBLE_EQ(e.vector[1], 0.8);
}

TEST(EmbedText, CancellationIsDegenerate) {
  const auto t = table("a 1 2\nb -1 -2\n");
  const std::vector<std::string> toks = {"a", "b"};
  const auto e = embed_text(toks, t);
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.vector, (std::vector<double>{0.0, 0.0}));
}

TEST(EmbedText, OrthogonalPair) {
  const auto t = table("a 1 0\nb 0 1\n");
  const std::vector<std::string> toks = {"a", "b"};
  const auto e = embed_text(toks, t);
  EXPECT_NEAR(e.vector[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(e.vector[1], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(EmbedText, AllMissesAndEmptyAreDegenerate) {
  const auto t = table("a 1 0\n");
  const std::vector<std::string> miss = {"zzz"};
  EXPECT_TRUE(embed_text(miss, t).degenerate);
  EXPECT_TRUE(embed_text({}, t).degenerate);
}

TEST(EmbeddingTable, SkipsHeaderAndRejectsDimMismatch) {
  const auto t = table("2 3\na 1 0 0\nb 0 1 0\n");
  EXPECT_EQ(t.dim(), 3u);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_THROW(table("a 1 0\nb 1 0 0\n"), Error);
}

TEST(HashEmbedding, DeterministicAndSeeded) {
  HashEmbedding a(16, 1), b(16, 1), c(16, 2);
  EXPECT_EQ(*a.lookup("fever"), *b.lookup("fever"));
  EXPECT_NE(*a.lookup("fever"), *c.lookup("fever"));
  EXPECT_EQ(a.lookup("x")->size(), 16u);
  const auto cough = *a.lookup("cough");
  for (double v : cough) {
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
}

}  // namespace
}  // namespace forage
