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
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "forage/analytics.hpp"
#include "forage/error.hpp"

namespace forage {
namespace {

Dataset truth_set(std::size_t n, std::size_t positives) {
  std::vector<DataPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(make_point(static_cast<PointId>(i + 1), static_cast<double>(i), 0.0,
                             i % 2 ? "fever cough" : "sore throat", i < positives));
  }
  return Dataset(std::move(pts));
}

InteractionEvent ev(EventKind k, std::optional<PointId> id, std::int64_t at) { return {k, id, at, {}}; }

SessionExport make_export(const std::vector<InteractionEvent>& events, std::int64_t budget = 600'000) {
  SessionExport x;
  x.header.session_id = "s";
  x.header.dataset_id = "d";
  x.header.config.budget_ms = budget;
  for (const auto& e : events) x.records.push_back({e, 0.5, 0, {}});
  return x;
}

TEST(ValidHovers, Boundary) {
  const auto ds = truth_set(2, 1);
  const std::vector<InteractionEvent> log = {ev(EventKind::kHoverStart, 1, 0), ev(EventKind::kHoverEnd, 1, 499),
                                             ev(EventKind::kHoverStart, 2, 1000),
                                             ev(EventKind::kHoverEnd, 2, 1500)};
  const auto h = valid_hovers(log, ds);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].point_id, 2u);
  EXPECT_EQ(h[0].duration_ms, 500);
  EXPECT_FALSE(h[0].relevant);
}

TEST(ValidHovers, InterleavedMatchedByPoint) {
  const auto ds = truth_set(2, 1);
  const std::vector<InteractionEvent> log = {ev(EventKind::kHoverStart, 1, 0), ev(EventKind::kHoverStart, 2, 100),
                                             ev(EventKind::kHoverEnd, 1, 700), ev(EventKind::kHoverEnd, 2, 1300)};
  const auto h = valid_hovers(log, ds);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].point_id, 1u);
  EXPECT_EQ(h[0].duration_ms, 700);
  EXPECT_TRUE(h[0].relevant);
  EXPECT_EQ(h[1].duration_ms, 1200);
}

TEST(ValidHovers, UnmatchedEndNamesIndex) {
  const auto ds = truth_set(2, 1);
  const std::vector<InteractionEvent> log = {ev(EventKind::kHoverStart, 1, 0), ev(EventKind::kHoverEnd, 2, 700)};
  try {
    valid_hovers(log, ds);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

TEST(ValidHovers, MissingTruth) {
  const Dataset ds({make_point(1, 0, 0, "a")});
  const std::vector<InteractionEvent> log = {ev(EventKind::kHoverStart, 1, 0), ev(EventKind::kHoverEnd, 1, 700)};
  EXPECT_THROW(valid_hovers(log, ds), ConfigError);
}

TEST(Throughput, ThirtyHoversInThreeMinutes) {
  const auto ds = truth_set(30, 12);
  std::vector<InteractionEvent> log;
  for (PointId id = 1; id <= 30; ++id) {
    const std::int64_t t = static_cast<std::int64_t>(id - 1) * 6000;
    log.push_back(ev(EventKind::kHoverStart, id, t));
    log.push_back(ev(EventKind::kHoverEnd, id, t + 500));
  }
  log.push_back(ev(EventKind::kSessionEnd, std::nullopt, 180'000));
  const auto m = throughput_metrics(make_export(log), ds);
  EXPECT_DOUBLE_EQ(m.active_minutes, 3.0);
  EXPECT_DOUBLE_EQ(m.hovers_per_min, 10.0);
  EXPECT_DOUBLE_EQ(m.relevant_hovers_per_min, 4.0);
  EXPECT_DOUBLE_EQ(m.hover_purity, 0.4);
  EXPECT_EQ(m.bookmarks_per_min, 0.0);
  EXPECT_FALSE(m.bookmark_purity_defined);
  EXPECT_EQ(m.bookmark_purity, 0.0);

  const auto f = throughput_metrics(make_export(log, 300'000), ds, TimeBase::kFixedBudget);
  EXPECT_DOUBLE_EQ(f.active_minutes, 5.0);
  EXPECT_DOUBLE_EQ(f.hovers_per_min, 6.0);
  EXPECT_DOUBLE_EQ(f.hover_purity, 0.4);
}

TEST(Throughput, NetBookmarksAndPurity) {
  const auto ds = truth_set(6, 3);
  const std::vector<InteractionEvent> log = {
      ev(EventKind::kBookmarkAdd, 1, 0),      ev(EventKind::kBookmarkAdd, 2, 10'000),
      ev(EventKind::kBookmarkAdd, 5, 20'000), ev(EventKind::kBookmarkRemove, 5, 30'000),
      ev(EventKind::kBookmarkAdd, 3, 60'000)};
  const auto m = throughput_metrics(make_export(log), ds);
  EXPECT_EQ(m.net_bookmark_count, 3u);
  EXPECT_DOUBLE_EQ(m.bookmark_purity, 1.0);
  EXPECT_DOUBLE_EQ(m.bookmarks_per_min, 3.0);
  EXPECT_FALSE(m.hover_purity_defined);
}

TEST(Throughput, FlooredActiveTimeAndEmpty) {
  const auto ds = truth_set(2, 1);
  const auto m = throughput_metrics(make_export({ev(EventKind::kBookmarkAdd, 1, 5)}), ds);
  EXPECT_DOUBLE_EQ(m.active_minutes, 1.0 / 60.0);
  EXPECT_THROW(throughput_metrics(make_export({}), ds), UndefinedError);
}

TEST(Welch, IdenticalGroups) {
  const std::vector<double> g = {1.0, 2.0, 4.0};
  const auto t = welch_t_test(g, g);
  EXPECT_EQ(t.t, 0.0);
  EXPECT_EQ(t.p, 1.0);
  EXPECT_EQ(t.d, 0.0);
  const std::vector<double> c = {2.0, 2.0};
  const auto z = welch_t_test(c, c);
  EXPECT_EQ(z.t, 0.0);
  EXPECT_EQ(z.p, 1.0);
}

TEST(Welch, Separation) {
  const std::vector<double> a = {0.0, 1e-3, -1e-3, 2e-3};
  const std::vector<double> b = {1.0, 1.001, 0.999, 1.002};
  const auto t = welch_t_test(a, b);
  EXPECT_GT(t.t, 0.0);
  EXPECT_LT(t.p, 0.001);
  EXPECT_GT(t.d, 100.0);
  const auto r = welch_t_test(b, a);
  EXPECT_EQ(r.t, -t.t);
  EXPECT_EQ(r.p, t.p);
  EXPECT_EQ(r.d, -t.d);
  const std::vector<double> one = {1.0};
  EXPECT_THROW(welch_t_test(one, b), RangeError);
}

TEST(Welch, ZeroVarianceDifferentMeans) {
  const std::vector<double> a = {1.0, 1.0}, b = {2.0, 2.0};
  const auto t = welch_t_test(a, b);
  EXPECT_TRUE(std::isinf(t.t));
  EXPECT_GT(t.t, 0.0);
  EXPECT_EQ(t.p, 0.0);
}

// Independent oracle: cohen's d with pooled sd, computed here directly.
double pooled_d(const std::vector<double>& a, const std::vector<double>& b) {
  auto mv = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= x.size();
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::pair{m, s / (x.size() - 1)};
  };
  const auto [ma, va] = mv(a);
  const auto [mb, vb] = mv(b);
  const double na = a.size(), nb = b.size();
  return (mb - ma) / std::sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2));
}

TEST(Welch, MatchesFrozenReference) {
  std::ifstream in(FORAGE_TEST_DATA_DIR "/welch_reference.jsonl");
  ASSERT_TRUE(in);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const auto a = j["a"].get<std::vector<double>>();
    const auto b = j["b"].get<std::vector<double>>();
    const auto t = welch_t_test(a, b);
    EXPECT_NEAR(t.p, j["p"].get<double>(), 1e-6);
    EXPECT_NEAR(t.t, -j["t"].get<double>(), 1e-9);
    EXPECT_NEAR(t.df, j["df"].get<double>(), 1e-9);
    EXPECT_NEAR(t.d, pooled_d(a, b), 1e-12);
    ++n;
  }
  EXPECT_EQ(n, 50);
}

TEST(SuggestionPurity, AllRelevantAndControl) {
  const auto ds = truth_set(6, 3);
  auto x = make_export({ev(EventKind::kBookmarkAdd, 1, 0), ev(EventKind::kBookmarkAdd, 2, 10)});
  x.records[0].suggestions = {{2, 0.5}, {3, 0.4}};
  x.records[1].suggestions = {{3, 0.5}};
  EXPECT_EQ(suggestion_purity(x, ds), 1.0);
  x.records[1].suggestions = {{3, 0.5}, {4, 0.1}, {5, 0.1}};
  EXPECT_DOUBLE_EQ(suggestion_purity(x, ds), 0.5);
  x.records[0].suggestions.clear();
  x.records[1].suggestions.clear();
  EXPECT_THROW(suggestion_purity(x, ds), UndefinedError);
  x.header.config.policy = PolicySpec::parse("none");
  EXPECT_THROW(suggestion_purity(x, ds), UndefinedError);
}

TEST(DiscoveryCurve, CountsDistinctPhrasesPerMinute) {
  const auto ds = truth_set(6, 6);  // alternating "sore throat" / "fever cough"
  const auto lex = KeywordLexicon::builtin();
  const auto x = make_export({ev(EventKind::kBookmarkAdd, 1, 10'000), ev(EventKind::kBookmarkAdd, 3, 50'000),
                              ev(EventKind::kBookmarkAdd, 2, 70'000), ev(EventKind::kHoverStart, 4, 130'000)});
  const auto c = keyword_discovery_curve(x, ds, lex);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].keywords, 0u);
  EXPECT_EQ(c[1].keywords, 1u);
  EXPECT_EQ(c[2].keywords, 3u);
  EXPECT_EQ(c[2].minute, 2u);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GE(c[i].keywords, c[i - 1].keywords);
}

TEST(Compare, CsvShapes) {
  std::vector<SessionMetricsRow> rows;
  for (int i = 0; i < 4; ++i) {
    ThroughputMetrics m;
    m.hovers_per_min = 10 + i;
    m.active_minutes = 1;
    rows.push_back({"c" + std::to_string(i), "control", m});
    m.hovers_per_min = 20 + 2 * i;
    rows.push_back({"a" + std::to_string(i), "active", m});
  }
  const auto cmp = compare_groups(rows, "control", "active");
  ASSERT_EQ(cmp.size(), 6u);
  EXPECT_EQ(cmp[0].metric, "hovers_per_min");
  EXPECT_GT(cmp[0].test.t, 0.0);
  std::ostringstream out;
  write_comparison_csv(out, cmp);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "metric,mean_a,ci95_a,mean_b,ci95_b,p,t,d");
  std::ostringstream m;
  write_metrics_csv(m, rows);
  const std::string csv = m.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  EXPECT_THROW(compare_groups(rows, "control", "missing"), Error);
}

}  // namespace
}  // namespace forage
