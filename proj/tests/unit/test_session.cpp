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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "forage/error.hpp"
#include "forage/session.hpp"
#include "forage/synthetic.hpp"

namespace forage {
namespace {

std::shared_ptr<const Dataset> small(std::size_t n) {
  std::vector<DataPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = make_point(static_cast<PointId>(i + 1), static_cast<double>(i % 5), static_cast<double>(i / 5),
                        "p", i % 3 == 0);
    p.embedding = {1.0, 0.0};
    pts.push_back(p);
  }
  return std::make_shared<const Dataset>(std::move(pts));
}

std::shared_ptr<const Dataset> synthetic() {
  SyntheticConfig sc;
  sc.n = 300;
  sc.incidence = 0.1;
  static auto ds = std::make_shared<const Dataset>(make_clustered_dataset(sc));
  return ds;
}

InteractionEvent ev(EventKind k, std::optional<PointId> id, std::int64_t at, std::string eid = {}) {
  return {k, id, at, std::move(eid)};
}

Session make(std::shared_ptr<const Dataset> ds, SessionConfig cfg = {}) {
  return Session("s1", std::move(ds), "d1", cfg);
}

PointId first_positive(const Dataset& ds) {
  for (const auto& p : ds.points()) {
    if (*p.truth) return p.id;
  }
  return 0;
}

TEST(Session, FreshIsEmpty) {
  auto s = make(synthetic());
  EXPECT_EQ(s.utility(), 0u);
  EXPECT_TRUE(s.suggestions().empty());
  s.apply(ev(EventKind::kHoverStart, 5, 0));
  s.apply(ev(EventKind::kHoverEnd, 5, 800));
  EXPECT_TRUE(s.suggestions().empty());
}

TEST(Session, FirstBookmarkFillsBatch) {
  auto ds = synthetic();
  auto s = make(ds);
  s.apply(ev(EventKind::kBookmarkAdd, first_positive(*ds), 10));
  EXPECT_EQ(s.suggestions().size(), 10u);
  const PointId chosen = s.suggestions()[3].id;
  s.apply(ev(EventKind::kBookmarkAdd, chosen, 20));
  EXPECT_EQ(s.suggestions().size(), 10u);
  for (const auto& x : s.suggestions()) EXPECT_NE(x.id, chosen);
}

TEST(Session, BatchIsBoundedByUnlabeled) {
  auto s = make(small(5));
  s.apply(ev(EventKind::kBookmarkAdd, 1, 0));
  EXPECT_EQ(s.suggestions().size(), 4u);
}

TEST(Session, ControlNeverSuggests) {
  SessionConfig cfg;
  cfg.policy = PolicySpec::parse("none");
  auto s = make(synthetic(), cfg);
  s.apply(ev(EventKind::kBookmarkAdd, 1, 0));
  s.apply(ev(EventKind::kBookmarkAdd, 2, 5));
  EXPECT_TRUE(s.suggestions().empty());
  EXPECT_EQ(s.utility(), 2u);
}

TEST(Session, RemoveUndoesAdd) {
  auto s = make(small(10));
  s.apply(ev(EventKind::kBookmarkAdd, 7, 0));
  s.apply(ev(EventKind::kBookmarkRemove, 7, 1));
  EXPECT_FALSE(s.observations().contains(7));
  EXPECT_EQ(s.utility(), 0u);
}

TEST(Session, UtilityCounts) {
  auto s = make(small(20));
  std::int64_t t = 0;
  for (PointId id : {1, 2, 3}) s.apply(ev(EventKind::kBookmarkAdd, id, t++));
  s.apply(ev(EventKind::kIrrelevantFlag, s.suggestions().front().id, t++));
  EXPECT_EQ(utility(s), 3u);
  for (PointId id : {4, 5}) s.apply(ev(EventKind::kBookmarkAdd, id, t++));
  s.apply(ev(EventKind::kBookmarkRemove, 1, t++));
  s.apply(ev(EventKind::kBookmarkRemove, 4, t++));
  EXPECT_EQ(s.utility(), 3u);
}

TEST(Session, FunctionalForms) {
  auto ds = synthetic();
  const Session a = create_session("f", ds, "d", PolicySpec::one_step(), 5);
  const Session b = apply_event(a, ev(EventKind::kBookmarkAdd, first_positive(*ds), 0));
  EXPECT_TRUE(current_suggestions(a).empty());
  EXPECT_EQ(current_suggestions(b).size(), 5u);
  EXPECT_EQ(current_suggestions(b), current_suggestions(b));
  EXPECT_EQ(utility(b), 1u);
}

TEST(Session, ProtocolErrorsLeaveStateUntouched) {
  auto ds = small(20);
  auto s = make(ds);
  s.apply(ev(EventKind::kBookmarkAdd, 1, 100, "a"));
  s.apply(ev(EventKind::kHoverStart, 2, 200));
  const auto before_obs = s.observations();
  const auto before_sugg = s.suggestions();
  const auto before_log = s.log().size();
  const double before_q = s.q();

  auto rejected = [&](const InteractionEvent& e) {
    EXPECT_THROW(s.apply(e), Error) << to_string(e.kind);
    EXPECT_EQ(s.observations(), before_obs);
    EXPECT_EQ(s.suggestions(), before_sugg);
    EXPECT_EQ(s.log().size(), before_log);
    EXPECT_EQ(s.q(), before_q);
  };
  rejected(ev(EventKind::kBookmarkAdd, 3, 150));                  // time goes backwards
  rejected(ev(EventKind::kBookmarkAdd, 999, 300));                // unknown point
  rejected(ev(EventKind::kHoverEnd, 3, 300));                     // unmatched
  rejected(ev(EventKind::kBookmarkRemove, 3, 300));               // not bookmarked
  rejected(ev(EventKind::kBookmarkAdd, 3, 300, "a"));             // duplicate id
  rejected(ev(EventKind::kBookmarkAdd, 3, 700'000));              // past budget
  rejected(ev(EventKind::kBookmarkAdd, std::nullopt, 300));       // no point

  PointId unsuggested = 0;
  for (const auto& p : ds->points()) {
    const bool sugg = std::any_of(before_sugg.begin(), before_sugg.end(), [&](auto& x) { return x.id == p.id; });
    if (!sugg && !s.observations().contains(p.id)) unsuggested = p.id;
  }
  ASSERT_NE(unsuggested, 0u);
  rejected(ev(EventKind::kIrrelevantFlag, unsuggested, 300));

  EXPECT_THROW(s.apply(ev(EventKind::kBookmarkAdd, 999, 300)), NotFoundError);
  s.apply(ev(EventKind::kSessionEnd, std::nullopt, 400));
  EXPECT_TRUE(s.ended());
  EXPECT_THROW(s.apply(ev(EventKind::kHoverStart, 2, 500)), ProtocolError);
}

TEST(Session, StrictRefreshOnlyRefillsOnBookmark) {
  SessionConfig cfg;
  cfg.strict_refresh = true;
  auto ds = synthetic();
  auto s = make(ds, cfg);
  s.apply(ev(EventKind::kBookmarkAdd, first_positive(*ds), 0));
  ASSERT_EQ(s.suggestions().size(), 10u);
  const PointId flagged = s.suggestions().front().id;
  s.apply(ev(EventKind::kIrrelevantFlag, flagged, 1));
  EXPECT_EQ(s.suggestions().size(), 9u);
  for (const auto& x : s.suggestions()) EXPECT_NE(x.id, flagged);
  s.apply(ev(EventKind::kBookmarkAdd, s.suggestions().front().id, 2));
  EXPECT_EQ(s.suggestions().size(), 10u);
}

// After each label change the batch is the top of a from-scratch ranking
// under the refit q.
TEST(Session, MatchesRecomputation) {
  auto ds = synthetic();
  auto s = make(ds);
  std::mt19937_64 rng(31);
  s.apply(ev(EventKind::kBookmarkAdd, first_positive(*ds), 0));
  for (std::int64_t t = 1; t < 60; ++t) {
    const auto& sugg = s.suggestions();
    const PointId id = sugg[rng() % sugg.size()].id;
    s.apply(ev(*ds->at(id).truth ? EventKind::kBookmarkAdd : EventKind::kIrrelevantFlag, id, t));
    if (t % 10 == 0 && s.utility() > 1) {
      PointId mark = 0;
      for (const auto& o : s.observations().entries()) {
        if (o.label == 1) mark = o.point_id;
      }
      s.apply(ev(EventKind::kBookmarkRemove, mark, t));
    }
    RelevanceModel rm = s.config().model;
    const auto fit = fit_fusion_weight(rm, s.observations(), *ds);
    ASSERT_EQ(s.q(), fit.q);
    rm.q = fit.q;
    const auto ranked = rank_unlabeled(rm, s.observations(), *ds);
    ASSERT_EQ(s.suggestions().size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) ASSERT_EQ(s.suggestions()[i], ranked[i]);
  }
}

TEST(Session, ExportRoundTripAndReplay) {
  auto ds = synthetic();
  SessionConfig cfg;
  cfg.policy = PolicySpec::ens(5, 50);
  cfg.batch_size = 4;
  cfg.model.text.k = 7;
  auto s = make(ds, cfg);
  s.apply(ev(EventKind::kHoverStart, 3, 0, "h1"));
  s.apply(ev(EventKind::kHoverEnd, 3, 600, "h2"));
  s.apply(ev(EventKind::kBookmarkAdd, first_positive(*ds), 700, "b1"));
  s.apply(ev(EventKind::kIrrelevantFlag, s.suggestions().back().id, 900));
  s.apply(ev(EventKind::kBookmarkAdd, s.suggestions().front().id, 1000));
  s.apply(ev(EventKind::kSessionEnd, std::nullopt, 1200));
  EXPECT_TRUE(s.has_event_id("b1"));
  EXPECT_FALSE(s.has_event_id("zz"));

  std::stringstream buf;
  s.export_log().write_jsonl(buf);
  const auto x = SessionExport::read_jsonl(buf);
  EXPECT_EQ(x.header.session_id, "s1");
  EXPECT_EQ(x.header.dataset_id, "d1");
  EXPECT_EQ(x.header.config.policy.to_string(), "ens:5");
  EXPECT_EQ(x.header.config.policy.candidate_cap, 50u);
  EXPECT_EQ(x.header.config.batch_size, 4u);
  EXPECT_EQ(x.header.config.model.text.k, 7u);
  ASSERT_EQ(x.records.size(), s.log().size());
  for (std::size_t i = 0; i < x.records.size(); ++i) {
    EXPECT_EQ(x.records[i].q, s.log()[i].q);
    EXPECT_EQ(x.records[i].utility, s.log()[i].utility);
    EXPECT_EQ(x.records[i].suggestions, s.log()[i].suggestions);
    EXPECT_EQ(x.records[i].event.event_id, s.log()[i].event.event_id);
  }
  const auto r = Session::replay(x.header, ds, x.events());
  EXPECT_EQ(r.observations(), s.observations());
  EXPECT_EQ(r.suggestions(), s.suggestions());
  EXPECT_TRUE(r.ended());

  std::istringstream bad("{\"not\":\"a header\"}\n");
  EXPECT_THROW(SessionExport::read_jsonl(bad), Error);
}

TEST(EventKind, Strings) {
  for (auto k : {EventKind::kHoverStart, EventKind::kHoverEnd, EventKind::kBookmarkAdd,
                 EventKind::kBookmarkRemove, EventKind::kIrrelevantFlag, EventKind::kSessionEnd}) {
    EXPECT_EQ(event_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(event_kind_from_string("click"), Error);
  EXPECT_TRUE(is_label_event(EventKind::kBookmarkRemove));
  EXPECT_FALSE(is_label_event(EventKind::kHoverStart));
}

}  // namespace
}  // namespace forage
