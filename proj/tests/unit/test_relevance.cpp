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
#include <random>

#include <gtest/gtest.h>

#include "forage/error.hpp"
#include "forage/posterior_index.hpp"
#include "forage/relevance.hpp"
#include "../support/oracles.hpp"

namespace forage {
namespace {

using testing::label_map;
using testing::random_instance;

DataPoint at(PointId id, double x, double y = 0.0) {
  auto p = make_point(id, x, y, "p");
  p.embedding = {1.0, 0.0};
  return p;
}

AttributeModel location_model(std::size_t k, double gamma, double pi) {
  AttributeModel m{Attribute::kLocation};
  m.k = k;
  m.gamma = gamma;
  m.pi = pi;
  return m;
}

TEST(Knn, EmptyObservationsGivePrior) {
  const Dataset ds({at(1, 0), at(2, 1)});
  const auto m = location_model(50, 1.0, 0.05);
  const auto e = knn_probability(m, ds.at(1), {}, ds);
  EXPECT_EQ(e.probability, 0.05);
  EXPECT_EQ(e.neighbors, 0u);
}

TEST(Knn, HandArithmetic) {
  const Dataset ds({at(1, 0), at(2, 1), at(3, 2), at(4, 3), at(5, 100)});
  ObservationSet d;
  d.upsert({2, 1});
  d.upsert({3, 1});
  d.upsert({4, 0});
  d.upsert({5, 1});
  const auto e = knn_probability(location_model(3, 1.0, 0.5), ds.at(1), d, ds);
  EXPECT_DOUBLE_EQ(e.probability, 0.625);
  EXPECT_EQ(e.neighbors, 3u);
  EXPECT_EQ(e.positives, 2u);
}

TEST(Knn, Saturation) {
  const Dataset ds({at(1, 0), at(2, 1), at(3, 2), at(4, 3)});
  ObservationSet d;
  for (PointId id : {2, 3, 4}) d.upsert({id, 1});
  EXPECT_EQ(knn_probability(location_model(3, 1.0, 1.0), ds.at(1), d, ds).probability, 1.0);
}

TEST(Knn, TiesBrokenByLowerId) {
  // 2 and 3 are equidistant from 1; k = 1 must pick id 2.
  const Dataset ds({at(1, 0), at(3, 1), at(2, -1)});
  ObservationSet d;
  d.upsert({3, 1});
  d.upsert({2, 0});
  EXPECT_DOUBLE_EQ(knn_probability(location_model(1, 1.0, 0.5), ds.at(1), d, ds).probability, 0.25);
}

TEST(Knn, LabeledQueryIsLeftOut) {
  const Dataset ds({at(1, 0), at(2, 1)});
  ObservationSet d;
  d.upsert({1, 1});
  d.upsert({2, 0});
  const auto e = knn_probability(location_model(5, 1.0, 0.5), ds.at(1), d, ds);
  EXPECT_EQ(e.neighbors, 1u);
  EXPECT_DOUBLE_EQ(e.probability, 0.25);
}

TEST(Knn, DegenerateTextFallsBack) {
  auto p = make_point(1, 0, 0, "the");
  p.embedding = {0.0, 0.0};
  p.degenerate = true;
  const Dataset ds({p, at(2, 1)});
  ObservationSet d;
  d.upsert({2, 1});
  AttributeModel t{Attribute::kText};
  const auto e = knn_probability(t, ds.at(1), d, ds);
  EXPECT_TRUE(e.fallback);
  EXPECT_EQ(e.probability, t.pi);
}

TEST(Knn, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng);
    const auto labels = label_map(inst.d);
    for (const auto& x : inst.ds.points()) {
      EXPECT_EQ(knn_probability(inst.rm.text, x, inst.d, inst.ds).probability,
                testing::oracle_knn(inst.rm.text, x, labels, inst.ds));
      EXPECT_EQ(knn_probability(inst.rm.location, x, inst.d, inst.ds).probability,
                testing::oracle_knn(inst.rm.location, x, labels, inst.ds));
    }
  }
}

TEST(Model, Validation) {
  AttributeModel m;
  m.k = 0;
  EXPECT_THROW(m.validate(), ConfigError);
  m = {};
  m.gamma = 0.0;
  EXPECT_THROW(m.validate(), ConfigError);
  m = {};
  m.pi = 0.0;
  EXPECT_THROW(m.validate(), ConfigError);
  RelevanceModel rm;
  rm.q = 1.5;
  EXPECT_THROW(rm.validate(), ConfigError);
}

TEST(Fuse, EndpointsAndMidpoint) {
  EXPECT_EQ(fuse(0.0, 0.3, 0.7), 0.7);
  EXPECT_EQ(fuse(1.0, 0.3, 0.7), 0.3);
  EXPECT_DOUBLE_EQ(fuse(0.5, 0.8, 0.2), 0.5);
  EXPECT_EQ(fuse(0.37, 0.1, 0.1), 0.1);
  for (int i = 0; i <= 100; ++i) {
    const double v = fuse(i / 100.0, 0.1, 0.3);
    EXPECT_GE(v, 0.1);
    EXPECT_LE(v, 0.3);
  }
}

TEST(FitFusion, TextPerfectGivesOne) {
  std::vector<LooPrediction> p = {{1, 1, 1.0, 0.5}, {2, 0, 0.0, 0.5}, {3, 1, 1.0, 0.5}};
  EXPECT_EQ(fit_fusion_weight(p).q, 1.0);
}

TEST(FitFusion, FlatObjectivePicksZero) {
  std::vector<LooPrediction> p = {{1, 1, 0.3, 0.3}, {2, 0, 0.6, 0.6}};
  const auto fit = fit_fusion_weight(p);
  EXPECT_EQ(fit.q, 0.0);
  EXPECT_FALSE(fit.uninformed);
}

TEST(FitFusion, EmptyIsUninformed) {
  const auto fit = fit_fusion_weight(std::span<const LooPrediction>{});
  EXPECT_EQ(fit.q, 0.5);
  EXPECT_TRUE(fit.uninformed);
}

TEST(FitFusion, GridOracle) {
  std::mt19937_64 rng(2);
  testing::InstanceOptions opt;
  opt.min_n = opt.max_n = 10;
  int checked = 0;
  while (checked < 40) {
    auto inst = random_instance(rng, opt);
    if (inst.d.empty()) continue;
    const auto labels = label_map(inst.d);
    double best_q = 0.0, best = -INFINITY;
    for (int i = 0; i <= 100; ++i) {
      const double q = i / 100.0;
      const double ll = testing::oracle_loo_ll(inst.rm, q, labels, inst.ds);
      if (ll > best) {
        best = ll;
        best_q = q;
      }
    }
    const auto fit = fit_fusion_weight(inst.rm, inst.d, inst.ds);
    EXPECT_EQ(fit.q, best_q);
    EXPECT_EQ(fit.log_likelihood, best);
    ++checked;
  }
}

TEST(Rank, AllLabeledIsEmpty) {
  const Dataset ds({at(1, 0), at(2, 1)});
  ObservationSet d;
  d.upsert({1, 1});
  d.upsert({2, 0});
  EXPECT_TRUE(rank_unlabeled({}, d, ds).empty());
}

TEST(Rank, PriorEverywhereOrderedById) {
  const Dataset ds({at(5, 0), at(2, 1), at(9, 2)});
  RelevanceModel rm;
  rm.text.pi = 0.2;
  rm.location.pi = 0.1;
  rm.q = 0.25;
  const auto r = rank_unlabeled(rm, {}, ds);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].id, 2u);
  EXPECT_EQ(r[1].id, 5u);
  EXPECT_EQ(r[2].id, 9u);
  for (const auto& s : r) EXPECT_DOUBLE_EQ(s.score, 0.25 * 0.2 + 0.75 * 0.1);
}

TEST(Rank, PointwiseOracle) {
  std::mt19937_64 rng(3);
  testing::InstanceOptions opt;
  opt.min_n = opt.max_n = 20;
  for (int i = 0; i < 30; ++i) {
    auto inst = random_instance(rng, opt);
    const auto labels = label_map(inst.d);
    const auto r = rank_unlabeled(inst.rm, inst.d, inst.ds);
    EXPECT_EQ(r.size(), inst.ds.size() - inst.d.size());
    for (std::size_t j = 0; j < r.size(); ++j) {
      EXPECT_EQ(r[j].score, testing::oracle_fused(inst.rm, inst.rm.q, inst.ds.at(r[j].id), labels, inst.ds));
      if (j > 0) EXPECT_TRUE(score_order(r[j - 1], r[j]));
    }
  }
}

void expect_index_matches(const PosteriorIndex& idx, const RelevanceModel& rm, const ObservationSet& d,
                          const Dataset& ds) {
  RelevanceModel with_q = rm;
  with_q.q = idx.model().q;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto f = fused_probability(with_q, ds[i], d, ds);
    ASSERT_EQ(idx.text_probability(i), f.text);
    ASSERT_EQ(idx.location_probability(i), f.location);
    ASSERT_EQ(idx.probability(i), f.probability);
  }
}

TEST(PosteriorIndex, IncrementalEqualsStateless) {
  std::mt19937_64 rng(4);
  for (int round = 0; round < 30; ++round) {
    auto inst = random_instance(rng);
    const bool cached = round % 2 == 0;
    auto cache = cached ? std::make_shared<const DistanceCache>(inst.ds, inst.rm) : nullptr;
    PosteriorIndex idx(inst.ds, inst.rm, cache);
    ObservationSet d;
    std::vector<std::size_t> order(inst.ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      const int y = *inst.ds[i].truth ? 1 : 0;
      idx.observe(i, y);
      d.upsert({inst.ds[i].id, y});
      const auto fit = idx.refit();
      EXPECT_EQ(fit.q, fit_fusion_weight(inst.rm, d, inst.ds).q);
      expect_index_matches(idx, inst.rm, d, inst.ds);
    }
    EXPECT_THROW(idx.observe(order[0], 1), ValidationError);
  }
}

TEST(PosteriorIndex, RebuildAfterRemoval) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 20; ++round) {
    auto inst = random_instance(rng);
    PosteriorIndex idx(inst.ds, inst.rm, inst.d);
    expect_index_matches(idx, inst.rm, inst.d, inst.ds);
    if (inst.d.empty()) continue;
    ObservationSet d = inst.d;
    d.erase(d.entries().front().point_id);
    idx.rebuild(d);
    expect_index_matches(idx, inst.rm, d, inst.ds);
  }
}

TEST(PosteriorIndex, LookaheadMatchesConditioning) {
  std::mt19937_64 rng(6);
  for (int round = 0; round < 30; ++round) {
    auto inst = random_instance(rng);
    PosteriorIndex idx(inst.ds, inst.rm, inst.d);
    const auto table = idx.prepare_lookahead();
    std::vector<PosteriorIndex::Shift> shifts;
    for (std::size_t c : idx.unlabeled_indices()) {
      shifts.clear();
      idx.lookahead(c, table, shifts);
      std::map<std::size_t, PosteriorIndex::Shift> by_idx;
      for (const auto& s : shifts) by_idx[s.idx] = s;
      for (int y = 0; y <= 1; ++y) {
        auto labels = label_map(inst.d);
        labels[inst.ds[c].id] = y;
        for (std::size_t z : idx.unlabeled_indices()) {
          if (z == c) continue;
          const double want = testing::oracle_fused(inst.rm, inst.rm.q, inst.ds[z], labels, inst.ds);
          const auto it = by_idx.find(z);
          const double got = it == by_idx.end() ? idx.probability(z)
                                                : (y == 1 ? it->second.if_positive : it->second.if_negative);
          ASSERT_EQ(got, want);
        }
      }
    }
  }
}

TEST(ObservationSet, UpsertEraseUtility) {
  ObservationSet d;
  d.upsert({7, 1});
  d.upsert({8, 0});
  EXPECT_EQ(d.utility(), 1u);
  d.upsert({8, 1});
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.utility(), 2u);
  EXPECT_TRUE(d.erase(7));
  EXPECT_FALSE(d.erase(7));
  EXPECT_FALSE(d.contains(7));
  EXPECT_THROW(d.upsert({9, 2}), ValidationError);
}

}  // namespace
}  // namespace forage
