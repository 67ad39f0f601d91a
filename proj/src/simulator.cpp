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

#include "forage/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "forage/csv.hpp"
#include "forage/error.hpp"
#include "forage/posterior_index.hpp"
#include "forage/ranking_metrics.hpp"
#include "forage/rng.hpp"
#include "forage/stats.hpp"

namespace forage {

namespace {

constexpr std::uint64_t kSeedStream = 0x5eed;
constexpr std::uint64_t kNoiseStream = 0xf11b;
constexpr std::uint64_t kPolicyStream = 0x9011c7;

std::vector<std::size_t> positive_indices(const Dataset& ds) {
  if (!ds.fully_labeled()) throw ConfigError("simulation needs ground truth on every point");
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (*ds[i].truth) pos.push_back(i);
  }
  if (pos.empty()) throw ConfigError("simulation needs at least one positive point");
  std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) { return ds[a].id < ds[b].id; });
  return pos;
}

std::shared_ptr<const DistanceCache> cache_for(const Dataset& ds, const RelevanceModel& rm,
                                               const PolicySpec& policy) {
  const bool lookahead = policy.kind == PolicyKind::kEns ||
                         (policy.kind == PolicyKind::kEllStep && policy.ell == 2);
  if (!lookahead || ds.size() > DistanceCache::kDefaultMaxPoints) return nullptr;
  return std::make_shared<const DistanceCache>(ds, rm);
}

std::size_t run_once(const Dataset& ds, const SimulationConfig& cfg, const PolicySpec& policy,
                     std::size_t seed_idx, std::size_t run,
                     const std::shared_ptr<const DistanceCache>& cache) {
  PosteriorIndex index(ds, cfg.model, cache);
  index.observe(seed_idx, 1);
  index.refit();

  PolicySpec p = policy;
  p.seed = derive_seed(cfg.seed ^ policy.seed, {kPolicyStream, run});
  Rng noise(derive_seed(cfg.seed, {kNoiseStream, run}));

  std::size_t found = 0;
  for (std::size_t step = 0; step < cfg.iterations && index.unlabeled_count() > 0; ++step) {
    const std::size_t next = select_next(index, p, step);
    const bool truth = *ds[next].truth;
    bool reported = truth;
    if (cfg.flip_probability > 0.0 && uniform_unit(noise) < cfg.flip_probability) reported = !truth;
    if (truth) ++found;
    index.observe(next, reported ? 1 : 0);
    index.refit();
  }
  return found;
}

SimulationReport summarize(std::string policy, std::vector<std::size_t> per_run) {
  SimulationReport r;
  r.policy = std::move(policy);
  std::vector<double> xs(per_run.begin(), per_run.end());
  r.per_run_utility = std::move(per_run);
  r.mean = stats::mean(xs);
  r.ci95 = stats::ci_half_width(xs);
  return r;
}

std::vector<std::size_t> seed_points(const Dataset& ds, const SimulationConfig& cfg) {
  const auto pos = positive_indices(ds);
  std::vector<std::size_t> seeds(cfg.runs);
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    Rng rng(derive_seed(cfg.seed, {kSeedStream, run}));
    seeds[run] = pos[uniform_index(rng, pos.size())];
  }
  return seeds;
}

SimulationReport simulate_policy(const Dataset& ds, const SimulationConfig& cfg, const PolicySpec& policy,
                                 std::span<const std::size_t> seeds) {
  policy.validate();
  if (policy.kind == PolicyKind::kNone) throw ConfigError("policy 'none' cannot be simulated");
  const auto cache = cache_for(ds, cfg.model, policy);
  std::vector<std::size_t> per_run(cfg.runs);
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    per_run[run] = run_once(ds, cfg, policy, seeds[run], run, cache);
  }
  return summarize(policy.to_string(), std::move(per_run));
}

}  // namespace

void SimulationConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw ConfigError("flip probability must lie in [0, 1]");
  }
  policy.validate();
  model.validate();
}

SimulationReport run_simulation(const Dataset& ds, const SimulationConfig& cfg) {
  cfg.validate();
  const auto seeds = seed_points(ds, cfg);
  return simulate_policy(ds, cfg, cfg.policy, seeds);
}

std::vector<SimulationReport> run_benchmark(const Dataset& ds, std::span<const PolicySpec> policies,
                                            const SimulationConfig& cfg) {
  cfg.validate();
  const auto seeds = seed_points(ds, cfg);
  std::vector<SimulationReport> out;
  out.reserve(policies.size());
  for (const auto& p : policies) out.push_back(simulate_policy(ds, cfg, p, seeds));
  return out;
}

void write_runs_csv(std::ostream& out, std::span<const SimulationReport> reports) {
  out << "policy,run,utility\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.per_run_utility.size(); ++i) {
      out << csv::escape(r.policy) << ',' << i << ',' << r.per_run_utility[i] << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, std::span<const SimulationReport> reports) {
  out << "policy,mean,ci95\n";
  for (const auto& r : reports) {
    out << csv::escape(r.policy) << ',' << csv::format_double(r.mean) << ','
        << csv::format_double(r.ci95) << '\n';
  }
}

// ---- cross-validation ----------------------------------------------------------

CrossValidationResult cross_validate(const Dataset& ds, double train_fraction, std::uint64_t seed,
                                     const RelevanceModel& model) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw RangeError("train fraction must lie in (0, 1)");
  }
  if (!ds.fully_labeled()) throw ConfigError("cross-validation needs ground truth on every point");
  if (ds.size() < 2) throw RangeError("cross-validation needs at least two points");
  model.validate();

  const auto train_n = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ds.size()))), 1,
      ds.size() - 1);
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, {0xc5}));
  for (std::size_t i = 0; i < train_n; ++i) std::swap(idx[i], idx[i + uniform_index(rng, ds.size() - i)]);

  ObservationSet train;
  std::size_t train_pos = 0;
  for (std::size_t i = 0; i < train_n; ++i) {
    const auto& p = ds[idx[i]];
    train.upsert({p.id, *p.truth ? 1 : 0, LabelSource::kOracle, 0});
    train_pos += *p.truth ? 1 : 0;
  }

  CrossValidationResult res;
  res.train_size = train_n;
  res.test_size = ds.size() - train_n;
  res.degenerate_split = train_pos == 0 || train_pos == train_n;

  RelevanceModel rm = model;
  std::vector<ScoredLabel> scored;
  scored.reserve(res.test_size);
  if (res.degenerate_split) {
    const double prior = fuse(rm.q, rm.text.pi, rm.location.pi);
    for (std::size_t i = train_n; i < ds.size(); ++i) scored.push_back({ds[idx[i]].id, prior, *ds[idx[i]].truth});
  } else {
    PosteriorIndex index(ds, rm, train);
    index.refit();
    rm.q = index.model().q;
    for (std::size_t i = train_n; i < ds.size(); ++i) {
      scored.push_back({ds[idx[i]].id, index.probability(idx[i]), *ds[idx[i]].truth});
    }
  }
  res.q = rm.q;
  try {
    res.auc = auc_roc(scored);
  } catch (const UndefinedError&) {
    res.auc_defined = false;
    res.auc = 0.5;
  }
  for (std::size_t k : {std::size_t{1}, std::size_t{5}}) {
    if (k <= scored.size()) res.precision_at[k] = precision_at_k(scored, k);
  }
  return res;
}

void write_crossval_csv(std::ostream& out, const CrossValidationResult& r) {
  out << "auc,p_at_1,p_at_5,q,train_size,test_size,degenerate_split\n";
  auto p = [&](std::size_t k) {
    auto it = r.precision_at.find(k);
    return it == r.precision_at.end() ? std::string() : csv::format_double(it->second);
  };
  out << (r.auc_defined ? csv::format_double(r.auc) : std::string()) << ',' << p(1) << ',' << p(5) << ','
      << csv::format_double(r.q) << ',' << r.train_size << ',' << r.test_size << ','
      << (r.degenerate_split ? 1 : 0) << '\n';
}

// ---- scripted forager --------------------------------------------------------

SessionExport simulate_forager(std::shared_ptr<const Dataset> ds, const ForagerConfig& cfg,
                               std::shared_ptr<const DistanceCache> cache) {
  if (!(cfg.flip_probability >= 0.0 && cfg.flip_probability <= 1.0)) {
    throw ConfigError("flip probability must lie in [0, 1]");
  }
  const auto pos = positive_indices(*ds);
  Rng rng(derive_seed(cfg.seed, {0xf0a6e}));
  Session s("sim-" + std::to_string(cfg.seed), ds, "synthetic", cfg.session, std::move(cache));

  std::int64_t t = 0;
  auto inspect = [&](PointId id) {
    s.apply({EventKind::kHoverStart, id, t, {}});
    s.apply({EventKind::kHoverEnd, id, t + 600, {}});
    t += 700;
  };

  const PointId first = (*ds)[pos[uniform_index(rng, pos.size())]].id;
  inspect(first);
  s.apply({EventKind::kBookmarkAdd, first, t, {}});
  t += 800;

  for (std::size_t step = 0; step < cfg.steps && !s.suggestions().empty(); ++step) {
    if (t + 1500 > cfg.session.budget_ms) break;
    const PointId id = s.suggestions().front().id;
    inspect(id);
    bool judged = *ds->at(id).truth;
    if (uniform_unit(rng) < cfg.flip_probability) judged = !judged;
    s.apply({judged ? EventKind::kBookmarkAdd : EventKind::kIrrelevantFlag, id, t, {}});
    t += 800;
  }
  s.apply({EventKind::kSessionEnd, std::nullopt, t, {}});
  return s.export_log();
}

}  // namespace forage
