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
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "forage/dataset.hpp"
#include "forage/policy.hpp"
#include "forage/relevance.hpp"
#include "forage/session.hpp"

namespace forage {

struct SimulationConfig {
  std::size_t iterations = 500;
  std::size_t runs = 50;
  PolicySpec policy = PolicySpec::one_step();
  std::uint64_t seed = 0;
  // Probability that the simulated oracle reports the wrong label.
  double flip_probability = 0.0;
  RelevanceModel model;

  void validate() const;
};

struct SimulationReport {
  std::string policy;
  // Positives found per run, the seed point excluded.
  std::vector<std::size_t> per_run_utility;
  double mean = 0.0;
  double ci95 = 0.0;  // Student-t half-width on runs - 1 degrees of freedom
};

// Each run seeds D with one uniformly drawn positive, then lets the policy
// query `iterations` points, revealing each label (q refit every step).
// Throws ConfigError without ground truth or without a positive point.
SimulationReport run_simulation(const Dataset& ds, const SimulationConfig& cfg);

// Same per-run seed points for every policy (cfg.policy is ignored).
std::vector<SimulationReport> run_benchmark(const Dataset& ds, std::span<const PolicySpec> policies,
                                            const SimulationConfig& cfg);

// policy,run,utility
void write_runs_csv(std::ostream& out, std::span<const SimulationReport> reports);
// policy,mean,ci95
void write_summary_csv(std::ostream& out, std::span<const SimulationReport> reports);

struct CrossValidationResult {
  double auc = 0.5;
  bool auc_defined = true;  // false when the test split is single-class
  std::map<std::size_t, double> precision_at;  // k -> P@k for k in {1, 5}
  double q = 0.5;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  // Training split was single-class; the prior-only model was used.
  bool degenerate_split = false;
};

// Trains on a seeded random `train_fraction` of the points (at least one),
// fits q on it, and scores the rest with the fused posterior.
CrossValidationResult cross_validate(const Dataset& ds, double train_fraction, std::uint64_t seed,
                                     const RelevanceModel& model = {});

void write_crossval_csv(std::ostream& out, const CrossValidationResult& r);

// A scripted forager driving a real Session: bookmark a random positive,
// then repeatedly inspect the top suggestion (hover 600 ms) and bookmark it
// or flag it irrelevant according to a possibly wrong judgement.
struct ForagerConfig {
  std::size_t steps = 150;
  double flip_probability = 0.0;
  std::uint64_t seed = 0;
  SessionConfig session;
};

SessionExport simulate_forager(std::shared_ptr<const Dataset> ds, const ForagerConfig& cfg,
                               std::shared_ptr<const DistanceCache> cache = nullptr);

}  // namespace forage
