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
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "forage/dataset.hpp"
#include "forage/session.hpp"

namespace forage {

// A hover counts as an inspection once the tooltip (300 ms) has been up long
// enough to skim (200 ms more).
inline constexpr std::int64_t kValidHoverMs = 500;

struct Hover {
  PointId point_id = 0;
  std::int64_t duration_ms = 0;
  bool relevant = false;
};

// Pairs each hover_end with the latest open hover_start on the same point and
// keeps intervals of at least kValidHoverMs. Throws ProtocolError naming the
// event index of an unmatched hover_end, ConfigError if a hovered point has
// no ground truth.
std::vector<Hover> valid_hovers(std::span<const InteractionEvent> log, const Dataset& truth);

enum class TimeBase {
  kActive,       // first event to last event, at least one second
  kFixedBudget,  // the session's budget_ms
};

struct ThroughputMetrics {
  double hovers_per_min = 0.0;
  double relevant_hovers_per_min = 0.0;
  double hover_purity = 0.0;
  double bookmarks_per_min = 0.0;
  double relevant_bookmarks_per_min = 0.0;
  double bookmark_purity = 0.0;
  double active_minutes = 0.0;
  // false when there was nothing to take a proportion of (purity reported 0)
  bool hover_purity_defined = true;
  bool bookmark_purity_defined = true;
  std::size_t valid_hover_count = 0;
  std::size_t net_bookmark_count = 0;
};

// Throws UndefinedError on an empty session.
ThroughputMetrics throughput_metrics(const SessionExport& session, const Dataset& truth,
                                     TimeBase base = TimeBase::kActive);

struct StatTest {
  double t = 0.0;   // (mean_b - mean_a) / Welch standard error
  double df = 0.0;  // Welch-Satterthwaite
  double p = 1.0;   // two-sided
  double d = 0.0;   // Cohen's d, (mean_b - mean_a) / pooled sd
  double mean_a = 0.0;
  double mean_b = 0.0;
  double ci95_a = 0.0;  // half-widths
  double ci95_b = 0.0;
};

// Welch's unequal-variance two-sample t-test. Throws RangeError if a group
// has fewer than two values.
StatTest welch_t_test(std::span<const double> group_a, std::span<const double> group_b);

// Share of truth=1 points among every point ever suggested. Throws
// UndefinedError for control sessions or when nothing was suggested.
double suggestion_purity(const SessionExport& session, const Dataset& truth);

struct DiscoveryPoint {
  std::size_t minute = 0;
  std::size_t keywords = 0;
};

// Distinct lexicon phrases found in the texts bookmarked up to each whole
// minute, from minute 0 through the minute of the last event.
std::vector<DiscoveryPoint> keyword_discovery_curve(const SessionExport& session, const Dataset& ds,
                                                    const KeywordLexicon& lexicon);

struct SessionMetricsRow {
  std::string session_id;
  std::string group;
  ThroughputMetrics metrics;
};

// session_id,group,<six metrics>,active_minutes
void write_metrics_csv(std::ostream& out, std::span<const SessionMetricsRow> rows);

struct MetricComparison {
  std::string metric;
  StatTest test;
};

// Welch test of every metric between two groups (a = first, b = second).
std::vector<MetricComparison> compare_groups(std::span<const SessionMetricsRow> rows,
                                             const std::string& group_a, const std::string& group_b);

// metric,mean_a,ci95_a,mean_b,ci95_b,p,t,d
void write_comparison_csv(std::ostream& out, std::span<const MetricComparison> rows);

}  // namespace forage
