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

#include "forage/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "forage/csv.hpp"
#include "forage/error.hpp"
#include "forage/stats.hpp"

namespace forage {

namespace {

bool is_relevant(const Dataset& truth, PointId id) {
  const auto& p = truth.at(id);
  if (!p.truth) throw ConfigError("point " + std::to_string(id) + " has no ground truth");
  return *p.truth;
}

constexpr double kMsPerMinute = 60'000.0;

}  // namespace

std::vector<Hover> valid_hovers(std::span<const InteractionEvent> log, const Dataset& truth) {
  std::map<PointId, std::vector<std::int64_t>> open;
  std::vector<Hover> out;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& e = log[i];
    if (e.kind == EventKind::kHoverStart) {
      open[*e.point_id].push_back(e.at_ms);
    } else if (e.kind == EventKind::kHoverEnd) {
      auto it = e.point_id ? open.find(*e.point_id) : open.end();
      if (it == open.end() || it->second.empty()) {
        throw ProtocolError("unmatched hover_end at event index " + std::to_string(i));
      }
      const auto duration = e.at_ms - it->second.back();
      it->second.pop_back();
      if (duration >= kValidHoverMs) out.push_back({*e.point_id, duration, is_relevant(truth, *e.point_id)});
    }
  }
  return out;
}

ThroughputMetrics throughput_metrics(const SessionExport& session, const Dataset& truth, TimeBase base) {
  if (session.records.empty()) throw UndefinedError("session " + session.header.session_id + " is empty");
  const auto events = session.events();

  ThroughputMetrics m;
  if (base == TimeBase::kFixedBudget) {
    m.active_minutes = static_cast<double>(session.header.config.budget_ms) / kMsPerMinute;
  } else {
    const auto span_ms = std::max<std::int64_t>(events.back().at_ms - events.front().at_ms, 1000);
    m.active_minutes = static_cast<double>(span_ms) / kMsPerMinute;
  }

  const auto hovers = valid_hovers(events, truth);
  const auto relevant_hovers =
      static_cast<double>(std::count_if(hovers.begin(), hovers.end(), [](const Hover& h) { return h.relevant; }));
  m.valid_hover_count = hovers.size();
  m.hovers_per_min = static_cast<double>(hovers.size()) / m.active_minutes;
  m.relevant_hovers_per_min = relevant_hovers / m.active_minutes;
  m.hover_purity_defined = !hovers.empty();
  m.hover_purity = hovers.empty() ? 0.0 : relevant_hovers / static_cast<double>(hovers.size());

  std::set<PointId> bookmarked;
  for (const auto& e : events) {
    if (e.kind == EventKind::kBookmarkAdd) bookmarked.insert(*e.point_id);
    else if (e.kind == EventKind::kBookmarkRemove) bookmarked.erase(*e.point_id);
  }
  double relevant_bookmarks = 0.0;
  for (auto id : bookmarked) relevant_bookmarks += is_relevant(truth, id) ? 1.0 : 0.0;
  m.net_bookmark_count = bookmarked.size();
  m.bookmarks_per_min = static_cast<double>(bookmarked.size()) / m.active_minutes;
  m.relevant_bookmarks_per_min = relevant_bookmarks / m.active_minutes;
  m.bookmark_purity_defined = !bookmarked.empty();
  m.bookmark_purity = bookmarked.empty() ? 0.0 : relevant_bookmarks / static_cast<double>(bookmarked.size());
  return m;
}

StatTest welch_t_test(std::span<const double> group_a, std::span<const double> group_b) {
  if (group_a.size() < 2 || group_b.size() < 2) throw RangeError("each group needs at least two values");
  const double na = static_cast<double>(group_a.size());
  const double nb = static_cast<double>(group_b.size());
  StatTest r;
  r.mean_a = stats::mean(group_a);
  r.mean_b = stats::mean(group_b);
  const double va = stats::variance(group_a);
  const double vb = stats::variance(group_b);
  if (!std::isfinite(va) || !std::isfinite(vb)) throw RangeError("groups must have finite variance");
  r.ci95_a = stats::ci_half_width(group_a);
  r.ci95_b = stats::ci_half_width(group_b);

  const double diff = r.mean_b - r.mean_a;
  const double se2 = va / na + vb / nb;
  const double pooled = std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
  if (se2 == 0.0) {
    // both groups constant
    r.df = na + nb - 2.0;
    if (diff == 0.0) return r;
    r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.d = r.t;
    r.p = 0.0;
    return r;
  }
  r.t = diff / std::sqrt(se2);
  r.df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  r.p = stats::t_two_sided_p(r.t, r.df);
  r.d = diff / pooled;
  return r;
}

double suggestion_purity(const SessionExport& session, const Dataset& truth) {
  if (session.header.config.policy.kind == PolicyKind::kNone) {
    throw UndefinedError("suggestion purity does not apply to a control session");
  }
  std::set<PointId> suggested;
  for (const auto& r : session.records) {
    for (const auto& s : r.suggestions) suggested.insert(s.id);
  }
  if (suggested.empty()) throw UndefinedError("no suggestions were ever shown");
  double relevant = 0.0;
  for (auto id : suggested) relevant += is_relevant(truth, id) ? 1.0 : 0.0;
  return relevant / static_cast<double>(suggested.size());
}

std::vector<DiscoveryPoint> keyword_discovery_curve(const SessionExport& session, const Dataset& ds,
                                                    const KeywordLexicon& lexicon) {
  std::vector<DiscoveryPoint> curve;
  if (session.records.empty()) return curve;
  const auto last = session.records.back().event.at_ms;
  const auto minutes = static_cast<std::size_t>(last / 60'000);
  std::set<std::size_t> found;
  std::size_t r = 0;
  for (std::size_t minute = 0; minute <= minutes; ++minute) {
    const auto cutoff = static_cast<std::int64_t>(minute) * 60'000;
    for (; r < session.records.size() && session.records[r].event.at_ms <= cutoff; ++r) {
      const auto& e = session.records[r].event;
      if (e.kind != EventKind::kBookmarkAdd) continue;
      for (auto k : lexicon.matches(ds.at(*e.point_id).tokens)) found.insert(k);
    }
    curve.push_back({minute, found.size()});
  }
  // bookmarks after the last whole minute
  for (; r < session.records.size(); ++r) {
    const auto& e = session.records[r].event;
    if (e.kind != EventKind::kBookmarkAdd) continue;
    for (auto k : lexicon.matches(ds.at(*e.point_id).tokens)) found.insert(k);
  }
  if (found.size() != curve.back().keywords) curve.push_back({minutes + 1, found.size()});
  return curve;
}

namespace {

struct MetricField {
  const char* name;
  double ThroughputMetrics::*field;
};

constexpr MetricField kMetricFields[] = {
    {"hovers_per_min", &ThroughputMetrics::hovers_per_min},
    {"relevant_hovers_per_min", &ThroughputMetrics::relevant_hovers_per_min},
    {"hover_purity", &ThroughputMetrics::hover_purity},
    {"bookmarks_per_min", &ThroughputMetrics::bookmarks_per_min},
    {"relevant_bookmarks_per_min", &ThroughputMetrics::relevant_bookmarks_per_min},
    {"bookmark_purity", &ThroughputMetrics::bookmark_purity},
};

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const SessionMetricsRow> rows) {
  out << "session_id,group";
  for (const auto& f : kMetricFields) out << ',' << f.name;
  out << ",active_minutes\n";
  for (const auto& r : rows) {
    out << csv::escape(r.session_id) << ',' << csv::escape(r.group);
    for (const auto& f : kMetricFields) out << ',' << csv::format_double(r.metrics.*f.field);
    out << ',' << csv::format_double(r.metrics.active_minutes) << '\n';
  }
}

std::vector<MetricComparison> compare_groups(std::span<const SessionMetricsRow> rows,
                                             const std::string& group_a, const std::string& group_b) {
  std::vector<MetricComparison> out;
  for (const auto& f : kMetricFields) {
    std::vector<double> a, b;
    for (const auto& r : rows) {
      if (r.group == group_a) a.push_back(r.metrics.*f.field);
      else if (r.group == group_b) b.push_back(r.metrics.*f.field);
    }
    out.push_back({f.name, welch_t_test(a, b)});
  }
  return out;
}

void write_comparison_csv(std::ostream& out, std::span<const MetricComparison> rows) {
  out << "metric,mean_a,ci95_a,mean_b,ci95_b,p,t,d\n";
  for (const auto& r : rows) {
    const auto& t = r.test;
    out << r.metric << ',' << csv::format_double(t.mean_a) << ',' << csv::format_double(t.ci95_a) << ','
        << csv::format_double(t.mean_b) << ',' << csv::format_double(t.ci95_b) << ','
        << csv::format_double(t.p) << ',' << csv::format_double(t.t) << ',' << csv::format_double(t.d)
        << '\n';
  }
}

}  // namespace forage
