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
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "forage/dataset.hpp"
#include "forage/policy.hpp"
#include "forage/posterior_index.hpp"
#include "forage/relevance.hpp"

namespace forage {

enum class EventKind {
  kHoverStart,
  kHoverEnd,
  kBookmarkAdd,
  kBookmarkRemove,
  kIrrelevantFlag,
  kSessionEnd,
};

std::string to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);
bool is_label_event(EventKind kind);

struct InteractionEvent {
  EventKind kind = EventKind::kHoverStart;
  std::optional<PointId> point_id;  // absent only for kSessionEnd
  std::int64_t at_ms = 0;           // since session start, client clock
  std::string event_id;             // optional client token for retries
};

struct SessionConfig {
  PolicySpec policy = PolicySpec::one_step();
  std::size_t batch_size = 10;
  std::int64_t budget_ms = 600'000;
  // Refresh suggestions only on bookmark_add. Points labeled by other
  // events still leave the batch, it just is not refilled.
  bool strict_refresh = false;
  RelevanceModel model;

  void validate() const;
};

// State right after one logged event.
struct EventRecord {
  InteractionEvent event;
  double q = 0.5;
  std::size_t utility = 0;
  std::vector<ScoredPoint> suggestions;
};

struct SessionHeader {
  std::string session_id;
  std::string dataset_id;
  SessionConfig config;
};

// Line-delimited session export: one header record, then one record per
// event with the model snapshot after it.
struct SessionExport {
  SessionHeader header;
  std::vector<EventRecord> records;

  void write_jsonl(std::ostream& out) const;
  static SessionExport read_jsonl(std::istream& in);
  std::vector<InteractionEvent> events() const;
};

// One human-in-the-loop foraging session over a shared dataset.
//
// Bookmarks become positive observations, irrelevant flags (allowed only on
// currently suggested points) negative ones, and removing a bookmark deletes
// the observation. After every label change q is refit and the suggestion
// batch recomputed, except before the first bookmark (cold start) and for the
// control policy. apply() has the strong guarantee: a rejected event leaves
// the session untouched and unlogged.
class Session {
 public:
  Session(std::string session_id, std::shared_ptr<const Dataset> ds, std::string dataset_id,
          SessionConfig config, std::shared_ptr<const DistanceCache> cache = nullptr);

  // Throws ProtocolError (ordering, expired budget, ended session, flag on a
  // non-suggested point, unmatched hover_end, removing a missing bookmark)
  // or NotFoundError (unknown point).
  void apply(const InteractionEvent& e);

  const std::string& id() const { return header_.session_id; }
  const SessionHeader& header() const { return header_; }
  const SessionConfig& config() const { return header_.config; }
  const Dataset& dataset() const { return *ds_; }

  const std::vector<ScoredPoint>& suggestions() const { return suggestions_; }
  const ObservationSet& observations() const { return observations_; }
  std::size_t utility() const { return observations_.utility(); }
  double q() const { return index_.model().q; }
  bool ended() const { return ended_; }
  std::span<const EventRecord> log() const { return log_; }
  bool has_event_id(const std::string& event_id) const;

  SessionExport export_log() const;

  // Rebuilds a session by applying `events` in order.
  static Session replay(const SessionHeader& header, std::shared_ptr<const Dataset> ds,
                        std::span<const InteractionEvent> events,
                        std::shared_ptr<const DistanceCache> cache = nullptr);

 private:
  void refresh_suggestions();

  SessionHeader header_;
  std::shared_ptr<const Dataset> ds_;
  PosteriorIndex index_;
  ObservationSet observations_;
  std::vector<ScoredPoint> suggestions_;
  std::vector<EventRecord> log_;
  std::map<PointId, int> open_hovers_;
  std::map<std::string, std::size_t> event_ids_;
  bool warm_ = false;  // a bookmark_add has happened
  bool ended_ = false;
  std::uint64_t label_steps_ = 0;
};

// Functional forms of the session operations.
Session create_session(std::string session_id, std::shared_ptr<const Dataset> ds,
                       std::string dataset_id, const PolicySpec& policy, std::size_t batch_size = 10,
                       std::int64_t budget_ms = 600'000);
Session apply_event(Session s, const InteractionEvent& e);
std::vector<ScoredPoint> current_suggestions(const Session& s);
std::size_t utility(const Session& s);

}  // namespace forage
