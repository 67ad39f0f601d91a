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

#include "forage/session.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "forage/error.hpp"

namespace forage {

using nlohmann::json;

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kHoverStart: return "hover_start";
    case EventKind::kHoverEnd: return "hover_end";
    case EventKind::kBookmarkAdd: return "bookmark_add";
    case EventKind::kBookmarkRemove: return "bookmark_remove";
    case EventKind::kIrrelevantFlag: return "irrelevant_flag";
    case EventKind::kSessionEnd: return "session_end";
  }
  return "session_end";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "hover_start") return EventKind::kHoverStart;
  if (s == "hover_end") return EventKind::kHoverEnd;
  if (s == "bookmark_add") return EventKind::kBookmarkAdd;
  if (s == "bookmark_remove") return EventKind::kBookmarkRemove;
  if (s == "irrelevant_flag") return EventKind::kIrrelevantFlag;
  if (s == "session_end") return EventKind::kSessionEnd;
  throw ValidationError("unknown event kind '" + s + "'");
}

bool is_label_event(EventKind kind) {
  return kind == EventKind::kBookmarkAdd || kind == EventKind::kBookmarkRemove ||
         kind == EventKind::kIrrelevantFlag;
}

void SessionConfig::validate() const {
  policy.validate();
  model.validate();
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (budget_ms <= 0) throw ConfigError("budget_ms must be > 0");
}

Session::Session(std::string session_id, std::shared_ptr<const Dataset> ds, std::string dataset_id,
                 SessionConfig config, std::shared_ptr<const DistanceCache> cache)
    : header_{std::move(session_id), std::move(dataset_id), config},
      ds_(ds ? std::move(ds) : throw NotFoundError("session needs a dataset")),
      index_(*ds_, config.model, std::move(cache)) {
  header_.config.validate();
}

bool Session::has_event_id(const std::string& event_id) const {
  return !event_id.empty() && event_ids_.count(event_id) != 0;
}

void Session::apply(const InteractionEvent& e) {
  const std::string kind = to_string(e.kind);
  if (ended_) throw ProtocolError("session " + id() + " has ended");
  if (!log_.empty() && e.at_ms < log_.back().event.at_ms) {
    throw ProtocolError(kind + " at " + std::to_string(e.at_ms) + " ms precedes the previous event at " +
                        std::to_string(log_.back().event.at_ms) + " ms");
  }
  if (e.at_ms < 0) throw ProtocolError("negative timestamp");
  if (has_event_id(e.event_id)) throw ProtocolError("duplicate event id '" + e.event_id + "'");

  std::size_t idx = 0;
  if (e.kind != EventKind::kSessionEnd) {
    if (!e.point_id) throw ProtocolError(kind + " needs a point_id");
    idx = ds_->index_of(*e.point_id);  // NotFoundError
  }
  if (is_label_event(e.kind) && e.at_ms > header_.config.budget_ms) {
    throw ProtocolError("session time budget of " + std::to_string(header_.config.budget_ms) +
                        " ms is exhausted");
  }

  const PointId pid = e.point_id.value_or(0);
  const Observation* existing = e.point_id ? observations_.find(pid) : nullptr;
  switch (e.kind) {
    case EventKind::kHoverEnd:
      if (open_hovers_.find(pid) == open_hovers_.end()) {
        throw ProtocolError("hover_end on point " + std::to_string(pid) + " without an open hover_start");
      }
      break;
    case EventKind::kBookmarkRemove:
      if (existing == nullptr || existing->label != 1) {
        throw ProtocolError("point " + std::to_string(pid) + " is not bookmarked");
      }
      break;
    case EventKind::kIrrelevantFlag: {
      const bool suggested = std::any_of(suggestions_.begin(), suggestions_.end(),
                                         [&](const ScoredPoint& s) { return s.id == pid; });
      if (!suggested) {
        throw ProtocolError("irrelevant_flag is only valid on a suggested point; " + std::to_string(pid) +
                            " is not suggested");
      }
      break;
    }
    default:
      break;
  }

  // validated; mutate
  bool labels_changed = false;
  switch (e.kind) {
    case EventKind::kHoverStart:
      ++open_hovers_[pid];
      break;
    case EventKind::kHoverEnd:
      if (--open_hovers_[pid] == 0) open_hovers_.erase(pid);
      break;
    case EventKind::kBookmarkAdd:
    case EventKind::kIrrelevantFlag: {
      const int label = e.kind == EventKind::kBookmarkAdd ? 1 : 0;
      const auto source = label == 1 ? LabelSource::kBookmark : LabelSource::kIrrelevantFlag;
      const bool relabel = existing != nullptr && existing->label != label;
      const bool fresh = existing == nullptr;
      observations_.upsert({pid, label, source, e.at_ms});
      if (fresh) {
        index_.observe(idx, label);
      } else if (relabel) {
        index_.rebuild(observations_);
      }
      labels_changed = true;
      if (label == 1) warm_ = true;
      break;
    }
    case EventKind::kBookmarkRemove:
      observations_.erase(pid);
      index_.rebuild(observations_);
      labels_changed = true;
      break;
    case EventKind::kSessionEnd:
      ended_ = true;
      break;
  }

  if (labels_changed) {
    index_.refit();
    ++label_steps_;
    const bool refresh = !header_.config.strict_refresh || e.kind == EventKind::kBookmarkAdd;
    if (refresh) {
      refresh_suggestions();
    } else {
      std::erase_if(suggestions_, [&](const ScoredPoint& s) { return observations_.contains(s.id); });
    }
  }
  if (!e.event_id.empty()) event_ids_.emplace(e.event_id, log_.size());
  log_.push_back({e, q(), utility(), suggestions_});
}

void Session::refresh_suggestions() {
  if (!warm_ || header_.config.policy.kind == PolicyKind::kNone) {
    suggestions_.clear();
    return;
  }
  suggestions_ = select_batch(index_, header_.config.policy, header_.config.batch_size, label_steps_);
}

SessionExport Session::export_log() const { return {header_, log_}; }

Session Session::replay(const SessionHeader& header, std::shared_ptr<const Dataset> ds,
                        std::span<const InteractionEvent> events,
                        std::shared_ptr<const DistanceCache> cache) {
  Session s(header.session_id, std::move(ds), header.dataset_id, header.config, std::move(cache));
  for (const auto& e : events) s.apply(e);
  return s;
}

// ---- export ------------------------------------------------------------------

namespace {

json model_json(const RelevanceModel& rm) {
  auto am = [](const AttributeModel& m) { return json{{"k", m.k}, {"gamma", m.gamma}, {"pi", m.pi}}; };
  return json{{"text", am(rm.text)}, {"location", am(rm.location)}, {"q", rm.q}};
}

RelevanceModel model_from_json(const json& j) {
  RelevanceModel rm;
  auto am = [](const json& m, AttributeModel& out) {
    out.k = m.at("k").get<std::size_t>();
    out.gamma = m.at("gamma").get<double>();
    out.pi = m.at("pi").get<double>();
  };
  am(j.at("text"), rm.text);
  am(j.at("location"), rm.location);
  rm.q = j.value("q", 0.5);
  return rm;
}

}  // namespace

void SessionExport::write_jsonl(std::ostream& out) const {
  const auto& c = header.config;
  json h = {{"type", "session"},
            {"session_id", header.session_id},
            {"dataset_id", header.dataset_id},
            {"policy", c.policy.to_string()},
            {"policy_seed", c.policy.seed},
            {"candidate_cap", c.policy.candidate_cap},
            {"batch_size", c.batch_size},
            {"budget_ms", c.budget_ms},
            {"strict_refresh", c.strict_refresh},
            {"model", model_json(c.model)}};
  out << h.dump() << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    json sug = json::array();
    for (const auto& s : r.suggestions) sug.push_back({{"point_id", s.id}, {"score", s.score}});
    json j = {{"type", "event"},
              {"index", i},
              {"kind", to_string(r.event.kind)},
              {"at", r.event.at_ms},
              {"q", r.q},
              {"utility", r.utility},
              {"suggestions", std::move(sug)}};
    if (r.event.point_id) j["point_id"] = *r.event.point_id;
    if (!r.event.event_id.empty()) j["event_id"] = r.event.event_id;
    out << j.dump() << '\n';
  }
}

SessionExport SessionExport::read_jsonl(std::istream& in) {
  SessionExport ex;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, e.what());
    }
    try {
      const auto type = j.at("type").get<std::string>();
      if (type == "session") {
        auto& c = ex.header.config;
        ex.header.session_id = j.at("session_id").get<std::string>();
        ex.header.dataset_id = j.value("dataset_id", std::string());
        c.policy = PolicySpec::parse(j.at("policy").get<std::string>());
        c.policy.seed = j.value("policy_seed", std::uint64_t{0});
        c.policy.candidate_cap = j.value("candidate_cap", std::size_t{500});
        c.batch_size = j.value("batch_size", std::size_t{10});
        c.budget_ms = j.value("budget_ms", std::int64_t{600'000});
        c.strict_refresh = j.value("strict_refresh", false);
        if (j.contains("model")) c.model = model_from_json(j["model"]);
        have_header = true;
      } else if (type == "event") {
        if (!have_header) throw ParseError(lineno, "event before session header");
        EventRecord r;
        r.event.kind = event_kind_from_string(j.at("kind").get<std::string>());
        if (j.contains("point_id") && !j["point_id"].is_null()) r.event.point_id = j["point_id"].get<PointId>();
        r.event.at_ms = j.at("at").get<std::int64_t>();
        r.event.event_id = j.value("event_id", std::string());
        r.q = j.value("q", 0.5);
        r.utility = j.value("utility", std::size_t{0});
        for (const auto& s : j.value("suggestions", json::array())) {
          r.suggestions.push_back({s.at("point_id").get<PointId>(), s.value("score", 0.0)});
        }
        ex.records.push_back(std::move(r));
      } else {
        throw ParseError(lineno, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!have_header) throw ParseError(lineno, "missing session header");
  return ex;
}

std::vector<InteractionEvent> SessionExport::events() const {
  std::vector<InteractionEvent> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.event);
  return out;
}

// ---- functional API ------------------------------------------------------------

Session create_session(std::string session_id, std::shared_ptr<const Dataset> ds,
                       std::string dataset_id, const PolicySpec& policy, std::size_t batch_size,
                       std::int64_t budget_ms) {
  SessionConfig cfg;
  cfg.policy = policy;
  cfg.batch_size = batch_size;
  cfg.budget_ms = budget_ms;
  return Session(std::move(session_id), std::move(ds), std::move(dataset_id), cfg);
}

Session apply_event(Session s, const InteractionEvent& e) {
  s.apply(e);
  return s;
}

std::vector<ScoredPoint> current_suggestions(const Session& s) { return s.suggestions(); }

std::size_t utility(const Session& s) { return s.utility(); }

}  // namespace forage
