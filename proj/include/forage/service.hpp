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
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "forage/analytics.hpp"
#include "forage/dataset.hpp"
#include "forage/embedding.hpp"
#include "forage/session.hpp"

namespace httplib {
class Server;
}

namespace forage {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path data_dir = "forage-data";
  bool persist = true;
  PolicySpec default_policy = PolicySpec::one_step();
  std::size_t default_batch_size = 10;
  std::int64_t default_budget_ms = 600'000;
  RelevanceModel model;
  // Term vectors for uploaded datasets; hash embeddings when null.
  std::shared_ptr<const TermVectors> vectors;

  void validate() const;
};

struct SessionRequest {
  std::string dataset_id;
  std::optional<std::string> session_id;  // client-chosen, makes creation retry-safe
  std::optional<PolicySpec> policy;
  std::optional<std::size_t> batch_size;
  std::optional<std::int64_t> budget_ms;
  bool strict_refresh = false;
};

struct EventBatchResult {
  std::size_t accepted = 0;    // applied now or already present by event id
  std::size_t duplicates = 0;  // of which already present
  std::vector<ScoredPoint> suggestions;
};

struct SessionMetrics {
  std::size_t utility = 0;
  std::size_t events = 0;
  double q = 0.5;
  bool ended = false;
  std::vector<PointId> bookmarks;  // ascending
  std::optional<ThroughputMetrics> throughput;  // needs ground truth
  std::optional<double> suggestion_purity;
};

// Datasets and sessions behind the HTTP API, usable without a socket.
// Sessions serialize their own writes; reads of suggestions and metrics use
// the snapshot committed by the last event batch.
class SessionStore {
 public:
  explicit SessionStore(ServiceConfig cfg);

  // Content-addressed: the same upload yields the same id.
  std::string add_dataset(const std::string& body, DataFormat format);
  std::shared_ptr<const Dataset> dataset(const std::string& dataset_id) const;
  std::vector<std::string> dataset_ids() const;

  std::string create_session(const SessionRequest& req);
  // Applies events in order; an event whose event_id is already logged is
  // skipped. On a rejected event, the earlier ones stay applied and the
  // error propagates with the count in `applied_before_error`.
  EventBatchResult post_events(const std::string& session_id, const std::vector<InteractionEvent>& events,
                               std::size_t* applied_before_error = nullptr);
  std::vector<ScoredPoint> suggestions(const std::string& session_id) const;
  SessionExport export_session(const std::string& session_id) const;
  SessionMetrics metrics(const std::string& session_id, TimeBase base = TimeBase::kActive) const;
  std::vector<std::string> session_ids() const;

  // Writes every session to disk (no-op without persistence).
  void flush();

  const ServiceConfig& config() const { return cfg_; }

 private:
  struct Snapshot {
    std::vector<ScoredPoint> suggestions;
    std::size_t utility = 0;
    std::size_t events = 0;
    double q = 0.5;
    bool ended = false;
    std::vector<PointId> bookmarks;
    SessionExport exported;
  };
  struct Entry {
    std::mutex write;
    std::unique_ptr<Session> session;
    mutable std::mutex snap_mu;
    std::shared_ptr<const Snapshot> snapshot;
    std::shared_ptr<const Snapshot> load_snapshot() const;
    void commit();
  };
  struct DatasetEntry {
    std::shared_ptr<const Dataset> ds;
    std::shared_ptr<const DistanceCache> cache;
  };

  std::shared_ptr<Entry> entry(const std::string& session_id) const;
  DatasetEntry dataset_entry(const std::string& dataset_id) const;
  DatasetEntry register_dataset(const std::string& id, const std::string& body, DataFormat format);
  void persist(const std::string& session_id, const Session& s) const;
  void recover();

  ServiceConfig cfg_;
  mutable std::shared_mutex mu_;
  std::map<std::string, DatasetEntry> datasets_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

// HTTP front end. Bodies are JSON; event batches are a JSON array or one JSON
// object per line.
class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread. Throws Error if the port cannot
  // be bound.
  void start();
  // Stops accepting requests, waits for in-flight ones, flushes sessions.
  void stop();
  // Blocks until stop() is called from elsewhere (e.g. a signal handler).
  void wait();
  int port() const { return port_; }
  SessionStore& store() { return store_; }

 private:
  void routes();

  SessionStore store_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  bool running_ = false;
};

}  // namespace forage
