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

#include "forage/service.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "forage/error.hpp"
#include "forage/posterior_index.hpp"

namespace forage {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool valid_token(const std::string& s) {
  if (s.empty() || s.size() > 64) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_';
  });
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string content_id(const std::string& body, DataFormat format) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  mix(format == DataFormat::kCsv ? 'c' : 'j');
  for (unsigned char c : body) mix(c);
  return "d" + hex64(h);
}

const char* extension(DataFormat f) { return f == DataFormat::kCsv ? ".csv" : ".jsonl"; }

void write_atomically(const fs::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool needs_cache(const PolicySpec& p) {
  return p.kind == PolicyKind::kEns || (p.kind == PolicyKind::kEllStep && p.ell == 2);
}

bool same_config(const SessionConfig& a, const SessionConfig& b) {
  return a.policy.to_string() == b.policy.to_string() && a.policy.seed == b.policy.seed &&
         a.batch_size == b.batch_size && a.budget_ms == b.budget_ms && a.strict_refresh == b.strict_refresh;
}

}  // namespace

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw ConfigError("port must lie in [0, 65535]");
  if (default_batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (default_budget_ms <= 0) throw ConfigError("budget_ms must be > 0");
  if (persist && data_dir.empty()) throw ConfigError("persistence needs a data directory");
  default_policy.validate();
  model.validate();
}

// ---- store -----------------------------------------------------------------

std::shared_ptr<const SessionStore::Snapshot> SessionStore::Entry::load_snapshot() const {
  std::lock_guard lock(snap_mu);
  return snapshot;
}

void SessionStore::Entry::commit() {
  auto s = std::make_shared<Snapshot>();
  s->suggestions = session->suggestions();
  s->utility = session->utility();
  s->events = session->log().size();
  s->q = session->q();
  s->ended = session->ended();
  s->exported = session->export_log();
  for (const auto& o : session->observations().entries()) {
    if (o.label == 1) s->bookmarks.push_back(o.point_id);
  }
  std::sort(s->bookmarks.begin(), s->bookmarks.end());
  std::lock_guard lock(snap_mu);
  snapshot = std::move(s);
}

SessionStore::SessionStore(ServiceConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (!cfg_.vectors) cfg_.vectors = std::make_shared<HashEmbedding>();
  if (cfg_.persist) {
    fs::create_directories(cfg_.data_dir / "datasets");
    fs::create_directories(cfg_.data_dir / "sessions");
    recover();
  }
}

SessionStore::DatasetEntry SessionStore::register_dataset(const std::string& id, const std::string& body,
                                                          DataFormat format) {
  std::istringstream in(body);
  DatasetEntry e;
  e.ds = std::make_shared<const Dataset>(load_dataset(in, format, cfg_.vectors.get()));
  datasets_[id] = e;
  return e;
}

std::string SessionStore::add_dataset(const std::string& body, DataFormat format) {
  const auto id = content_id(body, format);
  std::unique_lock lock(mu_);
  if (datasets_.count(id)) return id;
  register_dataset(id, body, format);
  if (cfg_.persist) write_atomically(cfg_.data_dir / "datasets" / (id + extension(format)), body);
  return id;
}

SessionStore::DatasetEntry SessionStore::dataset_entry(const std::string& dataset_id) const {
  std::shared_lock lock(mu_);
  auto it = datasets_.find(dataset_id);
  if (it == datasets_.end()) throw NotFoundError("unknown dataset '" + dataset_id + "'");
  return it->second;
}

std::shared_ptr<const Dataset> SessionStore::dataset(const std::string& dataset_id) const {
  return dataset_entry(dataset_id).ds;
}

std::vector<std::string> SessionStore::dataset_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : datasets_) out.push_back(id);
  return out;
}

std::vector<std::string> SessionStore::session_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

std::string SessionStore::create_session(const SessionRequest& req) {
  SessionConfig sc;
  sc.policy = req.policy.value_or(cfg_.default_policy);
  sc.batch_size = req.batch_size.value_or(cfg_.default_batch_size);
  sc.budget_ms = req.budget_ms.value_or(cfg_.default_budget_ms);
  sc.strict_refresh = req.strict_refresh;
  sc.model = cfg_.model;
  sc.validate();

  if (req.session_id && !valid_token(*req.session_id)) {
    throw ValidationError("session id must be 1-64 characters of [A-Za-z0-9_-]");
  }
  auto ds_entry = dataset_entry(req.dataset_id);

  std::unique_lock lock(mu_);
  std::string id;
  if (req.session_id) {
    id = *req.session_id;
    if (auto it = sessions_.find(id); it != sessions_.end()) {
      const auto& h = it->second->session->header();
      if (h.dataset_id == req.dataset_id && same_config(h.config, sc)) return id;
      throw ProtocolError("session '" + id + "' already exists with different settings");
    }
  } else {
    std::random_device rd;
    do {
      id = "s" + hex64((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
    } while (sessions_.count(id));
  }

  auto& dse = datasets_[req.dataset_id];
  if (needs_cache(sc.policy) && !dse.cache && dse.ds->size() <= DistanceCache::kDefaultMaxPoints) {
    dse.cache = std::make_shared<const DistanceCache>(*dse.ds, sc.model);
  }
  auto e = std::make_shared<Entry>();
  e->session = std::make_unique<Session>(id, dse.ds, req.dataset_id, sc, dse.cache);
  e->commit();
  if (cfg_.persist) persist(id, *e->session);
  sessions_.emplace(id, std::move(e));
  return id;
}

std::shared_ptr<SessionStore::Entry> SessionStore::entry(const std::string& session_id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return it->second;
}

EventBatchResult SessionStore::post_events(const std::string& session_id,
                                           const std::vector<InteractionEvent>& events,
                                           std::size_t* applied_before_error) {
  auto e = entry(session_id);
  std::lock_guard lock(e->write);
  EventBatchResult r;
  std::size_t applied = 0;
  try {
    for (const auto& ev : events) {
      if (e->session->has_event_id(ev.event_id)) {
        ++r.duplicates;
        ++r.accepted;
        continue;
      }
      e->session->apply(ev);
      ++applied;
      ++r.accepted;
    }
  } catch (...) {
    if (applied_before_error) *applied_before_error = r.accepted;
    if (applied > 0) {
      e->commit();
      if (cfg_.persist) persist(session_id, *e->session);
    }
    throw;
  }
  if (applied > 0) {
    e->commit();
    if (cfg_.persist) persist(session_id, *e->session);
  }
  r.suggestions = e->load_snapshot()->suggestions;
  return r;
}

std::vector<ScoredPoint> SessionStore::suggestions(const std::string& session_id) const {
  return entry(session_id)->load_snapshot()->suggestions;
}

SessionExport SessionStore::export_session(const std::string& session_id) const {
  return entry(session_id)->load_snapshot()->exported;
}

SessionMetrics SessionStore::metrics(const std::string& session_id, TimeBase base) const {
  auto e = entry(session_id);
  const auto snap = e->load_snapshot();
  const auto& ds = e->session->dataset();
  SessionMetrics m;
  m.utility = snap->utility;
  m.events = snap->events;
  m.q = snap->q;
  m.ended = snap->ended;
  m.bookmarks = snap->bookmarks;
  try {
    m.throughput = throughput_metrics(snap->exported, ds, base);
  } catch (const UndefinedError&) {
  } catch (const ConfigError&) {
  }
  try {
    m.suggestion_purity = suggestion_purity(snap->exported, ds);
  } catch (const UndefinedError&) {
  } catch (const ConfigError&) {
  }
  return m;
}

void SessionStore::persist(const std::string& session_id, const Session& s) const {
  std::ostringstream os;
  s.export_log().write_jsonl(os);
  write_atomically(cfg_.data_dir / "sessions" / (session_id + ".jsonl"), os.str());
}

void SessionStore::flush() {
  if (!cfg_.persist) return;
  std::shared_lock lock(mu_);
  for (const auto& [id, e] : sessions_) {
    std::lock_guard w(e->write);
    persist(id, *e->session);
  }
}

void SessionStore::recover() {
  for (const auto& f : fs::directory_iterator(cfg_.data_dir / "datasets")) {
    const auto ext = f.path().extension().string();
    if (ext != ".csv" && ext != ".jsonl") continue;
    const auto format = ext == ".csv" ? DataFormat::kCsv : DataFormat::kJsonl;
    try {
      register_dataset(f.path().stem().string(), read_file(f.path()), format);
    } catch (const Error& err) {
      throw Error("cannot recover dataset " + f.path().string() + ": " + err.what());
    }
  }
  for (const auto& f : fs::directory_iterator(cfg_.data_dir / "sessions")) {
    if (f.path().extension() != ".jsonl") continue;
    try {
      std::ifstream in(f.path());
      const auto ex = SessionExport::read_jsonl(in);
      auto& dse = datasets_.at(ex.header.dataset_id);
      if (needs_cache(ex.header.config.policy) && !dse.cache &&
          dse.ds->size() <= DistanceCache::kDefaultMaxPoints) {
        dse.cache = std::make_shared<const DistanceCache>(*dse.ds, ex.header.config.model);
      }
      const auto events = ex.events();
      auto e = std::make_shared<Entry>();
      e->session = std::make_unique<Session>(Session::replay(ex.header, dse.ds, events, dse.cache));
      e->commit();
      sessions_.emplace(ex.header.session_id, std::move(e));
    } catch (const std::out_of_range&) {
      throw Error("cannot recover session " + f.path().string() + ": its dataset is missing");
    } catch (const Error& err) {
      throw Error("cannot recover session " + f.path().string() + ": " + err.what());
    }
  }
}

// ---- HTTP ------------------------------------------------------------------

namespace {

json suggestions_json(const std::vector<ScoredPoint>& s) {
  json arr = json::array();
  for (const auto& p : s) arr.push_back({{"point_id", p.id}, {"score", p.score}});
  return arr;
}

InteractionEvent event_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("event must be an object");
  InteractionEvent e;
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("point_id") && !j["point_id"].is_null()) e.point_id = j["point_id"].get<PointId>();
  e.at_ms = j.at("at").get<std::int64_t>();
  e.event_id = j.value("event_id", std::string());
  return e;
}

std::vector<InteractionEvent> parse_events(const std::string& body) {
  std::vector<InteractionEvent> out;
  const auto first = body.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return out;
  try {
    if (body[first] == '[') {
      for (const auto& j : json::parse(body)) out.push_back(event_from_json(j));
      return out;
    }
    std::istringstream in(body);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        out.push_back(event_from_json(json::parse(line)));
      } catch (const json::exception& e) {
        throw ParseError(lineno, e.what());
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed event batch: ") + e.what());
  }
  return out;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

int status_for(std::exception_ptr ep, std::string& msg) {
  try {
    std::rethrow_exception(ep);
  } catch (const NotFoundError& e) {
    msg = e.what();
    return 404;
  } catch (const ProtocolError& e) {
    msg = e.what();
    return 409;
  } catch (const UndefinedError& e) {
    msg = e.what();
    return 422;
  } catch (const Error& e) {  // parse, validation, config, range
    msg = e.what();
    return 400;
  } catch (const json::exception& e) {
    msg = e.what();
    return 400;
  } catch (const std::exception& e) {
    msg = e.what();
    return 500;
  } catch (...) {
    msg = "unknown error";
    return 500;
  }
}

json point_json(const DataPoint& p) {
  return {{"id", p.id}, {"x", p.location.x}, {"y", p.location.y}, {"text", p.text}, {"tokens", p.tokens}};
}

DataFormat upload_format(const httplib::Request& req) {
  if (req.has_param("format")) {
    const auto f = req.get_param_value("format");
    if (f == "csv") return DataFormat::kCsv;
    if (f == "jsonl") return DataFormat::kJsonl;
    throw ValidationError("unknown dataset format '" + f + "'");
  }
  const auto type = req.get_header_value("Content-Type");
  if (type.find("json") != std::string::npos) return DataFormat::kJsonl;
  return DataFormat::kCsv;
}

}  // namespace

Service::Service(ServiceConfig cfg) : store_(std::move(cfg)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

Service::~Service() {
  try {
    stop();
  } catch (...) {
  }
}

void Service::routes() {
  auto& srv = *server_;
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg;
    const int status = status_for(ep, msg);
    reply(res, status, {{"error", msg}});
  });
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200,
          {{"status", "ok"},
           {"datasets", store_.dataset_ids().size()},
           {"sessions", store_.session_ids().size()}});
  });

  srv.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = store_.add_dataset(req.body, upload_format(req));
    reply(res, 201, {{"dataset_id", id}, {"points", store_.dataset(id)->size()}});
  });

  srv.Get("/datasets", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"datasets", store_.dataset_ids()}});
  });

  srv.Get(R"(/datasets/([^/]+)/points)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto ds = store_.dataset(req.matches[1]);
    json arr = json::array();
    for (const auto& p : ds->points()) arr.push_back({{"id", p.id}, {"x", p.location.x}, {"y", p.location.y}});
    reply(res, 200, arr);
  });

  srv.Get(R"(/datasets/([^/]+)/points/(-?\d+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto ds = store_.dataset(req.matches[1]);
    reply(res, 200, point_json(ds->at(std::stoll(req.matches[2]))));
  });

  srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    const auto j = json::parse(req.body.empty() ? std::string("{}") : req.body);
    SessionRequest sr;
    sr.dataset_id = j.at("dataset_id").get<std::string>();
    if (j.contains("session_id")) sr.session_id = j["session_id"].get<std::string>();
    if (j.contains("policy")) sr.policy = PolicySpec::parse(j["policy"].get<std::string>());
    if (j.contains("batch_size")) sr.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("budget_ms")) sr.budget_ms = j["budget_ms"].get<std::int64_t>();
    sr.strict_refresh = j.value("strict_refresh", false);
    const auto id = store_.create_session(sr);
    reply(res, 201, {{"session_id", id}});
  });

  srv.Post(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto events = parse_events(req.body);
    std::size_t accepted = 0;
    try {
      const auto r = store_.post_events(req.matches[1], events, &accepted);
      reply(res, 200,
            {{"accepted", r.accepted}, {"duplicates", r.duplicates}, {"suggestions", suggestions_json(r.suggestions)}});
    } catch (...) {
      std::string msg;
      const int status = status_for(std::current_exception(), msg);
      reply(res, status, {{"error", msg}, {"accepted", accepted}});
    }
  });

  srv.Get(R"(/sessions/([^/]+)/suggestions)", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, {{"suggestions", suggestions_json(store_.suggestions(req.matches[1]))}});
  });

  srv.Get(R"(/sessions/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
    std::ostringstream os;
    store_.export_session(req.matches[1]).write_jsonl(os);
    res.status = 200;
    res.set_content(os.str(), "application/x-ndjson");
  });

  srv.Get(R"(/sessions/([^/]+)/metrics)", [this](const httplib::Request& req, httplib::Response& res) {
    TimeBase base = TimeBase::kActive;
    if (req.has_param("time_base")) {
      const auto b = req.get_param_value("time_base");
      if (b == "fixed") base = TimeBase::kFixedBudget;
      else if (b != "active") throw ValidationError("time_base must be 'active' or 'fixed'");
    }
    const auto m = store_.metrics(req.matches[1], base);
    json j = {{"utility", m.utility}, {"events", m.events}, {"q", m.q}, {"ended", m.ended}, {"bookmarks", m.bookmarks}};
    if (m.throughput) {
      const auto& t = *m.throughput;
      j["throughput"] = {{"hovers_per_min", t.hovers_per_min},
                         {"relevant_hovers_per_min", t.relevant_hovers_per_min},
                         {"hover_purity", t.hover_purity},
                         {"hover_purity_defined", t.hover_purity_defined},
                         {"bookmarks_per_min", t.bookmarks_per_min},
                         {"relevant_bookmarks_per_min", t.relevant_bookmarks_per_min},
                         {"bookmark_purity", t.bookmark_purity},
                         {"bookmark_purity_defined", t.bookmark_purity_defined},
                         {"active_minutes", t.active_minutes}};
    } else {
      j["throughput"] = nullptr;
    }
    j["suggestion_purity"] = m.suggestion_purity ? json(*m.suggestion_purity) : json(nullptr);
    reply(res, 200, j);
  });
}

void Service::start() {
  if (running_) return;
  const auto& cfg = store_.config();
  if (cfg.port == 0) {
    port_ = server_->bind_to_any_port(cfg.host);
    if (port_ < 0) throw Error("cannot bind " + cfg.host);
  } else {
    if (!server_->bind_to_port(cfg.host, cfg.port)) {
      throw Error("cannot bind " + cfg.host + ":" + std::to_string(cfg.port) + " (port in use?)");
    }
    port_ = cfg.port;
  }
  running_ = true;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void Service::wait() {
  if (thread_.joinable()) thread_.join();
}

void Service::stop() {
  if (!running_) return;
  server_->stop();
  if (thread_.joinable()) thread_.join();
  running_ = false;
  store_.flush();
}

}  // namespace forage
