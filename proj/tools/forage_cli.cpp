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

// forage: command-line front end.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "forage/analytics.hpp"
#include "forage/csv.hpp"
#include "forage/dataset.hpp"
#include "forage/embedding.hpp"
#include "forage/error.hpp"
#include "forage/service.hpp"
#include "forage/simulator.hpp"
#include "forage/synthetic.hpp"

namespace {

using namespace forage;

constexpr int kUsageError = 2;

struct ModelFlags {
  std::size_t k = 50;
  double gamma = 1.0;
  double pi = 0.05;

  void add(CLI::App* cmd) {
    cmd->add_option("--k", k, "neighbors per attribute model")->capture_default_str();
    cmd->add_option("--gamma", gamma, "prior strength")->capture_default_str();
    cmd->add_option("--pi", pi, "prior relevance probability")->capture_default_str();
  }
  RelevanceModel model() const {
    RelevanceModel rm;
    for (auto* am : {&rm.text, &rm.location}) {
      am->k = k;
      am->gamma = gamma;
      am->pi = pi;
    }
    rm.validate();
    return rm;
  }
};

// Output stream: a file, or stdout for "-" / empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::trunc);
      if (!file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::unique_ptr<TermVectors> vectors_from(const std::string& path) {
  if (path.empty()) return std::make_unique<HashEmbedding>();
  return std::make_unique<EmbeddingTable>(EmbeddingTable::load_file(path));
}

Dataset load_input(const std::string& dataset, const std::string& embeddings, std::size_t sample,
                   std::uint64_t seed) {
  const auto vectors = vectors_from(embeddings);
  Dataset ds = load_dataset_file(dataset, vectors.get());
  if (sample > 0 && sample < ds.size()) ds = sample_points(ds, sample, seed);
  return ds;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

SessionExport read_export(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return SessionExport::read_jsonl(in);
}

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual foraging with active search: labeling, simulation, analytics, service"};
  app.require_subcommand(1);

  // label
  auto* label = app.add_subcommand("label", "apply the keyword heuristic and write a labeled CSV");
  std::string label_in, label_out, label_lex;
  label->add_option("input", label_in, "dataset (.csv or .jsonl)")->required();
  label->add_option("-o,--output", label_out, "labeled CSV (default stdout)");
  label->add_option("--lexicon", label_lex, "phrase file, one per line (default built-in)");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic clustered dataset as CSV");
  SyntheticConfig synth_cfg;
  std::string synth_out;
  synth->add_option("--n", synth_cfg.n)->capture_default_str();
  synth->add_option("--incidence", synth_cfg.incidence)->capture_default_str();
  synth->add_option("--clusters", synth_cfg.clusters)->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed)->capture_default_str();
  synth->add_option("-o,--output", synth_out, "CSV (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run policies against a fully labeled dataset");
  SimulationConfig sim;
  std::string sim_data, sim_emb, sim_policies = "random,one_step,ens:50", sim_runs_out, sim_summary_out;
  std::size_t sim_sample = 0;
  ModelFlags sim_model;
  simulate->add_option("dataset", sim_data, "labeled dataset")->required();
  simulate->add_option("--embeddings", sim_emb, "word vectors (default hash embeddings)");
  simulate->add_option("--sample", sim_sample, "use a seeded random subset of this size");
  simulate->add_option("--policies", sim_policies, "comma-separated policy specs")->capture_default_str();
  simulate->add_option("--iterations", sim.iterations)->capture_default_str();
  simulate->add_option("--runs", sim.runs)->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--flip", sim.flip_probability, "oracle label-flip probability")->capture_default_str();
  simulate->add_option("-o,--output", sim_runs_out, "per-run CSV (default stdout)");
  simulate->add_option("--summary", sim_summary_out, "per-policy mean and CI CSV");
  sim_model.add(simulate);

  // crossval
  auto* crossval = app.add_subcommand("crossval", "train on a random fraction, report AUC and P@{1,5}");
  std::string cv_data, cv_emb, cv_out;
  double cv_frac = 0.001;
  std::uint64_t cv_seed = 0;
  ModelFlags cv_model;
  crossval->add_option("dataset", cv_data, "labeled dataset")->required();
  crossval->add_option("--embeddings", cv_emb, "word vectors (default hash embeddings)");
  crossval->add_option("--train-fraction", cv_frac)->capture_default_str();
  crossval->add_option("--seed", cv_seed)->capture_default_str();
  crossval->add_option("-o,--output", cv_out, "CSV (default stdout)");
  cv_model.add(crossval);

  // serve
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  ServiceConfig svc;
  std::string svc_data = svc.data_dir.string(), svc_policy = "one_step", svc_emb;
  bool no_persist = false;
  ModelFlags svc_model;
  serve->add_option("--host", svc.host)->capture_default_str();
  serve->add_option("--port", svc.port)->capture_default_str();
  serve->add_option("--data-dir", svc_data)->capture_default_str();
  serve->add_flag("--no-persist", no_persist, "keep everything in memory");
  serve->add_option("--policy", svc_policy, "default session policy")->capture_default_str();
  serve->add_option("--batch-size", svc.default_batch_size)->capture_default_str();
  serve->add_option("--budget-ms", svc.default_budget_ms)->capture_default_str();
  serve->add_option("--embeddings", svc_emb, "word vectors (default hash embeddings)");
  svc_model.add(serve);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "throughput metrics and group comparison from session exports");
  std::string m_data, m_out, m_compare, m_time_base = "active", m_curves, m_lex;
  std::vector<std::string> m_exports;
  metrics->add_option("--dataset", m_data, "dataset with ground truth")->required();
  metrics->add_option("--export", m_exports, "GROUP=PATH to a session export (repeatable)")->required();
  metrics->add_option("-o,--output", m_out, "per-session CSV (default stdout)");
  metrics->add_option("--compare", m_compare, "Welch comparison CSV (needs exactly two groups)");
  metrics->add_option("--time-base", m_time_base, "active | fixed")->capture_default_str();
  metrics->add_option("--curves", m_curves, "keyword discovery curves CSV");
  metrics->add_option("--lexicon", m_lex, "phrase file for --curves (default built-in)");

  // export
  auto* exp = app.add_subcommand("export", "flatten a session export to CSV");
  std::string e_in, e_out, e_dir, e_session;
  exp->add_option("input", e_in, "session export (.jsonl)");
  exp->add_option("--data-dir", e_dir, "service data directory (with --session)");
  exp->add_option("--session", e_session, "session id in --data-dir");
  exp->add_option("-o,--output", e_out, "CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*label) {
      const auto lex = label_lex.empty() ? KeywordLexicon::builtin() : KeywordLexicon::load_file(label_lex);
      const auto ds = apply_label_heuristic(load_dataset_file(label_in), lex);
      Sink sink(label_out);
      write_dataset_csv(sink.out(), ds);
    } else if (*synth) {
      Sink sink(synth_out);
      write_dataset_csv(sink.out(), make_clustered_dataset(synth_cfg));
    } else if (*simulate) {
      sim.model = sim_model.model();
      const auto ds = load_input(sim_data, sim_emb, sim_sample, sim.seed);
      std::vector<PolicySpec> policies;
      for (const auto& p : split(sim_policies, ',')) policies.push_back(PolicySpec::parse(p));
      if (policies.empty()) throw ConfigError("no policies given");
      const auto reports = run_benchmark(ds, policies, sim);
      Sink runs(sim_runs_out);
      write_runs_csv(runs.out(), reports);
      if (!sim_summary_out.empty()) {
        Sink summary(sim_summary_out);
        write_summary_csv(summary.out(), reports);
      }
    } else if (*crossval) {
      const auto ds = load_input(cv_data, cv_emb, 0, cv_seed);
      const auto r = cross_validate(ds, cv_frac, cv_seed, cv_model.model());
      Sink sink(cv_out);
      write_crossval_csv(sink.out(), r);
    } else if (*serve) {
      svc.data_dir = svc_data;
      svc.persist = !no_persist;
      svc.default_policy = PolicySpec::parse(svc_policy);
      svc.model = svc_model.model();
      if (!svc_emb.empty()) {
        svc.vectors = std::make_shared<EmbeddingTable>(EmbeddingTable::load_file(svc_emb));
      }
      Service service(svc);
      service.start();
      std::cerr << "forage: listening on " << svc.host << ":" << service.port() << std::endl;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      service.stop();
      std::cerr << "forage: stopped, sessions flushed" << std::endl;
    } else if (*metrics) {
      if (m_time_base != "active" && m_time_base != "fixed") throw ConfigError("--time-base must be active or fixed");
      const auto base = m_time_base == "fixed" ? TimeBase::kFixedBudget : TimeBase::kActive;
      const auto ds = load_dataset_file(m_data);
      std::vector<SessionMetricsRow> rows;
      std::vector<std::string> groups;
      std::vector<SessionExport> exports;
      for (const auto& spec : m_exports) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--export expects GROUP=PATH, got '" + spec + "'");
        const auto group = spec.substr(0, eq);
        auto ex = read_export(spec.substr(eq + 1));
        rows.push_back({ex.header.session_id, group, throughput_metrics(ex, ds, base)});
        if (std::find(groups.begin(), groups.end(), group) == groups.end()) groups.push_back(group);
        exports.push_back(std::move(ex));
      }
      Sink sink(m_out);
      write_metrics_csv(sink.out(), rows);
      if (!m_compare.empty()) {
        if (groups.size() != 2) throw ConfigError("--compare needs exactly two groups");
        Sink cmp(m_compare);
        write_comparison_csv(cmp.out(), compare_groups(rows, groups[0], groups[1]));
      }
      if (!m_curves.empty()) {
        const auto lex = m_lex.empty() ? KeywordLexicon::builtin() : KeywordLexicon::load_file(m_lex);
        Sink curves(m_curves);
        curves.out() << "session_id,group,minute,keywords\n";
        for (std::size_t i = 0; i < exports.size(); ++i) {
          for (const auto& pt : keyword_discovery_curve(exports[i], ds, lex)) {
            curves.out() << csv::escape(rows[i].session_id) << ',' << csv::escape(rows[i].group) << ','
                         << pt.minute << ',' << pt.keywords << '\n';
          }
        }
      }
    } else if (*exp) {
      std::string path = e_in;
      if (path.empty()) {
        if (e_dir.empty() || e_session.empty()) throw ConfigError("give an export file or --data-dir with --session");
        path = (std::filesystem::path(e_dir) / "sessions" / (e_session + ".jsonl")).string();
      }
      const auto ex = read_export(path);
      Sink sink(e_out);
      auto& out = sink.out();
      out << "session_id,index,kind,point_id,at_ms,event_id,q,utility,suggestions\n";
      for (std::size_t i = 0; i < ex.records.size(); ++i) {
        const auto& r = ex.records[i];
        std::string ids;
        for (const auto& s : r.suggestions) ids += (ids.empty() ? "" : " ") + std::to_string(s.id);
        out << csv::escape(ex.header.session_id) << ',' << i << ',' << to_string(r.event.kind) << ','
            << (r.event.point_id ? std::to_string(*r.event.point_id) : std::string()) << ',' << r.event.at_ms
            << ',' << csv::escape(r.event.event_id) << ',' << csv::format_double(r.q) << ',' << r.utility << ','
            << csv::escape(ids) << '\n';
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "forage: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "forage: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
