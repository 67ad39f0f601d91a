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

#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "forage/analytics.hpp"
#include "forage/dataset.hpp"
#include "forage/embedding.hpp"
#include "forage/error.hpp"
#include "forage/policy.hpp"
#include "forage/ranking_metrics.hpp"
#include "forage/relevance.hpp"
#include "forage/session.hpp"
#include "forage/simulator.hpp"
#include "forage/synthetic.hpp"

namespace py = pybind11;
using namespace forage;

namespace {

using DatasetPtr = std::shared_ptr<const Dataset>;

RelevanceModel make_model(std::size_t k, double gamma, double pi, double q) {
  RelevanceModel rm;
  for (auto* am : {&rm.text, &rm.location}) {
    am->k = k;
    am->gamma = gamma;
    am->pi = pi;
  }
  rm.q = q;
  rm.validate();
  return rm;
}

ObservationSet observations_from(const std::map<PointId, int>& labels) {
  ObservationSet d;
  for (const auto& [id, y] : labels) d.upsert({id, y, LabelSource::kOracle, 0});
  return d;
}

DatasetPtr load_text(const std::string& body, const std::string& format) {
  if (format != "csv" && format != "jsonl") throw ConfigError("format must be 'csv' or 'jsonl'");
  std::istringstream in(body);
  HashEmbedding vectors;
  return std::make_shared<const Dataset>(
      load_dataset(in, format == "csv" ? DataFormat::kCsv : DataFormat::kJsonl, &vectors));
}

py::dict point_dict(const DataPoint& p) {
  py::dict d;
  d["id"] = p.id;
  d["x"] = p.location.x;
  d["y"] = p.location.y;
  d["text"] = p.text;
  d["tokens"] = p.tokens;
  d["truth"] = p.truth ? py::cast(*p.truth) : py::none();
  return d;
}

std::vector<std::pair<PointId, double>> pairs(const std::vector<ScoredPoint>& v) {
  std::vector<std::pair<PointId, double>> out;
  out.reserve(v.size());
  for (const auto& s : v) out.emplace_back(s.id, s.score);
  return out;
}

std::vector<ScoredLabel> scored_labels(const std::vector<double>& scores, const std::vector<bool>& truth) {
  if (scores.size() != truth.size()) throw ValidationError("scores and labels differ in length");
  std::vector<ScoredLabel> out;
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({static_cast<PointId>(i), scores[i], truth[i]});
  return out;
}

py::dict metrics_dict(const ThroughputMetrics& m) {
  py::dict d;
  d["hovers_per_min"] = m.hovers_per_min;
  d["relevant_hovers_per_min"] = m.relevant_hovers_per_min;
  d["hover_purity"] = m.hover_purity;
  d["hover_purity_defined"] = m.hover_purity_defined;
  d["bookmarks_per_min"] = m.bookmarks_per_min;
  d["relevant_bookmarks_per_min"] = m.relevant_bookmarks_per_min;
  d["bookmark_purity"] = m.bookmark_purity;
  d["bookmark_purity_defined"] = m.bookmark_purity_defined;
  d["active_minutes"] = m.active_minutes;
  return d;
}

SessionExport export_from(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return SessionExport::read_jsonl(in);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "k-NN active search over text and location, sessions and analytics";

  auto base = py::register_exception<Error>(m, "ForageError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());
  py::register_exception<NotFoundError>(m, "NotFoundError", base.ptr());
  py::register_exception<UndefinedError>(m, "UndefinedError", base.ptr());
  py::register_exception<ExhaustedError>(m, "ExhaustedError", base.ptr());

  py::class_<Dataset, std::shared_ptr<Dataset>>(m, "Dataset")
      .def("__len__", &Dataset::size)
      .def_property_readonly("incidence", &Dataset::incidence)
      .def_property_readonly("ids", [](const Dataset& ds) {
        std::vector<PointId> ids;
        for (const auto& p : ds.points()) ids.push_back(p.id);
        return ids;
      })
      .def("point", [](const Dataset& ds, PointId id) { return point_dict(ds.at(id)); }, py::arg("id"))
      .def("to_csv", [](const Dataset& ds) {
        std::ostringstream os;
        write_dataset_csv(os, ds);
        return os.str();
      });

  m.def("load_dataset", [](const std::string& path) -> DatasetPtr {
        HashEmbedding vectors;
        return std::make_shared<const Dataset>(load_dataset_file(path, &vectors));
      }, py::arg("path"), "Load CSV or JSONL (by extension) with hash embeddings.");
  m.def("parse_dataset", &load_text, py::arg("body"), py::arg("format") = "csv");
  m.def("synthetic_dataset", [](std::size_t n, double incidence, std::size_t clusters, std::uint64_t seed) -> DatasetPtr {
        SyntheticConfig cfg;
        cfg.n = n;
        cfg.incidence = incidence;
        cfg.clusters = clusters;
        cfg.seed = seed;
        return std::make_shared<const Dataset>(make_clustered_dataset(cfg));
      }, py::arg("n") = 2000, py::arg("incidence") = 0.05, py::arg("clusters") = 2, py::arg("seed") = 0);
  m.def("label_dataset", [](const Dataset& ds, std::vector<std::string> phrases) -> DatasetPtr {
        const auto lex = phrases.empty() ? KeywordLexicon::builtin() : KeywordLexicon(std::move(phrases));
        return std::make_shared<const Dataset>(apply_label_heuristic(ds, lex));
      }, py::arg("dataset"), py::arg("phrases") = std::vector<std::string>{});

  m.def("posterior", [](const Dataset& ds, const std::map<PointId, int>& labels, PointId id, std::size_t k,
                        double gamma, double pi, double q) {
        const auto rm = make_model(k, gamma, pi, q);
        const auto est = fused_probability(rm, ds.at(id), observations_from(labels), ds);
        return py::make_tuple(est.probability, est.text, est.location);
      }, py::arg("dataset"), py::arg("labels"), py::arg("id"), py::arg("k") = 50, py::arg("gamma") = 1.0,
      py::arg("pi") = 0.05, py::arg("q") = 0.5,
      "(fused, text, location) posterior of one point; its own label is ignored.");
  m.def("fit_fusion_weight", [](const Dataset& ds, const std::map<PointId, int>& labels, std::size_t k,
                                double gamma, double pi) {
        const auto fit = fit_fusion_weight(make_model(k, gamma, pi, 0.5), observations_from(labels), ds);
        return py::make_tuple(fit.q, fit.log_likelihood, fit.uninformed);
      }, py::arg("dataset"), py::arg("labels"), py::arg("k") = 50, py::arg("gamma") = 1.0, py::arg("pi") = 0.05);
  m.def("rank_unlabeled", [](const Dataset& ds, const std::map<PointId, int>& labels, std::size_t k, double gamma,
                             double pi, double q) {
        return pairs(rank_unlabeled(make_model(k, gamma, pi, q), observations_from(labels), ds));
      }, py::arg("dataset"), py::arg("labels"), py::arg("k") = 50, py::arg("gamma") = 1.0, py::arg("pi") = 0.05,
      py::arg("q") = 0.5);
  m.def("select", [](const Dataset& ds, const std::map<PointId, int>& labels, const std::string& policy,
                     std::uint64_t step, double q) {
        const auto spec = PolicySpec::parse(policy);
        RelevanceModel rm;
        rm.q = q;
        const auto obs = observations_from(labels);
        switch (spec.kind) {
          case PolicyKind::kRandom:
            return select_random(ds, obs, spec.seed, step);
          case PolicyKind::kOneStep:
            return select_one_step(rm, obs, ds);
          default:
            return select_ens(rm, obs, ds, spec.kind == PolicyKind::kEllStep && spec.ell == 2
                                              ? PolicySpec::ens(2, ds.size())
                                              : spec.kind == PolicyKind::kEllStep ? PolicySpec::ens(1) : spec);
        }
      }, py::arg("dataset"), py::arg("labels"), py::arg("policy") = "one_step", py::arg("step") = 0,
      py::arg("q") = 0.5);
  m.def("ens_score", [](const Dataset& ds, const std::map<PointId, int>& labels, PointId id, int budget, double q) {
        RelevanceModel rm;
        rm.q = q;
        return ens_score(rm, observations_from(labels), ds, id, budget);
      }, py::arg("dataset"), py::arg("labels"), py::arg("id"), py::arg("budget"), py::arg("q") = 0.5);

  m.def("simulate", [](const Dataset& ds, const std::vector<std::string>& policies, std::size_t iterations,
                       std::size_t runs, std::uint64_t seed, double flip) {
        SimulationConfig cfg;
        cfg.iterations = iterations;
        cfg.runs = runs;
        cfg.seed = seed;
        cfg.flip_probability = flip;
        std::vector<PolicySpec> specs;
        for (const auto& p : policies) specs.push_back(PolicySpec::parse(p));
        py::list out;
        for (const auto& r : run_benchmark(ds, specs, cfg)) {
          py::dict d;
          d["policy"] = r.policy;
          d["per_run_utility"] = r.per_run_utility;
          d["mean"] = r.mean;
          d["ci95"] = r.ci95;
          out.append(d);
        }
        return out;
      }, py::arg("dataset"), py::arg("policies"), py::arg("iterations") = 500, py::arg("runs") = 50,
      py::arg("seed") = 0, py::arg("flip") = 0.0);
  m.def("cross_validate", [](const Dataset& ds, double train_fraction, std::uint64_t seed) {
        const auto r = cross_validate(ds, train_fraction, seed);
        py::dict d;
        d["auc"] = r.auc_defined ? py::cast(r.auc) : py::none();
        d["precision_at"] = r.precision_at;
        d["q"] = r.q;
        d["train_size"] = r.train_size;
        d["test_size"] = r.test_size;
        d["degenerate_split"] = r.degenerate_split;
        return d;
      }, py::arg("dataset"), py::arg("train_fraction") = 0.001, py::arg("seed") = 0);

  m.def("auc_roc", [](const std::vector<double>& s, const std::vector<bool>& y) { return auc_roc(scored_labels(s, y)); },
        py::arg("scores"), py::arg("labels"));
  m.def("precision_at_k", [](const std::vector<double>& s, const std::vector<bool>& y, std::size_t k) {
        return precision_at_k(scored_labels(s, y), k);
      }, py::arg("scores"), py::arg("labels"), py::arg("k"));
  m.def("welch_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto t = welch_t_test(a, b);
        py::dict d;
        d["t"] = t.t;
        d["df"] = t.df;
        d["p"] = t.p;
        d["d"] = t.d;
        d["mean_a"] = t.mean_a;
        d["mean_b"] = t.mean_b;
        d["ci95_a"] = t.ci95_a;
        d["ci95_b"] = t.ci95_b;
        return d;
      }, py::arg("a"), py::arg("b"), "t and d are signed as mean(b) - mean(a).");
  m.def("throughput_metrics", [](const std::string& export_jsonl, const Dataset& ds, bool fixed) {
        return metrics_dict(throughput_metrics(export_from(export_jsonl), ds,
                                               fixed ? TimeBase::kFixedBudget : TimeBase::kActive));
      }, py::arg("export_jsonl"), py::arg("dataset"), py::arg("fixed_budget") = false);

  py::class_<Session>(m, "Session")
      .def(py::init([](DatasetPtr ds, const std::string& policy, std::size_t batch_size, std::int64_t budget_ms,
                       bool strict_refresh, const std::string& session_id) {
             SessionConfig cfg;
             cfg.policy = PolicySpec::parse(policy);
             cfg.batch_size = batch_size;
             cfg.budget_ms = budget_ms;
             cfg.strict_refresh = strict_refresh;
             return std::make_unique<Session>(session_id, std::move(ds), "local", cfg);
           }),
           py::arg("dataset"), py::arg("policy") = "one_step", py::arg("batch_size") = 10,
           py::arg("budget_ms") = 600'000, py::arg("strict_refresh") = false, py::arg("session_id") = "local")
      .def("apply", [](Session& s, const std::string& kind, std::optional<PointId> point_id, std::int64_t at,
                       const std::string& event_id) {
             s.apply({event_kind_from_string(kind), point_id, at, event_id});
           }, py::arg("kind"), py::arg("point_id") = py::none(), py::arg("at") = 0, py::arg("event_id") = "")
      .def_property_readonly("suggestions", [](const Session& s) { return pairs(s.suggestions()); })
      .def_property_readonly("utility", &Session::utility)
      .def_property_readonly("q", &Session::q)
      .def_property_readonly("ended", &Session::ended)
      .def("export_jsonl", [](const Session& s) {
        std::ostringstream os;
        s.export_log().write_jsonl(os);
        return os.str();
      });
}
