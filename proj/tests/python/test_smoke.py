# Copyright 2026 The Forage Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import os
import pathlib

import pytest

import forage


@pytest.fixture(scope="module")
def ds():
    return forage.synthetic_dataset(n=300, incidence=0.1, seed=1)


def test_dataset_basics(ds):
    assert len(ds) == 300
    assert abs(ds.incidence - 0.1) < 1e-12
    p = ds.point(ds.ids[0])
    assert set(["id", "x", "y", "text"]) <= set(p)
    again = forage.parse_dataset(ds.to_csv(), "csv")
    assert len(again) == 300


def test_errors_map_to_exceptions():
    with pytest.raises(forage.ValidationError):
        forage.parse_dataset("id,x,y,text\n7,0,0,a\n7,1,1,b\n")
    with pytest.raises(forage.ForageError):
        forage.parse_dataset("id,x\n1,2\n")


def test_label_heuristic():
    raw = forage.parse_dataset("id,x,y,text\n1,0,0,my sore throat is awful\n2,0,0,lovely weather today\n")
    lab = forage.label_dataset(raw)
    assert lab.point(1)["truth"] is True
    assert lab.point(2)["truth"] is False


def test_posterior_and_ranking(ds):
    assert forage.posterior(ds, {}, ds.ids[0])[0] == pytest.approx(0.05)
    pos = [i for i in ds.ids if ds.point(i)["truth"]]
    labels = {pos[0]: 1, pos[1]: 1}
    ranked = forage.rank_unlabeled(ds, labels)
    assert len(ranked) == 298
    assert forage.select(ds, labels, "one_step") == ranked[0][0]
    q, ll, uninformed = forage.fit_fusion_weight(ds, labels)
    assert 0.0 <= q <= 1.0 and not uninformed
    assert forage.ens_score(ds, labels, ranked[0][0], 1) == pytest.approx(ranked[0][1])


def test_simulate_and_crossval(ds):
    r = forage.simulate(ds, ["random:1", "one_step"], iterations=20, runs=4)
    assert [x["policy"] for x in r] == ["random", "one_step"]
    assert len(r[0]["per_run_utility"]) == 4
    cv = forage.cross_validate(ds, 0.5, 3)
    assert cv["train_size"] == 150 and cv["auc"] > 0.8


def test_metrics():
    assert forage.auc_roc([0.9, 0.1], [True, False]) == 1.0
    assert forage.precision_at_k([0.9, 0.5, 0.1], [True, False, True], 2) == 0.5
    t = forage.welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert (t["t"], t["p"], t["d"]) == (0.0, 1.0, 0.0)


def test_welch_reference():
    path = pathlib.Path(os.environ.get("FORAGE_TEST_DATA_DIR", pathlib.Path(__file__).parent.parent / "data"))
    rows = [json.loads(line) for line in (path / "welch_reference.jsonl").read_text().splitlines()]
    for row in rows:
        t = forage.welch_t_test(row["a"], row["b"])
        assert abs(t["p"] - row["p"]) < 1e-6
        assert t["t"] == pytest.approx(-row["t"], abs=1e-9)


def test_session_flow(ds):
    s = forage.Session(ds, policy="one_step")
    assert s.suggestions == [] and s.utility == 0
    pos = next(i for i in ds.ids if ds.point(i)["truth"])
    s.apply("hover_start", pos, 0)
    s.apply("hover_end", pos, 700)
    s.apply("bookmark_add", pos, 800, "e1")
    assert len(s.suggestions) == 10 and s.utility == 1
    with pytest.raises(forage.ProtocolError):
        s.apply("bookmark_add", pos, 10)
    with pytest.raises(forage.NotFoundError):
        s.apply("bookmark_add", 10**9, 900)
    s.apply("session_end", None, 1000)
    assert s.ended
    m = forage.throughput_metrics(s.export_jsonl(), ds)
    assert m["hovers_per_min"] * m["active_minutes"] == pytest.approx(1.0)
