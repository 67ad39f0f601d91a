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

"""Writes welch_reference.jsonl: random group pairs with scipy's Welch test.

scipy reports t as (mean_a - mean_b) / se. Values are frozen so the C++ tests
do not need Python at run time.
"""

import json
import pathlib

import numpy as np
from scipy import stats


def main():
    rng = np.random.default_rng(20260101)
    out = pathlib.Path(__file__).with_name("welch_reference.jsonl")
    with out.open("w") as f:
        for _ in range(50):
            na, nb = rng.integers(2, 40, size=2)
            a = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 4), size=na)
            b = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 4), size=nb)
            if rng.uniform() < 0.3:
                b = a.mean() + rng.normal(0, a.std() + 0.1, size=nb)
            r = stats.ttest_ind(a, b, equal_var=False)
            va, vb = a.var(ddof=1) / na, b.var(ddof=1) / nb
            df = (va + vb) ** 2 / (va**2 / (na - 1) + vb**2 / (nb - 1))
            rec = {
                "a": [float(x) for x in a],
                "b": [float(x) for x in b],
                "t": float(r.statistic),
                "df": float(df),
                "p": float(r.pvalue),
            }
            f.write(json.dumps(rec) + "\n")


if __name__ == "__main__":
    main()
