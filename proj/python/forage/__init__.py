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

"""k-NN active search over text and location, with sessions and analytics."""

from forage._core import (
    ConfigError,
    Dataset,
    ExhaustedError,
    ForageError,
    NotFoundError,
    ParseError,
    ProtocolError,
    RangeError,
    Session,
    UndefinedError,
    ValidationError,
    auc_roc,
    cross_validate,
    ens_score,
    fit_fusion_weight,
    label_dataset,
    load_dataset,
    parse_dataset,
    posterior,
    precision_at_k,
    rank_unlabeled,
    select,
    simulate,
    synthetic_dataset,
    throughput_metrics,
    welch_t_test,
)

__version__ = "0.1.0"
