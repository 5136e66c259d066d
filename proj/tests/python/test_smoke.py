# Copyright 2026 The signform Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math

import pytest

import signform


def test_statistics():
    rejected, adjusted = signform.bh_correct([0.01, 0.02, 0.03, 0.04, 0.05], 0.05)
    assert rejected == [True] * 5
    assert all(a == pytest.approx(0.05) for a in adjusted)
    rho, p = signform.spearman_rho([1, 2, 3], [2, 3, 1])
    assert rho == -0.5
    assert 0 < p <= 1
    r = signform.permutation_test([0.5, 0.2, 0.9, 0.4, 0.3], 20000, 3)
    assert r["p_value"] == pytest.approx(signform.exact_permutation_p([0.5, 0.2, 0.9, 0.4, 0.3]), abs=0.01)
    x, density, h = signform.kde([0.0, 1.0, 2.0])
    assert h > 0
    assert sum(density) * (x[1] - x[0]) == pytest.approx(1.0, abs=1e-3)
    assert signform.uncertainty_coefficient(0.110, 3.401) == pytest.approx(0.0323, abs=1e-4)


def test_tokenizer():
    assert signform.tokenize_ipa("ˈkat", True) == ["k", "a", "t"]


def test_errors_carry_codes():
    with pytest.raises(signform.SignformError) as info:
        signform.cohens_d([1.0])
    assert info.value.code == "TooFewValues"
    with pytest.raises(signform.SignformError):
        signform.load_config({"languages": [], "colour": 1})


def test_synthetic_estimate(tmp_path):
    made = signform.synth(tmp_path, preset="two-cluster", n_words=300, seed=2, name="syn")
    assert made["exact"]["MI_W_cluster"] == pytest.approx(1 / 3)
    cfg = made["config"]
    cfg.update(folds=3, permutations=300, output_dir=str(tmp_path / "out"))
    cfg["optimizer"]["max_epochs"] = 3
    docs = signform.estimate(cfg)
    rep = docs[0]["report"]
    assert docs[0]["language"] == "syn"
    assert rep["mi"] == pytest.approx(rep["H_W"]["bits_per_phone"] - rep["H_W_given_V"]["bits_per_phone"])
    assert (tmp_path / "out" / "report.csv").exists()
    again = signform.estimate(cfg)
    assert json.dumps(again) == json.dumps(docs)

    signform.report([tmp_path / "out" / "report.json"], tmp_path / "summary")
    assert (tmp_path / "summary" / "appendix.tsv").read_text().startswith("language\tH_W\tU_W_V")


def test_validation_entry_point(tmp_path):
    ids = [c["id"] for c in signform.criteria()]
    assert ids[:10] == list(range(1, 11))
    out = signform.validate(6, tmp_path)
    assert out["passed"], out["detail"]
