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

"""Form-meaning systematicity estimates from phone-level language models.

Pipeline functions accept a config as a dict or a path to a JSON file and
return decoded JSON documents.
"""

import json
import os

from . import _core
from ._core import (
    SignformError,
    bh_correct,
    cohens_d,
    exact_permutation_p,
    kde,
    permutation_test,
    report,
    spearman_rho,
    tokenize_ipa,
    uncertainty_coefficient,
)

__all__ = [
    "SignformError",
    "batch",
    "bh_correct",
    "cohens_d",
    "criteria",
    "estimate",
    "exact_permutation_p",
    "hyperopt",
    "kde",
    "load_config",
    "permutation_test",
    "phonesthemes",
    "report",
    "spearman_rho",
    "synth",
    "tokenize_ipa",
    "uncertainty_coefficient",
    "validate",
]


def _config_text(config):
    if isinstance(config, dict):
        return json.dumps(config), ""
    path = os.fspath(config)
    with open(path, encoding="utf-8") as f:
        return f.read(), os.path.dirname(os.path.abspath(path))


def load_config(config):
    """Resolved config with every default filled in."""
    text, base = _config_text(config)
    return json.loads(_core.resolve_config(text, base))


def _run(fn, config, seed, threads, out):
    text, base = _config_text(config)
    out = None if out is None else os.fspath(out)
    return json.loads(fn(text, base, seed, threads, out))


def estimate(config, seed=None, threads=None, out=None):
    """Per-language report documents, as written to report.json."""
    return _run(_core.estimate, config, seed, threads, out)


def batch(config, seed=None, threads=None, out=None):
    """{"reports": [...], "failures": {language: message}}."""
    return _run(_core.batch, config, seed, threads, out)


def phonesthemes(config, seed=None, threads=None, out=None):
    return _run(_core.phonesthemes, config, seed, threads, out)


def hyperopt(config, seed=None, threads=None, out=None):
    return _run(_core.hyperopt, config, seed, threads, out)


def synth(out_dir, preset="two-cluster", n_words=5000, seed=1, name=None, spec=None, **preset_args):
    """Writes a synthetic language and returns its exact quantities and a
    ready-to-run config."""
    spec_text = json.dumps(spec) if spec is not None else _core.synth_preset(preset, **preset_args)
    spec_doc = json.loads(spec_text)
    name = name or spec_doc.get("language", "syn")
    lexicon, embeddings = _core.synth_write(spec_text, n_words, seed, os.fspath(out_dir), name)
    out = os.path.join(os.fspath(out_dir), name + "-out")
    return {
        "spec": spec_doc,
        "exact": json.loads(_core.synth_exact(spec_text)),
        "lexicon": lexicon,
        "embeddings": embeddings,
        "config": json.loads(_core.synthetic_config(name, lexicon, embeddings, out)),
    }


def criteria():
    return [{"id": i, "title": t, "required": r} for i, t, r in _core.criteria()]


def validate(criterion, work_dir, threads=1):
    return _core.validate(criterion, os.fspath(work_dir), threads)
