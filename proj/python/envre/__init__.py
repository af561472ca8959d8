#
# Copyright 2026 The Envre Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http:#www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""Python bindings for the envre core library.

Documents cross the boundary as DocRED-style JSON. The helpers in this
module accept either JSON text or already-decoded Python objects.
"""

import json as _json

from . import _core
from ._core import EnvreError, __version__, bce, pcr, rcr, skl

__all__ = [
    "EnvreError",
    "__version__",
    "bce",
    "build_prompt",
    "canonicalize_corpus",
    "corpus_stats",
    "evrt_objective",
    "map_curve",
    "mark_entities",
    "parse_output",
    "pcr",
    "perturb",
    "rcr",
    "score",
    "skl",
    "substitution_rate",
]


def _text(value):
    if isinstance(value, (str, bytes)):
        return value.decode("utf-8") if isinstance(value, bytes) else value
    return _json.dumps(value)


def _doc_text(value):
    if isinstance(value, dict):
        value = [value]
    return _text(value)


def canonicalize_corpus(corpus):
    """Validate a corpus and return it as decoded canonical JSON."""
    return _json.loads(_core.canonicalize_corpus(_text(corpus)))


def corpus_stats(corpus):
    return _core.corpus_stats(_text(corpus))


def score(gold, predictions, train=(), bucket_edges=None):
    """Return the score report as a dict."""
    edges = list(bucket_edges) if bucket_edges is not None else None
    report = _core.score(_text(gold), _text(predictions), _text(list(train)), edges)
    return _json.loads(report)


def map_curve(attributions, kmax):
    if not isinstance(attributions, str):
        attributions = "\n".join(_json.dumps(r) for r in attributions)
    return dict(_core.map_curve(attributions, kmax))


def substitution_rate(plans, corpus):
    if not isinstance(plans, str):
        plans = "\n".join(_json.dumps(p) for p in plans)
    return _core.substitution_rate(plans, _text(corpus))


def evrt_objective(z_orig, z_pert, probs_orig, probs_pert, targets, alpha=1.0,
                   beta=1.0, enable="clp,rcr,pcr", clamp=1e-7):
    return _core.evrt_objective(list(z_orig), list(z_pert), list(probs_orig),
                                list(probs_pert), list(targets), alpha, beta,
                                enable, clamp)


def mark_entities(document, open="[{n}|", close="|{n}]"):
    """Return (marked text, entity index -> number)."""
    return _core.mark_entities(_doc_text(document), open, close)


def build_prompt(test_document, demonstrations, shots=1):
    return _core.build_prompt(_doc_text(test_document), _text(demonstrations), shots)


def parse_output(text, test_document):
    return _core.parse_output(text, _doc_text(test_document))


def perturb(corpus, linking, cache, root_seed, seeds=1, threads=1):
    """Return (perturbed documents, plans) decoded from JSON."""
    docs, plans = _core.perturb(_text(corpus), _text(linking), str(cache),
                                root_seed, seeds, threads)
    return _json.loads(docs), [_json.loads(l) for l in plans.splitlines() if l]
