"""Self-training sentiment classification: Python bindings."""

import json as _json

from ._sentssl import (  # noqa: F401
    ConfigError,
    DataError,
    FeatureConfig,
    Learner,
    Review,
    __version__,
    corpus_jsonl,
    derive_label,
    featurize,
    fnv1a64,
    hash_term,
    run_fixture_ssl,
    select_highest_margin,
    synth_corpus,
    tokenize,
    weak_label,
)
from ._sentssl import run_experiment as _run_experiment


def run_experiment(config, out_dir):
    """Run a JSON-configured experiment; returns outputs and the parsed manifest."""
    result = _run_experiment(str(config), str(out_dir))
    result["manifest"] = _json.loads(result["manifest"])
    return result
