"""Code-mixed offensive language identification: cleaning, features,
classical and neural classifiers, and weighted-F1 evaluation."""

import json

from ._core import (
    Error,
    Model,
    class_distribution,
    clean,
    clean_tokens,
    codebook,
    select_best,
    synth_tsv,
    tokenize,
    vote,
    weighted_f1,
)
from . import _core

__all__ = [
    "Error",
    "Model",
    "class_distribution",
    "clean",
    "clean_tokens",
    "codebook",
    "metrics",
    "run_grid",
    "select_best",
    "synth_tsv",
    "tokenize",
    "vote",
    "weighted_f1",
]


def metrics(gold, pred, labels):
    """Per-class and weighted precision/recall/F1 as a dict."""
    return json.loads(_core.metrics_json(list(gold), list(pred), list(labels)))


def run_grid(language, out, seed=7, models=None, synth_train=2000, synth_valid=400,
             synth_test=400, overrides=None):
    """Runs the experiment grid and returns the summary rows as dicts."""
    text = _core.run_grid(language, str(out), seed, models, synth_train, synth_valid,
                          synth_test, json.dumps(overrides) if overrides else "")
    header, *rows = text.strip().split("\n")
    keys = header.split("\t")
    return [dict(zip(keys, r.split("\t"))) for r in rows]
