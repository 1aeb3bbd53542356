"""Adversarial multi-source domain adaptation for drug response prediction."""

import json

from ._core import (
    AdaDrugError,
    Model,
    SynthConfig,
    SynthData,
    aupr,
    auroc,
    binarize_ic50,
    generate,
    load,
    select_hvg,
)
from . import _core

__all__ = [
    "AdaDrugError",
    "Model",
    "SynthConfig",
    "SynthData",
    "aupr",
    "auroc",
    "bench_train_config",
    "benchmark",
    "binarize_ic50",
    "generate",
    "load",
    "select_hvg",
    "train",
]


def bench_train_config():
    """Training settings used by the synthetic benchmark, as a dict."""
    return json.loads(_core.bench_train_config())


def train(sources, target, config=None):
    """Train on labeled sources [(X, y), ...] and an unlabeled target matrix.

    `config` is a dict of training settings; missing keys take library defaults.
    """
    return _core.train(sources, target, json.dumps(config) if config else "")


def benchmark(variants=("full", "baseline"), seeds=(0,), synth=None, train_config=None):
    """Run synthetic variants and return one dict per (variant, seed)."""
    return _core.benchmark(
        synth or SynthConfig(),
        list(variants),
        list(seeds),
        json.dumps(train_config) if train_config else "",
    )
