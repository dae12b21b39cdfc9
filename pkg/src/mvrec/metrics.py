"""Top-k accuracy evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class MetricReport:
    top1: float
    top3: float
    top5: float
    n_samples: int
    per_class: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "top1": self.top1,
            "top3": self.top3,
            "top5": self.top5,
            "n_samples": self.n_samples,
            "per_class": {str(k): v for k, v in sorted(self.per_class.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def topk_hits(logits: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Boolean hit vector: label among the k largest logits per row.

    Ties break deterministically toward the lower class index.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n_classes = logits.shape[-1]
    if k > n_classes:
        raise ValueError(f"k={k} exceeds class count {n_classes}")
    # lexsort: primary key -logits, secondary key class index (lower first)
    idx = np.arange(n_classes)
    hits = np.empty(len(labels), dtype=bool)
    for i, (row, y) in enumerate(zip(logits, labels)):
        order = np.lexsort((idx, -row))
        hits[i] = y in order[:k]
    return hits


def topk(logits: np.ndarray, labels: np.ndarray, ks: tuple[int, ...] = (1, 3, 5)) -> MetricReport:
    """Accuracy report at the requested k values (capped at the class count)."""
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels)
    n_classes = logits.shape[-1]
    accs = {}
    for k in ks:
        kk = min(k, n_classes)
        accs[k] = float(topk_hits(logits, labels, kk).mean()) if n else 0.0

    per_class: dict[int, float] = {}
    if n:
        hit1 = topk_hits(logits, labels, 1)
        for c in np.unique(labels):
            sel = labels == c
            per_class[int(c)] = float(hit1[sel].mean())
    return MetricReport(top1=accs[1], top3=accs[3], top5=accs[5], n_samples=n, per_class=per_class)
