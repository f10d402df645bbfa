"""Filtered link prediction: ranks, MRR and hits@k over both directions.

Each test triple contributes two queries: (h, r, ?t) and, via the inverse
relation, (t, r_inv, ?h).  Known-true competitors from any split are
filtered out before ranking.  Ties share their rank (mean rank of the tied
span), so ranks are floats.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ConfigError
from .models import ModelParams, NUMPY_OPS, build_context, scores_all_tails
from .text import TextTable

HITS_LEVELS = (1, 3, 10)
_EVAL_CHUNK = 256


def filtered_rank(scores: np.ndarray, true_tail: int, filter_tails) -> float:
    """Rank of the true tail with known-true competitors removed.

    rank = 1 + (#strictly better) + (#ties)/2; a 5-way tie over the whole
    candidate set gives 3.0.
    """
    scores = np.asarray(scores, dtype=np.float64)
    true_score = scores[true_tail]
    keep = np.ones(scores.shape[0], dtype=bool)
    for t in filter_tails:
        keep[t] = False
    keep[true_tail] = False
    rivals = scores[keep]
    better = int(np.count_nonzero(rivals > true_score))
    ties = int(np.count_nonzero(rivals == true_score))
    return 1.0 + better + 0.5 * ties


def _metrics(ranks: np.ndarray) -> dict:
    inv = 1.0 / ranks
    out = {"mrr": float(inv.mean()), "n_queries": int(ranks.size)}
    for k in HITS_LEVELS:
        out[f"hits@{k}"] = float(np.mean(ranks <= k))
    return out


@dataclass
class EvalReport:
    mrr: float
    hits: dict[int, float]
    n_queries: int
    by_direction: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mrr": self.mrr,
            **{f"hits@{k}": v for k, v in self.hits.items()},
            "n_queries": self.n_queries,
            "by_direction": self.by_direction,
        }


def evaluate(params: ModelParams, tables: dict[str, TextTable], dataset: Dataset, split: str = "test") -> EvalReport:
    """Filtered metrics over one split, tail and head queries pooled."""
    triples = {"train": dataset.train, "valid": dataset.valid, "test": dataset.test}.get(split)
    if triples is None:
        raise ConfigError(f"unknown split {split!r}; expected train, valid or test")
    if len(triples) == 0:
        raise ConfigError(f"split {split!r} is empty")

    # (query head, query relation, gold entity, direction) for every triple.
    queries = []
    for h, r, t in triples:
        queries.append((int(h), int(r), int(t), "tail"))
        queries.append((int(t), dataset.inverse(int(r)), int(h), "head"))

    ctx = build_context(params, tables, ops=NUMPY_OPS)
    ranks = {"tail": [], "head": []}
    for start in range(0, len(queries), _EVAL_CHUNK):
        chunk = queries[start : start + _EVAL_CHUNK]
        h_idx = np.array([q[0] for q in chunk], dtype=np.int64)
        r_idx = np.array([q[1] for q in chunk], dtype=np.int64)
        scores = scores_all_tails(NUMPY_OPS, ctx, h_idx, r_idx)
        for row, (h, r, gold, direction) in zip(scores, chunk):
            ranks[direction].append(filtered_rank(row, gold, dataset.filter_tails(h, r)))

    pooled = np.array(ranks["tail"] + ranks["head"], dtype=np.float64)
    overall = _metrics(pooled)
    return EvalReport(
        mrr=overall["mrr"],
        hits={k: overall[f"hits@{k}"] for k in HITS_LEVELS},
        n_queries=overall["n_queries"],
        by_direction={
            d: _metrics(np.array(rs, dtype=np.float64)) for d, rs in ranks.items()
        },
    )
