"""Post-hoc analyses: part-wise cosines, sentence Shapley values, export.

The Shapley routine enumerates all coalitions exactly (no sampling) and is
therefore capped at 20 players; a coalition's entity vector is the mean of
its member sentence vectors, the empty coalition mapping to the zero
vector.
"""
from __future__ import annotations

import math

import numpy as np

from .data import Dataset
from .errors import ConfigError, TooManyPlayersError, UnknownEntityError
from .models import (
    BLOCKS4,
    ModelParams,
    NUMPY_OPS,
    TRANSLATION_KINDS,
    build_context,
    query_blocks,
    score,
)
from .text import HEADER_MAGIC, TextTable

MAX_PLAYERS = 20
EXPORT_SOURCE_ID = "hkge-export"

_ANALYSIS_CHUNK = 512


def part_cosine_matrix(params: ModelParams, tables: dict[str, TextTable], dataset: Dataset, split: str = "test") -> np.ndarray:
    """4x4 mean cosines between query parts and tail-entity parts.

    Entry (i, j) averages cos(query block i, tail block j) over the split's
    triples; a pair involving an exactly-zero block contributes 0.  Only
    rotation-family models have four meaningful parts, so translation kinds
    are rejected.
    """
    if params.kind in TRANSLATION_KINDS:
        raise ConfigError(f"part cosines are undefined for model kind {params.kind!r}")
    triples = {"train": dataset.train, "valid": dataset.valid, "test": dataset.test}.get(split)
    if triples is None:
        raise ConfigError(f"unknown split {split!r}; expected train, valid or test")
    if len(triples) == 0:
        raise ConfigError(f"split {split!r} is empty")

    ctx = build_context(params, tables, ops=NUMPY_OPS)
    total = np.zeros((4, 4))
    for start in range(0, len(triples), _ANALYSIS_CHUNK):
        chunk = triples[start : start + _ANALYSIS_CHUNK]
        h, r, t = chunk[:, 0], chunk[:, 1], chunk[:, 2]
        qb = query_blocks(NUMPY_OPS, ctx, h, r)
        tb = [block[t] for block in ctx.entity_blocks]
        for i in range(4):
            na = np.linalg.norm(qb[i], axis=-1)
            for j in range(4):
                nb = np.linalg.norm(tb[j], axis=-1)
                dot = np.sum(qb[i] * tb[j], axis=-1)
                denom = na * nb
                cos = np.where(denom > 0.0, dot / np.where(denom > 0.0, denom, 1.0), 0.0)
                total[i, j] += cos.sum()
    return total / len(triples)


def shapley_values(n_players: int, value_fn) -> np.ndarray:
    """Exact Shapley values of a coalition game given by value_fn.

    value_fn receives a sorted tuple of member indices (possibly empty) and
    returns a float.  All 2^n coalitions are evaluated once.
    """
    if n_players > MAX_PLAYERS:
        raise TooManyPlayersError(
            f"exact enumeration supports at most {MAX_PLAYERS} players, got {n_players}"
        )
    if n_players < 1:
        raise ConfigError("need at least one player")
    fact = [math.factorial(i) for i in range(n_players + 1)]
    v = np.empty(1 << n_players)
    for mask in range(1 << n_players):
        members = tuple(i for i in range(n_players) if mask >> i & 1)
        v[mask] = float(value_fn(members))
    phi = np.zeros(n_players)
    for mask in range(1 << n_players):
        size = mask.bit_count()
        weight = fact[size] * fact[n_players - size - 1] / fact[n_players]
        for i in range(n_players):
            if not mask >> i & 1:
                phi[i] += weight * (v[mask | (1 << i)] - v[mask])
    return phi


def coalition_vector(sentence_vectors: np.ndarray, members) -> np.ndarray:
    """Mean of the member rows; the empty coalition is the zero vector."""
    if len(members) == 0:
        return np.zeros(sentence_vectors.shape[1])
    return sentence_vectors[list(members)].mean(axis=0)


def shapley_sentence_importance(
    params: ModelParams,
    tables: dict[str, TextTable],
    h: int,
    r: int,
    t: int,
    entity: str = "head",
    source: str = "sentence",
) -> np.ndarray:
    """Shapley value of each sentence of one entity for a triple's score.

    The game's players are the entity's sentences in the per-sentence table
    of `source`; v(S) is the triple score with that entity's row replaced
    by the coalition mean.
    """
    if entity not in ("head", "tail"):
        raise ConfigError(f"entity must be 'head' or 'tail', got {entity!r}")
    if source not in params.wiring.values():
        raise ConfigError(
            f"model kind {params.kind!r} does not consume source {source!r}; "
            f"wiring uses {sorted(set(params.wiring.values()))}"
        )
    table = tables.get(source)
    if table is None:
        raise ConfigError(f"no table loaded for source {source!r}")
    e = h if entity == "head" else t
    sentences = table.sentence_vectors.get(e)
    if sentences is None or len(sentences) == 0:
        raise ConfigError(f"no per-sentence vectors for entity index {e}")

    def value(members):
        patched = dict(tables)
        patched[source] = table.with_row(e, coalition_vector(sentences, members))
        return score(params, patched, h, r, t)

    return shapley_values(len(sentences), value)


def export_embeddings(params: ModelParams, tables: dict[str, TextTable], entities: list[str], path):
    """Write full 4*D entity vectors in the tabular embedding format.

    Values are written with repr precision so a reload reproduces them
    bit-for-bit.
    """
    from .models import entity_rep  # local import keeps module load light

    dim = 4 * params.dim
    lines = [f"{HEADER_MAGIC}\tsource={EXPORT_SOURCE_ID}\tdim={dim}"]
    for idx, name in enumerate(entities):
        if idx >= params.n_entities:
            raise UnknownEntityError(f"entity index {idx} out of range for model")
        rep = entity_rep(params, tables, idx)
        flat = np.concatenate([np.asarray(b, dtype=np.float64).ravel() for b in rep.blocks])
        lines.append(name + "\t" + " ".join(repr(float(x)) for x in flat))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
