"""Precomputed text-embedding tables and the two-layer tanh adjuster.

Wire format, shared with the exporter:

    #hkge-emb<TAB>source=<id><TAB>dim=<D_T>
    entity<TAB>v1 v2 ... v_DT

Sentence-level files carry one row per (entity, sentence):

    entity<TAB>sentence_index<TAB>v1 ... v_DT

Lines after the header starting with '#' are comments (encoder versions and
the like) and are skipped.  Entities without a row get the zero vector and a
coverage flag; raw vectors are frozen, only adjusters train.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    DuplicateKeyError,
    ParseError,
    UnknownEntityError,
    WrongSourceError,
)

HEADER_MAGIC = "#hkge-emb"

# Fixed concatenation order for the feature-concat ablation: word2vec,
# fasttext, doc2vec, sentence.
CONCAT_ORDER = ("word2vec", "fasttext", "doc2vec", "sentence")


@dataclass
class TextTable:
    source_id: str
    dim: int
    vectors: np.ndarray  # (n_entities, dim) float64, zero rows for missing
    present: np.ndarray  # (n_entities,) bool
    sentence_vectors: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def n_missing(self) -> int:
        return int((~self.present).sum())

    def with_row(self, e: int, vector: np.ndarray) -> "TextTable":
        """Copy of the table with one raw row replaced (used by attribution)."""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.dim,):
            raise DimensionMismatchError(
                f"replacement row has shape {vector.shape}, table dim is {self.dim}"
            )
        vectors = self.vectors.copy()
        vectors[e] = vector
        return TextTable(
            self.source_id, self.dim, vectors, self.present, self.sentence_vectors
        )


def _parse_header(path, first_line: str) -> tuple[str, int]:
    fields = first_line.rstrip("\n").split("\t")
    if len(fields) != 3 or fields[0] != HEADER_MAGIC:
        raise ParseError(
            f"{path}:1: expected header '{HEADER_MAGIC}<TAB>source=...<TAB>dim=...'"
        )
    if not fields[1].startswith("source=") or not fields[2].startswith("dim="):
        raise ParseError(f"{path}:1: malformed header fields {fields[1:]!r}")
    source = fields[1][len("source="):]
    try:
        dim = int(fields[2][len("dim="):])
    except ValueError as exc:
        raise ParseError(f"{path}:1: dim is not an integer") from exc
    if dim < 1:
        raise ParseError(f"{path}:1: dim must be >= 1, got {dim}")
    return source, dim


def _parse_floats(path, lineno, text: str, dim: int) -> np.ndarray:
    parts = text.split()
    if len(parts) != dim:
        raise ParseError(f"{path}:{lineno}: expected {dim} floats, got {len(parts)}")
    try:
        vec = np.array(parts, dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: non-numeric value") from exc
    if not np.all(np.isfinite(vec)):
        raise ParseError(f"{path}:{lineno}: non-finite value")
    return vec


def load_text_table(path, expected_source_id: str, entities: list[str]) -> TextTable:
    """Load one per-entity embedding file against the entity vocabulary."""
    index = {e: i for i, e in enumerate(entities)}
    with open(path, encoding="utf-8") as fh:
        source, dim = _parse_header(path, fh.readline())
        if source != expected_source_id:
            raise WrongSourceError(
                f"{path}: header source {source!r}, expected {expected_source_id!r}"
            )
        vectors = np.zeros((len(entities), dim))
        present = np.zeros(len(entities), dtype=bool)
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError(f"{path}:{lineno}: expected entity<TAB>floats")
            key, payload = fields
            if key not in index:
                raise UnknownEntityError(
                    f"{path}:{lineno}: entity {key!r} outside the vocabulary"
                )
            e = index[key]
            if present[e]:
                raise DuplicateKeyError(f"{path}:{lineno}: duplicate entity {key!r}")
            vectors[e] = _parse_floats(path, lineno, payload, dim)
            present[e] = True
    return TextTable(source_id=source, dim=dim, vectors=vectors, present=present)


def load_sentence_table(path, expected_source_id: str, entities: list[str]) -> dict[int, np.ndarray]:
    """Load per-sentence vectors keyed by entity index.

    Sentence indices per entity must be contiguous from zero so attribution
    output lines up with the splitter that produced the file.
    """
    index = {e: i for i, e in enumerate(entities)}
    rows: dict[int, dict[int, np.ndarray]] = {}
    with open(path, encoding="utf-8") as fh:
        source, dim = _parse_header(path, fh.readline())
        if source != expected_source_id:
            raise WrongSourceError(
                f"{path}: header source {source!r}, expected {expected_source_id!r}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    f"{path}:{lineno}: expected entity<TAB>sentence_index<TAB>floats"
                )
            key, sidx_s, payload = fields
            if key not in index:
                raise UnknownEntityError(
                    f"{path}:{lineno}: entity {key!r} outside the vocabulary"
                )
            try:
                sidx = int(sidx_s)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad sentence index") from exc
            bucket = rows.setdefault(index[key], {})
            if sidx in bucket:
                raise DuplicateKeyError(
                    f"{path}:{lineno}: duplicate sentence {sidx} for {key!r}"
                )
            bucket[sidx] = _parse_floats(path, lineno, payload, dim)
    out: dict[int, np.ndarray] = {}
    for e, bucket in rows.items():
        if sorted(bucket) != list(range(len(bucket))):
            raise ParseError(
                f"{path}: sentence indices for entity {entities[e]!r} are not "
                f"contiguous from 0: {sorted(bucket)}"
            )
        out[e] = np.stack([bucket[i] for i in range(len(bucket))])
    return out


@dataclass
class Adjuster:
    """tanh(W2 . tanh(W1 . raw + b1) + b2), mapping D_T to the model dim."""

    W1: np.ndarray  # (d_in, hidden)
    b1: np.ndarray  # (hidden,)
    W2: np.ndarray  # (hidden, d_out)
    b2: np.ndarray  # (d_out,)

    @property
    def d_in(self) -> int:
        return self.W1.shape[0]

    @property
    def d_out(self) -> int:
        return self.W2.shape[1]


def init_adjuster(rng: np.random.Generator, d_in: int, d_out: int, hidden: int | None = None) -> Adjuster:
    """Glorot-uniform weights, zero biases; hidden width defaults to d_out."""
    hidden = d_out if hidden is None else hidden

    def glorot(fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return Adjuster(
        W1=glorot(d_in, hidden),
        b1=np.zeros(hidden),
        W2=glorot(hidden, d_out),
        b2=np.zeros(d_out),
    )


def adjust(adjuster: Adjuster, raw: np.ndarray) -> np.ndarray:
    """Forward pass; accepts a single vector or a (n, d_in) batch."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.shape[-1] != adjuster.d_in:
        raise DimensionMismatchError(
            f"raw vector has dim {raw.shape[-1]}, adjuster expects {adjuster.d_in}"
        )
    hidden = np.tanh(raw @ adjuster.W1 + adjuster.b1)
    return np.tanh(hidden @ adjuster.W2 + adjuster.b2)


def adjuster_backward(adjuster: Adjuster, raw: np.ndarray, upstream: np.ndarray):
    """Analytic gradients for one vector: (dW1, db1, dW2, db2, draw)."""
    raw = np.asarray(raw, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if raw.shape != (adjuster.d_in,):
        raise DimensionMismatchError(f"raw must have shape ({adjuster.d_in},)")
    if upstream.shape != (adjuster.d_out,):
        raise DimensionMismatchError(f"upstream must have shape ({adjuster.d_out},)")
    pre1 = raw @ adjuster.W1 + adjuster.b1
    h = np.tanh(pre1)
    pre2 = h @ adjuster.W2 + adjuster.b2
    out = np.tanh(pre2)
    d_pre2 = upstream * (1.0 - out * out)
    dW2 = np.outer(h, d_pre2)
    db2 = d_pre2
    d_h = adjuster.W2 @ d_pre2
    d_pre1 = d_h * (1.0 - h * h)
    dW1 = np.outer(raw, d_pre1)
    db1 = d_pre1
    d_raw = adjuster.W1 @ d_pre1
    return dW1, db1, dW2, db2, d_raw
