"""Paths and factories shared across the test modules.

Kept outside conftest.py so tests can import them by a module name that is
unique repo-wide (the exporter suite has its own conftest).
"""
from pathlib import Path

import numpy as np

from hkge.text import TextTable

REPO = Path(__file__).resolve().parents[1]
TOY = REPO / "data" / "toy"
NATIONS = REPO / "data" / "nations"

ALL_SOURCES = ("word2vec", "fasttext", "doc2vec", "sentence")


def make_tables(n_entities, dims, seed=0):
    """Synthetic dense tables for unit tests; one rng stream per source."""
    tables = {}
    for i, (source, d) in enumerate(sorted(dims.items())):
        rng = np.random.default_rng(seed * 100 + i)
        tables[source] = TextTable(
            source_id=source,
            dim=d,
            vectors=rng.normal(size=(n_entities, d)),
            present=np.ones(n_entities, dtype=bool),
            sentence_vectors={},
        )
    return tables


def nations_available():
    return all((NATIONS / f).exists() for f in ("train.txt", "valid.txt", "test.txt"))
