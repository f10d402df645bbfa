"""Triple store loading, inverse-relation augmentation and the filter index.

Triple files are UTF-8, one head<TAB>relation<TAB>tail per line, no header.
Vocabularies are assigned in first-appearance order over the training split,
so loading is deterministic.  Every base relation r gets a synthetic inverse
named r + "__inv"; for each training triple (h, r, t) the augmented training
set also contains (t, r_inv, h).  Validation and test splits are stored
unaugmented; head-direction queries are realized through the inverse
relation at evaluation time.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateKeyError, ParseError, UnknownEntityError

INVERSE_SUFFIX = "__inv"


@dataclass
class Dataset:
    entities: list[str]
    relations: list[str]  # base relations first, their inverses after
    n_base_relations: int
    train: np.ndarray  # (N_aug, 3) int, inverse-augmented
    valid: np.ndarray  # (N, 3) int, unaugmented
    test: np.ndarray
    entity_index: dict[str, int] = field(repr=False)
    relation_index: dict[str, int] = field(repr=False)
    filter_index: dict[tuple[int, int], frozenset[int]] = field(repr=False)

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_relations(self) -> int:
        return len(self.relations)

    def inverse(self, r: int) -> int:
        nb = self.n_base_relations
        return r - nb if r >= nb else r + nb

    def filter_tails(self, h: int, r: int) -> frozenset[int]:
        return self.filter_index.get((h, r), frozenset())


def _read_triple_file(path) -> list[tuple[str, str, str]]:
    triples = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) != 3:
                    raise ParseError(
                        f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}"
                    )
                triples.append(tuple(fields))
    except OSError as exc:
        raise ParseError(f"cannot read triple file {path}: {exc}") from exc
    if not triples:
        raise ParseError(f"{path}: empty split")
    return triples


def load_dataset(train_path, valid_path, test_path) -> Dataset:
    """Load the three splits, build vocabularies and augment the training set.

    Validation/test symbols must already appear in the training split; the
    reserved inverse suffix may not appear in any input relation name.
    """
    raw = {
        "train": _read_triple_file(train_path),
        "valid": _read_triple_file(valid_path),
        "test": _read_triple_file(test_path),
    }
    for split, triples in raw.items():
        for h, r, t in triples:
            if r.endswith(INVERSE_SUFFIX):
                raise ParseError(
                    f"{split}: relation {r!r} ends with the reserved suffix "
                    f"{INVERSE_SUFFIX!r}; input data must not be pre-augmented"
                )

    entity_index: dict[str, int] = {}
    relation_index: dict[str, int] = {}
    for h, r, t in raw["train"]:
        if h not in entity_index:
            entity_index[h] = len(entity_index)
        if t not in entity_index:
            entity_index[t] = len(entity_index)
        if r not in relation_index:
            relation_index[r] = len(relation_index)

    unknown = []
    for split in ("valid", "test"):
        for h, r, t in raw[split]:
            for e in (h, t):
                if e not in entity_index:
                    unknown.append(f"{split} entity {e!r}")
            if r not in relation_index:
                unknown.append(f"{split} relation {r!r}")
    if unknown:
        listing = ", ".join(sorted(set(unknown)))
        raise UnknownEntityError(f"symbols absent from the training split: {listing}")

    n_base = len(relation_index)
    entities = list(entity_index)
    relations = list(relation_index) + [r + INVERSE_SUFFIX for r in relation_index]
    for i, name in enumerate(relations[n_base:], start=n_base):
        relation_index[name] = i

    def encode(triples) -> np.ndarray:
        return np.array(
            [(entity_index[h], relation_index[r], entity_index[t]) for h, r, t in triples],
            dtype=np.int64,
        )

    train_base = encode(raw["train"])
    inverse_part = np.stack(
        [train_base[:, 2], train_base[:, 1] + n_base, train_base[:, 0]], axis=1
    )
    train = np.concatenate([train_base, inverse_part], axis=0)

    ds = Dataset(
        entities=entities,
        relations=relations,
        n_base_relations=n_base,
        train=train,
        valid=encode(raw["valid"]),
        test=encode(raw["test"]),
        entity_index=entity_index,
        relation_index=relation_index,
        filter_index={},
    )
    ds.filter_index = build_filter(ds)
    return ds


def build_filter(dataset: Dataset) -> dict[tuple[int, int], frozenset[int]]:
    """True-tail sets per (head, relation) over train + valid + test.

    Both directions are indexed: every triple (h, r, t) contributes t to
    (h, r) and h to (t, r_inv), so head-direction queries are served through
    the inverse relation.  The augmented training split already carries its
    inverse triples; valid/test get theirs here only.
    """
    acc: dict[tuple[int, int], set[int]] = {}

    def put(h, r, t):
        acc.setdefault((h, r), set()).add(t)

    for h, r, t in dataset.train:
        put(int(h), int(r), int(t))
    for split in (dataset.valid, dataset.test):
        for h, r, t in split:
            put(int(h), int(r), int(t))
            put(int(t), dataset.inverse(int(r)), int(h))
    return {key: frozenset(v) for key, v in acc.items()}


def _unescape(text: str) -> str:
    return text.replace("\\t", "\t").replace("\\n", "\n")


@dataclass
class TextAssets:
    names: dict[str, str]
    descriptions: dict[str, str]
    names_missing: list[str]
    descriptions_missing: list[str]

    def coverage(self) -> dict[str, int]:
        return {
            "names": len(self.names),
            "descriptions": len(self.descriptions),
            "names_missing": len(self.names_missing),
            "descriptions_missing": len(self.descriptions_missing),
        }


def _read_text_tsv(path, entities: list[str], label: str) -> dict[str, str]:
    known = set(entities)
    out: dict[str, str] = {}
    unknown = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t", 1)
            if len(fields) != 2:
                raise ParseError(f"{path}:{lineno}: expected entity<TAB>text")
            key, text = fields
            if key in out:
                raise DuplicateKeyError(f"{path}:{lineno}: duplicate {label} key {key!r}")
            if key not in known:
                unknown.append(key)
                continue
            out[key] = _unescape(text)
    if unknown:
        raise UnknownEntityError(
            f"{path}: {label} keys outside the entity vocabulary: "
            + ", ".join(sorted(unknown))
        )
    return out


def load_text_assets(names_path, descriptions_path, entities: list[str]) -> TextAssets:
    """Read the name/description TSVs; missing entities are reported, not fatal."""
    names = _read_text_tsv(names_path, entities, "name") if names_path else {}
    descriptions = (
        _read_text_tsv(descriptions_path, entities, "description")
        if descriptions_path
        else {}
    )
    return TextAssets(
        names=names,
        descriptions=descriptions,
        names_missing=[e for e in entities if e not in names],
        descriptions_missing=[e for e in entities if e not in descriptions],
    )
