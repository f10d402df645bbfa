"""Checkpoint container: canonical JSON header + raw little-endian tensors.

The file layout is magic line, 8-byte LE header length, the header JSON
(sorted keys, no whitespace), then every tensor's float64 C-order bytes in
manifest order.  Same params + same metadata => identical bytes, which the
determinism checks rely on; pickle and npz offer no such guarantee.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import CheckpointMismatchError
from .models import ModelParams

MAGIC = b"HKGE-CKPT\n"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    params: ModelParams
    config: dict
    seed: int
    entities: list[str]
    relations: list[str]


def save_checkpoint(path, params: ModelParams, *, config: dict, seed: int, entities, relations):
    header = {
        "format_version": FORMAT_VERSION,
        "model": {
            "kind": params.kind,
            "algebra": params.algebra,
            "dim": params.dim,
            "distance": params.distance,
            "wiring": dict(params.wiring),
            "n_entities": params.n_entities,
            "n_relations": params.n_relations,
        },
        "config": config,
        "seed": int(seed),
        "entities": list(entities),
        "relations": list(relations),
        "tensors": [
            {"name": name, "shape": list(arr.shape)} for name, arr in params.arrays.items()
        ],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for arr in params.arrays.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointMismatchError(f"{path}: not a checkpoint file")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        try:
            header = json.loads(fh.read(header_len).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointMismatchError(f"{path}: corrupt header: {exc}") from exc
        if header.get("format_version") != FORMAT_VERSION:
            raise CheckpointMismatchError(
                f"{path}: unsupported format version {header.get('format_version')!r}"
            )
        arrays = {}
        for spec in header["tensors"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise CheckpointMismatchError(f"{path}: truncated tensor {spec['name']!r}")
            arrays[spec["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        if fh.read(1):
            raise CheckpointMismatchError(f"{path}: trailing bytes after tensors")
    model = header["model"]
    params = ModelParams(
        kind=model["kind"],
        algebra=model["algebra"],
        dim=int(model["dim"]),
        n_entities=int(model["n_entities"]),
        n_relations=int(model["n_relations"]),
        wiring=dict(model["wiring"]),
        distance=model["distance"],
        arrays=arrays,
    )
    return Checkpoint(
        params=params,
        config=header["config"],
        seed=int(header["seed"]),
        entities=list(header["entities"]),
        relations=list(header["relations"]),
    )


def ensure_vocab_matches(ckpt: Checkpoint, entities, relations):
    """Refuse to apply a checkpoint trained over a different vocabulary."""
    if list(entities) != ckpt.entities:
        raise CheckpointMismatchError(
            f"entity vocabulary mismatch: checkpoint has {len(ckpt.entities)} "
            f"entities, dataset has {len(list(entities))}"
        )
    if list(relations) != ckpt.relations:
        raise CheckpointMismatchError(
            f"relation vocabulary mismatch: checkpoint has {len(ckpt.relations)} "
            f"relations, dataset has {len(list(relations))}"
        )
