"""Quaternion and Dihedron arithmetic over D-dimensional coordinate blocks.

A hypercomplex vector u = s + x i + y j + z k holds four real blocks of equal
length D; every product/norm acts independently at each coordinate index, so
all operations vectorize across D (and across any leading batch axes).

The two algebras share the basis {1, i, j, k} and differ only in the sign
rules:

    Quaternion:  i^2 = j^2 = k^2 = -1,  ij = k, jk = i, ki = j
    Dihedron:    i^2 = -1, j^2 = k^2 = +1,  ij = k, jk = -i, ki = j

Products are encoded once in PRODUCT_TABLES and consumed both here and by the
training graph builder, so there is exactly one definition of each algebra.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVectorError, DimensionMismatchError, IndefiniteNormError

QUATERNION = "quaternion"
DIHEDRON = "dihedron"
ALGEBRAS = (QUATERNION, DIHEDRON)

# Normalization reports degeneracy below this instead of amplifying noise.
EPS_NORM = 1e-12

# PRODUCT_TABLES[algebra][out_block] = ((sign, a_block, b_block), ...) meaning
# out[out_block] = sum(sign * a[a_block] * b[b_block]).  Blocks: 0=s 1=x 2=y 3=z.
PRODUCT_TABLES = {
    QUATERNION: (
        ((+1, 0, 0), (-1, 1, 1), (-1, 2, 2), (-1, 3, 3)),
        ((+1, 0, 1), (+1, 1, 0), (+1, 2, 3), (-1, 3, 2)),
        ((+1, 0, 2), (-1, 1, 3), (+1, 2, 0), (+1, 3, 1)),
        ((+1, 0, 3), (+1, 1, 2), (-1, 2, 1), (+1, 3, 0)),
    ),
    DIHEDRON: (
        ((+1, 0, 0), (-1, 1, 1), (+1, 2, 2), (+1, 3, 3)),
        ((+1, 0, 1), (+1, 1, 0), (-1, 2, 3), (+1, 3, 2)),
        ((+1, 0, 2), (-1, 1, 3), (+1, 2, 0), (+1, 3, 1)),
        ((+1, 0, 3), (+1, 1, 2), (-1, 2, 1), (+1, 3, 0)),
    ),
}


def product_blocks(algebra, u_blocks, v_blocks, add, sub, mul):
    """Apply the product table of `algebra` to two 4-tuples of block values.

    `add`/`sub`/`mul` are injected so the same table drives both plain numpy
    arrays and autodiff graph nodes.  Returns a 4-tuple in block order.
    """
    table = PRODUCT_TABLES[algebra]
    out = []
    for row in table:
        # Both tables lead each row with a +1 term (the s_u * v_blocks term).
        sign, a, b = row[0]
        assert sign > 0
        acc = mul(u_blocks[a], v_blocks[b])
        for sign, a, b in row[1:]:
            term = mul(u_blocks[a], v_blocks[b])
            acc = add(acc, term) if sign > 0 else sub(acc, term)
        out.append(acc)
    return tuple(out)


@dataclass(frozen=True)
class HVec:
    """Four equally shaped real blocks tagged with an algebra kind.

    Blocks may carry leading batch axes; the trailing axis is the coordinate
    index D.  Values are validated to be finite float64 on construction.
    """

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    algebra: str

    def __post_init__(self):
        if self.algebra not in ALGEBRAS:
            raise DimensionMismatchError(f"unknown algebra kind {self.algebra!r}")
        blocks = []
        for name in ("s", "x", "y", "z"):
            b = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, b)
            blocks.append(b)
        shape = blocks[0].shape
        if len(shape) == 0:
            raise DimensionMismatchError("blocks must have at least one axis (length D)")
        for name, b in zip(("s", "x", "y", "z"), blocks):
            if b.shape != shape:
                raise DimensionMismatchError(
                    f"block {name} has shape {b.shape}, expected {shape}"
                )
            if not np.all(np.isfinite(b)):
                raise ValueError(f"block {name} contains non-finite values")

    @property
    def blocks(self):
        return (self.s, self.x, self.y, self.z)

    @property
    def dim(self) -> int:
        return self.s.shape[-1]


def _check_pair(u: HVec, v: HVec):
    if u.algebra != v.algebra:
        raise DimensionMismatchError(
            f"algebra mismatch: {u.algebra} vs {v.algebra}"
        )
    if u.s.shape != v.s.shape:
        raise DimensionMismatchError(
            f"shape mismatch: {u.s.shape} vs {v.s.shape}"
        )


def hmul(u: HVec, v: HVec) -> HVec:
    """Hypercomplex product, dispatched on the shared algebra kind."""
    _check_pair(u, v)
    out = product_blocks(u.algebra, u.blocks, v.blocks, np.add, np.subtract, np.multiply)
    return HVec(*out, algebra=u.algebra)


def inner(u: HVec, v: HVec) -> np.ndarray:
    """Per-index inner product s_u s_v + x_u x_v + y_u y_v + z_u z_v."""
    _check_pair(u, v)
    return u.s * v.s + u.x * v.x + u.y * v.y + u.z * v.z


def conjugate(u: HVec) -> HVec:
    return HVec(u.s, -u.x, -u.y, -u.z, algebra=u.algebra)


def paper_norm(u: HVec) -> np.ndarray:
    """The literal per-algebra norm.

    Quaternion: sqrt(s^2 + x^2 + y^2 + z^2).  Dihedron: sqrt(s^2 + x^2 - y^2
    - z^2), which is indefinite; a negative radicand raises rather than
    returning NaN.  Normalization never uses this (see normalize).
    """
    if u.algebra == QUATERNION:
        return np.sqrt(u.s**2 + u.x**2 + u.y**2 + u.z**2)
    radicand = u.s**2 + u.x**2 - u.y**2 - u.z**2
    bad = radicand < 0
    if np.any(bad):
        idx = int(np.argmax(bad.reshape(-1)))
        raise IndefiniteNormError(idx, float(radicand.reshape(-1)[idx]))
    return np.sqrt(radicand)


def euclidean_norm(u: HVec) -> np.ndarray:
    return np.sqrt(u.s**2 + u.x**2 + u.y**2 + u.z**2)


def normalize(u: HVec) -> HVec:
    """Divide all four blocks by the per-index Euclidean 4-norm.

    The Euclidean norm is used for both algebras: the Dihedron norm is
    indefinite and unusable as a divisor.  Per-index norms below EPS_NORM are
    degenerate and rejected.
    """
    n = euclidean_norm(u)
    if np.any(n < EPS_NORM):
        flat = n.reshape(-1)
        idx = int(np.argmin(flat))
        raise DegenerateVectorError(
            f"norm {flat[idx]:.3g} < {EPS_NORM} at coordinate index {idx}"
        )
    return HVec(u.s / n, u.x / n, u.y / n, u.z / n, algebra=u.algebra)


def hadd(u: HVec, v: HVec) -> HVec:
    _check_pair(u, v)
    return HVec(u.s + v.s, u.x + v.x, u.y + v.y, u.z + v.z, algebra=u.algebra)


def hsub(u: HVec, v: HVec) -> HVec:
    _check_pair(u, v)
    return HVec(u.s - v.s, u.x - v.x, u.y - v.y, u.z - v.z, algebra=u.algebra)


def sq_distance(u: HVec, v: HVec) -> float:
    """Sum of squared differences over all 4*D components (scalar per batch)."""
    _check_pair(u, v)
    d = (
        np.sum((u.s - v.s) ** 2, axis=-1)
        + np.sum((u.x - v.x) ** 2, axis=-1)
        + np.sum((u.y - v.y) ** 2, axis=-1)
        + np.sum((u.z - v.z) ** 2, axis=-1)
    )
    return float(d) if np.ndim(d) == 0 else d


def basis(algebra: str, which: str, dim: int = 1) -> HVec:
    """Unit basis element ('1', 'i', 'j' or 'k') replicated across D indices."""
    slot = {"1": 0, "i": 1, "j": 2, "k": 3}[which]
    blocks = [np.zeros(dim) for _ in range(4)]
    blocks[slot] = np.ones(dim)
    return HVec(*blocks, algebra=algebra)
