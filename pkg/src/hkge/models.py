"""Entity/relation/query construction and triple scoring for all model kinds.

Model kinds
-----------
tetra        entity = (s_e, NN1(text1), NN2(text2), NN3(text3)) on both the
             head and tail side; query q = h (x) r_normalized.
tetra_zero   all four entity blocks are free graph parameters; same query.
robin        head/tail entities are the free graph blocks; the head's name
             and description are adjusted into a rotor h_lt = (s^name,
             x^name, y^desc, z^desc) and the same four adjusted vectors act
             as translations, q = h (x) h_lt_norm + h_l + h_t + r_norm.
lion         structurally identical to robin, but both text inputs are the
             same description embedded by two different sources.
transe       translation baseline on the s-blocks, -|h + r - t|^2 + b_h + b_t.
transe_concat  the entity vector is one adjuster applied to the concatenation
             of all four text sources (fixed order word2vec, fasttext,
             doc2vec, sentence), scored like transe.

Every score is f(h,r,t) = -d(q, tail) + b_h[h] + b_t[t] with d the squared
(default) or plain Euclidean distance over all 4*D coordinates.

The same assembly code drives two backends: plain numpy for scoring and
evaluation, and the autodiff tape for training.  Both consume the one
product table in `algebra`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .algebra import ALGEBRAS, EPS_NORM, HVec, normalize, product_blocks
from .errors import ConfigError, DegenerateVectorError, UnknownEntityError
from .text import CONCAT_ORDER, TextTable

BLOCKS4 = ("s", "x", "y", "z")

MODEL_KINDS = ("tetra", "tetra_zero", "robin", "lion", "transe", "transe_concat")
ROTATION_KINDS = ("tetra", "tetra_zero", "robin", "lion")
TRANSLATION_KINDS = ("transe", "transe_concat")

# Which entity blocks are free graph parameters, per kind.
ENTITY_BLOCK_KEYS = {
    "tetra": ("s",),
    "tetra_zero": BLOCKS4,
    "robin": BLOCKS4,
    "lion": BLOCKS4,
    "transe": ("s",),
    "transe_concat": (),
}

RELATION_BLOCK_KEYS = {kind: BLOCKS4 for kind in ROTATION_KINDS}
RELATION_BLOCK_KEYS.update({kind: ("s",) for kind in TRANSLATION_KINDS})

# Adjuster slots per kind; robin/lion slots name the rotor block they fill.
ADJUSTER_SLOTS = {
    "tetra": ("x", "y", "z"),
    "tetra_zero": (),
    "robin": BLOCKS4,
    "lion": BLOCKS4,
    "transe": (),
    "transe_concat": ("cat",),
}


def resolve_wiring(kind: str, *, tetra_sources=None, robin_desc_source=None, lion_sources=None) -> dict[str, str]:
    """Map adjuster slots to text-source ids for a model kind.

    robin always reads entity names through word2vec for the (s, x) slots;
    its description source and lion's two sources are configurable.
    """
    if kind == "tetra":
        sources = tuple(tetra_sources or ("word2vec", "sentence", "doc2vec"))
        if len(sources) != 3:
            raise ConfigError(f"tetra needs exactly 3 text sources, got {sources!r}")
        return {"x": sources[0], "y": sources[1], "z": sources[2]}
    if kind == "robin":
        desc = robin_desc_source or "sentence"
        return {"s": "word2vec", "x": "word2vec", "y": desc, "z": desc}
    if kind == "lion":
        pair = tuple(lion_sources or ("sentence", "doc2vec"))
        if len(pair) != 2:
            raise ConfigError(f"lion needs exactly 2 text sources, got {pair!r}")
        if pair[0] == pair[1]:
            raise ConfigError("lion's two sources must differ")
        return {"s": pair[0], "x": pair[0], "y": pair[1], "z": pair[1]}
    if kind == "transe_concat":
        return {"cat": "concat"}
    if kind in ("tetra_zero", "transe"):
        return {}
    raise ConfigError(f"unknown model kind {kind!r}")


def required_sources(kind: str, wiring: dict[str, str]) -> set[str]:
    if kind == "transe_concat":
        return set(CONCAT_ORDER)
    return set(wiring.values())


@dataclass
class ModelParams:
    """All trainable state plus the metadata needed to rebuild the graphs.

    `arrays` is insertion-ordered and that order is the checkpoint manifest.
    """

    kind: str
    algebra: str
    dim: int
    n_entities: int
    n_relations: int
    wiring: dict[str, str]
    distance: str  # "squared" | "plain"
    arrays: dict[str, np.ndarray]

    def copy(self) -> "ModelParams":
        return ModelParams(
            kind=self.kind,
            algebra=self.algebra,
            dim=self.dim,
            n_entities=self.n_entities,
            n_relations=self.n_relations,
            wiring=dict(self.wiring),
            distance=self.distance,
            arrays={k: v.copy() for k, v in self.arrays.items()},
        )


@dataclass
class Query:
    q: HVec
    head_index: int
    relation_index: int


def _slot_raw_matrix(slot: str, wiring: dict[str, str], tables: dict[str, TextTable]) -> np.ndarray:
    if slot == "cat":
        missing = [s for s in CONCAT_ORDER if s not in tables]
        if missing:
            raise ConfigError(f"feature concatenation needs tables {missing}")
        return np.concatenate([tables[s].vectors for s in CONCAT_ORDER], axis=1)
    source = wiring[slot]
    if source not in tables:
        raise ConfigError(f"model needs text table {source!r} for slot {slot!r}")
    return tables[source].vectors


def init_params(
    kind: str,
    algebra: str,
    dim: int,
    n_entities: int,
    n_relations: int,
    tables: dict[str, TextTable],
    wiring: dict[str, str],
    rng: np.random.Generator,
    init_scale: float = 1e-3,
    distance: str = "squared",
) -> ModelParams:
    """Fresh parameters; rng is consumed in fixed manifest order."""
    if kind not in MODEL_KINDS:
        raise ConfigError(f"unknown model kind {kind!r}")
    if algebra not in ALGEBRAS:
        raise ConfigError(f"unknown algebra {algebra!r}")
    if distance not in ("squared", "plain"):
        raise ConfigError(f"distance must be 'squared' or 'plain', got {distance!r}")
    arrays: dict[str, np.ndarray] = {}
    for key in ENTITY_BLOCK_KEYS[kind]:
        arrays[f"entity.{key}"] = rng.normal(0.0, init_scale, size=(n_entities, dim))
    for key in RELATION_BLOCK_KEYS[kind]:
        arrays[f"relation.{key}"] = rng.normal(0.0, init_scale, size=(n_relations, dim))
    arrays["bias_head"] = np.zeros(n_entities)
    arrays["bias_tail"] = np.zeros(n_entities)
    for slot in ADJUSTER_SLOTS[kind]:
        d_in = _slot_raw_matrix(slot, wiring, tables).shape[1]
        limit1 = np.sqrt(6.0 / (d_in + dim))
        limit2 = np.sqrt(6.0 / (dim + dim))
        arrays[f"adj.{slot}.W1"] = rng.uniform(-limit1, limit1, size=(d_in, dim))
        arrays[f"adj.{slot}.b1"] = np.zeros(dim)
        arrays[f"adj.{slot}.W2"] = rng.uniform(-limit2, limit2, size=(dim, dim))
        arrays[f"adj.{slot}.b2"] = np.zeros(dim)
    return ModelParams(
        kind=kind,
        algebra=algebra,
        dim=dim,
        n_entities=n_entities,
        n_relations=n_relations,
        wiring=dict(wiring),
        distance=distance,
        arrays=arrays,
    )


# ---------------------------------------------------------------------------
# Backend namespaces.  The tape backend clamps degenerate norms (training must
# not blow up); the numpy backend raises instead, matching the pure API
# contract.


class _NumpyOps:
    strict_norm = True

    @staticmethod
    def const(x):
        return np.asarray(x, dtype=np.float64)

    add = staticmethod(np.add)
    sub = staticmethod(np.subtract)
    mul = staticmethod(np.multiply)
    div = staticmethod(np.divide)
    neg = staticmethod(np.negative)
    tanh = staticmethod(np.tanh)

    @staticmethod
    def matmul(a, b):
        return a @ b

    @staticmethod
    def square(x):
        return x * x

    @staticmethod
    def sqrt_clamped(x):
        return np.sqrt(x)

    @staticmethod
    def clamp_min(x, floor):
        return np.maximum(x, floor)

    @staticmethod
    def asum(x, axis=None, keepdims=False):
        return np.sum(x, axis=axis, keepdims=keepdims)

    @staticmethod
    def gather(x, idx):
        return x[np.asarray(idx)]

    @staticmethod
    def expand_dims(x, axis):
        return np.expand_dims(x, axis)


class _TapeOps:
    strict_norm = False

    const = staticmethod(ad.const)
    add = staticmethod(ad.add)
    sub = staticmethod(ad.sub)
    mul = staticmethod(ad.mul)
    div = staticmethod(ad.div)
    neg = staticmethod(ad.neg)
    tanh = staticmethod(ad.tanh)
    matmul = staticmethod(ad.matmul)
    square = staticmethod(ad.square)
    sqrt_clamped = staticmethod(ad.sqrt_clamped)
    clamp_min = staticmethod(ad.clamp_min)
    asum = staticmethod(ad.asum)
    gather = staticmethod(ad.gather)
    expand_dims = staticmethod(ad.expand_dims)


NUMPY_OPS = _NumpyOps()
TAPE_OPS = _TapeOps()


def _value(x):
    return x.value if isinstance(x, ad.Node) else x


def _normalize4(ops, blocks):
    """Divide four blocks by their per-index Euclidean 4-norm.

    Strict backends reject degenerate indices; the tape backend clamps the
    denominator at EPS_NORM so gradients stay finite near zero.
    """
    nsq = ops.add(
        ops.add(ops.square(blocks[0]), ops.square(blocks[1])),
        ops.add(ops.square(blocks[2]), ops.square(blocks[3])),
    )
    norm = ops.sqrt_clamped(nsq)
    if ops.strict_norm and np.any(_value(norm) < EPS_NORM):
        raise DegenerateVectorError(
            f"rotor norm below {EPS_NORM} at some coordinate index"
        )
    denom = ops.clamp_min(norm, EPS_NORM)
    return [ops.div(b, denom) for b in blocks]


def _adjusted_all(ops, arrays, slot: str, raw: np.ndarray):
    """Adjust every entity's raw text vector for one slot: (n_e, D)."""
    hidden = ops.tanh(
        ops.add(ops.matmul(ops.const(raw), arrays[f"adj.{slot}.W1"]), arrays[f"adj.{slot}.b1"])
    )
    return ops.tanh(
        ops.add(ops.matmul(hidden, arrays[f"adj.{slot}.W2"]), arrays[f"adj.{slot}.b2"])
    )


@dataclass
class GraphContext:
    """Precomputed per-backend tensors shared by all scoring calls.

    entity_blocks are the tail-side representations for every entity; for
    robin/lion `adjusted` additionally holds the head-side text adjustments
    feeding the rotor and translations.
    """

    kind: str
    algebra: str
    distance: str
    n_entities: int
    arrays: dict
    entity_blocks: list
    adjusted: dict


def build_context(params: ModelParams, tables: dict[str, TextTable], ops=NUMPY_OPS, arrays=None) -> GraphContext:
    arrays = params.arrays if arrays is None else arrays
    kind = params.kind
    adjusted: dict[str, object] = {}
    for slot in ADJUSTER_SLOTS[kind]:
        raw = _slot_raw_matrix(slot, params.wiring, tables)
        adjusted[slot] = _adjusted_all(ops, arrays, slot, raw)
    if kind == "tetra":
        entity_blocks = [arrays["entity.s"], adjusted["x"], adjusted["y"], adjusted["z"]]
    elif kind == "transe_concat":
        entity_blocks = [adjusted["cat"]]
    else:
        entity_blocks = [arrays[f"entity.{k}"] for k in ENTITY_BLOCK_KEYS[kind]]
    return GraphContext(
        kind=kind,
        algebra=params.algebra,
        distance=params.distance,
        n_entities=params.n_entities,
        arrays=arrays,
        entity_blocks=entity_blocks,
        adjusted=adjusted,
    )


def query_blocks(ops, ctx: GraphContext, h_idx, r_idx):
    """Query representation blocks for a batch of (head, relation) pairs."""
    kind = ctx.kind
    if kind in ("transe", "transe_concat"):
        h_s = ops.gather(ctx.entity_blocks[0], h_idx)
        r_s = ops.gather(ctx.arrays["relation.s"], r_idx)
        return [ops.add(h_s, r_s)]
    head = [ops.gather(b, h_idx) for b in ctx.entity_blocks]
    rel = [ops.gather(ctx.arrays[f"relation.{k}"], r_idx) for k in BLOCKS4]
    rel_n = _normalize4(ops, rel)
    if kind in ("tetra", "tetra_zero"):
        return list(product_blocks(ctx.algebra, head, rel_n, ops.add, ops.sub, ops.mul))
    # robin / lion: rotate by the normalized text rotor, then translate by the
    # unnormalized rotor blocks (h_l + h_t) and the normalized relation.
    rotor = [ops.gather(ctx.adjusted[k], h_idx) for k in BLOCKS4]
    rotor_n = _normalize4(ops, rotor)
    rotated = product_blocks(ctx.algebra, head, rotor_n, ops.add, ops.sub, ops.mul)
    return [ops.add(ops.add(rotated[i], rotor[i]), rel_n[i]) for i in range(4)]


def _distance(ops, ctx: GraphContext, q_blocks, t_blocks, insert_axis: bool):
    """d(q, t) summed over all blocks; optionally broadcast q against many tails."""
    total = None
    for qb, tb in zip(q_blocks, t_blocks):
        if insert_axis:
            qb = ops.expand_dims(qb, 1)
        diff = ops.sub(qb, tb)
        part = ops.asum(ops.square(diff), axis=-1)
        total = part if total is None else ops.add(total, part)
    if ctx.distance == "plain":
        total = ops.sqrt_clamped(total)
    return total


def scores_for_tails(ops, ctx: GraphContext, h_idx, r_idx, t_idx):
    """Scores of given tails; t_idx of shape (B,) or (B, n) for negatives."""
    t_idx = np.asarray(t_idx)
    q = query_blocks(ops, ctx, h_idx, r_idx)
    tails = [ops.gather(b, t_idx) for b in ctx.entity_blocks]
    batched = t_idx.ndim == 2
    dist = _distance(ops, ctx, q, tails, insert_axis=batched)
    bh = ops.gather(ctx.arrays["bias_head"], h_idx)
    if batched:
        bh = ops.expand_dims(bh, 1)
    bt = ops.gather(ctx.arrays["bias_tail"], t_idx)
    return ops.add(ops.add(ops.neg(dist), bh), bt)


def scores_all_tails(ops, ctx: GraphContext, h_idx, r_idx):
    """Scores of every entity as tail: (B, n_entities)."""
    q = query_blocks(ops, ctx, h_idx, r_idx)
    dist = _distance(ops, ctx, q, ctx.entity_blocks, insert_axis=True)
    bh = ops.expand_dims(ops.gather(ctx.arrays["bias_head"], h_idx), 1)
    return ops.add(ops.add(ops.neg(dist), bh), ctx.arrays["bias_tail"])


# ---------------------------------------------------------------------------
# Pure numpy API.


def _check_entity(params: ModelParams, e: int):
    if not 0 <= e < params.n_entities:
        raise UnknownEntityError(f"entity index {e} out of range [0, {params.n_entities})")


def _check_relation(params: ModelParams, r: int):
    if not 0 <= r < params.n_relations:
        raise UnknownEntityError(f"relation index {r} out of range [0, {params.n_relations})")


def entity_rep(params: ModelParams, tables: dict[str, TextTable], e: int) -> HVec:
    """Tail-side representation of one entity as an HVec.

    Translation kinds have a single live block; the remaining blocks are
    zero by construction.
    """
    _check_entity(params, e)
    ctx = build_context(params, tables)
    blocks = [np.asarray(b[e]) for b in ctx.entity_blocks]
    while len(blocks) < 4:
        blocks.append(np.zeros_like(blocks[0]))
    return HVec(*blocks, algebra=params.algebra)


def relation_rep(params: ModelParams, r: int) -> HVec:
    """Rotation kinds return the normalized rotor; translation kinds the raw
    s-block translation vector (normalizing a translation would change the
    model)."""
    _check_relation(params, r)
    if params.kind in TRANSLATION_KINDS:
        s = params.arrays["relation.s"][r]
        zero = np.zeros_like(s)
        return HVec(s, zero, zero, zero, algebra=params.algebra)
    raw = HVec(*[params.arrays[f"relation.{k}"][r] for k in BLOCKS4], algebra=params.algebra)
    return normalize(raw)


def make_query(params: ModelParams, tables: dict[str, TextTable], h: int, r: int) -> Query:
    _check_entity(params, h)
    _check_relation(params, r)
    ctx = build_context(params, tables)
    blocks = query_blocks(NUMPY_OPS, ctx, np.array([h]), np.array([r]))
    blocks = [np.asarray(b[0]) for b in blocks]
    while len(blocks) < 4:
        blocks.append(np.zeros_like(blocks[0]))
    return Query(q=HVec(*blocks, algebra=params.algebra), head_index=h, relation_index=r)


def score(params: ModelParams, tables: dict[str, TextTable], h: int, r: int, t: int) -> float:
    _check_entity(params, h)
    _check_entity(params, t)
    _check_relation(params, r)
    ctx = build_context(params, tables)
    out = scores_for_tails(NUMPY_OPS, ctx, np.array([h]), np.array([r]), np.array([t]))
    return float(out[0])


def score_all_tails(params: ModelParams, tables: dict[str, TextTable], h: int, r: int) -> np.ndarray:
    _check_entity(params, h)
    _check_relation(params, r)
    ctx = build_context(params, tables)
    return np.asarray(scores_all_tails(NUMPY_OPS, ctx, np.array([h]), np.array([r]))[0])


def concat_features(tables: dict[str, TextTable], e: int) -> np.ndarray:
    """Concatenation of the four raw source vectors in fixed order."""
    missing = [s for s in CONCAT_ORDER if s not in tables]
    if missing:
        raise ConfigError(f"feature concatenation needs tables {missing}")
    return np.concatenate([tables[s].vectors[e] for s in CONCAT_ORDER])
