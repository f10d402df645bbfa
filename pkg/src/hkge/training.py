"""Negative sampling, losses, Adagrad and the epoch loop with early stopping.

Two loss forms, selected by the negatives count n:

    n >= 1   mean over examples of softplus(-f_pos) plus the mean over the n
             sampled negatives of softplus(f_neg) (binary cross-entropy on
             the signed score, numerically stable form);
    n == -1  mean softmax cross-entropy of the true tail against the scores
             of every entity.

Gradient computation may fan out over worker threads.  The batch is cut into
fixed-size chunks regardless of the thread count and chunk results are
reduced in chunk order, so the floating-point result is bit-identical for
any --threads value; all RNG draws happen on the main thread.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .data import Dataset
from .errors import CannotSampleError, ConfigError, DivergedError
from .evaluation import evaluate
from .models import (
    ModelParams,
    TAPE_OPS,
    build_context,
    init_params,
    resolve_wiring,
    scores_all_tails,
    scores_for_tails,
)
from .text import TextTable

logger = logging.getLogger(__name__)

# Examples per gradient chunk; independent of the worker count on purpose.
CHUNK_SIZE = 256


@dataclass
class RunConfig:
    model_kind: str = "tetra_zero"
    algebra: str = "dihedron"
    dim: int = 32
    batch_size: int = 400
    learning_rate: float = 0.01
    negatives: int = 100  # -1 = full softmax over all tails
    max_epochs: int = 500
    eval_every: int = 5
    patience: int = 10  # evaluations without improvement before stopping
    seed: int = 0
    threads: int = 1
    distance: str = "squared"
    init_scale: float = 1e-3
    tetra_sources: tuple = ("word2vec", "sentence", "doc2vec")
    robin_desc_source: str = "sentence"
    lion_sources: tuple = ("sentence", "doc2vec")
    paths: dict = field(default_factory=dict)
    out_dir: str = "run"

    def validate(self):
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.negatives < 1 and self.negatives != -1:
            raise ConfigError(f"negatives must be >= 1 or -1, got {self.negatives}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.eval_every < 1:
            raise ConfigError(f"eval_every must be >= 1, got {self.eval_every}")
        if self.max_epochs < 0:
            raise ConfigError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")

    def wiring(self) -> dict[str, str]:
        return resolve_wiring(
            self.model_kind,
            tetra_sources=self.tetra_sources,
            robin_desc_source=self.robin_desc_source,
            lion_sources=self.lion_sources,
        )


@dataclass
class AdagradState:
    accum: dict[str, np.ndarray]
    eps: float = 1e-8

    @classmethod
    def fresh(cls, params: ModelParams) -> "AdagradState":
        return cls(accum={k: np.zeros_like(v) for k, v in params.arrays.items()})


def adagrad_step(params: ModelParams, grads: dict[str, np.ndarray], state: AdagradState, learning_rate: float):
    """G += g^2; theta -= lr * g / (sqrt(G) + eps), componentwise, in place."""
    for name, g in grads.items():
        G = state.accum[name]
        G += g * g
        params.arrays[name] -= learning_rate * g / (np.sqrt(G) + state.eps)


def sample_negatives(rng: np.random.Generator, positive, n: int, n_entities: int, filter_set) -> np.ndarray:
    """Uniform tail corruption with replacement, rejecting known-true tails.

    Up to 100*n draws are spent on rejection; any shortfall after that is
    filled with unrejected draws (logged), which only happens when the
    filter covers essentially every entity.
    """
    if n_entities < 2:
        raise CannotSampleError(
            f"cannot sample negatives with {n_entities} entity; need at least 2"
        )
    filter_arr = np.fromiter(filter_set, dtype=np.int64) if filter_set else np.empty(0, dtype=np.int64)
    out = np.empty(n, dtype=np.int64)
    have = 0
    drawn = 0
    budget = 100 * n
    while have < n and drawn < budget:
        chunk = rng.integers(0, n_entities, size=min(n, budget - drawn))
        drawn += chunk.size
        good = chunk[np.isin(chunk, filter_arr, invert=True)]
        take = good[: n - have]
        out[have : have + take.size] = take
        have += take.size
    if have < n:
        h, r, _ = positive
        logger.warning(
            "negative sampling for (%s, %s) exhausted %d draws; "
            "filling %d slots without filtering",
            h, r, budget, n - have,
        )
        out[have:] = rng.integers(0, n_entities, size=n - have)
    return out


def _chunk_loss(params: ModelParams, tables: dict[str, TextTable], batch: np.ndarray, negatives):
    """Sum of per-example losses over one chunk plus summed gradients."""
    arrays = {name: ad.Node(value) for name, value in params.arrays.items()}
    ctx = build_context(params, tables, ops=TAPE_OPS, arrays=arrays)
    h, r, t = batch[:, 0], batch[:, 1], batch[:, 2]
    if negatives is None:
        all_scores = scores_all_tails(TAPE_OPS, ctx, h, r)
        per_example = ad.sub(ad.logsumexp(all_scores, axis=-1), ad.pick(all_scores, t))
    else:
        pos = scores_for_tails(TAPE_OPS, ctx, h, r, t)
        neg = scores_for_tails(TAPE_OPS, ctx, h, r, negatives)
        per_example = ad.add(
            ad.softplus(ad.neg(pos)), ad.amean(ad.softplus(neg), axis=-1)
        )
    loss_sum = ad.asum(per_example)
    names = list(arrays)
    grads = ad.backward(loss_sum, [arrays[n] for n in names])
    return float(loss_sum.value), per_example.value, dict(zip(names, grads))


def _batch_sums(params, tables, batch, negatives, executor):
    """Chunked loss/gradient sums with a thread-count-independent reduction."""
    spans = [(s, min(s + CHUNK_SIZE, len(batch))) for s in range(0, len(batch), CHUNK_SIZE)]

    def run(span):
        s, e = span
        return _chunk_loss(params, tables, batch[s:e], None if negatives is None else negatives[s:e])

    results = list(executor.map(run, spans)) if executor else [run(sp) for sp in spans]
    loss_sum = 0.0
    per_example = np.concatenate([r[1] for r in results])
    grads: dict[str, np.ndarray] = {}
    for chunk_loss, _, chunk_grads in results:
        loss_sum += chunk_loss
        for name, g in chunk_grads.items():
            if name in grads:
                grads[name] = grads[name] + g
            else:
                grads[name] = g
    return loss_sum, per_example, grads


def batch_loss(params: ModelParams, tables: dict[str, TextTable], batch: np.ndarray, negatives=None):
    """Mean loss over a batch and mean-scaled gradients for every parameter.

    negatives: (B, n) tail indices for the sampled form, or None for the
    full-softmax form.
    """
    batch = np.asarray(batch)
    if batch.size == 0:
        raise ConfigError("batch must be nonempty")
    loss_sum, per_example, grads = _batch_sums(params, tables, batch, negatives, None)
    if not np.all(np.isfinite(per_example)):
        bad = int(np.argmax(~np.isfinite(per_example)))
        h, r, t = batch[bad]
        raise DivergedError(f"non-finite loss at triple ({h}, {r}, {t})")
    scale = 1.0 / len(batch)
    return loss_sum * scale, {k: g * scale for k, g in grads.items()}


def train(config: RunConfig, dataset: Dataset, tables: dict[str, TextTable]):
    """Run the full loop; returns (best params, per-epoch log records).

    Every eval_every epochs the filtered validation MRR is computed; the
    best-MRR snapshot is kept and training stops after `patience`
    evaluations without improvement, or at max_epochs.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    wiring = config.wiring()
    params = init_params(
        kind=config.model_kind,
        algebra=config.algebra,
        dim=config.dim,
        n_entities=dataset.n_entities,
        n_relations=dataset.n_relations,
        tables=tables,
        wiring=wiring,
        rng=rng,
        init_scale=config.init_scale,
        distance=config.distance,
    )
    log: list[dict] = []
    if config.max_epochs == 0:
        return params, log

    state = AdagradState.fresh(params)
    executor = ThreadPoolExecutor(max_workers=config.threads) if config.threads > 1 else None
    best_params = None
    best_mrr = -np.inf
    evals_since_best = 0
    train_set = dataset.train
    n_examples = len(train_set)
    use_full = config.negatives == -1

    try:
        for epoch in range(1, config.max_epochs + 1):
            t0 = time.perf_counter()
            perm = rng.permutation(n_examples)
            epoch_loss_sum = 0.0
            for start in range(0, n_examples, config.batch_size):
                batch = train_set[perm[start : start + config.batch_size]]
                if use_full:
                    negatives = None
                else:
                    negatives = np.stack(
                        [
                            sample_negatives(
                                rng,
                                tuple(row),
                                config.negatives,
                                dataset.n_entities,
                                dataset.filter_tails(int(row[0]), int(row[1])),
                            )
                            for row in batch
                        ]
                    )
                loss_sum, per_example, grads = _batch_sums(
                    params, tables, batch, negatives, executor
                )
                if not np.all(np.isfinite(per_example)):
                    bad = int(np.argmax(~np.isfinite(per_example)))
                    h, r, t = batch[bad]
                    raise DivergedError(
                        f"epoch {epoch}: non-finite loss at triple "
                        f"({dataset.entities[h]}, {dataset.relations[r]}, {dataset.entities[t]})"
                    )
                scale = 1.0 / len(batch)
                adagrad_step(params, {k: g * scale for k, g in grads.items()}, state, config.learning_rate)
                epoch_loss_sum += loss_sum

            mean_loss = epoch_loss_sum / n_examples
            val_mrr = None
            if epoch % config.eval_every == 0:
                report = evaluate(params, tables, dataset, "valid")
                val_mrr = report.mrr
                if val_mrr > best_mrr:
                    best_mrr = val_mrr
                    best_params = params.copy()
                    evals_since_best = 0
                else:
                    evals_since_best += 1
            log.append(
                {
                    "epoch": epoch,
                    "mean_loss": mean_loss,
                    "val_mrr": val_mrr,
                    "elapsed_ms": int(round((time.perf_counter() - t0) * 1000)),
                }
            )
            if val_mrr is not None and evals_since_best >= config.patience:
                break
    finally:
        if executor:
            executor.shutdown(wait=False)

    return (best_params if best_params is not None else params), log
