"""Command line front end: train / eval / analyze / export.

Exit codes: 0 success, 2 configuration, 3 data, 4 divergence, 5 checkpoint
(including vocabulary mismatch).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

import numpy as np

from .analysis import export_embeddings, part_cosine_matrix, shapley_sentence_importance
from .checkpoint import ensure_vocab_matches, load_checkpoint, save_checkpoint
from .config import apply_overrides, build_run_config, config_echo, parse_config_text
from .data import load_dataset
from .errors import (
    CannotSampleError,
    CheckpointMismatchError,
    ConfigError,
    DivergedError,
    DuplicateKeyError,
    ParseError,
    UnknownEntityError,
    WrongSourceError,
)
from .evaluation import evaluate
from .models import ROTATION_KINDS, required_sources
from .text import load_sentence_table, load_text_table
from .training import train
from . import reporting

logger = logging.getLogger(__name__)

_DATA_ERRORS = (ParseError, UnknownEntityError, DuplicateKeyError, WrongSourceError, CannotSampleError)


def _resolved_config(args):
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    raw = parse_config_text(text, origin=args.config)
    raw = apply_overrides(raw, args.set or [])
    cfg = build_run_config(raw)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
        cfg.validate()
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    return cfg


def _load_graph(cfg):
    for key in ("train", "valid", "test"):
        if key not in cfg.paths:
            raise ConfigError(f"config is missing the {key!r} path")
    return load_dataset(cfg.paths["train"], cfg.paths["valid"], cfg.paths["test"])


def _load_tables(cfg, entities):
    needed = required_sources(cfg.model_kind, cfg.wiring())
    tables = {}
    for source in needed:
        path = cfg.paths.get(source)
        if path is None:
            raise ConfigError(
                f"model {cfg.model_kind!r} needs an emb_{source} path in the config"
            )
        tables[source] = load_text_table(path, source, entities)
    sent_path = cfg.paths.get("sentence_sentences")
    if sent_path is not None and "sentence" in tables:
        vectors = load_sentence_table(sent_path, "sentence", entities)
        if vectors:
            got = next(iter(vectors.values())).shape[1]
            if got != tables["sentence"].dim:
                raise ConfigError(
                    f"per-sentence vectors have dim {got}, table has {tables['sentence'].dim}"
                )
        tables["sentence"] = dataclasses.replace(tables["sentence"], sentence_vectors=vectors)
    return tables


def _load_run(args):
    cfg = _resolved_config(args)
    dataset = _load_graph(cfg)
    ckpt = load_checkpoint(args.checkpoint)
    ensure_vocab_matches(ckpt, dataset.entities, dataset.relations)
    tables = _load_tables(cfg, dataset.entities)
    return cfg, dataset, ckpt, tables


def cmd_train(args) -> int:
    cfg = _resolved_config(args)
    dataset = _load_graph(cfg)
    tables = _load_tables(cfg, dataset.entities)
    params, log = train(cfg, dataset, tables)
    os.makedirs(cfg.out_dir, exist_ok=True)
    echo = config_echo(cfg)
    reporting.write_json(os.path.join(cfg.out_dir, "run_config.json"), echo)
    reporting.write_training_log(os.path.join(cfg.out_dir, "train_log.jsonl"), log)
    # threads and out_dir cannot change the learned arrays; keeping them out
    # of the header keeps checkpoints byte-identical across worker counts
    ckpt_config = {k: v for k, v in echo.items() if k not in ("threads", "out_dir")}
    save_checkpoint(
        os.path.join(cfg.out_dir, "checkpoint.bin"),
        params,
        config=ckpt_config,
        seed=cfg.seed,
        entities=dataset.entities,
        relations=dataset.relations,
    )
    if log:
        reporting.training_curve_figure(log, os.path.join(cfg.out_dir, "training_curve.png"))
        best = max((r["val_mrr"] for r in log if r["val_mrr"] is not None), default=None)
        rows = [
            ("epochs", str(log[-1]["epoch"])),
            ("final mean loss", f"{log[-1]['mean_loss']:.6f}"),
            ("best valid MRR", "n/a" if best is None else f"{best:.6f}"),
        ]
        print(reporting.format_table(rows, headers=("quantity", "value")))
    print(f"wrote {cfg.out_dir}/checkpoint.bin")
    return 0


def cmd_eval(args) -> int:
    cfg, dataset, ckpt, tables = _load_run(args)
    report = evaluate(ckpt.params, tables, dataset, split=args.split)
    os.makedirs(cfg.out_dir, exist_ok=True)
    reporting.write_json(os.path.join(cfg.out_dir, "eval.json"), report.to_dict())
    reporting.write_eval_tsv(os.path.join(cfg.out_dir, "eval.tsv"), report)
    reporting.eval_metrics_figure(report, os.path.join(cfg.out_dir, "eval_metrics.png"))
    print(reporting.format_table(reporting.eval_rows(report)))
    return 0


def cmd_analyze(args) -> int:
    cfg, dataset, ckpt, tables = _load_run(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    wrote_something = False
    if ckpt.params.kind in ROTATION_KINDS:
        matrix = part_cosine_matrix(ckpt.params, tables, dataset, split=args.split)
        reporting.write_part_cosine_tsv(os.path.join(cfg.out_dir, "part_cosine.tsv"), matrix)
        reporting.part_cosine_figure(matrix, os.path.join(cfg.out_dir, "part_cosine.png"))
        print("part-wise mean cosines (rows: query, cols: tail)")
        print(np.array2string(matrix, precision=4))
        wrote_something = True
    else:
        print(f"part cosines are undefined for model kind {ckpt.params.kind!r}; skipping")
    if args.head is not None or args.relation is not None or args.tail is not None:
        if None in (args.head, args.relation, args.tail):
            raise ConfigError("sentence attribution needs --head, --relation and --tail together")
        try:
            h = dataset.entity_index[args.head]
        except KeyError:
            raise UnknownEntityError(f"unknown entity {args.head!r}") from None
        try:
            t = dataset.entity_index[args.tail]
        except KeyError:
            raise UnknownEntityError(f"unknown entity {args.tail!r}") from None
        try:
            r = dataset.relation_index[args.relation]
        except KeyError:
            raise UnknownEntityError(f"unknown relation {args.relation!r}") from None
        phi = shapley_sentence_importance(
            ckpt.params, tables, h, r, t, entity=args.for_entity, source=args.source
        )
        reporting.write_shapley_tsv(os.path.join(cfg.out_dir, "shapley.tsv"), phi)
        reporting.shapley_figure(phi, os.path.join(cfg.out_dir, "shapley.png"))
        rows = [(str(i), f"{v:+.6f}") for i, v in enumerate(phi)]
        print(reporting.format_table(rows, headers=("sentence", "shapley")))
        wrote_something = True
    if not wrote_something:
        raise ConfigError("nothing to analyze for this model; pass a triple for attribution")
    return 0


def cmd_export(args) -> int:
    cfg, dataset, ckpt, tables = _load_run(args)
    out_path = args.out or os.path.join(cfg.out_dir, "embeddings.tsv")
    out_parent = os.path.dirname(out_path)
    if out_parent:
        os.makedirs(out_parent, exist_ok=True)
    export_embeddings(ckpt.params, tables, dataset.entities, out_path)
    print(f"wrote {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hkge",
        description="train and inspect hypercomplex knowledge-graph embeddings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, checkpoint=False):
        p.add_argument("--config", required=True, help="key=value run configuration file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out-dir", default=None)
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry; repeatable")
        if checkpoint:
            p.add_argument("--checkpoint", required=True)

    p_train = sub.add_parser("train", help="train a model and write a checkpoint")
    common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="filtered link-prediction metrics")
    common(p_eval, checkpoint=True)
    p_eval.add_argument("--split", default="test", choices=("train", "valid", "test"))
    p_eval.set_defaults(func=cmd_eval)

    p_an = sub.add_parser("analyze", help="part cosines and sentence attribution")
    common(p_an, checkpoint=True)
    p_an.add_argument("--split", default="test", choices=("train", "valid", "test"))
    p_an.add_argument("--head", default=None)
    p_an.add_argument("--relation", default=None)
    p_an.add_argument("--tail", default=None)
    p_an.add_argument("--for-entity", default="head", choices=("head", "tail"))
    p_an.add_argument("--source", default="sentence")
    p_an.set_defaults(func=cmd_analyze)

    p_exp = sub.add_parser("export", help="write entity vectors in the embedding table format")
    common(p_exp, checkpoint=True)
    p_exp.add_argument("--out", default=None)
    p_exp.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except CheckpointMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
