"""Flat key=value run configuration files.

Lines are `key = value`; '#' starts a comment, blank lines are skipped.
Unknown keys are rejected rather than ignored so a typo cannot silently
fall back to a default.  --set overrides reuse the same key names.
"""
from __future__ import annotations

from .algebra import ALGEBRAS
from .errors import ConfigError
from .models import MODEL_KINDS
from .training import RunConfig

_INT_KEYS = {"dim", "batch_size", "negatives", "max_epochs", "eval_every", "patience", "seed", "threads"}
_FLOAT_KEYS = {"learning_rate", "init_scale"}
_STR_KEYS = {"model", "algebra", "distance", "robin_desc_source", "out_dir"}
_LIST_KEYS = {"tetra_sources", "lion_sources"}
# config key -> name the loaders use for the table
_PATH_KEYS = {
    "train": "train",
    "valid": "valid",
    "test": "test",
    "names": "names",
    "descriptions": "descriptions",
    "emb_word2vec": "word2vec",
    "emb_fasttext": "fasttext",
    "emb_sentence": "sentence",
    "emb_doc2vec": "doc2vec",
    "emb_sentence_sentences": "sentence_sentences",
}
KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _LIST_KEYS | set(_PATH_KEYS)


def parse_config_text(text: str, origin: str = "<config>") -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{origin}:{lineno}: expected key = value, got {line.strip()!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def apply_overrides(raw: dict[str, str], overrides) -> dict[str, str]:
    out = dict(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"--set: unknown key {key!r}")
        out[key] = value.strip()
    return out


def build_run_config(raw: dict[str, str]) -> RunConfig:
    cfg = RunConfig()
    paths = dict(cfg.paths)
    for key, value in raw.items():
        if key in _INT_KEYS:
            try:
                setattr(cfg, key, int(value))
            except ValueError:
                raise ConfigError(f"{key}: expected an integer, got {value!r}") from None
        elif key in _FLOAT_KEYS:
            try:
                setattr(cfg, key, float(value))
            except ValueError:
                raise ConfigError(f"{key}: expected a number, got {value!r}") from None
        elif key in _LIST_KEYS:
            setattr(cfg, key, tuple(part.strip() for part in value.split(",") if part.strip()))
        elif key == "model":
            if value not in MODEL_KINDS:
                raise ConfigError(f"model: unknown kind {value!r}; expected one of {MODEL_KINDS}")
            cfg.model_kind = value
        elif key == "algebra":
            if value not in ALGEBRAS:
                raise ConfigError(f"algebra: expected one of {ALGEBRAS}, got {value!r}")
            cfg.algebra = value
        elif key == "distance":
            if value not in ("squared", "plain"):
                raise ConfigError(f"distance: expected 'squared' or 'plain', got {value!r}")
            cfg.distance = value
        elif key in _STR_KEYS:
            setattr(cfg, key, value)
        else:
            paths[_PATH_KEYS[key]] = value
    cfg.paths = paths
    cfg.validate()
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build_run_config(parse_config_text(text, origin=str(path)))


def config_echo(cfg: RunConfig) -> dict:
    """Resolved settings, JSON-ready, written next to every run's outputs."""
    return {
        "model": cfg.model_kind,
        "algebra": cfg.algebra,
        "dim": cfg.dim,
        "batch_size": cfg.batch_size,
        "learning_rate": cfg.learning_rate,
        "negatives": cfg.negatives,
        "max_epochs": cfg.max_epochs,
        "eval_every": cfg.eval_every,
        "patience": cfg.patience,
        "seed": cfg.seed,
        "threads": cfg.threads,
        "distance": cfg.distance,
        "init_scale": cfg.init_scale,
        "tetra_sources": list(cfg.tetra_sources),
        "robin_desc_source": cfg.robin_desc_source,
        "lion_sources": list(cfg.lion_sources),
        "paths": dict(sorted(cfg.paths.items())),
        "out_dir": cfg.out_dir,
    }
