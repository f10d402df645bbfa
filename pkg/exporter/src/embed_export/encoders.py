"""Encoder backends.

Two lanes:

* ``pretrained`` wraps the off-the-shelf models (gensim word vectors,
  sentence-transformers). Those need installed libraries plus locally cached
  model weights; when either is missing the error says exactly what to
  install or download.
* ``hash`` is a self-contained deterministic stand-in: each token gets a
  fixed pseudo-random unit-scale vector derived from a keyed digest, texts
  are mean-pooled. No semantics, but the full export pipeline and the wire
  format can be exercised offline, and output is bit-stable across runs and
  machines.

Every encoder exposes encode_texts(list[str]) -> (n, dim) float64, a .dim,
and a .describe() string that ends up in the output header comment.
"""
import hashlib
import re

import numpy as np

from .errors import EncoderUnavailableError, UsageError

# Canonical source ids, matching the consumer's table names.
SOURCES = ("word2vec", "fasttext", "doc2vec", "sentence")

# CLI convenience spellings.
SOURCE_ALIASES = {
    "word": "word2vec",
    "doc": "doc2vec",
    "word2vec": "word2vec",
    "fasttext": "fasttext",
    "doc2vec": "doc2vec",
    "sentence": "sentence",
}

DEFAULT_HASH_DIMS = {"word2vec": 300, "fasttext": 300, "doc2vec": 300, "sentence": 768}

SENTENCE_MODEL = "distilbert-base-nli-mean-tokens"

_TOKEN = re.compile(r"[\w']+")


def tokenize(text):
    return _TOKEN.findall(text.lower())


class HashEncoder:
    """Deterministic token-hash embeddings; mean over tokens, zeros for none."""

    def __init__(self, source_id: str, dim: int):
        if dim < 1:
            raise UsageError(f"dim must be >= 1, got {dim}")
        self.source_id = source_id
        self.dim = dim

    def _token_vector(self, token: str) -> np.ndarray:
        digest = hashlib.blake2b(
            token.encode("utf-8"), digest_size=8, key=self.source_id.encode("utf-8")
        ).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        return rng.standard_normal(self.dim) / np.sqrt(self.dim)

    def encode_texts(self, texts) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            tokens = tokenize(text)
            if tokens:
                out[i] = np.mean([self._token_vector(t) for t in tokens], axis=0)
        return out

    def describe(self) -> str:
        return f"hash blake2b+pcg64 dim={self.dim}"


class _GensimWordEncoder:
    """Mean of pretrained per-token vectors; out-of-vocabulary tokens drop out."""

    def __init__(self, source_id):
        try:
            import gensim.downloader
        except ImportError as exc:
            raise EncoderUnavailableError(
                f"source {source_id!r} needs gensim: pip install gensim "
                "(or rerun with --backend hash)"
            ) from exc
        name = (
            "word2vec-google-news-300"
            if source_id == "word2vec"
            else "fasttext-wiki-news-subwords-300"
        )
        try:
            self.kv = gensim.downloader.load(name)
        except Exception as exc:
            raise EncoderUnavailableError(
                f"could not load gensim model {name!r} (needs a local "
                f"gensim-data cache): {exc}"
            ) from exc
        self.name = name
        self.dim = int(self.kv.vector_size)

    def encode_texts(self, texts):
        out = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            vecs = [self.kv[t] for t in tokenize(text) if t in self.kv]
            if vecs:
                out[i] = np.mean(vecs, axis=0, dtype=np.float64)
        return out

    def describe(self):
        import gensim

        return f"gensim-{gensim.__version__} {self.name}"


class _Doc2VecEncoder:
    def __init__(self, model_path):
        if not model_path:
            raise EncoderUnavailableError(
                "no public pretrained doc2vec checkpoint exists; pass a trained "
                "gensim Doc2Vec model via --model (or use --backend hash)"
            )
        try:
            from gensim.models.doc2vec import Doc2Vec
        except ImportError as exc:
            raise EncoderUnavailableError(
                "doc2vec needs gensim: pip install gensim (or --backend hash)"
            ) from exc
        try:
            self.model = Doc2Vec.load(str(model_path))
        except Exception as exc:
            raise EncoderUnavailableError(f"could not load doc2vec model {model_path}: {exc}") from exc
        self.model_path = model_path
        self.dim = int(self.model.vector_size)

    def encode_texts(self, texts):
        out = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            # Re-seed per text: infer_vector resamples internally and the
            # output must be input-deterministic.
            self.model.random = np.random.RandomState(0)
            out[i] = self.model.infer_vector(tokenize(text))
        return out

    def describe(self):
        import gensim

        return f"gensim-{gensim.__version__} doc2vec {self.model_path}"


class _SentenceTransformerEncoder:
    def __init__(self, model_name=SENTENCE_MODEL):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderUnavailableError(
                "source 'sentence' needs sentence-transformers: "
                "pip install sentence-transformers (or --backend hash)"
            ) from exc
        try:
            self.model = SentenceTransformer(model_name)
        except Exception as exc:
            raise EncoderUnavailableError(
                f"could not load {model_name!r} (weights must be cached locally; "
                f"download them once on a networked machine): {exc}"
            ) from exc
        self.name = model_name
        self.dim = int(self.model.get_sentence_embedding_dimension())

    def encode_texts(self, texts):
        return np.asarray(
            self.model.encode(list(texts), show_progress_bar=False), dtype=np.float64
        )

    def describe(self):
        import sentence_transformers

        return f"sentence-transformers-{sentence_transformers.__version__} {self.name}"


def make_encoder(source_id: str, backend: str, dim=None, model_path=None):
    if backend == "hash":
        return HashEncoder(source_id, dim if dim is not None else DEFAULT_HASH_DIMS[source_id])
    if backend != "pretrained":
        raise UsageError(f"unknown backend {backend!r}, expected 'pretrained' or 'hash'")
    if dim is not None:
        raise UsageError("--dim only applies to the hash backend; pretrained models fix their own dim")
    if source_id in ("word2vec", "fasttext"):
        return _GensimWordEncoder(source_id)
    if source_id == "doc2vec":
        return _Doc2VecEncoder(model_path)
    return _SentenceTransformerEncoder()
