"""Standalone exporter producing hkge-format text-embedding tables."""
from .encoders import DEFAULT_HASH_DIMS, SOURCES, HashEncoder, make_encoder, tokenize
from .errors import EncoderUnavailableError, ExportError, InputError, UsageError
from .export import ExportReport, export_source, gather_corpus, read_text_tsv
from .split import SPLITTER_ID, split_sentences

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_HASH_DIMS",
    "SOURCES",
    "HashEncoder",
    "make_encoder",
    "tokenize",
    "EncoderUnavailableError",
    "ExportError",
    "InputError",
    "UsageError",
    "ExportReport",
    "export_source",
    "gather_corpus",
    "read_text_tsv",
    "SPLITTER_ID",
    "split_sentences",
    "__version__",
]
