"""Read name/description TSVs, encode, and write embedding files.

Output is the consumer's text-feature wire format:

    #hkge-emb<TAB>source=<id><TAB>dim=<D>
    # comment lines (encoder + splitter metadata)
    entity<TAB>v1 v2 ... vD

and, for the sentence source, a second file with one row per
(entity, sentence_index) in splitter order.

Text policy per source: word-level sources (word2vec, fasttext) pool tokens
of "<name> <description>"; document-level sources (doc2vec, sentence) encode
the description alone, so an entity with no description gets a zero row even
when it has a name. Zero rows are written, not skipped: the consumer then
sees full coverage and the flagged entities are listed in the report.
Writes go through a temp file in the target directory plus rename, so a
crash never leaves a half-written table behind.
"""
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .encoders import make_encoder
from .errors import InputError, UsageError
from .split import SPLITTER_ID, split_sentences

HEADER_MAGIC = "#hkge-emb"

WORD_LEVEL = ("word2vec", "fasttext")


def _unescape(text):
    return text.replace("\\t", "\t").replace("\\n", "\n")


def read_text_tsv(path) -> dict[str, str]:
    """entity<TAB>text rows; duplicate keys are an error, order is preserved."""
    out: dict[str, str] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t", 1)
            if len(fields) != 2:
                raise InputError(f"{path}:{lineno}: expected entity<TAB>text")
            key, text = fields
            if key in out:
                raise InputError(f"{path}:{lineno}: duplicate entity {key!r}")
            out[key] = _unescape(text)
    return out


def gather_corpus(names_path, descriptions_path):
    """Entity order: first appearance in the names file, then new keys from
    the descriptions file."""
    names = read_text_tsv(names_path) if names_path else {}
    descriptions = read_text_tsv(descriptions_path) if descriptions_path else {}
    entities = list(names)
    entities += [e for e in descriptions if e not in names]
    if not entities:
        raise InputError("no entities found in the given input files")
    return entities, names, descriptions


def _source_text(source_id, name, description):
    if source_id in WORD_LEVEL:
        return f"{name} {description}".strip()
    return description.strip()


@dataclass
class ExportReport:
    source_id: str
    dim: int
    out_path: str
    n_entities: int
    zero_rows: list = field(default_factory=list)
    sentences_path: str | None = None
    n_sentences: int = 0

    def summary(self) -> str:
        line = (
            f"{self.source_id}: wrote {self.n_entities} rows (dim {self.dim}) "
            f"to {self.out_path}, {len(self.zero_rows)} zero rows"
        )
        if self.sentences_path:
            line += f"; {self.n_sentences} sentence rows to {self.sentences_path}"
        return line


def _atomic_write(path, lines):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(prefix=".embtmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(vec):
    # repr keeps full float64 precision so reload reproduces the bytes exactly
    return " ".join(repr(float(x)) for x in vec)


def export_source(
    source_id,
    names_path,
    descriptions_path,
    out_path,
    *,
    backend="pretrained",
    dim=None,
    model_path=None,
    sentences_out=None,
):
    """Encode every entity for one source and write the embedding file(s).

    Returns an ExportReport. For source 'sentence' the per-sentence file
    lands next to out_path (or at sentences_out when given).
    """
    if source_id == "sentence" and not descriptions_path:
        raise UsageError("source 'sentence' needs --descriptions")
    if not names_path and not descriptions_path:
        raise UsageError("need --names and/or --descriptions")

    entities, names, descriptions = gather_corpus(names_path, descriptions_path)
    encoder = make_encoder(source_id, backend, dim=dim, model_path=model_path)

    texts = [
        _source_text(source_id, names.get(e, ""), descriptions.get(e, ""))
        for e in entities
    ]

    meta = [f"# encoder={encoder.describe()}", "# texts=" + ("name+description" if source_id in WORD_LEVEL else "description")]
    report = ExportReport(source_id, encoder.dim, os.fspath(out_path), len(entities))

    if source_id == "sentence":
        per_entity = [split_sentences(t) for t in texts]
        flat = [s for group in per_entity for s in group]
        flat_vecs = encoder.encode_texts(flat) if flat else np.zeros((0, encoder.dim))
        meta.append(f"# splitter={SPLITTER_ID}")

        pooled_lines = [f"{HEADER_MAGIC}\tsource=sentence\tdim={encoder.dim}", *meta]
        sent_lines = list(pooled_lines)
        cursor = 0
        for e, sentences in zip(entities, per_entity):
            rows = flat_vecs[cursor : cursor + len(sentences)]
            cursor += len(sentences)
            pooled = rows.mean(axis=0) if len(rows) else np.zeros(encoder.dim)
            if not len(rows):
                report.zero_rows.append(e)
            pooled_lines.append(f"{e}\t{_fmt(pooled)}")
            for i, row in enumerate(rows):
                sent_lines.append(f"{e}\t{i}\t{_fmt(row)}")
        sentences_out = os.fspath(
            sentences_out
            if sentences_out
            else os.fspath(out_path) + ".sentences.tsv"
        )
        _atomic_write(out_path, pooled_lines)
        _atomic_write(sentences_out, sent_lines)
        report.sentences_path = sentences_out
        report.n_sentences = len(flat)
        return report

    vecs = encoder.encode_texts(texts)
    lines = [f"{HEADER_MAGIC}\tsource={source_id}\tdim={encoder.dim}", *meta]
    for e, text, vec in zip(entities, texts, vecs):
        if not text or not np.any(vec):
            report.zero_rows.append(e)
            vec = np.zeros(encoder.dim)
        lines.append(f"{e}\t{_fmt(vec)}")
    _atomic_write(out_path, lines)
    return report
