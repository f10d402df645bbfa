"""embed-export command line.

Exit codes: 0 success, 2 usage, 3 bad input data, 4 encoder unavailable.
"""
import argparse
import sys

from .encoders import SOURCE_ALIASES
from .errors import EncoderUnavailableError, InputError, UsageError
from .export import export_source


def build_parser():
    p = argparse.ArgumentParser(
        prog="embed-export",
        description="Write entity text embeddings in the hkge table format.",
    )
    p.add_argument("--source", required=True,
                   help="word|fasttext|doc|sentence (word2vec/doc2vec also accepted)")
    p.add_argument("--names", help="entity<TAB>name TSV")
    p.add_argument("--descriptions", help="entity<TAB>description TSV")
    p.add_argument("--out", required=True, help="output embedding file")
    p.add_argument("--backend", default="pretrained", choices=("pretrained", "hash"),
                   help="'pretrained' uses the real encoders, 'hash' is the "
                        "deterministic offline stand-in")
    p.add_argument("--dim", type=int, help="vector dim (hash backend only)")
    p.add_argument("--model", help="trained Doc2Vec model path (doc source, pretrained)")
    p.add_argument("--sentences-out",
                   help="per-sentence file path (sentence source; default <out>.sentences.tsv)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        source_id = SOURCE_ALIASES.get(args.source)
        if source_id is None:
            raise UsageError(
                f"unknown source {args.source!r}, expected one of {sorted(set(SOURCE_ALIASES))}"
            )
        report = export_source(
            source_id,
            args.names,
            args.descriptions,
            args.out,
            backend=args.backend,
            dim=args.dim,
            model_path=args.model,
            sentences_out=args.sentences_out,
        )
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EncoderUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    print(report.summary())
    if report.zero_rows:
        print("zero-vector entities: " + ", ".join(report.zero_rows))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
