"""Rule-based sentence splitting.

The splitter identity is written into every sentence-level output file so
downstream per-sentence attribution can reproduce the exact segmentation.
Keep SPLITTER_ID in sync with any behavioural change here.
"""
import re

SPLITTER_ID = "rule-split-1"

# A run of sentence terminators followed by whitespace ends a sentence; the
# terminators stay attached to the sentence they close.
_BOUNDARY = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    pieces = _BOUNDARY.split(text.strip())
    return [p.strip() for p in pieces if p.strip()]
