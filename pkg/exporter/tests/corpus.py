"""Shared 20-entity toy corpus for the exporter tests.

e07 has an empty description, e13 has none at all, e05 carries escaped
whitespace, sentence counts vary from 1 to 3.
"""
ENTITIES = [f"e{i:02d}" for i in range(20)]

NAMES = {e: f"Entity {i} ({e})" for i, e in enumerate(ENTITIES)}

_DESCRIPTION_BODIES = {
    "e07": "",
    "e05": "First line.\\nSecond\\tcolumn. Third sentence ends here.",
}


def _description(i, e):
    if e in _DESCRIPTION_BODIES:
        return _DESCRIPTION_BODIES[e]
    n_sentences = 1 + i % 3
    return " ".join(
        f"Sentence {s} about {e} mentions topic {(i * 7 + s) % 5}." for s in range(n_sentences)
    )


DESCRIPTIONS = {e: _description(i, e) for i, e in enumerate(ENTITIES) if e != "e13"}


def write_corpus(directory):
    names = directory / "names.tsv"
    names.write_text("".join(f"{e}\t{NAMES[e]}\n" for e in ENTITIES), encoding="utf-8")
    descriptions = directory / "descriptions.tsv"
    descriptions.write_text(
        "".join(f"{e}\t{DESCRIPTIONS[e]}\n" for e in ENTITIES if e in DESCRIPTIONS),
        encoding="utf-8",
    )
    return names, descriptions
