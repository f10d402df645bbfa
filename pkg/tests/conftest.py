import pytest

from hkge.data import load_dataset
from hkge.text import load_sentence_table, load_text_table

from helpers import ALL_SOURCES, REPO, TOY


@pytest.fixture(scope="session")
def toy_dataset():
    return load_dataset(TOY / "train.txt", TOY / "valid.txt", TOY / "test.txt")


@pytest.fixture(scope="session")
def toy_tables(toy_dataset):
    tables = {
        s: load_text_table(TOY / f"emb_{s}.tsv", s, toy_dataset.entities)
        for s in ALL_SOURCES
    }
    sentences = load_sentence_table(TOY / "sentences.tsv", "sentence", toy_dataset.entities)
    import dataclasses

    tables["sentence"] = dataclasses.replace(tables["sentence"], sentence_vectors=sentences)
    return tables


@pytest.fixture
def toy_config_path(tmp_path):
    """A copy of the toy config with absolute paths, safe for any cwd."""
    text = (REPO / "configs" / "toy.cfg").read_text()
    fixed = []
    for line in text.splitlines():
        if "= data/toy/" in line:
            key, value = line.split("=", 1)
            fixed.append(f"{key}= {REPO / value.strip()}")
        elif line.strip().startswith("out_dir"):
            fixed.append(f"out_dir = {tmp_path / 'run'}")
        else:
            fixed.append(line)
    path = tmp_path / "toy.cfg"
    path.write_text("\n".join(fixed) + "\n")
    return path
