import numpy as np
import pytest

from hkge.checkpoint import ensure_vocab_matches, load_checkpoint, save_checkpoint
from hkge.errors import CheckpointMismatchError
from hkge.models import init_params, resolve_wiring

from helpers import make_tables

DIMS = {"word2vec": 3, "fasttext": 3, "doc2vec": 3, "sentence": 3}


@pytest.fixture
def saved(tmp_path):
    tables = make_tables(4, DIMS)
    params = init_params("robin", "dihedron", 2, 4, 6, tables,
                         resolve_wiring("robin"), np.random.default_rng(0))
    path = tmp_path / "ckpt.bin"
    save_checkpoint(path, params, config={"dim": 2, "learning_rate": 0.05},
                    seed=7, entities=["a", "b", "c", "d"],
                    relations=["p", "q", "r", "p__inv", "q__inv", "r__inv"])
    return path, params


def test_round_trip_bitwise(saved):
    path, params = saved
    ckpt = load_checkpoint(path)
    assert ckpt.params.kind == "robin"
    assert ckpt.params.algebra == "dihedron"
    assert ckpt.params.dim == 2
    assert ckpt.params.wiring == params.wiring
    assert ckpt.seed == 7
    assert ckpt.config["learning_rate"] == 0.05
    assert list(ckpt.params.arrays) == list(params.arrays)
    for k in params.arrays:
        assert np.array_equal(ckpt.params.arrays[k], params.arrays[k]), k


def test_save_is_byte_deterministic(saved, tmp_path):
    path, params = saved
    again = tmp_path / "again.bin"
    save_checkpoint(again, params, config={"dim": 2, "learning_rate": 0.05},
                    seed=7, entities=["a", "b", "c", "d"],
                    relations=["p", "q", "r", "p__inv", "q__inv", "r__inv"])
    assert path.read_bytes() == again.read_bytes()


def test_vocab_mismatch_detected(saved):
    path, _ = saved
    ckpt = load_checkpoint(path)
    ensure_vocab_matches(ckpt, ["a", "b", "c", "d"],
                         ["p", "q", "r", "p__inv", "q__inv", "r__inv"])
    with pytest.raises(CheckpointMismatchError):
        ensure_vocab_matches(ckpt, ["a", "b", "c", "e"],
                             ["p", "q", "r", "p__inv", "q__inv", "r__inv"])
    with pytest.raises(CheckpointMismatchError):
        ensure_vocab_matches(ckpt, ["a", "b", "c", "d"], ["p", "q"])


def test_bad_magic_rejected(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"not a checkpoint at all")
    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(p)


def test_truncated_tensor_rejected(saved, tmp_path):
    path, _ = saved
    data = path.read_bytes()
    clipped = tmp_path / "clipped.bin"
    clipped.write_bytes(data[:-16])
    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(clipped)


def test_trailing_garbage_rejected(saved, tmp_path):
    path, _ = saved
    padded = tmp_path / "padded.bin"
    padded.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(CheckpointMismatchError):
        load_checkpoint(padded)
