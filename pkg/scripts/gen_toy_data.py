"""Regenerate the bundled toy dataset under data/toy/.

A small deterministic world: 20 towns in 4 regions plus the regions
themselves.  Structure (region membership, neighbour rings, fixed-offset
trade routes) makes link prediction learnable at tiny dimensions.  Synthetic
embedding tables get a shared per-region component so text actually carries
signal.  Everything is seeded; rerunning reproduces the files byte for byte.
"""
from __future__ import annotations

import os
import zlib

import numpy as np


def stable_seed(*parts) -> int:
    return zlib.crc32("|".join(str(p) for p in parts).encode())

ROOT = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "toy")

REGIONS = ["norland", "suderne", "ostmark", "westvale"]
TOWN_STEMS = [
    "alba", "brinn", "caldo", "dorva", "elmis",
    "fenn", "garth", "hollis", "irsta", "jarl",
    "kovan", "lumo", "marenn", "noke", "orvik",
    "pella", "quorn", "ryde", "senna", "tovas",
]


def build_world():
    towns = TOWN_STEMS
    entities = towns + REGIONS
    region_of = {t: REGIONS[i // 5] for i, t in enumerate(towns)}
    triples = []
    for t in towns:
        triples.append((t, "in_region", region_of[t]))
    # neighbour ring inside each region
    for r in range(4):
        block = towns[r * 5 : (r + 1) * 5]
        for i, t in enumerate(block):
            triples.append((t, "near", block[(i + 1) % 5]))
    # fixed-offset trade routes across regions
    for i, t in enumerate(towns):
        triples.append((t, "exports_to", towns[(i + 7) % 20]))
        triples.append((t, "imports_from", towns[(i + 13) % 20]))
    # rivals: towns five apart
    for i in range(10):
        triples.append((towns[i], "rival_of", towns[i + 10]))
    rng = np.random.default_rng(2024)
    # a noisier relation so the task is not purely rule-driven
    for _ in range(40):
        a, b = rng.choice(len(towns), size=2, replace=False)
        triples.append((towns[a], "allied_with", towns[b]))
    # dedupe, keep first occurrence order
    seen = set()
    uniq = []
    for tr in triples:
        if tr not in seen:
            seen.add(tr)
            uniq.append(tr)
    return entities, region_of, uniq


def split_triples(triples, rng):
    order = rng.permutation(len(triples))
    shuffled = [triples[i] for i in order]
    n_valid = n_test = max(1, len(shuffled) * 3 // 20)
    valid, test, train = (
        shuffled[:n_valid],
        shuffled[n_valid : n_valid + n_test],
        shuffled[n_valid + n_test :],
    )
    # every entity and relation must appear in train
    def covered(split):
        ents, rels = set(), set()
        for h, r, t in split:
            ents.update((h, t))
            rels.add(r)
        return ents, rels

    train_e, train_r = covered(train)
    for held in (valid, test):
        for tr in list(held):
            h, r, t = tr
            if h not in train_e or t not in train_e or r not in train_r:
                held.remove(tr)
                train.append(tr)
                train_e.update((h, t))
                train_r.add(r)
    return train, valid, test


def write_triples(path, triples):
    with open(path, "w") as fh:
        for h, r, t in triples:
            fh.write(f"{h}\t{r}\t{t}\n")


def region_signal(entity, region_of, rng_for, dim):
    """Shared per-region direction + entity noise, deterministic per entity."""
    if entity in REGIONS:
        base_seed = 1000 + REGIONS.index(entity)
    else:
        base_seed = 1000 + REGIONS.index(region_of[entity])
    base = np.random.default_rng(base_seed * 77 + dim).normal(size=dim)
    noise = rng_for.normal(scale=0.4, size=dim)
    return base + noise


def fmt(vec):
    return " ".join(f"{x:.6f}" for x in vec)


def main():
    os.makedirs(ROOT, exist_ok=True)
    entities, region_of, triples = build_world()
    rng = np.random.default_rng(7)
    train, valid, test = split_triples(triples, rng)
    write_triples(os.path.join(ROOT, "train.txt"), train)
    write_triples(os.path.join(ROOT, "valid.txt"), valid)
    write_triples(os.path.join(ROOT, "test.txt"), test)

    with open(os.path.join(ROOT, "names.tsv"), "w") as fh:
        for e in entities:
            label = e.capitalize() if e in REGIONS else f"Town of {e.capitalize()}"
            fh.write(f"{e}\t{label}\n")
    with open(os.path.join(ROOT, "descriptions.tsv"), "w") as fh:
        for e in entities:
            if e in REGIONS:
                text = f"{e.capitalize()} is one of the four regions. Its towns trade along fixed routes."
            else:
                text = (
                    f"{e.capitalize()} is a town in {region_of[e]}. "
                    f"It keeps close ties with its neighbours. "
                    f"Caravans leave for distant markets every season."
                )
            fh.write(f"{e}\t{text}\n")

    dims = {"word2vec": 12, "fasttext": 10, "doc2vec": 8, "sentence": 16}
    for source, dim in dims.items():
        path = os.path.join(ROOT, f"emb_{source}.tsv")
        with open(path, "w") as fh:
            fh.write(f"#hkge-emb\tsource={source}\tdim={dim}\n")
            fh.write("# synthetic vectors for the toy world\n")
            for i, e in enumerate(entities):
                r = np.random.default_rng(stable_seed(source, e))
                fh.write(f"{e}\t{fmt(region_signal(e, region_of, r, dim))}\n")

    # per-sentence vectors; the pooled table row is their mean, like a real
    # sentence encoder with mean pooling
    dim = dims["sentence"]
    rows = {}
    with open(os.path.join(ROOT, "sentences.tsv"), "w") as fh:
        fh.write(f"#hkge-emb\tsource=sentence\tdim={dim}\n")
        for e in entities:
            n_sent = 2 if e in REGIONS else 3
            vecs = []
            for k in range(n_sent):
                r = np.random.default_rng(stable_seed(e, "sent", k))
                v = region_signal(e, region_of, r, dim)
                vecs.append(v)
                fh.write(f"{e}\t{k}\t{fmt(v)}\n")
            rows[e] = np.mean(vecs, axis=0)
    with open(os.path.join(ROOT, "emb_sentence.tsv"), "w") as fh:
        fh.write(f"#hkge-emb\tsource=sentence\tdim={dim}\n")
        for e in entities:
            fh.write(f"{e}\t{fmt(rows[e])}\n")

    print(f"wrote toy dataset: {len(train)} train / {len(valid)} valid / {len(test)} test, "
          f"{len(entities)} entities")


if __name__ == "__main__":
    main()
