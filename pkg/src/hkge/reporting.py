"""Run outputs: JSON/TSV artifacts, an aligned console table and figures.

Figures are rendered with the Agg backend so the CLI works headless; every
figure lands as a PNG next to the delimited file carrying the same numbers.
"""
from __future__ import annotations

import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .evaluation import EvalReport
from .models import BLOCKS4


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_training_log(path, log):
    with open(path, "w") as fh:
        for record in log:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def eval_rows(report: EvalReport) -> list[tuple[str, str]]:
    rows = [("mrr", f"{report.mrr:.6f}")]
    rows += [(f"hits@{k}", f"{v:.6f}") for k, v in sorted(report.hits.items())]
    rows.append(("n_queries", str(report.n_queries)))
    for direction in sorted(report.by_direction):
        metrics = report.by_direction[direction]
        for key in sorted(metrics):
            value = metrics[key]
            text = str(value) if key == "n_queries" else f"{value:.6f}"
            rows.append((f"{direction}.{key}", text))
    return rows


def write_eval_tsv(path, report: EvalReport):
    with open(path, "w") as fh:
        fh.write("metric\tvalue\n")
        for name, value in eval_rows(report):
            fh.write(f"{name}\t{value}\n")


def format_table(rows, headers=("metric", "value")) -> str:
    widths = [max(len(str(r[i])) for r in [headers, *rows]) for i in range(len(headers))]
    def fmt(row):
        return "  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)).rstrip()
    rule = "  ".join("-" * w for w in widths)
    return "\n".join([fmt(headers), rule, *[fmt(r) for r in rows]])


def write_part_cosine_tsv(path, matrix: np.ndarray):
    with open(path, "w") as fh:
        fh.write("\t" + "\t".join(BLOCKS4) + "\n")
        for i, row_name in enumerate(BLOCKS4):
            fh.write(row_name + "\t" + "\t".join(f"{matrix[i, j]:.6f}" for j in range(4)) + "\n")


def write_shapley_tsv(path, phi: np.ndarray):
    with open(path, "w") as fh:
        fh.write("sentence\tshapley_value\n")
        for i, value in enumerate(phi):
            fh.write(f"{i}\t{value:.10g}\n")


def training_curve_figure(log, path):
    epochs = [r["epoch"] for r in log]
    losses = [r["mean_loss"] for r in log]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(epochs, losses, label="mean loss")
    eval_points = [(r["epoch"], r["val_mrr"]) for r in log if r["val_mrr"] is not None]
    if eval_points:
        ax2 = ax.twinx()
        ax2.plot(*zip(*eval_points), color="tab:orange", marker="o", label="valid MRR")
        ax2.set_ylabel("valid MRR")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean loss")
    ax.set_title("training")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def eval_metrics_figure(report: EvalReport, path):
    names = ["mrr"] + [f"hits@{k}" for k in sorted(report.hits)]
    values = [report.mrr] + [report.hits[k] for k in sorted(report.hits)]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(names, values, color="tab:blue")
    ax.set_ylim(0, 1)
    for x, v in enumerate(values):
        ax.text(x, v, f"{v:.3f}", ha="center", va="bottom", fontsize=8)
    ax.set_title(f"filtered metrics ({report.n_queries} queries)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def part_cosine_figure(matrix: np.ndarray, path):
    fig, ax = plt.subplots(figsize=(4.5, 4))
    im = ax.imshow(matrix, cmap="coolwarm", vmin=-1, vmax=1)
    ax.set_xticks(range(4), BLOCKS4)
    ax.set_yticks(range(4), BLOCKS4)
    ax.set_xlabel("tail part")
    ax.set_ylabel("query part")
    for i in range(4):
        for j in range(4):
            ax.text(j, i, f"{matrix[i, j]:.2f}", ha="center", va="center", fontsize=8)
    fig.colorbar(im, ax=ax)
    ax.set_title("part-wise mean cosine")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def shapley_figure(phi: np.ndarray, path, labels=None):
    labels = labels if labels is not None else [str(i) for i in range(len(phi))]
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(phi)), 4))
    colors = ["tab:green" if v >= 0 else "tab:red" for v in phi]
    positions = np.arange(len(phi))
    ax.bar(positions, phi, color=colors)
    ax.set_xticks(positions, labels)
    ax.axhline(0, color="black", linewidth=0.8)
    ax.set_xlabel("sentence")
    ax.set_ylabel("Shapley value")
    ax.set_title("sentence contributions to the triple score")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
