"""Optional static SVG renderings of the report tables.

matplotlib is imported lazily so the rest of the package works without
it; a fixed hash salt keeps the SVG output byte-stable across runs.
"""

from __future__ import annotations


def _plt():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError(
            "SVG output needs matplotlib; install the [svg] extra"
        ) from exc
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "hcvpipe"
    import matplotlib.pyplot as plt

    return plt


def scree_plot(eigenvalues, ratios, path: str):
    plt = _plt()
    import numpy as np

    fig, ax = plt.subplots(figsize=(6, 4))
    xs = np.arange(1, len(eigenvalues) + 1)
    ax.plot(xs, eigenvalues, marker="o")
    ax.set_xlabel("component")
    ax.set_ylabel("eigenvalue")
    ax2 = ax.twinx()
    ax2.plot(xs, np.cumsum(ratios), marker="s", color="tab:orange")
    ax2.set_ylabel("cumulative variance ratio")
    ax2.set_ylim(0.0, 1.05)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def roc_plot(curves: dict, path: str):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 5))
    for name, roc in curves.items():
        ax.plot(roc.points[:, 0], roc.points[:, 1], label=f"{name} (AUC {roc.auc:.4f})")
    ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def box_plot(stats, path: str):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(max(6, len(stats)), 4))
    boxes = [
        {
            "label": s.column,
            "whislo": s.whisker_low, "q1": s.q1, "med": s.median,
            "q3": s.q3, "whishi": s.whisker_high,
            "fliers": [v for _, v in s.outliers],
        }
        for s in stats
    ]
    ax.bxp(boxes, showfliers=True)
    ax.set_yscale("symlog")
    ax.tick_params(axis="x", rotation=60)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def corr_heatmap(names, corr, path: str):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    im = ax.imshow(corr, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
    ax.set_xticks(range(len(names)), names, rotation=90)
    ax.set_yticks(range(len(names)), names)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def importance_bars(pairs, path: str):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    names = [name for name, _ in pairs][::-1]
    vals = [v for _, v in pairs][::-1]
    ax.barh(range(len(names)), vals)
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("mean decrease in node impurity")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
