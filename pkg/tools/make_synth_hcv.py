#!/usr/bin/env python3
"""Generate the synthetic HCV-style laboratory CSV shipped in data/.

The real UCI blood-donor file cannot be fetched from inside this
environment, so this script builds a stand-in with the same shape and
the same aggregate facts: 615 rows, category counts 533/7/24/21/30,
and missing cells ALB 1, ALP 18, ALT 1, CHOL 10, PROT 1. Feature
values come from a latent-factor model (hepatocellular damage,
cholestasis, synthetic-function loss, kidney/metabolic) so that the
class signal, correlation structure, tail behaviour and principal
component spectrum resemble the published data.

Run with --check to print the generated file's summary statistics.
"""

import argparse
import csv
import os

import numpy as np

CATEGORIES = [
    ("0=Blood Donor", 533),
    ("0s=suspect Blood Donor", 7),
    ("1=Hepatitis", 24),
    ("2=Fibrosis", 21),
    ("3=Cirrhosis", 30),
]
# class severity on the disease axis; suspect donors sit near the boundary
SEVERITY = {
    "0=Blood Donor": 0.0,
    "0s=suspect Blood Donor": 0.55,
    "1=Hepatitis": 1.0,
    "2=Fibrosis": 1.35,
    "3=Cirrhosis": 1.8,
}
MISSING_PLAN = {"ALB": 1, "ALP": 18, "ALT": 1, "CHOL": 10, "PROT": 1}
LABS = ("ALB", "ALP", "ALT", "AST", "BIL", "CHE", "CHOL", "CREA", "GGT", "PROT")


def generate(seed=20250823):
    rng = np.random.default_rng(seed)
    cats = []
    for name, count in CATEGORIES:
        cats.extend([name] * count)
    n = len(cats)
    sev_class = np.array([SEVERITY[c] for c in cats])
    # per-subject severity jitter keeps a few mild patients near donors
    sev = sev_class * rng.uniform(0.75, 1.30, n)
    diseased = np.array([not c.startswith("0") for c in cats])

    # latent factors; cholestasis is kept independent of the damage noise
    # so it forms its own principal axis
    z = rng.standard_normal((n, 4))
    damage = z[:, 0]
    chole = z[:, 1]
    synth = -0.25 * z[:, 0] + np.sqrt(1 - 0.25**2) * z[:, 2]
    kidney = z[:, 3]

    # disease moves the factors; suspects only touch the damage axis
    damage = damage + 2.6 * sev
    chole = chole + 1.5 * sev * diseased
    synth = synth - 1.15 * sev * diseased
    bil_extra = 0.95 * sev * diseased

    sex = (rng.random(n) < 0.61).astype(float)  # 1 = male
    age = np.clip(
        np.round(47 + 9.5 * (0.25 * kidney + 0.97 * rng.standard_normal(n)) + 2.5 * diseased),
        19,
        77,
    )

    def eps():
        return rng.standard_normal(n)

    col = {}
    col["ALB"] = np.clip(41.6 + 3.1 * synth + 1.9 * eps(), 21, 62)
    col["ALP"] = 66.0 * np.exp(0.04 * chole + 0.04 * damage + 0.15 * eps())
    col["ALT"] = 23.0 * np.exp(0.52 * damage + 0.10 * chole + 0.30 * eps() + 0.12 * sex)
    col["AST"] = 29.0 * np.exp(0.40 * damage + 0.26 * chole + 0.20 * eps())
    col["BIL"] = 8.5 * np.exp(0.12 * chole + 0.22 * damage + 0.40 * bil_extra + 0.30 * eps())
    col["CHE"] = np.clip(8.2 + 1.75 * synth + 1.05 * eps(), 1.0, 17.0)
    col["CHOL"] = np.clip(5.38 + 0.42 * synth + 0.22 * kidney + 0.34 * eps(), 1.5, 9.8)
    crea_spike = (rng.random(n) < 0.03) * rng.uniform(0.8, 1.7, n)
    col["CREA"] = (70.0 + 14.0 * sex) * np.exp(0.20 * kidney + 0.09 * eps() + crea_spike)
    # GGT is the strongest expression of the cholestasis axis, so that
    # axis keeps a disease signal while staying separate from damage
    col["GGT"] = np.clip(
        26.0 * np.exp(0.30 * damage + 0.30 * chole + 0.85 * eps() + 0.08 * sex), 4.5, 650.0
    )
    col["PROT"] = np.clip(72.0 + 1.55 * synth + 1.40 * eps(), 46, 90)

    decimals = {
        "ALB": 1, "ALP": 1, "ALT": 1, "AST": 1, "BIL": 1,
        "CHE": 2, "CHOL": 2, "CREA": 1, "GGT": 1, "PROT": 1,
    }
    for name in LABS:
        col[name] = np.round(col[name], decimals[name])

    # knock out cells: ALP/CHOL mostly among patients, singles in cirrhosis
    missing = {name: set() for name in MISSING_PLAN}
    disease_rows = np.flatnonzero(diseased)
    donor_rows = np.flatnonzero(~diseased)
    cirr_rows = np.flatnonzero(np.array(cats) == "3=Cirrhosis")
    missing["ALP"].update(rng.choice(disease_rows, 12, replace=False))
    missing["ALP"].update(rng.choice(donor_rows, 6, replace=False))
    missing["CHOL"].update(rng.choice(disease_rows, 5, replace=False))
    missing["CHOL"].update(rng.choice(donor_rows, 5, replace=False))
    for name in ("ALB", "ALT", "PROT"):
        missing[name].add(int(rng.choice(cirr_rows)))

    rows = []
    for i in range(n):
        row = [str(i + 1), cats[i], str(int(age[i])), "m" if sex[i] else "f"]
        for name in LABS:
            if name in missing and i in missing[name]:
                row.append("NA")
            else:
                row.append(f"{col[name][i]:.{decimals[name]}f}")
        rows.append(row)
    header = ["", "Category", "Age", "Sex"] + list(LABS)
    return header, rows


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def check(path):
    """Print the data-dependent facts the test suite will rely on."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    print(f"rows: {len(data)}")
    from collections import Counter

    cat_counts = Counter(r[1] for r in data)
    print("categories:", dict(cat_counts))
    labels = np.array([0 if r[1].startswith("0") else 1 for r in data])
    print(f"labels: {int((labels == 0).sum())} zeros, {int((labels == 1).sum())} ones")
    na_counts = Counter()
    for r in data:
        for name, cell in zip(header[4:], r[4:]):
            if cell == "NA":
                na_counts[name] += 1
    print("missing cells:", dict(na_counts), "total", sum(na_counts.values()))

    # numeric matrix with column means in the missing slots
    names = ["Age", "Sex"] + list(LABS)
    X = np.full((len(data), 12), np.nan)
    for i, r in enumerate(data):
        X[i, 0] = float(r[2])
        X[i, 1] = 1.0 if r[3] == "m" else 0.0
        for j, cell in enumerate(r[4:], start=2):
            if cell != "NA":
                X[i, j] = float(cell)
    for j in range(12):
        m = np.isnan(X[:, j])
        if m.any():
            X[m, j] = np.nanmean(X[:, j])

    # linear probe: least-squares on standardized features, threshold 0.5
    mu, sd = X.mean(axis=0), X.std(axis=0)
    Z = (X - mu) / sd
    A = np.column_stack([np.ones(len(Z)), Z])
    w = np.linalg.lstsq(A, labels.astype(float), rcond=None)[0]
    pred = (A @ w > 0.5).astype(int)
    print(f"linear probe error: {(pred != labels).mean():.4f}")

    evals, evecs = np.linalg.eigh(np.corrcoef(Z.T))
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    cum = np.cumsum(evals) / evals.sum()
    print("pca cumulative:", np.array2string(cum, precision=3))
    d90 = int(np.argmax(cum >= 0.90 - 1e-12)) + 1
    print(f"components for 0.90: {d90}")
    argmax = [names[int(np.argmax(np.abs(evecs[:, i])))] for i in range(12)]
    print(f"per-component argmax |loading|: {argmax[:d90]} | {argmax[d90:]}")

    # Tukey outlier counts per column
    outl = {}
    for j, name in enumerate(names):
        v = np.sort(X[:, j])
        q1, q3 = np.quantile(v, [0.25, 0.75])
        iqr = q3 - q1
        outl[name] = int(((v < q1 - 1.5 * iqr) | (v > q3 + 1.5 * iqr)).sum())
    print("outliers:", sorted(outl.items(), key=lambda kv: -kv[1]))

    corr = {name: float(np.corrcoef(X[:, j], labels)[0, 1]) for j, name in enumerate(names)}
    print("corr with label:", {k: round(v, 3) for k, v in sorted(corr.items(), key=lambda kv: -abs(kv[1]))})

    # single-split gini gain per feature as a forest-importance proxy
    n = len(labels)
    parent = 1 - (labels == 0).mean() ** 2 - (labels == 1).mean() ** 2
    gains = {}
    for j, name in enumerate(names):
        order = np.argsort(X[:, j], kind="mergesort")
        ys = labels[order]
        c1 = np.cumsum(ys)[:-1]
        nl = np.arange(1, n)
        c0 = nl - c1
        c1r = c1[-1] + ys[-1] - c1
        c0r = (n - nl) - c1r
        gl = 1 - (c0 / nl) ** 2 - (c1 / nl) ** 2
        gr = 1 - (c0r / (n - nl)) ** 2 - (c1r / (n - nl)) ** 2
        w_ = (nl * gl + (n - nl) * gr) / n
        vs = X[order, j]
        ok = vs[:-1] < vs[1:]
        gains[name] = float(parent - w_[ok].min()) if ok.any() else 0.0
    print("split gains:", [(k, round(v, 4)) for k, v in sorted(gains.items(), key=lambda kv: -kv[1])])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "hcv_synth.csv"))
    ap.add_argument("--seed", type=int, default=20250823)
    ap.add_argument("--check", action="store_true", help="print summary stats of the written file")
    args = ap.parse_args()
    header, rows = generate(args.seed)
    write_csv(args.out, header, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    if args.check:
        check(args.out)


if __name__ == "__main__":
    main()
