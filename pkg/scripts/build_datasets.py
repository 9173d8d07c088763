"""Regenerate the bundled CSVs in src/dper/data/ (development only).

iris and wine come from scikit-learn's copies of the UCI tables. The
wheat-kernels table is not redistributable here, so seeds.csv is a synthetic
analogue: three varieties of 70 kernels with a shared latent size factor,
calibrated so that per-feature within-class standard deviations (relative to
the globally standardized scale) and the strong geometric correlations match
the published class structure of the real table.
"""

import csv
from pathlib import Path

import numpy as np
from sklearn.datasets import load_iris, load_wine

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "dper" / "data"

IRIS_COLUMNS = ["sepal_length", "sepal_width", "petal_length", "petal_width"]
WINE_COLUMNS = [
    "alcohol", "malic_acid", "ash", "alcalinity_of_ash", "magnesium",
    "total_phenols", "flavanoids", "nonflavanoid_phenols", "proanthocyanins",
    "color_intensity", "hue", "od280_od315", "proline",
]
SEEDS_COLUMNS = [
    "area", "perimeter", "compactness", "kernel_length", "kernel_width",
    "asymmetry", "groove_length",
]


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def build_iris():
    bunch = load_iris()
    rows = [
        [repr(float(v)) for v in x] + [bunch.target_names[t]]
        for x, t in zip(bunch.data, bunch.target)
    ]
    write(DATA_DIR / "iris.csv", IRIS_COLUMNS + ["species"], rows)


def build_wine():
    bunch = load_wine()
    names = {0: "barolo", 1: "grignolino", 2: "barbera"}
    rows = [
        [repr(float(v)) for v in x] + [names[int(t)]]
        for x, t in zip(bunch.data, bunch.target)
    ]
    write(DATA_DIR / "wine.csv", WINE_COLUMNS + ["cultivar"], rows)


def build_seeds(seed=20210606, sep=2.6):
    rng = np.random.default_rng(seed)
    n_g, p = 70, 7
    # loading of each feature on the latent kernel-size factor, and the
    # within-class noise scale; both tuned against the real table's
    # within/global sd ratios (~0.4 for size features, ~0.75 compactness,
    # ~0.85 asymmetry)
    loads = np.array([1.0, 0.95, 0.35, 0.9, 0.85, 0.15, 0.8])
    noise = np.array([0.35, 0.35, 0.9, 0.45, 0.5, 1.0, 0.55])
    offsets = np.array([-1.0, 1.2, -0.2])  # canadian small, rosa large, kama mid
    quirk = rng.normal(0, 0.35, (3, p))
    centers = offsets[:, None] * loads[None, :] * sep + quirk * sep * 0.35
    names = ["canadian", "rosa", "kama"]
    center_raw = np.array([14.85, 14.56, 0.871, 5.63, 3.26, 3.70, 5.41])
    spread_raw = np.array([2.91, 1.31, 0.0236, 0.443, 0.377, 1.50, 0.491])
    rows = []
    for g in range(3):
        f = rng.normal(0, 1.0, n_g)
        eps = rng.normal(0, 1.0, (n_g, p))
        x_std = centers[g] + np.outer(f, loads) + eps * noise
        x_raw = center_raw + x_std * spread_raw / 2.2
        for row in x_raw:
            rows.append([f"{v:.4f}" for v in row] + [names[g]])
    write(DATA_DIR / "seeds.csv", SEEDS_COLUMNS + ["variety"], rows)


if __name__ == "__main__":
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    build_iris()
    build_wine()
    build_seeds()
