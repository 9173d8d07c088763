"""Bundled benchmark datasets and the dataset registry.

``iris`` and ``wine`` are the classic UCI measurement tables. ``seeds`` is a
bundled synthetic analogue of the classic wheat-kernels table (210 rows, 7
geometric features, 3 varieties of 70) generated once with a fixed seed to
match its shape, feature correlations and class separation; see
scripts/build_datasets.py. The benchmark harness also accepts any local CSV
via "path.csv#label_column".
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .csvio import parse_csv
from .exceptions import DataError
from .model import LabeledDataset, MaskedMatrix

REGISTRY = {
    "iris": ("iris.csv", "species"),
    "wine": ("wine.csv", "cultivar"),
    "seeds": ("seeds.csv", "variety"),
}


def dataset_path(name: str) -> Path:
    if name not in REGISTRY:
        raise DataError(f"unknown dataset {name!r}; bundled: {sorted(REGISTRY)}")
    return Path(str(resources.files("dper").joinpath("data", REGISTRY[name][0])))


def load_dataset(name: str, label_column: str | None = None) -> LabeledDataset:
    """Load a bundled dataset by name, or a CSV path ("file.csv" or
    "file.csv#label_column"). Unlabeled files become one-class datasets."""
    if name in REGISTRY:
        path = dataset_path(name)
        label_column = REGISTRY[name][1]
    else:
        raw = str(name)
        if "#" in raw:
            raw, label_column = raw.rsplit("#", 1)
        path = Path(raw)
        if not path.exists():
            raise DataError(f"dataset {name!r} is neither bundled nor an existing file")
    parsed = parse_csv(path, label_column=label_column)
    if isinstance(parsed, MaskedMatrix):
        import numpy as np

        return LabeledDataset(
            data=parsed, labels=np.zeros(parsed.n, dtype=np.int64), n_classes=1
        )
    return parsed
