"""Dataset container and contingency tables for discrete multi-label data."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# A variable is addressed by its column index, stable for the Dataset's lifetime.
VariableId = int


@dataclass(frozen=True)
class Dataset:
    """Immutable column-oriented table of categorical codes.

    ``codes`` has shape (n_vars, n_rows) so a test over (x, y | z) touches
    only the rows it involves. Codes for variable v lie in [0, arities[v]).
    ``is_label`` marks target columns; everything else is a feature.
    """

    codes: np.ndarray
    arities: np.ndarray
    is_label: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self) -> None:
        codes = np.ascontiguousarray(self.codes, dtype=np.int64)
        arities = np.asarray(self.arities, dtype=np.int64)
        is_label = np.asarray(self.is_label, dtype=bool)
        if codes.ndim != 2:
            raise ValueError("codes must be 2-dimensional (n_vars, n_rows)")
        n_vars = codes.shape[0]
        if not (len(arities) == len(is_label) == len(self.names) == n_vars):
            raise ValueError("arities, is_label and names must match codes")
        if codes.shape[1] < 1:
            raise ValueError("dataset has no rows")
        if np.any(arities < 1):
            raise ValueError("arities must be >= 1")
        if np.any(codes < 0) or np.any(codes >= arities[:, None]):
            raise ValueError("code out of range for its arity")
        if not is_label.any():
            raise ValueError("dataset must contain at least one label")
        codes.setflags(write=False)
        arities.setflags(write=False)
        is_label.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "arities", arities)
        object.__setattr__(self, "is_label", is_label)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n_vars(self) -> int:
        return self.codes.shape[0]

    @property
    def n_rows(self) -> int:
        return self.codes.shape[1]

    @property
    def labels(self) -> tuple[VariableId, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.is_label))

    @property
    def features(self) -> tuple[VariableId, ...]:
        return tuple(int(i) for i in np.flatnonzero(~self.is_label))

    def column(self, v: VariableId) -> np.ndarray:
        return self.codes[v]

    def arity(self, v: VariableId) -> int:
        return int(self.arities[v])

    def id_of(self, name: str) -> VariableId:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable name: {name!r}") from None


@dataclass(frozen=True)
class ContingencyTable:
    """Dense co-occurrence counts of (x, y) within each configuration of z.

    ``counts`` has shape (n_strata, arity(x), arity(y)) where the stratum
    index folds z's codes most-significant-first in ascending variable order.
    """

    x: VariableId
    y: VariableId
    z: tuple[VariableId, ...]
    counts: np.ndarray
    n: int


def _check_disjoint(x: VariableId, y: VariableId, z) -> tuple[int, ...]:
    zt = tuple(sorted(int(v) for v in z))
    if x == y:
        raise ValueError("x and y must differ")
    if x in zt or y in zt:
        raise ValueError("conditioning set overlaps {x, y}")
    if len(zt) != len(set(zt)):
        raise ValueError("duplicate variable in conditioning set")
    return zt


def stratum_index(ds: Dataset, z: tuple[VariableId, ...]) -> tuple[np.ndarray, int]:
    """Fold the z columns into one code per row; returns (index, n_strata)."""
    n_strata = 1
    idx = np.zeros(ds.n_rows, dtype=np.int64)
    for v in z:
        n_strata *= ds.arity(v)
        if n_strata > 1 << 62:
            raise ValueError("conditioning state space exceeds int64 coding")
        idx = idx * ds.arities[v] + ds.codes[v]
    return idx, n_strata


def contingency(ds: Dataset, x: VariableId, y: VariableId,
                z=()) -> ContingencyTable:
    """Count co-occurrences of x and y within every configuration of z."""
    zt = _check_disjoint(x, y, z)
    rx, ry = ds.arity(x), ds.arity(y)
    zidx, n_strata = stratum_index(ds, zt)
    if n_strata * rx * ry > 1 << 26:
        raise ValueError("contingency table too large to materialize")
    flat = (zidx * rx + ds.codes[x]) * ry + ds.codes[y]
    counts = np.bincount(flat, minlength=n_strata * rx * ry)
    counts = counts.reshape(n_strata, rx, ry)
    return ContingencyTable(x=x, y=y, z=zt, counts=counts, n=ds.n_rows)


def load_dataset(csv_path, meta_path) -> Dataset:
    """Load a dataset from a header CSV plus a JSON file naming the labels.

    Integer columns are taken verbatim as codes (arity = max code + 1, gaps
    allowed); any other column is coded by first appearance of each distinct
    string. Blank cells and negative integers are hard errors.
    """
    meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    label_names = meta.get("labels")
    if not isinstance(label_names, list) or not all(isinstance(s, str) for s in label_names):
        raise ValueError('metadata must be a JSON object {"labels": [name, ...]}')

    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty CSV file") from None
        rows = list(reader)

    if len(set(header)) != len(header):
        raise ValueError("duplicate column names in CSV header")
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"ragged row {i + 2}: expected {len(header)} cells")
    if not rows:
        raise ValueError("CSV contains a header but no data rows")

    missing = [name for name in label_names if name not in header]
    if missing:
        raise ValueError(f"unknown label column(s): {', '.join(missing)}")

    n_rows = len(rows)
    codes = np.empty((len(header), n_rows), dtype=np.int64)
    arities = np.empty(len(header), dtype=np.int64)
    for j, name in enumerate(header):
        cells = [row[j] for row in rows]
        if any(c == "" for c in cells):
            raise ValueError(f"blank cell in column {name!r}")
        try:
            values = [int(c) for c in cells]
        except ValueError:
            seen: dict[str, int] = {}
            col = [seen.setdefault(c, len(seen)) for c in cells]
            codes[j] = col
            arities[j] = len(seen)
            continue
        if min(values) < 0:
            raise ValueError(f"negative code in column {name!r}")
        codes[j] = values
        arities[j] = max(values) + 1

    is_label = np.array([name in set(label_names) for name in header])
    return Dataset(codes=codes, arities=arities, is_label=is_label,
                   names=tuple(header))
