"""G² conditional-independence tests and plug-in conditional mutual information.

Both quantities come out of one natural-log kernel, so the identity
``G² = 2 n ln(2) I(X;Y|Z)`` holds to floating-point rounding by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, VariableId, _check_disjoint, stratum_index
from .special import chi2_sf

# A single stratum never needs more cells than this; composite variable pairs
# beyond the cap are reported unreliable instead of being materialized.
MAX_CELLS_PER_STRATUM = 4096

# Hard cap on the whole (strata x cells) work array. Tests large enough to
# trip it could never be reliable at the sample sizes this library targets.
_MAX_TABLE_CELLS = 1 << 26


@dataclass(frozen=True)
class CiConfig:
    """Knobs shared by every statistical scan.

    ``reliability_h`` is the minimum rows-per-degree-of-freedom for a test to
    count as reliable; unreliable tests are read as "independence not
    refutable". ``max_cond_size`` caps conditioning-subset searches downstream.
    """

    alpha: float = 0.05
    reliability_h: float = 5.0
    max_cond_size: int = 3

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.reliability_h <= 0.0:
            raise ValueError("reliability_h must be positive")
        if self.max_cond_size < 1:
            raise ValueError("max_cond_size must be >= 1")


@dataclass(frozen=True)
class CiResult:
    statistic: float
    dof: int
    p_value: float
    reliable: bool
    independent: bool


def _unreliable() -> CiResult:
    return CiResult(statistic=0.0, dof=0, p_value=1.0, reliable=False,
                    independent=True)


def _nat_kernel(xcode: np.ndarray, rx: int, ycode: np.ndarray, ry: int,
                zidx: np.ndarray) -> tuple[float, int]:
    """Sum of O·ln(O·N_s / (row·col)) over strata, plus the adjusted dof.

    ``zidx`` is a per-row stratum code; only observed strata are counted,
    which changes nothing (empty strata contribute zero to both outputs).
    """
    _, zinv = np.unique(zidx, return_inverse=True)
    nz = int(zinv.max()) + 1 if len(zinv) else 1
    flat = (zinv * rx + xcode) * ry + ycode
    counts = np.bincount(flat, minlength=nz * rx * ry).reshape(nz, rx, ry)

    totals = counts.sum(axis=(1, 2), keepdims=True)
    rows = counts.sum(axis=2, keepdims=True)
    cols = counts.sum(axis=1, keepdims=True)

    mask = counts > 0
    o = counts[mask].astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        expected = rows * cols / totals  # empty strata yield NaN, masked out
    nat = float((o * np.log(o / expected[mask])).sum()) if o.size else 0.0
    # Per-stratum value counts with nonzero marginals; empty strata clip to 0.
    rx_eff = (rows > 0).sum(axis=1).ravel()
    ry_eff = (cols > 0).sum(axis=2).ravel()
    dof = int(((rx_eff - 1).clip(min=0) * (ry_eff - 1).clip(min=0)).sum())
    return max(nat, 0.0), dof


def _result_from_kernel(nat: float, dof: int, n_rows: int,
                        cfg: CiConfig) -> CiResult:
    statistic = 2.0 * nat
    p_value = chi2_sf(statistic, dof)
    reliable = dof >= 1 and n_rows >= cfg.reliability_h * dof
    independent = (p_value > cfg.alpha) if reliable else True
    return CiResult(statistic=statistic, dof=dof, p_value=p_value,
                    reliable=reliable, independent=independent)


def g2_test(ds: Dataset, x: VariableId, y: VariableId, z=(),
            cfg: CiConfig = CiConfig()) -> CiResult:
    """Likelihood-ratio test of ``x ⊥ y | z`` on the dataset's counts.

    The statistic is 2·Σ O·ln(O/E) within each stratum of z; dof counts, per
    nonempty stratum, (r_x−1)(r_y−1) over values with nonzero marginals.
    A test with fewer than ``reliability_h`` rows per dof (or dof 0) is
    unreliable and reported independent.
    """
    zt = _check_disjoint(x, y, z)
    zidx, n_strata = stratum_index(ds, zt)
    rx, ry = ds.arity(x), ds.arity(y)
    if min(n_strata, ds.n_rows) * rx * ry > _MAX_TABLE_CELLS:
        return _unreliable()
    nat, dof = _nat_kernel(ds.codes[x], rx, ds.codes[y], ry, zidx)
    return _result_from_kernel(nat, dof, ds.n_rows, cfg)


def _composite(ds: Dataset, vs: tuple[VariableId, ...]) -> tuple[np.ndarray, int]:
    """Cartesian coding of a variable set; arity is the product of arities."""
    arity = 1
    code = np.zeros(ds.n_rows, dtype=np.int64)
    for v in vs:
        arity *= ds.arity(v)
        if arity > 1 << 62:
            raise ValueError("composite state space exceeds int64 coding")
        code = code * ds.arities[v] + ds.codes[v]
    return code, arity


def _validate_sets(xs, ys, z) -> tuple[tuple, tuple, tuple]:
    xt = tuple(sorted(int(v) for v in xs))
    yt = tuple(sorted(int(v) for v in ys))
    zt = tuple(sorted(int(v) for v in z))
    if not xt or not yt:
        raise ValueError("variable sets must be nonempty")
    pool = xt + yt + zt
    if len(set(pool)) != len(pool):
        raise ValueError("variable sets must be pairwise disjoint")
    return xt, yt, zt


def set_ci(ds: Dataset, xs, ys, z=(), cfg: CiConfig = CiConfig()) -> CiResult:
    """G² test between composite variables built from ``xs`` and ``ys``.

    Singleton sets reduce exactly to :func:`g2_test`. Pairs whose composite
    table would exceed MAX_CELLS_PER_STRATUM cells are reported unreliable.
    """
    xt, yt, zt = _validate_sets(xs, ys, z)
    xcode, rx = _composite(ds, xt)
    ycode, ry = _composite(ds, yt)
    if rx * ry > MAX_CELLS_PER_STRATUM:
        return _unreliable()
    zidx, n_strata = stratum_index(ds, zt)
    if min(n_strata, ds.n_rows) * rx * ry > _MAX_TABLE_CELLS:
        return _unreliable()
    nat, dof = _nat_kernel(xcode, rx, ycode, ry, zidx)
    return _result_from_kernel(nat, dof, ds.n_rows, cfg)


def set_independent(ds: Dataset, xs, ys, z=(),
                    cfg: CiConfig = CiConfig()) -> bool:
    return set_ci(ds, xs, ys, z, cfg).independent


def cond_mutual_information(ds: Dataset, xs, ys, z=()) -> float:
    """Plug-in estimate of I(xs; ys | z) in bits; tiny negatives clamp to 0."""
    xt, yt, zt = _validate_sets(xs, ys, z)
    xcode, rx = _composite(ds, xt)
    ycode, ry = _composite(ds, yt)
    zidx, _ = stratum_index(ds, zt)
    nat, _ = _nat_kernel(xcode, rx, ycode, ry, zidx)
    return nat / (ds.n_rows * math.log(2.0))
