"""Empirical-measure statistics: character sums, discrepancy, target comparison.

The primary equidistribution metric is the table of empirical character
averages S(k,l) = sum_i w_i e(k x_i + l y_i) over |k|,|l| <= K: the targets
(Lebesgue x Lebesgue, Lebesgue x digit-measure) have closed-form character
tables, so the comparison introduces no second sampling error. A grid star
discrepancy is the secondary diagnostic.

Accumulations use pairwise summation (np.sum), so results are independent
of work scheduling to the last ulp or so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .measures import Bernoulli1D, fourier_coeff

__all__ = [
    "EmpiricalMeasure",
    "LambdaLambda",
    "LambdaTimes",
    "EmpiricalTarget",
    "weyl_table",
    "weyl_row",
    "target_table",
    "compare",
    "EquidistReport",
    "star_discrepancy_grid",
    "prefix_tables",
    "trend_from_tables",
    "default_tolerance",
]


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted point cloud; points shape (N,) for 1-D or (N,2) for planar.

    Weights are normalized to total mass 1 (uniform when omitted). Points
    feeding character sums must live in the fundamental domain [0,1)^d;
    scenery frames reuse this carrier on [-1,1]^2.
    """

    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim not in (1, 2) or (pts.ndim == 2 and pts.shape[1] != 2):
            raise ValueError("points must have shape (N,) or (N, 2)")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.weights is not None:
            w = np.ascontiguousarray(self.weights, dtype=np.float64)
            if w.shape != (len(pts),):
                raise ValueError("weights must match points")
            if w.min() < 0:
                raise ValueError("weights must be non-negative")
            total = w.sum()
            if not math.isclose(total, 1.0, abs_tol=1e-12):
                if total <= 0:
                    raise ValueError("weights must have positive mass")
                w = w / total
            w.flags.writeable = False
            object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.points)

    @property
    def dim(self) -> int:
        return 1 if self.points.ndim == 1 else 2


def _weighted_mean(values: np.ndarray, weights: np.ndarray | None) -> complex:
    if weights is None:
        return complex(np.sum(values) / len(values))
    return complex(np.sum(values * weights))


def weyl_table(emp: EmpiricalMeasure, K: int) -> np.ndarray:
    """S(k,l) for |k|,|l| <= K, indexed [k+K, l+K].

    Half the table is computed; the rest is filled by the exact Hermitian
    symmetry S(-k,-l) = conj(S(k,l)).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if emp.dim != 2:
        raise ValueError("weyl_table needs a planar cloud")
    x = emp.points[:, 0]
    y = emp.points[:, 1]
    ex = np.exp(2j * np.pi * x)
    ey = np.exp(2j * np.pi * y)
    ey_pows = [np.ones_like(ey)]
    for _ in range(K):
        ey_pows.append(ey_pows[-1] * ey)
    size = 2 * K + 1
    table = np.zeros((size, size), dtype=complex)
    exk = np.ones_like(ex)
    for k in range(0, K + 1):
        if k:
            exk = exk * ex
        lmin = 0 if k == 0 else -K
        for l in range(lmin, K + 1):
            el = ey_pows[l] if l >= 0 else np.conj(ey_pows[-l])
            s = _weighted_mean(exk * el, emp.weights)
            table[k + K, l + K] = s
            table[K - k, K - l] = np.conj(s)
    return table


def weyl_row(values: np.ndarray, K: int, weights: np.ndarray | None = None) -> np.ndarray:
    """1-D character averages S(k) for k = 0..K."""
    e = np.exp(2j * np.pi * np.asarray(values, dtype=np.float64))
    out = np.empty(K + 1, dtype=complex)
    ek = np.ones_like(e)
    out[0] = _weighted_mean(ek, weights)
    for k in range(1, K + 1):
        ek = ek * e
        out[k] = _weighted_mean(ek, weights)
    return out


# ---------------------------------------------------------------------------
# targets

@dataclass(frozen=True)
class LambdaLambda:
    """Lebesgue x Lebesgue on the torus: table is the indicator of (0,0)."""


@dataclass(frozen=True)
class LambdaTimes:
    """Lebesgue x rho for a 1-D digit measure rho: T(k,l) = [k=0] rho_hat(l)."""

    marginal: Bernoulli1D
    tol: float = 1e-8


@dataclass(frozen=True)
class EmpiricalTarget:
    """Reference sample: target table is its own character table."""

    emp: EmpiricalMeasure


def target_table(target, K: int) -> np.ndarray:
    size = 2 * K + 1
    if isinstance(target, LambdaLambda):
        t = np.zeros((size, size), dtype=complex)
        t[K, K] = 1.0
        return t
    if isinstance(target, LambdaTimes):
        t = np.zeros((size, size), dtype=complex)
        for l in range(-K, K + 1):
            t[K, l + K] = fourier_coeff(target.marginal, l, target.tol).value
        return t
    if isinstance(target, EmpiricalTarget):
        return weyl_table(target.emp, K)
    raise TypeError(f"unsupported target {type(target)!r}")


@dataclass
class EquidistReport:
    """Comparison of an empirical character table against a target table."""

    freq_range: int
    coeff_table: np.ndarray
    target: np.ndarray
    max_deviation: float
    tolerance: float
    passed: bool
    trend: list[tuple[int, float]] = field(default_factory=list)
    trend_decreasing: bool | None = None
    metadata: dict = field(default_factory=dict)

    def deviation_table(self) -> np.ndarray:
        return np.abs(self.coeff_table - self.target)


def compare(emp: EmpiricalMeasure, target, K: int, tol: float,
            metadata: dict | None = None) -> EquidistReport:
    """Max character deviation over |k|,|l| <= K versus the target, pass/fail."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    table = weyl_table(emp, K)
    ttable = target_table(target, K)
    dev = float(np.abs(table - ttable).max())
    return EquidistReport(K, table, ttable, dev, tol, dev <= tol,
                          metadata=dict(metadata or {}))


def default_tolerance(total_points: int) -> float:
    """Calibrated to the iid-uniform null: max(0.05, 5/sqrt(total points))."""
    return max(0.05, 5.0 / math.sqrt(max(total_points, 1)))


# ---------------------------------------------------------------------------
# discrepancy

def star_discrepancy_grid(emp: EmpiricalMeasure, G: int) -> float:
    """Max |mass - area| over boxes [0,a/G) x [0,b/G); a grid lower bound
    of the star discrepancy, monotone non-decreasing along nested grids."""
    if G < 2:
        raise ValueError("G must be >= 2")
    if emp.dim != 2:
        raise ValueError("star discrepancy needs a planar cloud")
    pts = emp.points
    if pts.min() < 0 or pts.max() >= 1:
        raise ValueError("points must lie in [0,1)^2")
    w = emp.weights
    hist, _, _ = np.histogram2d(
        pts[:, 0], pts[:, 1], bins=G, range=[[0, 1], [0, 1]],
        weights=w if w is not None else None,
    )
    if w is None:
        hist /= len(emp)
    cum = hist.cumsum(axis=0).cumsum(axis=1)
    a = np.arange(1, G + 1)
    area = np.outer(a, a) / G**2
    return float(np.abs(cum - area).max())


# ---------------------------------------------------------------------------
# Cesaro trends over nested prefixes

def prefix_tables(orbits, lengths, K: int) -> dict[int, np.ndarray]:
    """Averaged character tables over nested orbit prefixes.

    orbits: iterable of (N,2) arrays sharing one underlying expansion (the
    prefixes are genuinely nested, no re-randomization). Returns
    {N: table averaged over orbits}.
    """
    lengths = sorted(set(int(n) for n in lengths))
    acc = {n: np.zeros((2 * K + 1, 2 * K + 1), dtype=complex) for n in lengths}
    count = 0
    for pts in orbits:
        pts = np.asarray(pts)
        if len(pts) < lengths[-1]:
            raise ValueError("orbit shorter than the largest requested prefix")
        count += 1
        for n in lengths:
            acc[n] += weyl_table(EmpiricalMeasure(pts[:n]), K)
    if count == 0:
        raise ValueError("no orbits supplied")
    return {n: t / count for n, t in acc.items()}


def trend_from_tables(tables: dict[int, np.ndarray], target) -> tuple[list[tuple[int, float]], bool]:
    """Per-N max deviations and whether they are strictly decreasing."""
    lengths = sorted(tables)
    K = (tables[lengths[0]].shape[0] - 1) // 2
    ttab = target_table(target, K)
    seq = [(n, float(np.abs(tables[n] - ttab).max())) for n in lengths]
    decreasing = all(b[1] < a[1] for a, b in zip(seq, seq[1:]))
    return seq, decreasing
