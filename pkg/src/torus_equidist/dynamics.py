"""Orbits on the 2-torus under coordinate-wise x m, x n maps.

Three redundant orbit paths cross-validate each other:

  orbit_exact   exact modular arithmetic on numerators of rational points
  orbit_digits  shift of one-shot base-m / base-n expansions (the fast path:
                iterating x m on an enclosure multiplies its radius by m per
                step, while a single long division amortizes all precision
                cost up front)
  orbit_ball    certified expansions of ball coordinates, then orbit_digits

Emitted points are float64 with a separate certified absolute bound, valid
for every point of the orbit. Statistics downstream need ~1e-9 accuracy at
most, so `output_precision_bits` defaults to 40 and is capped at 50 (a
float64 cannot carry a tighter absolute bound on [0,1)).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .precision import (
    Ball,
    DigitString,
    InsufficientPrecision,
    ball_digits,
    rational_digits,
)

__all__ = [
    "MAX_OUTPUT_BITS",
    "TorusPoint",
    "OrbitSpec",
    "Orbit",
    "tmap",
    "guard_digits",
    "orbit_exact",
    "orbit_digits",
    "orbit_ball",
    "min_ball_precision",
    "dump_orbit_csv",
]

MAX_OUTPUT_BITS = 50


Coordinate = Fraction | Ball


@dataclass(frozen=True)
class TorusPoint:
    """Point of [0,1)^2 with exact-rational or ball coordinates."""

    x: Coordinate
    y: Coordinate

    def __post_init__(self):
        for c in (self.x, self.y):
            if isinstance(c, Fraction):
                if not (0 <= c < 1):
                    raise ValueError(f"coordinate {c} outside [0,1)")
            elif isinstance(c, Ball):
                if c.hi() < 0 or c.lo() >= 1:
                    raise ValueError("ball coordinate outside [0,1)")
            else:
                raise TypeError(f"unsupported coordinate type {type(c)!r}")

    @property
    def kind(self) -> str:
        return "rational" if isinstance(self.x, Fraction) and isinstance(self.y, Fraction) else "ball"


@dataclass(frozen=True)
class OrbitSpec:
    """Parameters of a finite (T_m x T_n)-orbit computation."""

    m: int
    n: int
    length: int
    output_precision_bits: int = 40

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise ValueError("map factors must be integers >= 2")
        if self.length < 1:
            raise ValueError("orbit length must be >= 1")
        if not (1 <= self.output_precision_bits <= MAX_OUTPUT_BITS):
            raise ValueError(f"output_precision_bits must be in [1,{MAX_OUTPUT_BITS}]")


@dataclass(frozen=True)
class Orbit:
    """N orbit points in [0,1)^2 plus a bound valid for every emitted point."""

    points: np.ndarray  # (N, 2) float64, read-only
    certified_error: float
    spec: OrbitSpec
    mode: str

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if not self.certified_error <= 2.0**-self.spec.output_precision_bits:
            raise ValueError("certified_error exceeds the output precision contract")


def tmap(x: Fraction, b: int) -> Fraction:
    """b*x mod 1, exactly."""
    x = Fraction(x)
    if not (0 <= x < 1):
        raise ValueError("x must lie in [0,1)")
    return Fraction((b * x.numerator) % x.denominator, x.denominator)


def guard_digits(base: int, precision_bits: int) -> int:
    """Window length so that base^-g <= 2^-(precision_bits+1)."""
    return math.ceil((precision_bits + 1) / math.log2(base))


def _digit_window_values(digits: np.ndarray, base: int, g: int, n: int) -> np.ndarray:
    """Float values of the n sliding g-digit windows (exact int64 inner product)."""
    if base**g >= 2**62:
        raise ValueError("guard window overflows int64; lower precision or base")
    powers = (base ** np.arange(g - 1, -1, -1)).astype(np.int64)
    w = sliding_window_view(digits[: n + g], g)[:n] @ powers
    return w / float(base**g)


def orbit_exact(z: TorusPoint, spec: OrbitSpec) -> Orbit:
    """Exact orbit of a rational point: numerator recurrence a <- m*a mod q."""
    if z.kind != "rational":
        raise TypeError("orbit_exact needs rational coordinates")
    ax, qx = z.x.numerator, z.x.denominator
    ay, qy = z.y.numerator, z.y.denominator
    n = spec.length
    pts = np.empty((n, 2), dtype=np.float64)
    m_, n_ = spec.m, spec.n
    for i in range(n):
        pts[i, 0] = ax / qx  # big-int true division: correctly rounded
        pts[i, 1] = ay / qy
        ax = (ax * m_) % qx
        ay = (ay * n_) % qy
    return Orbit(pts, 2.0**-52, spec, "exact")


def orbit_digits(x_digits: DigitString, y_digits: DigitString, spec: OrbitSpec) -> Orbit:
    """Orbit as shifts of precomputed expansions (base m for x, base n for y)."""
    if x_digits.base != spec.m or y_digits.base != spec.n:
        raise ValueError("digit string bases must match the map factors")
    p = spec.output_precision_bits
    gx = guard_digits(spec.m, p)
    gy = guard_digits(spec.n, p)
    if len(x_digits) < spec.length + gx or len(y_digits) < spec.length + gy:
        raise ValueError(
            f"digit strings too short: need {spec.length}+{gx} (base {spec.m}) "
            f"and {spec.length}+{gy} (base {spec.n})"
        )
    xs = _digit_window_values(x_digits.digits, spec.m, gx, spec.length)
    ys = _digit_window_values(y_digits.digits, spec.n, gy, spec.length)
    err = 2.0 ** -(p + 1) + 2.0**-51  # truncation + float division slop
    return Orbit(np.column_stack([xs, ys]), err, spec, "digits")


def min_ball_precision(spec: OrbitSpec) -> int:
    """Bits so that a from_fraction lift meets the orbit_ball radius contract.

    The 64-bit margin keeps the lift radius far inside the deepest digit
    cell, so grid-line straddles only happen for adversarial inputs.
    """
    b = max(spec.m, spec.n)
    return math.ceil(spec.length * math.log2(b)) + spec.output_precision_bits + 64


def orbit_ball(z: TorusPoint, spec: OrbitSpec) -> Orbit:
    """Certified orbit of ball coordinates via one-shot expansions.

    Contract: each coordinate radius must satisfy
    radius <= 2^-output_precision_bits * max(m,n)^-length, otherwise
    InsufficientPrecision is raised immediately (and likewise if a
    coordinate straddles a digit-grid line).
    """
    if z.kind != "ball":
        raise TypeError("orbit_ball needs ball coordinates")
    log2_bound = -(spec.output_precision_bits + spec.length * math.log2(max(spec.m, spec.n)))
    bound = Fraction(1, (1 << spec.output_precision_bits) * max(spec.m, spec.n) ** spec.length)
    for name, c in (("x", z.x), ("y", z.y)):
        if c.radius() > bound:
            raise InsufficientPrecision(
                f"{name} radius 2^{c.log2_radius():.1f} violates the orbit contract "
                f"(need <= 2^{log2_bound:.1f})"
            )
    p = spec.output_precision_bits
    xd = ball_digits(z.x, spec.m, spec.length + guard_digits(spec.m, p))
    yd = ball_digits(z.y, spec.n, spec.length + guard_digits(spec.n, p))
    orb = orbit_digits(xd, yd, spec)
    return Orbit(orb.points, orb.certified_error, spec, "ball")


def digit_orbit_from_rational(z: TorusPoint, spec: OrbitSpec) -> Orbit:
    """Convenience: expand rational coordinates once, then orbit_digits."""
    if z.kind != "rational":
        raise TypeError("needs rational coordinates")
    p = spec.output_precision_bits
    xd = rational_digits(z.x, spec.m, spec.length + guard_digits(spec.m, p))
    yd = rational_digits(z.y, spec.n, spec.length + guard_digits(spec.n, p))
    return orbit_digits(xd, yd, spec)


def dump_orbit_csv(orbit: Orbit, csv_path, *, seed: int, measure_spec_hash: str) -> None:
    """CSV columns i,x,y plus a JSON sidecar with provenance."""
    csv_path = str(csv_path)
    with open(csv_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["i", "x", "y"])
        for i, (x, y) in enumerate(orbit.points):
            w.writerow([i, f"{x:.17g}", f"{y:.17g}"])
    sidecar = {
        "m": orbit.spec.m,
        "n": orbit.spec.n,
        "N": orbit.spec.length,
        "certified_error": orbit.certified_error,
        "seed": seed,
        "measure_spec_hash": measure_spec_hash,
    }
    with open(csv_path + ".json", "w") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")
