"""Measure classes: constructors, validators, samplers, structural analysis.

Three families are supported, plus the 1-D digit measures they are built
from:

  ProductBernoulli     IID base-p digit pairs (a x p, x p invariant measure)
  MixedBaseBernoulli   IID digit pairs in bases (p1, p2) (x p1, x p2 invariant)
  PlanarIFS            self-similar measure of a contracting similarity IFS
                       with rotation parts (Hutchinson stationary measure)
  LineEmbedding        a 1-D digit measure pushed onto the line x = a*y + b

Exact samples carry Fraction coordinates (denominator p^depth) or Ball
coordinates (radius <= bounding_radius * r_max^depth). `sample_cloud` is the
vectorized float path for statistics at scales far above 1e-12.

Rotation angles are rational multiples of a full turn in the decidable
class; exact rational radian angles and raw floats are accepted for
sampling, with the structural analysis degrading honestly (see
`analyze_rotations`).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rng
from .precision import (Ball, cos_sin_radians, cos_sin_turns, digits_to_int, _pow,
                        _dyadic_upper, _rad_add, _rad_mul_fraction)
from .dynamics import TorusPoint

__all__ = [
    "Bernoulli1D",
    "ProductBernoulli",
    "MixedBaseBernoulli",
    "IFSBranch",
    "PlanarIFS",
    "LineEmbedding",
    "IFSAnalysis",
    "SSCVerdict",
    "cantor_lebesgue",
    "uniform_digits",
    "diagonal_embedding",
    "mixed_base_counterexample",
    "product_from_marginals",
    "rotation_demo_ifs",
    "cantor_demo_ifs",
    "sample",
    "sample_cloud",
    "validate_ssc",
    "analyze_rotations",
    "attractor_bounds",
    "marginal",
    "entropy_dimension",
    "fourier_coeff",
    "ComplexBall",
    "to_json_dict",
    "from_json_dict",
    "canonical_json",
    "spec_hash",
]


# ---------------------------------------------------------------------------
# spec types

def _as_weights(ws) -> tuple[Fraction, ...]:
    ws = tuple(Fraction(w) for w in ws)
    if any(w < 0 for w in ws):
        raise ValueError("weights must be non-negative")
    if sum(ws) != 1:
        raise ValueError("weights must sum to 1 exactly")
    return ws


@dataclass(frozen=True)
class Bernoulli1D:
    """IID base-p digits with rational weights; the law of sum X_k p^-k."""

    base: int
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        object.__setattr__(self, "weights", _as_weights(self.weights))
        if len(self.weights) != self.base:
            raise ValueError("need one weight per digit")


@dataclass(frozen=True)
class ProductBernoulli:
    """IID base-p digit pairs; weights[i][j] = P(X=i, Y=j)."""

    base: int
    weights: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        rows = tuple(tuple(Fraction(w) for w in row) for row in self.weights)
        if len(rows) != self.base or any(len(r) != self.base for r in rows):
            raise ValueError("weights must be a base x base matrix")
        flat = [w for row in rows for w in row]
        _as_weights(flat)
        object.__setattr__(self, "weights", rows)


@dataclass(frozen=True)
class MixedBaseBernoulli:
    """IID digit pairs in bases (base_x, base_y); weights[i][j] = P(X=i, Y=j)."""

    base_x: int
    base_y: int
    weights: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if self.base_x < 2 or self.base_y < 2:
            raise ValueError("bases must be >= 2")
        rows = tuple(tuple(Fraction(w) for w in row) for row in self.weights)
        if len(rows) != self.base_x or any(len(r) != self.base_y for r in rows):
            raise ValueError("weights must be a base_x x base_y matrix")
        _as_weights([w for row in rows for w in row])
        object.__setattr__(self, "weights", rows)


@dataclass(frozen=True)
class IFSBranch:
    """Contracting similarity x -> ratio * R(angle) x + translation.

    The angle is given in exactly one encoding: `angle_turns` (rational
    multiple of a full turn, the decidable class), `angle_radians_exact`
    (exact rational radians), or `angle_radians` (float, sampling only).
    """

    ratio: Fraction
    translation: tuple[Fraction, Fraction]
    angle_turns: Fraction | None = None
    angle_radians_exact: Fraction | None = None
    angle_radians: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "ratio", Fraction(self.ratio))
        if not (0 < self.ratio < 1):
            raise ValueError("ratio must lie in (0,1)")
        object.__setattr__(
            self, "translation", (Fraction(self.translation[0]), Fraction(self.translation[1]))
        )
        encodings = [
            self.angle_turns is not None,
            self.angle_radians_exact is not None,
            self.angle_radians is not None,
        ]
        if sum(encodings) != 1:
            raise ValueError("exactly one angle encoding required")
        if self.angle_turns is not None:
            object.__setattr__(self, "angle_turns", Fraction(self.angle_turns) % 1)
        if self.angle_radians_exact is not None:
            object.__setattr__(self, "angle_radians_exact", Fraction(self.angle_radians_exact))

    def angle_value(self) -> float:
        if self.angle_turns is not None:
            return 2 * math.pi * float(self.angle_turns)
        if self.angle_radians_exact is not None:
            return float(self.angle_radians_exact)
        return float(self.angle_radians)

    def cos_sin(self, prec: int) -> tuple[Ball, Ball]:
        if self.angle_turns is not None:
            return cos_sin_turns(self.angle_turns, prec)
        if self.angle_radians_exact is not None:
            return cos_sin_radians(self.angle_radians_exact, prec)
        # a float angle is a definite dyadic rational number of radians
        return cos_sin_radians(Fraction(self.angle_radians), prec)


@dataclass(frozen=True)
class PlanarIFS:
    branches: tuple[IFSBranch, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if len(self.branches) < 2:
            raise ValueError("need at least two branches")
        ws = _as_weights(self.weights)
        if len(ws) != len(self.branches):
            raise ValueError("need one weight per branch")
        if any(w == 0 for w in ws):
            raise ValueError("all branch weights must be positive")
        object.__setattr__(self, "weights", ws)

    def uniform_ratio(self) -> Fraction | None:
        rs = {b.ratio for b in self.branches}
        return next(iter(rs)) if len(rs) == 1 else None

    def r_max(self) -> Fraction:
        return max(b.ratio for b in self.branches)


@dataclass(frozen=True)
class LineEmbedding:
    """Pushforward of a digit measure by t -> (slope*t + intercept, t)."""

    digit_measure: Bernoulli1D
    slope: Fraction
    intercept: Fraction

    def __post_init__(self):
        object.__setattr__(self, "slope", Fraction(self.slope))
        object.__setattr__(self, "intercept", Fraction(self.intercept))
        if self.slope == 0:
            raise ValueError("slope must be non-zero (line not parallel to the axes)")
        # image of [0,1] must stay in [0,1]^2
        ends = (self.intercept, self.slope + self.intercept)
        if min(ends) < 0 or max(ends) > 1:
            raise ValueError("line image leaves the unit square")


MeasureSpec = Bernoulli1D | ProductBernoulli | MixedBaseBernoulli | PlanarIFS | LineEmbedding


# ---------------------------------------------------------------------------
# convenience constructors (shared fixtures)

def cantor_lebesgue(base: int = 3, digits: tuple[int, ...] = (0, 2)) -> Bernoulli1D:
    w = [Fraction(0)] * base
    for d in digits:
        w[d] = Fraction(1, len(digits))
    return Bernoulli1D(base, tuple(w))


def uniform_digits(base: int) -> Bernoulli1D:
    return Bernoulli1D(base, tuple(Fraction(1, base) for _ in range(base)))


def diagonal_embedding(digit_measure: Bernoulli1D) -> LineEmbedding:
    return LineEmbedding(digit_measure, Fraction(1), Fraction(0))


def mixed_base_counterexample() -> MixedBaseBernoulli:
    """Digit pairs in bases (4,2) with P((0,0)) = P((1,1)) = 1/2."""
    w = [[Fraction(0)] * 2 for _ in range(4)]
    w[0][0] = Fraction(1, 2)
    w[1][1] = Fraction(1, 2)
    return MixedBaseBernoulli(4, 2, tuple(tuple(r) for r in w))


def product_from_marginals(bx: Bernoulli1D, by: Bernoulli1D) -> ProductBernoulli:
    if bx.base != by.base:
        raise ValueError("product measure needs equal bases")
    rows = tuple(tuple(wx * wy for wy in by.weights) for wx in bx.weights)
    return ProductBernoulli(bx.base, rows)


def _spread_translations(center_shift: tuple[Fraction, Fraction]) -> list[tuple[Fraction, Fraction]]:
    # three points at angles 90, 210, 330 degrees, radius 3/10, rationalized
    return [
        (center_shift[0] + Fraction(0), center_shift[1] + Fraction(3, 10)),
        (center_shift[0] - Fraction(2598, 10000), center_shift[1] - Fraction(3, 20)),
        (center_shift[0] + Fraction(2598, 10000), center_shift[1] - Fraction(3, 20)),
    ]


def rotation_demo_ifs() -> PlanarIFS:
    """Three branches, ratio 1/4, rotation by a third of a turn, SSC-certifiable."""
    # translations place the attractor center near (1/2, 1/2); see tests
    shift = (Fraction(671, 1000), Fraction(454, 1000))
    branches = tuple(
        IFSBranch(Fraction(1, 4), t, angle_turns=Fraction(1, 3))
        for t in _spread_translations(shift)
    )
    return PlanarIFS(branches, (Fraction(1, 3),) * 3)


def cantor_demo_ifs() -> PlanarIFS:
    """Rotation-free three-branch ratio-1/4 fixture (dimension log3/log4)."""
    shift = (Fraction(375, 1000), Fraction(375, 1000))
    branches = tuple(
        IFSBranch(Fraction(1, 4), t, angle_turns=Fraction(0))
        for t in _spread_translations(shift)
    )
    return PlanarIFS(branches, (Fraction(1, 3),) * 3)


# ---------------------------------------------------------------------------
# serialization ("a/b" strings for rationals, kind-tagged JSON objects)

def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _frac_parse(s) -> Fraction:
    if isinstance(s, str):
        return Fraction(s)
    if isinstance(s, int):
        return Fraction(s)
    raise ValueError(f"rationals must be 'a/b' strings, got {s!r}")


def to_json_dict(spec: MeasureSpec) -> dict:
    if isinstance(spec, Bernoulli1D):
        return {"kind": "bernoulli1d", "base": spec.base,
                "weights": [_frac_str(w) for w in spec.weights]}
    if isinstance(spec, ProductBernoulli):
        return {"kind": "product_bernoulli", "base": spec.base,
                "weights": [[_frac_str(w) for w in row] for row in spec.weights]}
    if isinstance(spec, MixedBaseBernoulli):
        return {"kind": "mixed_base_bernoulli", "bases": [spec.base_x, spec.base_y],
                "weights": [[_frac_str(w) for w in row] for row in spec.weights]}
    if isinstance(spec, PlanarIFS):
        branches = []
        for b in spec.branches:
            d = {"ratio": _frac_str(b.ratio),
                 "translation": [_frac_str(b.translation[0]), _frac_str(b.translation[1])]}
            if b.angle_turns is not None:
                d["angle_turns"] = _frac_str(b.angle_turns)
            elif b.angle_radians_exact is not None:
                d["angle_radians_exact"] = _frac_str(b.angle_radians_exact)
            else:
                d["angle_radians"] = b.angle_radians
            branches.append(d)
        return {"kind": "planar_ifs", "branches": branches,
                "weights": [_frac_str(w) for w in spec.weights]}
    if isinstance(spec, LineEmbedding):
        return {"kind": "line_embedding",
                "digit_measure": to_json_dict(spec.digit_measure),
                "line": {"slope": _frac_str(spec.slope), "intercept": _frac_str(spec.intercept)}}
    raise TypeError(f"unsupported spec {type(spec)!r}")


def from_json_dict(d: dict) -> MeasureSpec:
    kind = d.get("kind")
    if kind == "bernoulli1d":
        return Bernoulli1D(int(d["base"]), tuple(_frac_parse(w) for w in d["weights"]))
    if kind == "product_bernoulli":
        return ProductBernoulli(
            int(d["base"]), tuple(tuple(_frac_parse(w) for w in row) for row in d["weights"])
        )
    if kind == "mixed_base_bernoulli":
        bx, by = d["bases"]
        return MixedBaseBernoulli(
            int(bx), int(by), tuple(tuple(_frac_parse(w) for w in row) for row in d["weights"])
        )
    if kind == "planar_ifs":
        branches = []
        for b in d["branches"]:
            kwargs = {}
            if "angle_turns" in b:
                kwargs["angle_turns"] = _frac_parse(b["angle_turns"])
            elif "angle_radians_exact" in b:
                kwargs["angle_radians_exact"] = _frac_parse(b["angle_radians_exact"])
            else:
                kwargs["angle_radians"] = float(b["angle_radians"])
            branches.append(
                IFSBranch(_frac_parse(b["ratio"]),
                          (_frac_parse(b["translation"][0]), _frac_parse(b["translation"][1])),
                          **kwargs)
            )
        return PlanarIFS(tuple(branches), tuple(_frac_parse(w) for w in d["weights"]))
    if kind == "line_embedding":
        return LineEmbedding(
            from_json_dict(d["digit_measure"]),
            _frac_parse(d["line"]["slope"]),
            _frac_parse(d["line"]["intercept"]),
        )
    raise ValueError(f"unknown measure kind {kind!r}")


def canonical_json(spec: MeasureSpec) -> str:
    return json.dumps(to_json_dict(spec), sort_keys=True, separators=(",", ":"))


def spec_hash(spec: MeasureSpec) -> str:
    return hashlib.sha256(canonical_json(spec).encode()).hexdigest()


# ---------------------------------------------------------------------------
# sampling (exact; the seeded word IS the sample)

def _pair_alphabet(spec) -> list[tuple[int, int]]:
    if isinstance(spec, ProductBernoulli):
        return [(i, j) for i in range(spec.base) for j in range(spec.base)]
    return [(i, j) for i in range(spec.base_x) for j in range(spec.base_y)]


def _pair_weights(spec) -> list[Fraction]:
    return [w for row in spec.weights for w in row]


def sample(spec: MeasureSpec, depth: int, seed: int, prec: int | None = None):
    """One exact sample at the given depth: (TorusPoint, coding word).

    Bernoulli-type specs give Fraction coordinates with denominator
    base^depth; PlanarIFS gives Ball coordinates with radius at most
    bounding_radius * r_max^depth (plus rounding ulps covered by the ball).
    Deterministic given (spec, depth, seed).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    gen = rng.u64_stream(seed, depth)
    if isinstance(spec, Bernoulli1D):
        edges = rng.weight_edges(spec.weights)
        word = tuple(int(v) for v in rng.draw_symbols(edges, gen))
        x = Fraction(digits_to_int(word, spec.base), _pow(spec.base, depth))
        return x, word
    if isinstance(spec, (ProductBernoulli, MixedBaseBernoulli)):
        alphabet = _pair_alphabet(spec)
        edges = rng.weight_edges(_pair_weights(spec))
        idx = rng.draw_symbols(edges, gen)
        word = tuple(alphabet[int(i)] for i in idx)
        bx = spec.base if isinstance(spec, ProductBernoulli) else spec.base_x
        by = spec.base if isinstance(spec, ProductBernoulli) else spec.base_y
        x = Fraction(digits_to_int([w[0] for w in word], bx), _pow(bx, depth))
        y = Fraction(digits_to_int([w[1] for w in word], by), _pow(by, depth))
        return TorusPoint(x, y), word
    if isinstance(spec, LineEmbedding):
        t, word = sample(spec.digit_measure, depth, seed)
        return TorusPoint(spec.slope * t + spec.intercept, t), word
    if isinstance(spec, PlanarIFS):
        edges = rng.weight_edges(spec.weights)
        word = tuple(int(v) for v in rng.draw_symbols(edges, gen))
        if prec is None:
            prec = math.ceil(depth * math.log2(1 / float(spec.r_max()))) + 96
        x, y = ifs_apply_word(spec, word, prec)
        return TorusPoint(x, y), word
    raise TypeError(f"unsupported spec {type(spec)!r}")


_IFS_CACHE: dict = {}


def _ifs_trig(ifs: PlanarIFS, prec: int) -> list[tuple[Ball, Ball]]:
    key = ("trig", spec_hash(ifs), prec)
    got = _IFS_CACHE.get(key)
    if got is None:
        got = [b.cos_sin(prec) for b in ifs.branches]
        _IFS_CACHE[key] = got
    return got


def ifs_apply_word(ifs: PlanarIFS, word, prec: int) -> tuple[Ball, Ball]:
    """phi_w1 o ... o phi_wD applied to the certified bounding disk.

    The center track runs in ball arithmetic (its radius stays pinned near
    2^-prec); the disk radius is kept as a separate scalar that contracts by
    exactly the branch ratio per step, because a similarity is an isometry
    up to scale. Componentwise interval rotation would instead inflate radii
    by |cos|+|sin| per step and ruin deep samples.
    """
    (cx, cy), bound_r = attractor_bounds(ifs, prec=min(prec, 256))
    x = Ball.from_fraction(cx, prec)
    y = Ball.from_fraction(cy, prec)
    disk = _dyadic_upper(bound_r)
    trig = _ifs_trig(ifs, prec)
    t_balls = [(Ball.from_fraction(b.translation[0], prec),
                Ball.from_fraction(b.translation[1], prec)) for b in ifs.branches]
    for k in reversed(word):
        b = ifs.branches[k]
        c, s = trig[k]
        nx = c.mul(x, prec) - s.mul(y, prec)
        ny = s.mul(x, prec) + c.mul(y, prec)
        x = nx.scale(b.ratio, prec) + t_balls[k][0]
        y = ny.scale(b.ratio, prec) + t_balls[k][1]
        disk = _rad_mul_fraction(disk, b.ratio)
    x = Ball(x.man, x.exp, *_rad_add((x.rman, x.rexp), disk))
    y = Ball(y.man, y.exp, *_rad_add((y.rman, y.rexp), disk))
    return x, y


# ---------------------------------------------------------------------------
# sampling (vectorized float clouds for statistics)

_CHUNK = 250_000


def sample_cloud(spec: MeasureSpec, depth: int, count: int, seed: int) -> np.ndarray:
    """count float samples; shape (count,) for Bernoulli1D, else (count, 2).

    Float path for empirical statistics: accurate to ~depth*2^-53, which is
    far below every grid scale used downstream. Deterministic given inputs.
    """
    if isinstance(spec, Bernoulli1D):
        out = np.empty(count, dtype=np.float64)
    else:
        out = np.empty((count, 2), dtype=np.float64)
    pos = 0
    chunk_id = 0
    while pos < count:
        n = min(_CHUNK, count - pos)
        out[pos : pos + n] = _cloud_chunk(spec, depth, n, rng.derive_seed(seed, chunk_id))
        pos += n
        chunk_id += 1
    return out


def _horner_values(digits: np.ndarray, base: int) -> np.ndarray:
    # digits shape (n, depth); value = sum digits[:,k] base^-(k+1), backward Horner
    n, depth = digits.shape
    v = np.zeros(n, dtype=np.float64)
    inv = 1.0 / base
    for k in range(depth - 1, -1, -1):
        v = (v + digits[:, k]) * inv
    return v


def _cloud_chunk(spec: MeasureSpec, depth: int, n: int, seed: int) -> np.ndarray:
    u = rng.u64_stream(seed, n * depth).reshape(n, depth)
    if isinstance(spec, Bernoulli1D):
        d = rng.draw_symbols(rng.weight_edges(spec.weights), u)
        return _horner_values(d, spec.base)
    if isinstance(spec, (ProductBernoulli, MixedBaseBernoulli)):
        idx = rng.draw_symbols(rng.weight_edges(_pair_weights(spec)), u)
        if isinstance(spec, ProductBernoulli):
            bx = by = spec.base
        else:
            bx, by = spec.base_x, spec.base_y
        dx, dy = idx // by, idx % by
        return np.column_stack([_horner_values(dx, bx), _horner_values(dy, by)])
    if isinstance(spec, LineEmbedding):
        t = _cloud_chunk(spec.digit_measure, depth, n, seed)
        return np.column_stack([float(spec.slope) * t + float(spec.intercept), t])
    if isinstance(spec, PlanarIFS):
        w = rng.draw_symbols(rng.weight_edges(spec.weights), u)
        ratios = np.array([float(b.ratio) for b in spec.branches])
        cos = np.array([math.cos(b.angle_value()) for b in spec.branches])
        sin = np.array([math.sin(b.angle_value()) for b in spec.branches])
        tx = np.array([float(b.translation[0]) for b in spec.branches])
        ty = np.array([float(b.translation[1]) for b in spec.branches])
        (cx, cy), _ = attractor_bounds_float(spec)
        x = np.full(n, cx)
        y = np.full(n, cy)
        for k in range(depth - 1, -1, -1):
            b = w[:, k]
            r, c, s = ratios[b], cos[b], sin[b]
            x, y = r * (c * x - s * y) + tx[b], r * (s * x + c * y) + ty[b]
        return np.column_stack([x, y])
    raise TypeError(f"unsupported spec {type(spec)!r}")


# ---------------------------------------------------------------------------
# attractor bounds and separation

def attractor_bounds_float(ifs: PlanarIFS) -> tuple[tuple[float, float], float]:
    """Float center/radius estimate (center choice only; not certified)."""
    cx = float(np.mean([float(b.translation[0]) for b in ifs.branches]))
    cy = float(np.mean([float(b.translation[1]) for b in ifs.branches]))
    for _ in range(60):
        nx = ny = 0.0
        for b in ifs.branches:
            r, a = float(b.ratio), b.angle_value()
            nx += r * (math.cos(a) * cx - math.sin(a) * cy) + float(b.translation[0])
            ny += r * (math.sin(a) * cx + math.cos(a) * cy) + float(b.translation[1])
        cx, cy = nx / len(ifs.branches), ny / len(ifs.branches)
    rad = 0.0
    for b in ifs.branches:
        r, a = float(b.ratio), b.angle_value()
        dx = r * (math.cos(a) * cx - math.sin(a) * cy) + float(b.translation[0]) - cx
        dy = r * (math.sin(a) * cx + math.cos(a) * cy) + float(b.translation[1]) - cy
        rad = max(rad, math.hypot(dx, dy))
    return (cx, cy), rad / (1.0 - float(ifs.r_max()))


def attractor_bounds(ifs: PlanarIFS, prec: int = 160) -> tuple[tuple[Fraction, Fraction], Fraction]:
    """Certified bounding ball B(c, R): every branch maps it into itself.

    R = max_k |phi_k(c) - c| / (1 - r_max) for a rational center c chosen
    near the attractor's balance point; the max is evaluated in ball
    arithmetic and rounded up.
    """
    key = ("bounds", spec_hash(ifs), prec)
    got = _IFS_CACHE.get(key)
    if got is not None:
        return got
    (fx, fy), _ = attractor_bounds_float(ifs)
    c = (Fraction(round(fx * 2**20), 2**20), Fraction(round(fy * 2**20), 2**20))
    worst = Fraction(0)
    cxb = Ball.from_fraction(c[0], prec)
    cyb = Ball.from_fraction(c[1], prec)
    trig = _ifs_trig(ifs, prec)
    for b, (co, si) in zip(ifs.branches, trig):
        px = co.mul(cxb, prec) - si.mul(cyb, prec)
        py = si.mul(cxb, prec) + co.mul(cyb, prec)
        dx = px.scale(b.ratio, prec) + Ball.from_fraction(b.translation[0] - c[0], prec)
        dy = py.scale(b.ratio, prec) + Ball.from_fraction(b.translation[1] - c[1], prec)
        sq = max(abs(dx.lo()), abs(dx.hi())) ** 2 + max(abs(dy.lo()), abs(dy.hi())) ** 2
        worst = max(worst, _sqrt_upper(sq))
    out = (c, worst / (1 - ifs.r_max()))
    _IFS_CACHE[key] = out
    return out


def _sqrt_upper(q: Fraction, bits: int = 48) -> Fraction:
    """Rational upper bound of sqrt(q) for q >= 0."""
    if q < 0:
        raise ValueError("negative radicand")
    if q == 0:
        return Fraction(0)
    scale = 1 << bits
    n = (q.numerator * scale * scale) // q.denominator
    return Fraction(math.isqrt(n) + 1, scale)


@dataclass(frozen=True)
class SSCVerdict:
    status: str  # "certified" | "refuted" | "unknown"
    depth: int
    detail: str = ""

    def __bool__(self):
        return self.status == "certified"


def _apply_branch_to_disk(ifs: PlanarIFS, k: int, cx: Fraction, cy: Fraction,
                          rad: Fraction, prec: int):
    """Covering disk of the image of B((cx,cy), rad) under branch k.

    A similarity scales the disk radius by its ratio exactly; the rotated
    center is enclosed in ball arithmetic and its slop added to the radius.
    """
    b = ifs.branches[k]
    co, si = _ifs_trig(ifs, prec)[k]
    xb = Ball.from_fraction(cx, prec)
    yb = Ball.from_fraction(cy, prec)
    nx = (co.mul(xb, prec) - si.mul(yb, prec)).scale(b.ratio, prec)
    ny = (si.mul(xb, prec) + co.mul(yb, prec)).scale(b.ratio, prec)
    ncx = nx.center() + b.translation[0]
    ncy = ny.center() + b.translation[1]
    nrad = rad * b.ratio + nx.radius() + ny.radius()
    return ncx, ncy, nrad


def _cylinder_balls(ifs: PlanarIFS, top: int, depth: int, prec: int, bounds):
    """Covering disks of phi_top(attractor), refined `depth` levels down.

    The cylinder for word (top, w1..wd) is phi_top(phi_w1(...(X))); disks are
    produced by applying the word right-to-left to the bounding disk.
    """
    (cx0, cy0), r0 = bounds
    out = []
    for word in itertools.product(range(len(ifs.branches)), repeat=depth):
        cx, cy, rad = cx0, cy0, r0
        for k in reversed((top,) + word):
            cx, cy, rad = _apply_branch_to_disk(ifs, k, cx, cy, rad, prec)
        out.append((cx, cy, rad))
    return out


def _branch_maps_equal(a: IFSBranch, b: IFSBranch) -> bool:
    if a.ratio != b.ratio or a.translation != b.translation:
        return False
    if a.angle_turns is not None and b.angle_turns is not None:
        return a.angle_turns == b.angle_turns
    if a.angle_radians_exact is not None and b.angle_radians_exact is not None:
        return a.angle_radians_exact == b.angle_radians_exact
    if a.angle_radians is not None and b.angle_radians is not None:
        return a.angle_radians == b.angle_radians
    return False


def validate_ssc(ifs: PlanarIFS, max_depth: int = 4, prec: int = 192) -> SSCVerdict:
    """Three-valued strong-separation certificate.

    certified: at some refinement depth, covering balls of distinct branch
    images are pairwise disjoint with positive gap (exact rational test).
    refuted: two branch maps coincide exactly (equal maps => equal images).
    unknown: neither could be established up to max_depth (touching
    attractors land here).
    """
    nb = len(ifs.branches)
    for i in range(nb):
        for j in range(i + 1, nb):
            if _branch_maps_equal(ifs.branches[i], ifs.branches[j]):
                return SSCVerdict("refuted", 0, f"branches {i} and {j} are identical maps")
    bounds = attractor_bounds(ifs, prec=prec)
    for depth in range(0, max_depth):
        covers = [_cylinder_balls(ifs, i, depth, prec, bounds) for i in range(nb)]
        ok = True
        for i in range(nb):
            for j in range(i + 1, nb):
                for (ax, ay, ar) in covers[i]:
                    for (bx, by, br) in covers[j]:
                        gap2 = (ax - bx) ** 2 + (ay - by) ** 2
                        if gap2 <= (ar + br) ** 2:
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return SSCVerdict("certified", depth)
    return SSCVerdict("unknown", max_depth, "covers still overlap at max refinement depth")


# ---------------------------------------------------------------------------
# rotation-group analysis

@dataclass(frozen=True)
class IFSAnalysis:
    """Structure of the rotation parts: least common power, common angle, group."""

    k_phi: int | float | None  # int, math.inf, or None when undecided
    gamma_phi_turns: Fraction | None
    gamma_phi: float | None  # radians in [0, 2*pi)
    group_finite: bool | None
    uniform_ratio: Fraction | None
    ssc_certified: bool | None = None

    @property
    def decided(self) -> bool:
        return self.k_phi is not None


def analyze_rotations(ifs: PlanarIFS, ssc: SSCVerdict | None = None) -> IFSAnalysis:
    """k = least power equalizing all rotation parts; the common angle at k.

    Decidable cases: all angles rational turns (lcm arithmetic); all angles
    equal (k=1 regardless of encoding); any unequal pair involving an exact
    rational-radian angle (certifiably never equalized, k = infinity).
    Anything else returns an undecided analysis.
    """
    branches = ifs.branches
    ur = ifs.uniform_ratio()
    ssc_ok = None if ssc is None else (ssc.status == "certified")

    def pack(k, gamma_turns, gamma_rad, finite):
        return IFSAnalysis(k, gamma_turns, gamma_rad, finite, ur, ssc_ok)

    all_equal = all(_same_angle(branches[0], b) for b in branches[1:])
    if all_equal:
        b = branches[0]
        if b.angle_turns is not None:
            return pack(1, b.angle_turns, 2 * math.pi * float(b.angle_turns), True)
        rad = b.angle_radians_exact if b.angle_radians_exact is not None else b.angle_radians
        gamma = float(rad) % (2 * math.pi)
        finite = float(rad) == 0.0
        return pack(1, None, gamma, finite)

    if all(b.angle_turns is not None for b in branches):
        k = 1
        for i in range(len(branches)):
            for j in range(i + 1, len(branches)):
                diff = branches[i].angle_turns - branches[j].angle_turns
                k = math.lcm(k, diff.denominator)
        gamma_turns = (k * branches[0].angle_turns) % 1
        return pack(k, gamma_turns, 2 * math.pi * float(gamma_turns), True)

    # an exact nonzero rational-radian angle can never be equalized with a
    # rational-turn angle (pi is irrational), nor with a different exact
    # rational-radian angle
    exact_inputs = all(b.angle_radians is None for b in branches)
    if exact_inputs:
        return pack(math.inf, None, None, False)

    return IFSAnalysis(None, None, None, None, ur, ssc_ok)


def _same_angle(a: IFSBranch, b: IFSBranch) -> bool:
    if a.angle_turns is not None and b.angle_turns is not None:
        return a.angle_turns == b.angle_turns
    if a.angle_radians_exact is not None and b.angle_radians_exact is not None:
        return a.angle_radians_exact == b.angle_radians_exact
    if a.angle_radians is not None and b.angle_radians is not None:
        return a.angle_radians == b.angle_radians
    return False


# ---------------------------------------------------------------------------
# marginals, entropy dimension, Fourier coefficients

def marginal(spec: ProductBernoulli | MixedBaseBernoulli, axis: str) -> Bernoulli1D:
    """Digit distribution of one coordinate ('x' or 'y')."""
    if isinstance(spec, (Bernoulli1D, PlanarIFS, LineEmbedding)):
        raise TypeError("marginals are defined for product/mixed-base digit measures")
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    if isinstance(spec, ProductBernoulli):
        bx = by = spec.base
    else:
        bx, by = spec.base_x, spec.base_y
    if axis == "x":
        return Bernoulli1D(bx, tuple(sum(row) for row in spec.weights))
    cols = tuple(sum(spec.weights[i][j] for i in range(bx)) for j in range(by))
    return Bernoulli1D(by, cols)


def _entropy(weights) -> float:
    h = 0.0
    for w in weights:
        fw = float(w)
        if fw > 0:
            h -= fw * math.log(fw)
    return h


def entropy_dimension(spec: MeasureSpec) -> float:
    """Closed-form dimension of the digit measure (ground truth for estimators)."""
    if isinstance(spec, Bernoulli1D):
        return _entropy(spec.weights) / math.log(spec.base)
    if isinstance(spec, ProductBernoulli):
        return _entropy(_pair_weights(spec)) / math.log(spec.base)
    if isinstance(spec, MixedBaseBernoulli):
        # orient so the expansion in the larger base is the fast direction
        if spec.base_x >= spec.base_y:
            fast, slow = spec.base_x, spec.base_y
            slow_w = marginal(spec, "y").weights
        else:
            fast, slow = spec.base_y, spec.base_x
            slow_w = marginal(spec, "x").weights
        h_joint = _entropy(_pair_weights(spec))
        h_slow = _entropy(slow_w)
        return h_slow / math.log(slow) + (h_joint - h_slow) / math.log(fast)
    if isinstance(spec, LineEmbedding):
        return entropy_dimension(spec.digit_measure)
    if isinstance(spec, PlanarIFS):
        r = spec.uniform_ratio()
        if r is None:
            raise ValueError("closed form needs a uniform contraction ratio")
        return _entropy(spec.weights) / math.log(1 / float(r))
    raise TypeError(f"unsupported spec {type(spec)!r}")


@dataclass(frozen=True)
class ComplexBall:
    """A complex value with an absolute error bound."""

    value: complex
    err: float


def fourier_coeff(spec: Bernoulli1D, l: int, tol: float = 1e-10) -> ComplexBall:
    """hat(mu)(l) = prod_j sum_d q_d e(l d / p^j), truncated with certified tail.

    The tail factors beyond J deviate from 1 by less than tol; l = 0 returns
    exactly 1. |value| <= 1 always.
    """
    if not isinstance(spec, Bernoulli1D):
        raise TypeError("fourier_coeff needs a 1-D digit measure")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if l == 0:
        return ComplexBall(1.0 + 0.0j, 0.0)
    p = spec.base
    # factor-j deviation bound: sum_d q_d |1 - e(l d p^-j)| <= 2*pi*|l|*(p-1)*p^-j,
    # so the tail sum past J is at most s*p^-J with s = 2*pi*|l|, and the
    # truncated product differs from the full one by at most expm1(s*p^-J)
    s = 2 * math.pi * abs(l)
    J = max(1, math.ceil(math.log(4 * s / tol) / math.log(p)))
    v = 1.0 + 0.0j
    w = np.array([float(q) for q in spec.weights])
    d = np.arange(p)
    for j in range(1, J + 1):
        v *= np.sum(w * np.exp(2j * np.pi * l * d / p**j))
    err = math.expm1(s * p**-J) + (J * p + 4) * 2.0**-50
    return ComplexBall(complex(v), err)
