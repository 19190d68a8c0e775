"""Arithmetic substrate: exact rationals, error-tracked dyadic balls, digit strings.

Exact points on the circle/torus are `fractions.Fraction`. Irrational
coordinates (fixed points of rotated contractions) are `Ball`s: a dyadic
center man*2^exp with a dyadic radius that only ever grows — every
operation returns a ball whose interval contains the exact image of the
input intervals. Centers are rounded to nearest at a caller-supplied
precision and the radius is inflated by one ulp, which is sound and cheap.

Digit expansions are the workhorse: the base-b expansion of a rational is
produced by ONE big integer division (value * b^count // denominator), so
an orbit of the x b map costs a single long division instead of b-fold
radius growth per step. `ball_digits` certifies an expansion for every
point of a ball or raises InsufficientPrecision when the ball straddles a
grid line.

Everything here is immutable after construction and safe to share across
workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "InsufficientPrecision",
    "DigitString",
    "Ball",
    "digits_to_int",
    "int_to_digits",
    "rational_digits",
    "ball_digits",
    "suffix_point",
    "cos_sin_turns",
    "ball_exp",
    "ball_log",
    "log_enclosure",
    "pi_enclosure",
]


class InsufficientPrecision(ArithmeticError):
    """No certified answer exists at the current working precision.

    Raised when a ball straddles a digit-grid line or violates a radius
    contract. Recoverable: the caller owns the retry loop (re-sample or
    re-round at higher precision); the library never auto-escalates.
    """


# ---------------------------------------------------------------------------
# integer <-> digit vectors (divide and conquer; bases are small, counts big)

_POW_CACHE: dict[tuple[int, int], int] = {}


def _pow(base: int, k: int) -> int:
    key = (base, k)
    p = _POW_CACHE.get(key)
    if p is None:
        p = base**k
        _POW_CACHE[key] = p
    return p


def digits_to_int(digits, base: int) -> int:
    """Value of a most-significant-first digit vector as an integer."""
    ds = list(int(d) for d in digits)

    def rec(lo: int, hi: int) -> int:
        n = hi - lo
        if n <= 64:
            v = 0
            for i in range(lo, hi):
                v = v * base + ds[i]
            return v
        mid = lo + n // 2
        return rec(lo, mid) * _pow(base, hi - mid) + rec(mid, hi)

    if not ds:
        return 0
    return rec(0, len(ds))


def int_to_digits(value: int, base: int, count: int) -> np.ndarray:
    """Most-significant-first digits of `value` in `base`, padded to `count`."""
    if value < 0:
        raise ValueError("value must be non-negative")
    if value >= _pow(base, count):
        raise ValueError("value does not fit in count digits")
    out = np.empty(count, dtype=np.int64)
    pos = 0

    def rec(v: int, n: int) -> None:
        nonlocal pos
        if n <= 32:
            for i in range(pos + n - 1, pos - 1, -1):
                v, r = divmod(v, base)
                out[i] = r
            pos += n
            return
        half = n // 2
        hi, lo = divmod(v, _pow(base, n - half))
        rec(hi, half)
        rec(lo, n - half)

    rec(value, count)
    return out


# ---------------------------------------------------------------------------
# digit strings

@dataclass(frozen=True, eq=False)
class DigitString:
    """Finite base-b expansion 0.d1 d2 ... dL; value = sum d_j b^-j in [0,1)."""

    base: int
    digits: np.ndarray

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        d = np.ascontiguousarray(self.digits, dtype=np.int64)
        if d.ndim != 1:
            raise ValueError("digits must be one-dimensional")
        if len(d) and (d.min() < 0 or d.max() >= self.base):
            raise ValueError("digit out of range")
        d.flags.writeable = False
        object.__setattr__(self, "digits", d)

    def __len__(self) -> int:
        return len(self.digits)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DigitString)
            and self.base == other.base
            and np.array_equal(self.digits, other.digits)
        )

    def value(self) -> Fraction:
        return Fraction(digits_to_int(self.digits, self.base), _pow(self.base, len(self)))


def rational_digits(x: Fraction, base: int, count: int) -> DigitString:
    """First `count` base-b digits of x in [0,1); one big division.

    Grid-boundary rationals get the terminating (all-zeros tail) expansion,
    matching iterated long division of b*x mod 1.
    """
    x = Fraction(x)
    if not (0 <= x < 1):
        raise ValueError(f"x must lie in [0,1), got {x}")
    if count < 0:
        raise ValueError("count must be >= 0")
    q = (x.numerator * _pow(base, count)) // x.denominator
    return DigitString(base, int_to_digits(q, base, count))


def suffix_point(d: DigitString, k: int) -> Fraction:
    """Value of the digit suffix d_{k+1} ... d_L, i.e. the k-th shift."""
    if not (0 <= k < len(d)):
        raise ValueError(f"shift k={k} out of range for length {len(d)}")
    rest = d.digits[k:]
    return Fraction(digits_to_int(rest, d.base), _pow(d.base, len(rest)))


# ---------------------------------------------------------------------------
# dyadic balls

_RAD_BITS = 32  # radius mantissas are renormalized to this many bits, rounding up


def _rad_norm(rman: int, rexp: int) -> tuple[int, int]:
    if rman == 0:
        return 0, 0
    extra = rman.bit_length() - _RAD_BITS
    if extra > 0:
        rman = (rman >> extra) + 1  # round up: radius never shrinks
        rexp += extra
    return rman, rexp


def _rad_add(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    (am, ae), (bm, be) = a, b
    if am == 0:
        return _rad_norm(bm, be)
    if bm == 0:
        return _rad_norm(am, ae)
    # if the exponent gap is huge, cover the small term by one ulp of the
    # big one instead of shifting astronomically
    if ae - be > 4 * _RAD_BITS:
        return _rad_norm(am + 1, ae)
    if be - ae > 4 * _RAD_BITS:
        return _rad_norm(bm + 1, be)
    e = min(ae, be)
    return _rad_norm((am << (ae - e)) + (bm << (be - e)), e)


def _rad_mul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    return _rad_norm(a[0] * b[0], a[1] + b[1])


def _rad_mul_fraction(a: tuple[int, int], q: Fraction) -> tuple[int, int]:
    """Up-rounded product of a dyadic radius with an exact positive rational."""
    (am, ae) = a
    if am == 0:
        return 0, 0
    num, den = q.numerator, q.denominator
    if den == 1:
        return _rad_norm(am * num, ae)
    # extra headroom so the ceil-division keeps the bound tight
    shift = 2 * _RAD_BITS
    m = -((-(am << shift) * num) // den)  # ceil(am * 2^shift * q)
    return _rad_norm(m, ae - shift)


def _dyadic_upper(q: Fraction) -> tuple[int, int]:
    """Up-rounded dyadic (man, exp) with man * 2^exp >= q >= 0."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("radius bound must be non-negative")
    if q == 0:
        return 0, 0
    shift = 2 * _RAD_BITS + max(0, -(q.numerator.bit_length() - q.denominator.bit_length()))
    m = -((-q.numerator << shift) // q.denominator)
    return _rad_norm(m, -shift)


def _dyadic_float(man: int, exp: int) -> float:
    if man == 0:
        return 0.0
    sign = -1.0 if man < 0 else 1.0
    a = abs(man)
    shift = a.bit_length() - 53
    if shift > 0:
        a >>= shift
        exp += shift
    try:
        return sign * math.ldexp(float(a), exp)
    except OverflowError:
        return sign * math.inf


class Ball:
    """Dyadic midpoint-radius enclosure: [man*2^exp - rad, man*2^exp + rad]."""

    __slots__ = ("man", "exp", "rman", "rexp")

    def __init__(self, man: int, exp: int, rman: int = 0, rexp: int = 0):
        if rman < 0:
            raise ValueError("radius must be non-negative")
        if man == 0:
            exp = 0
        self.man = man
        self.exp = exp
        self.rman, self.rexp = _rad_norm(rman, rexp)

    # -- constructors -----------------------------------------------------
    @staticmethod
    def from_int(n: int) -> "Ball":
        return Ball(n, 0)

    @staticmethod
    def from_fraction(x: Fraction, prec: int) -> "Ball":
        """Round x to a prec-bit dyadic center; radius covers the error.

        Dyadic inputs are represented exactly with radius 0.
        """
        x = Fraction(x)
        num, den = x.numerator, x.denominator
        if den & (den - 1) == 0:  # power of two: exact
            return Ball(num, -(den.bit_length() - 1))
        if num == 0:
            return Ball(0, 0)
        sign = 1 if num > 0 else -1
        num = abs(num)
        shift = prec - (num.bit_length() - den.bit_length())
        if shift < 0:
            shift = 0
        q, r = divmod(num << shift, den)
        if 2 * r >= den:
            q += 1
        # |x - q*2^-shift| <= 2^-(shift+1)
        return Ball(sign * q, -shift, 1, -(shift + 1))

    @staticmethod
    def from_fraction_interval(lo: Fraction, hi: Fraction, prec: int) -> "Ball":
        if hi < lo:
            raise ValueError("empty interval")
        mid = Ball.from_fraction((lo + hi) / 2, prec)
        half = (hi - lo) / 2
        if half == 0:
            return mid
        # up-rounded dyadic cover of the half-width
        e = -(prec + 8)
        hman = -((-half.numerator << -e) // half.denominator)  # ceil
        rman, rexp = _rad_add((mid.rman, mid.rexp), (hman, e))
        return Ball(mid.man, mid.exp, rman, rexp)

    # -- accessors ---------------------------------------------------------
    def center(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(self.man << self.exp)
        return Fraction(self.man, 1 << -self.exp)

    def radius(self) -> Fraction:
        if self.rman == 0:
            return Fraction(0)
        if self.rexp >= 0:
            return Fraction(self.rman << self.rexp)
        return Fraction(self.rman, 1 << -self.rexp)

    def lo(self) -> Fraction:
        return self.center() - self.radius()

    def hi(self) -> Fraction:
        return self.center() + self.radius()

    def mid_float(self) -> float:
        return _dyadic_float(self.man, self.exp)

    def rad_float(self) -> float:
        return _dyadic_float(self.rman, self.rexp)

    def log2_radius(self) -> float:
        """log2 of the radius (-inf for exact balls); cheap diagnostic."""
        if self.rman == 0:
            return -math.inf
        return math.log2(self.rman) + self.rexp

    def is_exact(self) -> bool:
        return self.rman == 0

    def __repr__(self):
        return f"Ball({self.mid_float()!r} ± 2^{self.log2_radius():.1f})"

    # -- exact ring ops ----------------------------------------------------
    def __neg__(self) -> "Ball":
        return Ball(-self.man, self.exp, self.rman, self.rexp)

    def __add__(self, other: "Ball") -> "Ball":
        e = min(self.exp, other.exp)
        man = (self.man << (self.exp - e)) + (other.man << (other.exp - e))
        rman, rexp = _rad_add((self.rman, self.rexp), (other.rman, other.rexp))
        return Ball(man, e, rman, rexp)

    def __sub__(self, other: "Ball") -> "Ball":
        return self + (-other)

    # -- rounded ops -------------------------------------------------------
    def round_to(self, prec: int) -> "Ball":
        """Center rounded to nearest at prec bits; radius += one ulp."""
        bl = abs(self.man).bit_length()
        if bl <= prec:
            return self
        shift = bl - prec
        sign = 1 if self.man >= 0 else -1
        q = (abs(self.man) + (1 << (shift - 1))) >> shift
        exp = self.exp + shift
        rman, rexp = _rad_add((self.rman, self.rexp), (1, exp))
        return Ball(sign * q, exp, rman, rexp)

    def _mag_upper(self) -> tuple[int, int]:
        """Up-rounded dyadic bound on sup |x| over the ball."""
        m = abs(self.man)
        bl = m.bit_length()
        if bl > _RAD_BITS:
            sh = bl - _RAD_BITS
            m = (m >> sh) + 1
            e = self.exp + sh
        else:
            e = self.exp
        return _rad_add((m, e), (self.rman, self.rexp))

    def mul(self, other: "Ball", prec: int) -> "Ball":
        man = self.man * other.man
        exp = self.exp + other.exp
        ra = (self.rman, self.rexp)
        rb = (other.rman, other.rexp)
        r = _rad_add(_rad_mul(self._mag_upper(), rb), _rad_mul(other._mag_upper(), ra))
        return Ball(man, exp, *r).round_to(prec)

    def scale(self, q: Fraction, prec: int) -> "Ball":
        """Multiply by an exact rational."""
        q = Fraction(q)
        if q.denominator == 1:
            n = q.numerator
            rman, rexp = _rad_norm(self.rman * abs(n), self.rexp)
            return Ball(self.man * n, self.exp, rman, rexp).round_to(prec)
        return self.mul(Ball.from_fraction(q, prec + 16), prec)


def ball_digits(x: Ball, base: int, count: int) -> DigitString:
    """Digits certified for every point of the ball.

    Main path: the whole ball lies in one grid cell [k b^-count,
    (k+1) b^-count) and every point of the ball has exactly these digits.

    Grid-snap path: the ball brackets exactly one grid point g and its
    radius is below b^-count/1024. Then the terminating expansion of g is
    returned (matching the long-division convention for grid-boundary
    rationals); every point of the ball is within one radius of its value.
    This is what an enclosure of a grid rational like 1/3 in base 3 hits.

    Otherwise the ball genuinely straddles a grid line and
    InsufficientPrecision is raised; the caller owns the retry.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    p = _pow(base, count)
    # fast gate: radius >= half a cell can never be certified either way
    if x.rman and x.log2_radius() >= -math.log2(base) * count - 1.0:
        raise InsufficientPrecision(
            f"ball radius 2^{x.log2_radius():.1f} too large for {count} base-{base} digits"
        )
    lo, hi = x.lo(), x.hi()
    if hi < 0 or lo >= 1:
        raise ValueError("ball lies outside [0,1)")
    a = (lo.numerator * p) // lo.denominator  # floor(lo * b^count)
    if lo >= 0 and a >= 0 and hi.numerator * p < (a + 1) * hi.denominator:
        return DigitString(base, int_to_digits(a, base, count))
    # snap: exactly one grid point inside [lo, hi], thin ball
    k1 = -((-lo.numerator * p) // lo.denominator)  # ceil(lo * b^count)
    k2 = (hi.numerator * p) // hi.denominator
    if k1 == k2 and 0 <= k1 < p and x.radius() * 1024 <= Fraction(1, p):
        return DigitString(base, int_to_digits(k1, base, count))
    raise InsufficientPrecision(
        f"ball straddles a base-{base} grid line at depth {count}"
    )


# ---------------------------------------------------------------------------
# certified transcendentals (mpmath interval backend)

def _iv_ctx(prec: int):
    from mpmath import iv

    iv.prec = max(prec, 8)
    return iv


def _fraction_from_raw(raw) -> Fraction:
    sign, man, exp, _ = raw
    v = Fraction(int(man)) * (Fraction(2) ** exp)
    return -v if sign else v


def _ball_from_iv(x, prec: int) -> Ball:
    lo = _fraction_from_raw(x._mpi_[0])
    hi = _fraction_from_raw(x._mpi_[1])
    return Ball.from_fraction_interval(lo, hi, prec)


def _iv_fraction(iv, q: Fraction):
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def cos_sin_turns(turns: Fraction, prec: int) -> tuple[Ball, Ball]:
    """Certified (cos, sin) of the angle 2*pi*turns."""
    iv = _iv_ctx(prec + 16)
    theta = 2 * iv.pi * _iv_fraction(iv, Fraction(turns))
    return _ball_from_iv(iv.cos(theta), prec), _ball_from_iv(iv.sin(theta), prec)


def cos_sin_radians(angle: Fraction, prec: int) -> tuple[Ball, Ball]:
    """Certified (cos, sin) of an exact rational angle in radians."""
    iv = _iv_ctx(prec + 16)
    theta = _iv_fraction(iv, Fraction(angle))
    return _ball_from_iv(iv.cos(theta), prec), _ball_from_iv(iv.sin(theta), prec)


def _monotone_enclosure(fn_name: str, x: Ball, prec: int) -> Ball:
    # enclosure of a monotone-increasing function: [f(lo).lower, f(hi).upper]
    iv = _iv_ctx(max(prec + 16, abs(x.man).bit_length() + 16))
    f = getattr(iv, fn_name)
    lo_iv = f(_iv_fraction(iv, x.lo()))
    hi_iv = f(_iv_fraction(iv, x.hi()))
    lo = _fraction_from_raw(lo_iv._mpi_[0])
    hi = _fraction_from_raw(hi_iv._mpi_[1])
    return Ball.from_fraction_interval(lo, hi, prec)


def ball_exp(x: Ball, prec: int) -> Ball:
    return _monotone_enclosure("exp", x, prec)


def ball_log(x: Ball, prec: int) -> Ball:
    if x.lo() <= 0:
        raise ValueError("log of a ball touching (-inf, 0]")
    return _monotone_enclosure("log", x, prec)


def log_enclosure(q: Fraction, prec: int) -> Ball:
    """Certified enclosure of log(q) for an exact rational q > 0."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("log of non-positive rational")
    iv = _iv_ctx(prec + 16)
    return _ball_from_iv(iv.log(_iv_fraction(iv, q)), prec)


def pi_enclosure(prec: int) -> Ball:
    iv = _iv_ctx(prec + 16)
    return _ball_from_iv(iv.pi, prec)
