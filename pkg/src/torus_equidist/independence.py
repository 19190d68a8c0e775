"""Exact number-theoretic hypothesis checkers.

Multiplicative independence of integers (and of a rational contraction
ratio against an integer) is decided exactly via prime exponent vectors;
results are never heuristic. The spectral-frequency condition mixes pi
with logarithms of rationals, where exact equality is not mechanically
decidable; that checker returns a three-valued verdict with an explicit
search bound and working precision, which is part of the public contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .precision import log_enclosure, pi_enclosure, Ball

__all__ = [
    "Independent",
    "Dependent",
    "Undecidable",
    "factorize",
    "mult_indep_int",
    "mult_indep_ratio",
    "SpectralVerdict",
    "spectral_condition",
    "verdict_json",
]


@dataclass(frozen=True)
class Independent:
    def __str__(self):
        return "independent"


@dataclass(frozen=True)
class Dependent:
    """Witness exponents: for integers m^a = p^b; for a ratio r^a * m^b = 1."""

    a: int
    b: int

    def __str__(self):
        return f"dependent(a={self.a}, b={self.b})"


@dataclass(frozen=True)
class Undecidable:
    reason: str

    def __str__(self):
        return f"undecidable: {self.reason}"


# ---------------------------------------------------------------------------
# factorization (inputs are experiment parameters: always small)

def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    x, c = 2, 1
    while True:
        y, d = x, 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
        c += 1
        x = c + 1


def factorize(n: int) -> dict[int, int]:
    """Prime -> exponent map; trial division then Pollard rho."""
    if n < 1:
        raise ValueError("factorize needs a positive integer")
    out: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 17
    while d * d <= n and d < 100_000:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 2
    if n > 1:
        stack = [n]
        while stack:
            v = stack.pop()
            if v == 1:
                continue
            if _is_prime(v):
                out[v] = out.get(v, 0) + 1
                continue
            f = _pollard_rho(v)
            stack.extend([f, v // f])
    return out


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):  # deterministic < 3.3e24
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _exponent_vector(q: Fraction) -> dict[int, int]:
    vec = dict(factorize(q.numerator)) if q.numerator != 1 else {}
    for p, e in factorize(q.denominator).items():
        vec[p] = vec.get(p, 0) - e
    return {p: e for p, e in vec.items() if e}


def mult_indep_int(m: int, p: int):
    """Independent unless m^a = p^b for positive integers (exact decision).

    Dependence holds iff m and p are powers of a common integer, i.e. their
    prime exponent vectors are parallel; the returned witness (a,b) is
    minimal with m^a = p^b.
    """
    if m < 2 or p < 2:
        raise ValueError("need integers >= 2")
    em = factorize(m)
    ep = factorize(p)
    if set(em) != set(ep):
        return Independent()
    ratio = None  # b/a = em[q]/ep[q], must be constant
    for q in em:
        r = Fraction(em[q], ep[q])
        if ratio is None:
            ratio = r
        elif r != ratio:
            return Independent()
    a, b = ratio.denominator, ratio.numerator  # m^a = p^b
    assert m**a == p**b
    return Dependent(a, b)


def mult_indep_ratio(r: Fraction, m: int):
    """Independence of a rational ratio r in (0,1) from an integer m >= 2.

    Dependent(a,b) iff r^a * m^b = 1 with positive a, b: the exponent
    vectors must share support and be anti-parallel. Exact for rational r;
    Undecidable is reserved for inputs outside the rational class.
    """
    if not isinstance(r, Fraction):
        try:
            r = Fraction(r)
        except (TypeError, ValueError):
            return Undecidable("ratio is not an exact rational")
    if not (0 < r < 1):
        raise ValueError("ratio must lie in (0,1)")
    if m < 2:
        raise ValueError("m must be >= 2")
    er = _exponent_vector(r)
    em = factorize(m)
    if set(er) != set(em):
        return Independent()
    ratio = None  # a/b = -em[q]/er[q], must be constant and positive
    for q in em:
        rr = Fraction(-em[q], er[q])
        if rr <= 0:
            return Independent()
        if ratio is None:
            ratio = rr
        elif rr != ratio:
            return Independent()
    a, b = ratio.numerator, ratio.denominator
    assert r**a * m**b == 1
    return Dependent(a, b)


# ---------------------------------------------------------------------------
# spectral condition

@dataclass(frozen=True)
class SpectralVerdict:
    """Outcome of the frequency-collision search.

    status: 'satisfied' (exact, gamma = 0 collapses the lattice to {0}),
    'vacuous' (no common rotation power exists, so nothing to check),
    'violated' (witness (q, j): the enclosure of q*k*log r - j*gamma*log m
    contains 0 at the working precision), or 'satisfied_up_to' (every
    candidate with |q|,|j| <= bound is certifiably non-zero).
    """

    status: str
    witness: tuple[int, int] | None = None
    bound: int | None = None
    precision_bits: int | None = None
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("satisfied", "vacuous", "satisfied_up_to")


def _contains_zero(b: Ball) -> bool:
    return b.lo() <= 0 <= b.hi()


def _gamma_ball(analysis, prec: int) -> Ball:
    if analysis.gamma_phi_turns is not None:
        two_pi = pi_enclosure(prec).scale(Fraction(2), prec)
        return two_pi.scale(Fraction(analysis.gamma_phi_turns), prec)
    # float gamma: the double is treated as the exact dyadic it is
    return Ball.from_fraction(Fraction(analysis.gamma_phi), prec)


def spectral_condition(analysis, m: int, search_bound: int = 10**6,
                       precision_bits: int = 512) -> SpectralVerdict:
    """Check that q/log m misses the lattice Z*gamma/(k*log r) for all q != 0.

    A collision means integers q, j (both nonzero) with
    q * k * log r = j * gamma * log m. With rho = gamma*log m/(k*log r),
    collisions are exactly rational values q/j = rho, so candidate
    witnesses are continued-fraction convergents of rho; each candidate is
    certified non-zero (or flagged) in interval arithmetic. Monotone in the
    bound: a larger search never turns a bounded certificate into a
    violation below the old bound.
    """
    if analysis.k_phi is None:
        return SpectralVerdict("undecided", None, None, precision_bits,
                               "rotation analysis undecided; nothing to certify")
    if analysis.k_phi == math.inf:
        return SpectralVerdict("vacuous", None, None, precision_bits,
                               "no common rotation power (k infinite); condition is vacuous")
    if analysis.uniform_ratio is None:
        raise ValueError("spectral condition needs a uniform contraction ratio")
    gamma_turns = analysis.gamma_phi_turns
    if gamma_turns == 0 or analysis.gamma_phi == 0.0:
        return SpectralVerdict("satisfied", None, None, precision_bits,
                               "gamma = 0: the lattice is {0} and q/log m != 0 for q != 0")
    prec = precision_bits
    k = int(analysis.k_phi)
    log_r = log_enclosure(Fraction(analysis.uniform_ratio), prec)   # negative
    log_m = log_enclosure(Fraction(m), prec)
    gamma = _gamma_ball(analysis, prec)

    # rho = gamma * log m / (k * log r) < 0; collisions are exactly the
    # rational values |rho| = q/j, so walk the continued fraction of |rho|
    num = gamma.mul(log_m, prec)
    den = log_r.scale(Fraction(k), prec)
    if not (num.lo() > 0 and den.hi() < 0):
        raise ValueError("sign enclosure failed; raise precision_bits")
    ends = sorted([-num.hi() / den.hi(), -num.lo() / den.lo()])
    a_lo, a_hi = ends
    if a_hi - a_lo >= Fraction(1, 2 * search_bound**2):
        # two distinct rationals with denominator <= bound could hide inside
        return SpectralVerdict("satisfied_up_to", None, 0, prec,
                               "enclosure too wide for the requested bound; raise precision_bits")

    def defect_contains_zero(q: int, j_abs: int) -> bool:
        # q*k*log r - (-j_abs)*gamma*log m = den*q + num*j_abs
        d = num.scale(Fraction(j_abs), prec) + den.scale(Fraction(q), prec)
        return _contains_zero(d)

    h0, h1 = 1, 0  # convergent numerators  (candidate q)
    k0, k1 = 0, 1  # convergent denominators (candidate |j|)
    while True:
        f_lo = a_lo.numerator // a_lo.denominator
        f_hi = a_hi.numerator // a_hi.denominator
        if f_lo != f_hi:
            # endpoints diverge: the smallest-denominator rational inside the
            # interval is the terminating candidate with quotient f_lo + 1
            a = min(f_lo, f_hi) + 1
            hc, kc = a * h0 + h1, a * k0 + k1
            if hc <= search_bound and kc <= search_bound and defect_contains_zero(hc, kc):
                return SpectralVerdict("violated", (hc, kc), search_bound, prec,
                                       "enclosure of the defect contains zero at this precision")
            return SpectralVerdict("satisfied_up_to", None, search_bound, prec)
        a = f_lo
        h0, h1 = a * h0 + h1, h0
        k0, k1 = a * k0 + k1, k0
        if h0 > search_bound or k0 > search_bound:
            return SpectralVerdict("satisfied_up_to", None, search_bound, prec)
        if defect_contains_zero(h0, k0):
            return SpectralVerdict("violated", (h0, k0), search_bound, prec,
                                   "enclosure of the defect contains zero at this precision")
        rem_lo = a_lo - a
        rem_hi = a_hi - a
        if rem_lo == 0 or rem_hi == 0:
            # an endpoint was consumed exactly; the interior holds no further
            # rationals below the bound beyond those already tested
            return SpectralVerdict("satisfied_up_to", None, search_bound, prec)
        a_lo, a_hi = 1 / rem_hi, 1 / rem_lo


def verdict_json(condition: str, verdict, **extra) -> dict:
    """Machine-readable check entry: {condition, verdict, witness?, bound?, ...}."""
    out: dict = {"condition": condition}
    if isinstance(verdict, Independent):
        out["verdict"] = "independent"
        out["exact"] = True
    elif isinstance(verdict, Dependent):
        out["verdict"] = "dependent"
        out["witness"] = [verdict.a, verdict.b]
        out["exact"] = True
    elif isinstance(verdict, Undecidable):
        out["verdict"] = "undecidable"
        out["note"] = verdict.reason
        out["exact"] = False
    elif isinstance(verdict, SpectralVerdict):
        out["verdict"] = verdict.status
        if verdict.witness is not None:
            out["witness"] = list(verdict.witness)
        if verdict.bound is not None:
            out["bound"] = verdict.bound
        out["precision"] = verdict.precision_bits
        if verdict.note:
            out["note"] = verdict.note
        out["exact"] = verdict.status in ("satisfied", "vacuous")
    else:
        out["verdict"] = str(verdict)
    out.update(extra)
    return out
