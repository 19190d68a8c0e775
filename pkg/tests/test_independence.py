"""Exact independence checkers and the spectral-frequency search."""

import math
import random
from fractions import Fraction

import pytest

from torus_equidist.independence import (
    Dependent,
    Independent,
    SpectralVerdict,
    factorize,
    mult_indep_int,
    mult_indep_ratio,
    spectral_condition,
    verdict_json,
)
from torus_equidist.measures import IFSAnalysis


def test_factorize():
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    assert factorize(97) == {97: 1}
    assert factorize(2**20) == {2: 20}
    assert factorize(1) == {}


def test_mult_indep_int_examples():
    assert isinstance(mult_indep_int(2, 3), Independent)
    assert mult_indep_int(4, 2) == Dependent(1, 2)
    assert mult_indep_int(8, 4) == Dependent(2, 3)


def brute_force_common_power(m: int, p: int, bound: int = 64):
    powers_m = {m**a: a for a in range(1, bound + 1)}
    for b in range(1, bound + 1):
        v = p**b
        if v in powers_m:
            return powers_m[v], b
    return None


def test_mult_indep_int_brute_force_small():
    for m in range(2, 41):
        for p in range(2, 41):
            verdict = mult_indep_int(m, p)
            oracle = brute_force_common_power(m, p)
            if oracle is None:
                assert isinstance(verdict, Independent), (m, p)
            else:
                assert isinstance(verdict, Dependent), (m, p)
                assert m ** verdict.a == p ** verdict.b


def test_mult_indep_ratio_examples():
    assert mult_indep_ratio(Fraction(1, 4), 2) == Dependent(1, 2)
    assert isinstance(mult_indep_ratio(Fraction(1, 4), 3), Independent)
    assert isinstance(mult_indep_ratio(Fraction(2, 3), 6), Independent)


def exponent_vector_oracle(r: Fraction, m: int) -> bool:
    # r^a m^b = 1 solvable iff the exponent vectors over the joint prime
    # support are anti-parallel with a positive ratio
    er = {}
    for p, e in factorize(r.numerator).items():
        er[p] = er.get(p, 0) + e
    for p, e in factorize(r.denominator).items():
        er[p] = er.get(p, 0) - e
    er = {p: e for p, e in er.items() if e}
    em = factorize(m)
    if set(er) != set(em):
        return False
    ratios = {Fraction(-em[p], er[p]) for p in em}
    return len(ratios) == 1 and next(iter(ratios)) > 0


def test_mult_indep_ratio_oracle_random():
    rnd = random.Random(41)
    for _ in range(500):
        num = rnd.randrange(1, 400)
        den = rnd.randrange(num + 1, 500)
        r = Fraction(num, den)
        m = rnd.randrange(2, 200)
        verdict = mult_indep_ratio(r, m)
        dependent = exponent_vector_oracle(r, m)
        if dependent:
            assert isinstance(verdict, Dependent)
            assert r ** verdict.a * m ** verdict.b == 1
        else:
            assert isinstance(verdict, Independent)


# ---------------------------------------------------------------------------
# spectral condition

def analysis(k, gamma_turns=None, gamma=None, ratio=Fraction(1, 4), finite=True):
    g = 2 * math.pi * float(gamma_turns) if gamma_turns is not None else gamma
    return IFSAnalysis(k, gamma_turns, g, finite, ratio)


def test_spectral_gamma_zero_satisfied():
    v = spectral_condition(analysis(4, gamma_turns=Fraction(0)), 3)
    assert v.status == "satisfied" and v.ok


def test_spectral_vacuous_when_no_common_power():
    v = spectral_condition(analysis(math.inf, gamma_turns=Fraction(1, 3)), 3)
    assert v.status == "vacuous" and v.ok


def test_spectral_rational_angle_passes_bound():
    v = spectral_condition(analysis(1, gamma_turns=Fraction(1, 3)), 3,
                           search_bound=10**6, precision_bits=512)
    assert v.status == "satisfied_up_to"
    assert v.bound == 10**6 and v.precision_bits == 512


def test_spectral_synthetic_violation():
    # gamma constructed to collide at q = j = 1; the float encoding carries
    # ~53 bits, so the checker flags it at precisions up to that fidelity
    gamma = abs(math.log(0.25)) / math.log(3)
    a = analysis(1, gamma=gamma, finite=False)
    v = spectral_condition(a, 3, search_bound=100, precision_bits=48)
    assert v.status == "violated" and v.witness == (1, 1)
    # and separates the dyadic from the true collision at high precision
    v2 = spectral_condition(a, 3, search_bound=100, precision_bits=512)
    assert v2.status == "satisfied_up_to"


def test_spectral_monotone_in_bound():
    a = analysis(1, gamma_turns=Fraction(1, 3))
    small = spectral_condition(a, 3, search_bound=10**3)
    big = spectral_condition(a, 3, search_bound=10**6)
    assert small.status == "satisfied_up_to" and big.status == "satisfied_up_to"
    a2 = analysis(2, gamma_turns=Fraction(2, 7), ratio=Fraction(2, 5))
    for m in (2, 3, 7):
        s = spectral_condition(a2, m, search_bound=10**4)
        b = spectral_condition(a2, m, search_bound=10**7)
        if b.status == "violated":
            assert max(abs(w) for w in b.witness) > 10**4 or s.status == "violated"
        else:
            assert s.status in ("satisfied_up_to", "satisfied", "vacuous")


def test_verdict_json_shapes():
    d = verdict_json("4 vs 2", mult_indep_int(4, 2))
    assert d["verdict"] == "dependent" and d["witness"] == [1, 2] and d["exact"]
    v = spectral_condition(analysis(1, gamma_turns=Fraction(1, 3)), 3, search_bound=100)
    j = verdict_json("zoom", v)
    assert j["verdict"] == "satisfied_up_to" and j["bound"] == 100 and j["precision"] == 512
