"""Orbit paths: exactness, cross-oracle agreement, contracts."""

import json
import random
from fractions import Fraction

import numpy as np
import pytest

from torus_equidist.dynamics import (
    Orbit,
    OrbitSpec,
    TorusPoint,
    digit_orbit_from_rational,
    dump_orbit_csv,
    guard_digits,
    min_ball_precision,
    orbit_ball,
    orbit_digits,
    orbit_exact,
    tmap,
)
from torus_equidist.precision import (
    Ball,
    DigitString,
    InsufficientPrecision,
    rational_digits,
)


def test_tmap_examples():
    assert tmap(Fraction(1, 3), 2) == Fraction(2, 3)
    assert tmap(Fraction(2, 3), 2) == Fraction(1, 3)
    assert tmap(Fraction(5, 7), 3) == Fraction(1, 7)


def test_orbit_exact_examples():
    spec = OrbitSpec(4, 3, 3)
    orb = orbit_exact(TorusPoint(Fraction(1, 3), Fraction(1, 3)), spec)
    expected = np.array([[1 / 3, 1 / 3], [1 / 3, 0.0], [1 / 3, 0.0]])
    assert np.allclose(orb.points, expected, atol=1e-15)
    zero = orbit_exact(TorusPoint(Fraction(0), Fraction(0)), OrbitSpec(7, 5, 10))
    assert np.all(zero.points == 0.0)


def test_orbit_exact_numerator_recurrence():
    # under T_m the numerators of a/p^D satisfy a <- m*a mod p^D
    q = 3**40
    a = 7**20 % q
    spec = OrbitSpec(2, 5, 50)
    orb = orbit_exact(TorusPoint(Fraction(a, q), Fraction(a, q)), spec)
    ai = a
    for i in range(50):
        assert orb.points[i, 0] == ai / q
        ai = (2 * ai) % q


def test_orbit_digits_examples():
    spec = OrbitSpec(2, 3, 2)
    g2 = guard_digits(2, spec.output_precision_bits)
    g3 = guard_digits(3, spec.output_precision_bits)
    zeros = orbit_digits(
        rational_digits(Fraction(0), 2, 2 + g2),
        rational_digits(Fraction(0), 3, 2 + g3), spec)
    assert np.all(zeros.points == 0.0)
    orb = orbit_digits(
        rational_digits(Fraction(1, 3), 2, 2 + g2),
        rational_digits(Fraction(0), 3, 2 + g3), spec)
    assert np.allclose(orb.points[:, 0], [1 / 3, 2 / 3], atol=2 * orb.certified_error)


def test_orbit_digits_short_strings_error():
    spec = OrbitSpec(2, 3, 100)
    with pytest.raises(ValueError):
        orbit_digits(rational_digits(Fraction(1, 3), 2, 50),
                     rational_digits(Fraction(1, 3), 3, 200), spec)


def test_orbit_digits_cross_oracle_random():
    rnd = random.Random(5)
    q = 3**60
    for m, n in ((2, 5), (4, 5)):
        spec = OrbitSpec(m, n, 10_000)
        a = rnd.randrange(1, q)
        while a % 3 == 0:
            a = rnd.randrange(1, q)
        z = TorusPoint(Fraction(a, q), Fraction(a, q))
        oe = orbit_exact(z, spec)
        od = digit_orbit_from_rational(z, spec)
        assert np.abs(oe.points - od.points).max() <= 2 * od.certified_error


def test_orbit_ball_cross_oracle_and_contract():
    spec = OrbitSpec(4, 3, 3)
    prec = min_ball_precision(spec)
    z = TorusPoint(Ball.from_fraction(Fraction(1, 3), prec),
                   Ball.from_fraction(Fraction(1, 3), prec))
    ob = orbit_ball(z, spec)
    expected = np.array([[1 / 3, 1 / 3], [1 / 3, 0.0], [1 / 3, 0.0]])
    assert np.abs(ob.points - expected).max() <= 2 * ob.certified_error

    # radius too large for the requested length
    fat = Ball.from_fraction(Fraction(1, 3), 30)
    with pytest.raises(InsufficientPrecision):
        orbit_ball(TorusPoint(fat, fat), OrbitSpec(4, 3, 100))


def test_orbit_ball_from_ifs_sample():
    from torus_equidist.measures import cantor_demo_ifs, sample

    ifs = cantor_demo_ifs()
    spec = OrbitSpec(3, 5, 40)
    # depth deep enough that bounding_radius * (1/4)^depth meets the contract
    depth = 80
    pt, word = sample(ifs, depth, seed=3, prec=300)
    orb = orbit_ball(pt, spec)
    assert orb.points.shape == (40, 2)
    assert orb.certified_error <= 2.0**-spec.output_precision_bits


def test_triple_oracle_agreement_small():
    rnd = random.Random(9)
    q = 3**80
    spec = OrbitSpec(5, 2, 2000)
    prec = min_ball_precision(spec)
    for _ in range(5):
        a = rnd.randrange(1, q)
        while a % 3 == 0:
            a = rnd.randrange(1, q)
        x = Fraction(a, q)
        z = TorusPoint(x, x)
        oe = orbit_exact(z, spec)
        od = digit_orbit_from_rational(z, spec)
        ob = orbit_ball(TorusPoint(Ball.from_fraction(x, prec),
                                   Ball.from_fraction(x, prec)), spec)
        err = 2 * max(oe.certified_error, od.certified_error, ob.certified_error)
        assert np.abs(oe.points - od.points).max() <= err
        assert np.abs(oe.points - ob.points).max() <= err


def test_certified_error_invariant():
    spec = OrbitSpec(2, 3, 10, output_precision_bits=50)
    orb = digit_orbit_from_rational(TorusPoint(Fraction(1, 7), Fraction(2, 7)), spec)
    assert orb.certified_error <= 2.0**-50
    with pytest.raises(ValueError):
        OrbitSpec(2, 3, 10, output_precision_bits=51)


def test_orbit_csv_dump(tmp_path):
    spec = OrbitSpec(4, 3, 5)
    orb = orbit_exact(TorusPoint(Fraction(1, 3), Fraction(1, 3)), spec)
    path = tmp_path / "orbit.csv"
    dump_orbit_csv(orb, path, seed=42, measure_spec_hash="cafe")
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "i,x,y"
    assert len(lines) == 6
    side = json.loads((tmp_path / "orbit.csv.json").read_text())
    assert side == {"m": 4, "n": 3, "N": 5, "certified_error": orb.certified_error,
                    "seed": 42, "measure_spec_hash": "cafe"}
