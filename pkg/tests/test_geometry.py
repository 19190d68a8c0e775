"""Projections, dimension estimation, slices, conservation."""

import math
from fractions import Fraction

import numpy as np
import pytest

from torus_equidist.equidist import EmpiricalMeasure
from torus_equidist.geometry import (
    EmptySliceError,
    Projection,
    conservation_report,
    estimate_dimension,
    project,
    search_projection_dimension_drop,
    slice_fiber,
)
from torus_equidist.measures import (
    cantor_lebesgue,
    diagonal_embedding,
    product_from_marginals,
    sample_cloud,
    uniform_digits,
)
from torus_equidist import rng as trng


def pseudo_uniform(n, seed=0, dim=2):
    u = trng.u64_stream(seed, n * dim).reshape(n, dim)
    pts = (u >> np.uint64(11)) * 2.0**-53
    return pts if dim == 2 else pts[:, 0]


def test_projection_examples_on_diagonal():
    t = pseudo_uniform(1000, seed=1, dim=1)
    delta = np.column_stack([t, t])
    emp = EmpiricalMeasure(delta)
    p0 = project(emp, Projection.p1())
    assert np.array_equal(p0.points, t)  # P1 on the diagonal is the identity
    p45 = project(emp, Projection(math.pi / 4))
    assert np.allclose(p45.points, t * math.sqrt(2))  # affine copy
    anti = project(emp, Projection(3 * math.pi / 4))
    assert np.abs(anti.points).max() < 1e-15  # the diagonal collapses


def test_estimate_dimension_uniform_square():
    emp = EmpiricalMeasure(pseudo_uniform(100_000, seed=2))
    rep = estimate_dimension(emp)
    assert 1.9 <= rep.fitted_dim <= 2.05


def test_estimate_dimension_cantor():
    vals = sample_cloud(cantor_lebesgue(), 40, 100_000, seed=3)
    rep = estimate_dimension(EmpiricalMeasure(vals))
    assert 0.58 <= rep.fitted_dim <= 0.68


def test_estimate_dimension_atom():
    rep = estimate_dimension(EmpiricalMeasure(np.zeros(5000)))
    assert -0.05 <= rep.fitted_dim <= 0.05


def test_dimension_affine_invariance():
    vals = sample_cloud(cantor_lebesgue(), 40, 100_000, seed=4)
    r1 = estimate_dimension(EmpiricalMeasure(vals))
    r2 = estimate_dimension(EmpiricalMeasure(vals / 2))
    assert abs(r1.fitted_dim - r2.fitted_dim) < max(r1.confidence, r2.confidence)


def test_project_then_estimate_equals_marginal_exactly():
    pts = sample_cloud(product_from_marginals(cantor_lebesgue(), uniform_digits(3)),
                       30, 50_000, seed=5)
    emp = EmpiricalMeasure(pts)
    via_proj = estimate_dimension(project(emp, Projection.p1()))
    direct = estimate_dimension(EmpiricalMeasure(pts[:, 0]))
    assert via_proj.fitted_dim == direct.fitted_dim  # same cells, same entropies
    assert via_proj.entropies == direct.entropies


# ---------------------------------------------------------------------------
# slices

def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    a = np.sort(a)
    b = np.sort(b)
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.abs(fa - fb).max())


def test_slice_of_product_is_uniform_fiber():
    pts = pseudo_uniform(200_000, seed=6)
    emp = EmpiricalMeasure(pts)
    fiber = slice_fiber(emp, Projection.p1(), 0.5, 2.0**-6)
    ref = pseudo_uniform(len(fiber), seed=7, dim=1)
    ks = ks_statistic(fiber.points, ref)
    n, m = len(fiber), len(ref)
    assert ks <= 1.63 * math.sqrt((n + m) / (n * m))  # 1% critical value


def test_slice_of_graph_measure_is_an_atom():
    t = pseudo_uniform(100_000, seed=8, dim=1)
    emp = EmpiricalMeasure(np.column_stack([t, t]))
    x0 = 0.37
    w = 2.0**-7
    fiber = slice_fiber(emp, Projection.p1(), x0, w)
    assert np.abs(fiber.points - x0).max() <= w / 2 + 1e-12


def test_slice_of_cantor_product_has_cantor_fiber():
    cc = product_from_marginals(cantor_lebesgue(), cantor_lebesgue())
    pts = sample_cloud(cc, 40, 150_000, seed=9)
    emp = EmpiricalMeasure(pts)
    x0 = float(pts[123, 0])  # a sample-typical anchor
    fiber = slice_fiber(emp, Projection.p1(), x0, 2.0**-7)
    rep = estimate_dimension(fiber)
    assert abs(rep.fitted_dim - math.log(2) / math.log(3)) <= 0.1
    # distribution check against the marginal itself
    ref = sample_cloud(cantor_lebesgue(), 40, len(fiber), seed=10)
    n, m = len(fiber), len(ref)
    assert ks_statistic(fiber.points, ref) <= 1.63 * math.sqrt((n + m) / (n * m))


def test_empty_slice_raises():
    emp = EmpiricalMeasure(pseudo_uniform(100, seed=11))
    with pytest.raises(EmptySliceError):
        slice_fiber(emp, Projection.p1(), 55.0, 1e-4)


# ---------------------------------------------------------------------------
# conservation

def test_conservation_product_cantor():
    cc = product_from_marginals(cantor_lebesgue(), cantor_lebesgue())
    rep = conservation_report(cc, Projection.p1(), n_samples=60_000, depth=40, seed=12)
    for w, entry in rep.by_width.items():
        assert abs(entry["residual"]) <= 0.15, (w, entry)


def test_conservation_lebesgue():
    rep = conservation_report(product_from_marginals(uniform_digits(3), uniform_digits(3)),
                              Projection(math.pi / 3), n_samples=60_000, depth=20, seed=13)
    assert abs(rep.dim_mu - 2) <= 0.15
    assert abs(rep.dim_proj - 1) <= 0.1
    for entry in rep.by_width.values():
        assert abs(entry["residual"]) <= 0.2


def test_conservation_diagonal_anti_projection():
    dc = diagonal_embedding(cantor_lebesgue())
    rep = conservation_report(dc, Projection(3 * math.pi / 4),
                              n_samples=60_000, depth=40, seed=14)
    assert rep.dim_proj <= 0.05           # projection collapses to an atom
    for entry in rep.by_width.values():
        # fibers carry the whole measure: residual = dim_mu - 0 - dim_fiber
        assert abs(entry["residual"]) <= 0.15


# ---------------------------------------------------------------------------
# projection drop search

def test_search_flags_anti_diagonal_for_graph_measure():
    pts = sample_cloud(diagonal_embedding(cantor_lebesgue()), 40, 80_000, seed=15)
    out = search_projection_dimension_drop(EmpiricalMeasure(pts))
    assert any(abs(t - 3 * math.pi / 4) < 1e-12 for t in out["flagged_angles"])
    # the parallel direction preserves dimension and must not be flagged
    assert all(abs(t - math.pi / 4) > 1e-12 for t in out["flagged_angles"])


def test_search_grid_excludes_principal():
    emp = EmpiricalMeasure(pseudo_uniform(5000, seed=16))
    with pytest.raises(ValueError):
        search_projection_dimension_drop(emp, angles=[0.0, 1.0])
