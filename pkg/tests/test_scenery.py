"""Zoom tracks, observables, periodograms."""

import math

import numpy as np
import pytest

from torus_equidist.equidist import EmpiricalMeasure
from torus_equidist.measures import (
    cantor_demo_ifs,
    cantor_lebesgue,
    product_from_marginals,
    sample_cloud,
    uniform_digits,
)
from torus_equidist.scenery import (
    OBSERVABLES,
    observable_series,
    scenery_track,
    scenery_track_for_spec,
    spectrum_estimate,
)
from torus_equidist import rng as trng


def pseudo_uniform(n, seed=0):
    u = trng.u64_stream(seed, n * 2).reshape(n, 2)
    return (u >> np.uint64(11)) * 2.0**-53


def test_uniform_frames_left_half_mass_constant():
    cloud = pseudo_uniform(2_000_000, seed=1)
    anchor = (0.43, 0.57)
    track = scenery_track(cloud, anchor, math.log(2) / 4, 24)
    s = observable_series(track, "left_half_mass")
    # once the window clears the unit-square boundary the frames are
    # uniform on [-1,1]^2 and the observable sits at 1/2
    clear = int(math.ceil(math.log(1 / 0.43) / (math.log(2) / 4))) + 1
    assert np.abs(s[clear:] - 0.5).max() <= 0.05


def test_degenerate_cluster_truncates():
    cloud = np.full((10_000, 2), 0.25) + 1e-9 * pseudo_uniform(10_000, seed=2)
    track = scenery_track(cloud, (0.75, 0.75), 0.3, 40)
    assert track.truncated
    assert len(track) < 41


def test_diagonal_support_covariance_angle():
    t = pseudo_uniform(50_000, seed=3)[:, 0]
    cloud = np.column_stack([t, t])
    track = scenery_track(cloud, (float(t[7]), float(t[7])), 0.2, 8, min_frame_points=50)
    ang = observable_series(track, "cov_angle")
    assert np.abs(ang - math.pi / 4).max() < 1e-8


def test_scale_equivariance_shift_by_one():
    cloud = sample_cloud(product_from_marginals(cantor_lebesgue(), cantor_lebesgue()),
                         12, 400_000, seed=4)
    anchor = tuple(sample_cloud(product_from_marginals(cantor_lebesgue(), cantor_lebesgue()),
                                12, 1, seed=5)[0])
    dt = math.log(3) / 8
    base = scenery_track(cloud, anchor, dt, 20)
    shrink = math.exp(-dt)
    zoomed = scenery_track(cloud * shrink, (anchor[0] * shrink, anchor[1] * shrink), dt, 20)
    # frame j of the zoomed input is exactly frame j-1 of the original
    for j in range(1, min(len(zoomed), len(base) + 1)):
        a = zoomed.frames[j].points
        b = base.frames[j - 1].points
        assert a.shape == b.shape
        assert np.abs(np.sort(a[:, 0]) - np.sort(b[:, 0])).max() < 1e-9


def test_spectrum_constant_series_is_flat():
    per = spectrum_estimate(np.ones(64), 0.1)
    assert per.power[1:].max() < 1e-20


def test_spectrum_synthetic_cosine():
    dt = math.log(4) / 8
    t = np.arange(64) * dt
    series = np.cos(2 * np.pi * t / math.log(4))
    per = spectrum_estimate(series, dt)
    assert abs(per.peaks[0][0] - 1 / math.log(4)) <= per.bin_width


def test_spectrum_requires_length():
    with pytest.raises(ValueError):
        spectrum_estimate(np.ones(16), 0.1)


def test_ifs_fixture_zoom_line_within_one_bin():
    # ratio-1/4 fixture: periodogram peak within one bin of 1/|log r|
    dt = math.log(4) / 8
    track = scenery_track_for_spec(cantor_demo_ifs(), dt, 64,
                                   cloud_size=1_000_000, seed=5)
    assert not track.truncated
    s = observable_series(track, "disk_mass_half")
    per = spectrum_estimate(s, dt)
    assert abs(per.peaks[0][0] - 1 / math.log(4)) <= per.bin_width


def test_no_alien_frequency_for_independent_base():
    # rotation-free ratio-1/4 fixture vs the independent base 3: no peak at
    # k/log 3 (k = 1..3, below Nyquist) above three times the noise floor
    dt = math.log(4) / 8
    track = scenery_track_for_spec(cantor_demo_ifs(), dt, 64,
                                   cloud_size=1_000_000, seed=5)
    s = observable_series(track, "disk_mass_half")
    per = spectrum_estimate(s, dt)
    floor = per.noise_floor()
    nyquist = per.freqs[-1]
    own_harmonics = [k / math.log(4) for k in range(1, 6)]
    for k in (1, 2, 3):
        f = k / math.log(3)
        if f > nyquist or min(abs(f - h) for h in own_harmonics) <= per.bin_width:
            continue  # outside range or colliding with the fixture's own line
        idx = int(round(f / per.bin_width))
        assert per.power[idx] <= 3 * floor, (k, f, per.power[idx], floor)


def test_observable_names():
    assert set(OBSERVABLES) == {"left_half_mass", "disk_mass_half",
                                "cov_angle", "cov_log_anisotropy"}
    track = scenery_track(pseudo_uniform(20_000, seed=6), (0.5, 0.5), 0.3, 4,
                          min_frame_points=10)
    with pytest.raises(ValueError):
        observable_series(track, "nope")
