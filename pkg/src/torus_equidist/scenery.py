"""Zoom diagnostics: sceneries of a measure at a point and their periodograms.

A track is built from ONE deep sample cloud: frame j is the cloud restricted
to the sup-norm window of radius e^{-j dt} around the anchor, recentered and
rescaled to [-1,1]^2, mass renormalized. Sharing the cloud makes frames
couplings of the same measure, so the scale-equivariance property is exact
up to selection (no resampling noise). Sup-norm windows nest exactly under
dyadic-style zooms, unlike Euclidean balls.

Anchors are sampler outputs (typical points), never fixed points of branch
maps. Observable time series over frames feed a mean-removed, Hann-windowed
periodogram; a self-similar measure with contraction r shows its zoom
periodicity as a peak at frequency 1/|log r|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .equidist import EmpiricalMeasure
from .measures import MeasureSpec, PlanarIFS, sample_cloud, spec_hash

__all__ = [
    "SceneryTrack",
    "scenery_track",
    "scenery_track_for_spec",
    "auto_depth",
    "OBSERVABLES",
    "observable_series",
    "Periodogram",
    "spectrum_estimate",
]

MIN_FRAME_POINTS = 100


@dataclass
class SceneryTrack:
    frames: list[EmpiricalMeasure]   # supported in [-1,1]^2, mass 1 each
    dt: float
    anchor: tuple[float, float]
    truncated: bool = False
    source_hash: str = ""
    frame_counts: list[int] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.frames)) * self.dt

    def __len__(self):
        return len(self.frames)


def scenery_track(cloud: np.ndarray, anchor: tuple[float, float], dt: float, J: int,
                  *, min_frame_points: int = MIN_FRAME_POINTS,
                  source_hash: str = "") -> SceneryTrack:
    """Frames j = 0..J of the zoom at the anchor, from one shared cloud."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    pts = np.asarray(cloud, dtype=np.float64)
    ax, ay = float(anchor[0]), float(anchor[1])
    rel = pts - np.array([ax, ay])
    sup = np.maximum(np.abs(rel[:, 0]), np.abs(rel[:, 1]))
    track = SceneryTrack([], dt, (ax, ay), source_hash=source_hash)
    order = np.argsort(sup, kind="stable")
    sup_sorted = sup[order]
    rel_sorted = rel[order]
    for j in range(J + 1):
        radius = math.exp(-j * dt)
        count = int(np.searchsorted(sup_sorted, radius, side="right"))
        if count < min_frame_points:
            track.truncated = True
            break
        frame = rel_sorted[:count] * (1.0 / radius)
        track.frames.append(EmpiricalMeasure(frame))
        track.frame_counts.append(count)
    return track


def auto_depth(spec: MeasureSpec, dt: float, J: int, guard: float = 0.01) -> int:
    """Sample depth so the resolution stays `guard` below the deepest window."""
    if isinstance(spec, PlanarIFS):
        per_level = math.log(1.0 / float(spec.r_max()))
    else:
        base = getattr(spec, "base", None)
        if base is None:
            base = min(spec.base_x, spec.base_y)
        per_level = math.log(base)
    return math.ceil((J * dt + math.log(1.0 / guard)) / per_level) + 1


def scenery_track_for_spec(spec: MeasureSpec, dt: float, J: int, *, cloud_size: int,
                           seed: int, depth: int | None = None,
                           min_frame_points: int = MIN_FRAME_POINTS) -> SceneryTrack:
    """Sample one deep cloud and an independent typical anchor, then track."""
    if depth is None:
        depth = auto_depth(spec, dt, J)
    cloud = sample_cloud(spec, depth, cloud_size, rng.derive_seed(seed, 0xC10D))
    anchor_pt = sample_cloud(spec, depth, 1, rng.derive_seed(seed, 0xA2C4))[0]
    if np.ndim(anchor_pt) == 0:
        raise ValueError("scenery tracks need a planar measure")
    return scenery_track(cloud, (float(anchor_pt[0]), float(anchor_pt[1])), dt, J,
                         min_frame_points=min_frame_points, source_hash=spec_hash(spec))


# ---------------------------------------------------------------------------
# observables

def _left_half_mass(emp: EmpiricalMeasure) -> float:
    return float(np.mean(emp.points[:, 0] < 0.0))

def _disk_mass_half(emp: EmpiricalMeasure) -> float:
    r2 = emp.points[:, 0] ** 2 + emp.points[:, 1] ** 2
    return float(np.mean(r2 <= 0.25))

def _cov(emp: EmpiricalMeasure) -> np.ndarray:
    p = emp.points - emp.points.mean(axis=0)
    return (p.T @ p) / len(p)

def _cov_angle(emp: EmpiricalMeasure) -> float:
    c = _cov(emp)
    return 0.5 * math.atan2(2.0 * c[0, 1], c[0, 0] - c[1, 1])

def _cov_log_anisotropy(emp: EmpiricalMeasure) -> float:
    c = _cov(emp)
    ev = np.linalg.eigvalsh(c)
    lo = max(float(ev[0]), 1e-300)
    hi = max(float(ev[1]), 1e-300)
    return math.log(hi / lo)


OBSERVABLES = {
    "left_half_mass": _left_half_mass,
    "disk_mass_half": _disk_mass_half,
    "cov_angle": _cov_angle,
    "cov_log_anisotropy": _cov_log_anisotropy,
}


def observable_series(track: SceneryTrack, name: str) -> np.ndarray:
    f = OBSERVABLES.get(name)
    if f is None:
        raise ValueError(f"unknown observable {name!r}; have {sorted(OBSERVABLES)}")
    return np.array([f(frame) for frame in track.frames])


# ---------------------------------------------------------------------------
# periodogram

@dataclass
class Periodogram:
    freqs: np.ndarray
    power: np.ndarray
    peaks: list[tuple[float, float]]   # top-3 (frequency, power), DC excluded
    bin_width: float

    def noise_floor(self) -> float:
        return float(np.median(self.power[1:]))


def spectrum_estimate(series: np.ndarray, dt: float) -> Periodogram:
    """Mean-removed, Hann-windowed periodogram up to the Nyquist 1/(2 dt)."""
    s = np.asarray(series, dtype=np.float64)
    if len(s) < 32:
        raise ValueError("series too short for a stable periodogram (need >= 32)")
    s = s - s.mean()
    window = np.hanning(len(s))
    f = np.fft.rfft(s * window)
    power = np.abs(f) ** 2
    freqs = np.fft.rfftfreq(len(s), d=dt)
    order = np.argsort(power[1:])[::-1][:3]
    peaks = [(float(freqs[i + 1]), float(power[i + 1])) for i in order]
    return Periodogram(freqs, power, peaks, float(freqs[1]))
