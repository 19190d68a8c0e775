"""Headless figure rendering (SVG files next to the delimited output)."""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = [
    "deviation_heatmap_svg",
    "trend_svg",
    "dimension_loglog_svg",
    "periodogram_svg",
    "observable_series_svg",
]


def deviation_heatmap_svg(path, table: np.ndarray, target: np.ndarray, title: str = "") -> None:
    K = (table.shape[0] - 1) // 2
    dev = np.abs(table - target)
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.imshow(dev.T, origin="lower", extent=(-K - 0.5, K + 0.5, -K - 0.5, K + 0.5),
                   cmap="viridis")
    ax.set_xlabel("k")
    ax.set_ylabel("l")
    ax.set_title(title or "|S(k,l) - target|")
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def trend_svg(path, trend, tolerance: float | None = None) -> None:
    ns = [n for n, _ in trend]
    ds = [d for _, d in trend]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.loglog(ns, ds, "o-", label="max deviation")
    if tolerance is not None:
        ax.axhline(tolerance, color="crimson", ls="--", lw=1, label="tolerance")
    ax.set_xlabel("orbit prefix N")
    ax.set_ylabel("max character deviation")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def dimension_loglog_svg(path, report, title: str = "") -> None:
    xs = np.log(1.0 / np.array(report.scales))
    ys = np.array(report.entropies)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(xs, ys, "o", label="grid entropy")
    if len(xs) >= 2:
        coef = np.polyfit(xs, ys, 1)
        ax.plot(xs, np.polyval(coef, xs), "-",
                label=f"slope {report.fitted_dim:.3f} ± {report.confidence:.3f}")
    ax.set_xlabel("log(1/scale)")
    ax.set_ylabel("entropy (nats)")
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def periodogram_svg(path, per, marks=(), title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(per.freqs[1:], per.power[1:], "-", lw=1)
    for f in marks:
        ax.axvline(f, color="crimson", ls="--", lw=1)
    ax.set_xlabel("frequency (1/t)")
    ax.set_ylabel("power")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def observable_series_svg(path, times, series_by_name: dict, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for name, values in series_by_name.items():
        ax.plot(times[: len(values)], values, lw=1, label=name)
    ax.set_xlabel("zoom time t")
    ax.set_ylabel("observable")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
