"""Static figures written next to CLI reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "figure.figsize": (5.5, 3.6),
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 120,
}


def _save(fig, path: str) -> str:
    # no timestamp or version text, so reruns produce identical files
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_resolvability_ladder(ladder: list[dict], path: str) -> str:
    """Mean measured distance (with one standard error) against M, log-log."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        M = np.array([row["M"] for row in ladder], dtype=float)
        mean = np.array([row["mean"] for row in ladder])
        err = np.array([row["stderr"] for row in ladder])
        ax.errorbar(M, mean, yerr=err, marker="o", capsize=3, label="mean $d_E$")
        if (mean > 0).all():
            ref = mean[0] * np.sqrt(M[0] / M)
            ax.plot(M, ref, ls="--", color="gray", label=r"$\propto M^{-1/2}$")
            ax.set_yscale("log")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("M (number of selected words)")
        ax.set_ylabel("measured output distance")
        ax.legend()
        return _save(fig, path)


def plot_density_histogram(densities, masses, path: str, quantiles: dict | None = None) -> str:
    """Mass-weighted histogram of normalized information densities."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        d = np.asarray(densities, dtype=float)
        w = np.asarray(masses, dtype=float)
        bins = min(50, max(5, len(np.unique(d))))
        ax.hist(d, bins=bins, weights=w, color="C0", alpha=0.8)
        for k, (delta, value) in enumerate(sorted((quantiles or {}).items())):
            ax.axvline(value, color=f"C{k + 1}", ls="--", label=f"tail {delta:g}: {value:.4g}")
        if quantiles:
            ax.legend()
        ax.set_xlabel("information density (bits/letter)")
        ax.set_ylabel("joint mass")
        return _save(fig, path)


def plot_capacity_profile(p, chi, path: str, best: float | None = None) -> str:
    """Holevo quantity along the edge of a binary input simplex."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.plot(p, chi)
        if best is not None:
            ax.axhline(best, color="gray", ls="--", label=f"max {best:.6f}")
            ax.legend()
        ax.set_xlabel("P(1)")
        ax.set_ylabel("Holevo quantity (bits)")
        return _save(fig, path)
