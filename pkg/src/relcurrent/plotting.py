"""Static figures written next to the CSV tables.

Uses the Agg backend and strips the software tag from PNG metadata so the
files are byte-stable across reruns.
"""
from __future__ import annotations

from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PNG_META = {"Software": None}
STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.bbox": "tight",
}


def _save(fig, path):
    fig.savefig(path, format="png", metadata=PNG_META)
    plt.close(fig)
    return path


def plot_deficits(rows, path):
    """|relative deficit| against sigma on log-log axes, one line per spin."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        spins = sorted({r["spin"] for r in rows}, key=lambda s: Fraction(s))
        for s in spins:
            sel = sorted((r for r in rows if r["spin"] == s), key=lambda r: r["sigma"])
            sig = np.array([r["sigma"] for r in sel])
            rel = np.array([abs(r["deficit"] / r["rhs"]) for r in sel])
            ok = np.isfinite(rel) & (rel > 0)
            ax.loglog(sig[ok], rel[ok], "o-", label=f"s = {s}")
        ax.set_xlabel(r"packet width $\sigma$")
        ax.set_ylabel(r"$|\Sigma_i\langle i[K_i,J_i]\rangle - 3\langle J^0\rangle| \,/\, 3\langle J^0\rangle$")
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_commutator_matrix(matrix, j0, path):
    """Heatmap of <i[K_i, J^j]> / <J^0>, which should be the identity."""
    M = np.asarray(matrix) / j0
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 3.2))
        im = ax.imshow(M, cmap="RdBu_r", vmin=-1.2, vmax=1.2)
        ax.grid(False)
        for i in range(3):
            for j in range(3):
                ax.text(j, i, f"{M[i, j]:.6f}", ha="center", va="center", fontsize=8)
        ax.set_xticks(range(3), [f"$J^{j + 1}$" for j in range(3)])
        ax.set_yticks(range(3), [f"$K_{i + 1}$" for i in range(3)])
        fig.colorbar(im, ax=ax, shrink=0.8)
        return _save(fig, path)


def plot_density_line(coord, curves, path, xlabel="position"):
    """Density profiles along a line; ``curves`` maps a label to an array."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, y in curves.items():
            ax.plot(coord, y, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("density")
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_density_plane(grid, panels, path):
    """Side-by-side images of densities on a square grid."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 3.0), squeeze=False)
        ext = [grid[0], grid[-1], grid[0], grid[-1]]
        for ax, (label, z) in zip(axes[0], panels.items()):
            ax.imshow(np.asarray(z).T, origin="lower", extent=ext, cmap="viridis")
            ax.set_title(label)
            ax.set_xlabel("x")
            ax.set_ylabel("z")
            ax.grid(False)
        return _save(fig, path)
