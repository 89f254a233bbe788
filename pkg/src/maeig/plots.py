"""Matplotlib figure helpers for the experiment harness.

Figures are rendered headless from the same data that goes into the
delimited reports and written next to them.  One function per figure kind.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_RC = {
    "figure.figsize": (5.2, 3.9),
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
}


def apply_style():
    plt.rcParams.update(_RC)


def solution_figure(mesh, u, path, title=""):
    """Surface plot of a nodal field over the triangulation."""
    apply_style()
    fig = plt.figure(figsize=(5.6, 4.4))
    ax = fig.add_subplot(projection="3d")
    ax.plot_trisurf(mesh.vertices[:, 0], mesh.vertices[:, 1], np.asarray(u),
                    triangles=mesh.triangles, cmap="viridis", linewidth=0.1)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("u")
    if title:
        ax.set_title(title)
    fig.savefig(path)
    plt.close(fig)


def trace_figure(records, path, title=""):
    """Residual and eigenvalue estimate versus the outer iteration count."""
    apply_style()
    ks = [r.k for r in records]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.2, 3.4))
    ax1.semilogy(ks, [r.eta1 for r in records], "o-", ms=3)
    ax1.set_xlabel("iteration k")
    ax1.set_ylabel(r"$\eta_1$")
    ax2.plot(ks, [r.lambda_k for r in records], "o-", ms=3, color="tab:red")
    ax2.set_xlabel("iteration k")
    ax2.set_ylabel(r"$\lambda_h^k$")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def convergence_figure(hs, l2_errors, h1_errors, path, title=""):
    """Log-log error-vs-h plot with reference slopes 1 and 2."""
    apply_style()
    hs = np.asarray(hs, dtype=float)
    fig, ax = plt.subplots()
    ax.loglog(hs, l2_errors, "o-", label=r"$L^2$ error")
    ax.loglog(hs, h1_errors, "s-", label=r"$H^1$ error")
    ax.loglog(hs, l2_errors[0] * (hs / hs[0]) ** 2, "k--", lw=0.8, label=r"$h^2$")
    ax.loglog(hs, h1_errors[0] * (hs / hs[0]), "k:", lw=0.8, label=r"$h$")
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.savefig(path)
    plt.close(fig)


def compare_figure(rows, path, title=""):
    """Grouped bars of Poisson-solve counts per mesh size and algorithm."""
    apply_style()
    hs = sorted({r["h"] for r in rows if r["status"] == "ok"})
    modes = [m for m in ("inexact", "exact") if any(r["algorithm"] == m for r in rows)]
    fig, ax = plt.subplots()
    width = 0.8 / max(len(modes), 1)
    for i, mode in enumerate(modes):
        counts = []
        for h in hs:
            match = [r for r in rows if r["algorithm"] == mode and r["h"] == h
                     and r["status"] == "ok"]
            counts.append(match[0]["poisson"] if match else 0)
        pos = np.arange(len(hs)) + (i - (len(modes) - 1) / 2) * width
        ax.bar(pos, counts, width=width, label=mode)
    ax.set_yscale("log")
    ax.set_xticks(np.arange(len(hs)))
    ax.set_xticklabels([f"1/{round(1/h)}" if 1 / h == round(1 / h) else f"{h:g}" for h in hs])
    ax.set_xlabel("h")
    ax.set_ylabel("Poisson solves")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.savefig(path)
    plt.close(fig)
