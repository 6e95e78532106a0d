"""Figure rendering for run artifacts.

Each helper writes a single PNG next to the delimited output it
illustrates.  The Agg backend is forced so rendering works headless.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

_DPI = 130


def plot_profile(profile, path) -> None:
    """Profile value and slope against the similarity coordinate."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(profile.z, profile.y, label="y")
    ax.plot(profile.z, profile.dy, label="dy/dz", alpha=0.7)
    ax.axhline(0.0, color="k", lw=0.6)
    if profile.first_zero is not None:
        ax.axvline(profile.first_zero, color="gray", ls="--", lw=0.8,
                   label=f"first zero {profile.first_zero:.6f}")
    ax.set_xlabel("z")
    ax.set_ylabel("profile")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_family(fam, path) -> None:
    """Scale factor history alongside the shape profile."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.plot(fam.scale.t, fam.scale.a)
    ax1.set_xlabel("t")
    ax1.set_ylabel("a(t)")
    ax1.set_title(f"{fam.kind}, N={fam.N}, lam={fam.lam:g}")
    ax2.plot(fam.profile.z, fam.profile.y)
    ax2.axhline(0.0, color="k", lw=0.6)
    ax2.set_xlabel("z")
    ax2.set_ylabel("y(z)")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_diagnostics(rows, result, path) -> None:
    """Energy budget, virial functional and peak density of an evolve run."""
    t = np.array([row["t"] for row in rows])
    fig, axes = plt.subplots(3, 1, figsize=(6.5, 8.0), sharex=True)

    ax = axes[0]
    for key, label in (("E_kin", "kinetic"), ("E_int", "internal"),
                       ("E_pot", "potential"), ("E_tot", "total")):
        ax.plot(t, [row[key] for row in rows], label=label)
    ax.set_ylabel("energy")
    ax.legend(loc="best", fontsize=8)

    ax = axes[1]
    ax.plot(t, [row["H"] for row in rows], label="H")
    ax.plot(t, [row["Hdot_f"] for row in rows], label="Hdot (formula)")
    ax.set_ylabel("second moment")
    ax.legend(loc="best", fontsize=8)

    ax = axes[2]
    times = [snap.state.t for snap in result.snapshots]
    peaks = [float(np.max(snap.state.rho)) for snap in result.snapshots]
    ax.semilogy(times, peaks)
    ax.set_ylabel("max density")
    ax.set_xlabel("t")

    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_snapshots(result, path, max_curves: int = 6) -> None:
    """Density profiles at a handful of snapshot times."""
    snaps = result.snapshots
    if len(snaps) > max_curves:
        idx = np.linspace(0, len(snaps) - 1, max_curves).round().astype(int)
        snaps = [snaps[i] for i in sorted(set(idx.tolist()))]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    positive = all(np.any(s.state.rho > 0.0) for s in snaps)
    for snap in snaps:
        rho = snap.state.rho
        if positive:
            rho = np.where(rho > 0.0, rho, np.nan)
            ax.semilogy(snap.state.r, rho, label=f"t={snap.state.t:.3f}")
        else:
            ax.plot(snap.state.r, rho, label=f"t={snap.state.t:.3f}")
    ax.set_xlabel("r")
    ax.set_ylabel("density")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
