"""Figure rendering for scan, simulation, and tomography reports.

Everything here draws to a Figure and saves to file; the Agg backend is
forced so report generation works on headless machines.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["scan_figure", "counts_figure", "state_figure", "save_figure"]

_CLASSICAL_CHSH = 2.0


def scan_figure(rows):
    """Entanglement measures against separation, one curve family per sigma.

    ``rows`` is an iterable of dicts with keys x, sigma, g, negativity,
    concurrence, chsh and optionally x_star.
    """
    rows = list(rows)
    sigmas = sorted({row["sigma"] for row in rows})
    fig, (ax_g, ax_ent, ax_chsh) = plt.subplots(1, 3, figsize=(12, 3.6))
    for sigma in sigmas:
        sub = [row for row in rows if row["sigma"] == sigma]
        sub.sort(key=lambda row: row["x"])
        xs = np.array([row["x"] for row in sub])
        tag = f"$\\sigma$={sigma:g}"
        ax_g.plot(xs, [row["g"] for row in sub], label=tag)
        ax_ent.plot(xs, [row["negativity"] for row in sub], label=f"neg, {tag}")
        ax_ent.plot(xs, [row["concurrence"] for row in sub], "--",
                    label=f"conc, {tag}")
        ax_chsh.plot(xs, [row["chsh"] for row in sub], label=tag)
        x_star = sub[0].get("x_star")
        if x_star is not None and np.isfinite(x_star):
            ax_ent.axvline(x_star, color="gray", lw=0.8, alpha=0.6)
    ax_g.set_xlabel("separation $k_f |r - r'|$")
    ax_g.set_ylabel("kernel $g$")
    ax_ent.set_xlabel("separation $k_f |r - r'|$")
    ax_ent.set_ylabel("entanglement")
    ax_chsh.set_xlabel("separation $k_f |r - r'|$")
    ax_chsh.set_ylabel("CHSH maximum")
    ax_chsh.axhline(_CLASSICAL_CHSH, color="gray", lw=0.8, ls=":")
    for ax in (ax_g, ax_ent, ax_chsh):
        ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def counts_figure(record):
    """Grouped bars of the joint coincidence counts per setting."""
    n = len(record.settings)
    labels = [s.label or str(k) for k, s in enumerate(record.settings)]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * n), 3.2))
    width = 0.2
    offsets = np.arange(n)
    for idx, key in enumerate(("++", "+-", "-+", "--")):
        counts = record.joint[:, idx // 2, idx % 2]
        ax.bar(offsets + (idx - 1.5) * width, counts, width, label=key)
    ax.set_xticks(offsets)
    ax.set_xticklabels(labels)
    ax.set_xlabel("analyzer setting")
    ax.set_ylabel("coincidences")
    ax.legend(fontsize=7, ncol=4)
    fig.tight_layout()
    return fig


def state_figure(matrix, title=""):
    """Real and imaginary heatmaps of a 4x4 operator."""
    matrix = np.asarray(matrix, dtype=complex)
    fig, (ax_re, ax_im) = plt.subplots(1, 2, figsize=(7.2, 3.2))
    vmax = max(np.abs(matrix).max(), 1e-12)
    ticks = ["$\\uparrow\\uparrow$", "$\\uparrow\\downarrow$",
             "$\\downarrow\\uparrow$", "$\\downarrow\\downarrow$"]
    for ax, part, name in ((ax_re, matrix.real, "Re"), (ax_im, matrix.imag, "Im")):
        im = ax.imshow(part, vmin=-vmax, vmax=vmax, cmap="RdBu_r")
        ax.set_title(f"{name} {title}".strip())
        ax.set_xticks(range(4))
        ax.set_yticks(range(4))
        ax.set_xticklabels(ticks, fontsize=7)
        ax.set_yticklabels(ticks, fontsize=7)
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    return fig


def save_figure(fig, path, dpi=150, metadata=None):
    fig.savefig(path, dpi=dpi, metadata=metadata)
    plt.close(fig)
