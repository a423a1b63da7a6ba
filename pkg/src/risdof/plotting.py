"""Static figures for experiment outputs (SVG/PNG via matplotlib)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dof import expected_transition  # noqa: E402

# fixed ids and no timestamp so reruns give identical SVG bytes
plt.rcParams["svg.hashsalt"] = "risdof"
_SAVE_META = {"svg": {"Date": None}, "png": {}}


def _save(fig, path):
    fmt = str(path).rsplit(".", 1)[-1].lower()
    fig.savefig(path, metadata=_SAVE_META.get(fmt, {}), bbox_inches="tight")
    plt.close(fig)


def plot_feasgrid(result, path):
    re_axis, im_axis, feas, _ = result.grid()
    cfg = result.config
    fig, ax = plt.subplots(figsize=(4.2, 4.0))
    step = re_axis[1] - re_axis[0]
    extent = (re_axis[0] - step / 2, re_axis[-1] + step / 2,
              im_axis[0] - step / 2, im_axis[-1] + step / 2)
    ax.imshow(feas.astype(float), origin="lower", extent=extent, cmap="viridis",
              vmin=0, vmax=1, interpolation="nearest")
    ax.set_xlabel("Re(y)")
    ax.set_ylabel("Im(y)")
    ax.set_title(f"M={cfg.m}, N={cfg.n}, K={cfg.k}, P={cfg.p:g}")
    _save(fig, path)


def plot_transition(result, path, show_expected=True):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for k in result.ks():
        for direct in sorted({r.direct for r in result.rows if r.k == k}):
            ns, ps = result.curve(k, direct)
            label = f"K={k}" + (", direct path" if direct else "")
            line, = ax.plot(ns, ps, marker="o", ms=3, label=label)
            m = next(r.m for r in result.rows if r.k == k)
            if show_expected and k >= m:
                ax.axvline(expected_transition(m, k, direct), color=line.get_color(),
                           ls=":", lw=0.8)
    ax.set_xlabel("RIS elements N")
    ax.set_ylabel("success probability")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)


def plot_percentiles(table, path, m=None, direct=False):
    """Interpolated N at each success level versus K."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    levels = sorted({row[1] for row in table})
    for level in levels:
        rows = sorted((r for r in table if r[1] == level), key=lambda r: r[0])
        ax.plot([r[0] for r in rows], [r[3] for r in rows], marker="o", ms=3,
                label=f"{100 * level:.0f}%")
    if m is not None:
        ks = np.array(sorted({r[0] for r in table if r[0] >= m}))
        if ks.size:
            ax.plot(ks, [expected_transition(m, int(k), direct) for k in ks], "k--",
                    lw=1, label="2K-2M" if direct else "2K-2M+1")
    ax.set_xlabel("receive antennas K")
    ax.set_ylabel("RIS elements N")
    ax.grid(alpha=0.3)
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)
