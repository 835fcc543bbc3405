"""Figure rendering for sweep results (mean latency per mode vs. axis value)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import ALL_MODES, aggregate

_AXIS_LABELS = {
    "x_u": "user x-coordinate [m]",
    "n_elements": "surface elements N",
    "a_active": "active elements A",
    "f_edge": "edge CPU rate [cycles/s]",
    "f_local": "local CPU rate [cycles/s]",
    "e_antennas": "eavesdropper antennas E",
    "pa_max_dbm": "amplifier budget [dBm]",
}

_MODE_STYLE = {
    "local_only": dict(color="0.4", ls="--", marker=""),
    "ris_random": dict(color="tab:gray", marker="x"),
    "ris_optimized": dict(color="tab:blue", marker="o"),
    "hrris_fixed": dict(color="tab:orange", marker="s"),
    "hrris_dynamic": dict(color="tab:red", marker="^"),
}


def render_sweep_figure(table, path):
    """Render mean-latency curves for every mode in the table to ``path``."""
    rows = aggregate(table)
    axis = rows[0]["axis"] if rows else ""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for mode in ALL_MODES:
        points = [(r["value"], r["mean_latency_s"]) for r in rows if r["mode"] == mode]
        if not points:
            continue
        xs, ys = zip(*points)
        ax.plot(xs, ys, label=mode, markersize=4, **_MODE_STYLE.get(mode, {}))
    ax.set_xlabel(_AXIS_LABELS.get(axis, axis))
    ax.set_ylabel("mean latency [s]")
    ax.grid(alpha=0.35)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
