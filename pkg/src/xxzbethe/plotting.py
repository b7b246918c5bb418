"""Optional figures for CLI output; matplotlib is imported only when called."""

from __future__ import annotations

from pathlib import Path

import numpy as np

# commands whose x column is a system size, drawn on log axes
LADDERS = {"counting", "densify"}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_figure(command: str, csv_path: Path, result) -> Path | None:
    """Write <stem>.png next to ``csv_path``; returns the PNG path or None if nothing tabular."""
    if not isinstance(result, list) or not result:
        return None
    plt = _pyplot()
    cols = [c for c, v in result[0].items() if isinstance(v, (int, float, np.floating, np.integer))]
    fig, ax = plt.subplots(figsize=(6.0, 3.7))
    if command == "spectrum":
        for state in dict.fromkeys(r["state"] for r in result):
            sub = [r for r in result if r["state"] == state]
            ax.plot([1.0 / r["L"] for r in sub], [r["scaled"] for r in sub], "o-", label=f"{state} scaled")
            ax.plot([1.0 / r["L"] for r in sub], [r["prediction"] for r in sub], "k--", lw=0.8)
        ax.set_xlabel("1/L")
        ax.set_ylabel("L (E - L E0)")
    else:
        x = cols[0]
        xs = np.array([r[x] for r in result], dtype=float)
        for c in cols[1:]:
            if c in ("N",) or c.startswith("exponent_"):
                continue
            ys = np.abs(np.array([r[c] for r in result], dtype=float))
            if command in LADDERS:
                if np.all(ys > 0):
                    ax.loglog(xs, ys, "o-", label=c)
            else:
                ax.plot(xs, [r[c] for r in result], label=c)
        ax.set_xlabel(x)
    ax.legend(fontsize=7)
    fig.tight_layout()
    out = csv_path.with_suffix(".png")
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
