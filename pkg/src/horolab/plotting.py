"""Figure rendering for experiment result tables.

Every run writes one PNG next to its CSV: values (and targets, when
present) against the natural abscissa of the experiment — push time t
when the rows carry one, radius r otherwise, plain row order as a
fallback.  Rows are grouped into one line per (phi_id, psi_id) label.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _axis_key(rows):
    if any(row["t"] != "" for row in rows):
        return "t"
    if any(row["r"] != "" for row in rows):
        return "r"
    return None


def _label(row):
    lab = str(row["phi_id"]) if row["phi_id"] != "" else "value"
    if row["psi_id"] != "":
        lab += f"/{row['psi_id']}"
    return lab


def render_results(experiment: str, rows, path) -> str:
    """Render the result rows to a PNG at `path`; returns the path."""
    key = _axis_key(rows)
    groups: dict = {}
    for i, row in enumerate(rows):
        x = row[key] if key is not None and row[key] != "" else i
        groups.setdefault(_label(row), []).append(
            (float(x), float(row["value"]),
             float(row["target"]) if row["target"] != "" else None))

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for lab in sorted(groups):
        pts = sorted(groups[lab])
        xs = [p[0] for p in pts]
        ax.plot(xs, [p[1] for p in pts], "o-", label=lab, markersize=4)
        targets = [p[2] for p in pts]
        if any(t is not None for t in targets):
            ax.plot(xs, targets, "--", color=ax.lines[-1].get_color(),
                    alpha=0.5, linewidth=1.0)
    ax.set_xlabel(key if key is not None else "row")
    ax.set_ylabel("value")
    ax.set_title(experiment)
    if len(groups) <= 12:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)
