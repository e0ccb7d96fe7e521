"""Figure rendering for the report path (matplotlib, Agg backend).

Each CLI report can drop PNG companions next to its delimited output:
ramification data in the complex plane, per-check deviation bars on a log
scale, and the classification ladder of admissible dimensions.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["curve_figure", "deviation_figure", "classification_figure"]

FIGSIZE = (5.4, 3.6)


def _save(fig, outdir, name):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _to_xy(v):
    from .scalars import BigComplex, GaussianRational
    if isinstance(v, GaussianRational):
        return float(v.re), float(v.im)
    if isinstance(v, BigComplex):
        z = v.value
        return float(z.real), float(z.imag)
    return float(v), 0.0


def curve_figure(cover, outdir, name="curve_points.png"):
    """Ramification points and critical values in the complex plane."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    px, py = zip(*(_to_xy(p) for p in cover.ram_points))
    ux, uy = zip(*(_to_xy(u) for u in cover.crit_values))
    ax.scatter(px, py, marker="x", s=60, label="ramification points")
    ax.scatter(ux, uy, marker="o", s=40, facecolors="none",
               edgecolors="tab:red", label="critical values")
    for k, (x, y) in enumerate(zip(px, py)):
        ax.annotate(f"p{k+1}", (x, y), textcoords="offset points", xytext=(4, 4))
    for k, (x, y) in enumerate(zip(ux, uy)):
        ax.annotate(f"u{k+1}", (x, y), textcoords="offset points", xytext=(4, -10))
    ax.axhline(0, lw=0.5, color="0.8")
    ax.axvline(0, lw=0.5, color="0.8")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(f"cover '{cover.label or 'rational'}': N={cover.N}, degree {cover.degree}")
    ax.legend(fontsize=8)
    return _save(fig, outdir, name)


def deviation_figure(report, outdir, name="deviations.png"):
    """Log-scale bars of measured deviations against their tolerances."""
    rows = [r for r in report.rows if r.tolerance is not None]
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(max(FIGSIZE[0], 0.6 * len(rows) + 2), 3.8))
    import math
    labels = [r.check for r in rows]
    vals = []
    for r in rows:
        v = r.value if isinstance(r.value, float) else abs(r.value)
        vals.append(max(float(v), 1e-99))
    tols = [float(r.tolerance) for r in rows]
    xs = range(len(rows))
    colors = ["tab:green" if r.status == "pass" else "tab:red" for r in rows]
    ax.bar(xs, [math.log10(v) for v in vals], color=colors)
    ax.plot(xs, [math.log10(t) for t in tols], "k_", markersize=18,
            label="tolerance")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("log10 deviation")
    ax.set_title(report.title)
    ax.legend(fontsize=8)
    return _save(fig, outdir, name)


def classification_figure(table, case, outdir, name="classification.png"):
    """Admissible conformal dimensions and their polynomial degrees."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ds = [float(row["D"]) for row in table]
    ms = [row["degree"] if row["degree"] is not None else 0 for row in table]
    ax.stem(ds, ms)
    ax.set_xlabel("conformal dimension D")
    ax.set_ylabel("polynomial degree m")
    ax.set_title(f"case {case}: admissible dimensions")
    return _save(fig, outdir, name)
