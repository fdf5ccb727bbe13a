"""Matplotlib figures for the report command (file output only, Agg backend)."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_PNG_META = {"Software": None}


def _figure(width=6.0, height=None):
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    fig, ax = plt.subplots(figsize=(width, height or width * golden))
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_sweep(rows, path):
    """Max relative deviation against the swept size, one line per regime.

    ``rows`` are dicts with keys regime, size, dev_exact, dev_limit.
    """
    fig, ax = _figure()
    for regime in sorted({r["regime"] for r in rows}):
        rr = sorted((r for r in rows if r["regime"] == regime), key=lambda r: r["size"])
        xs = [r["size"] for r in rr]
        label = "n (N fixed)" if regime == "N_first" else "N (n fixed)"
        ax.plot(xs, [r["dev_exact"] for r in rr], "o-", label=f"{regime}: vs exact, sweep {label}")
        ax.plot(xs, [r["dev_limit"] for r in rr], "s--", label=f"{regime}: vs limit kernel")
    ax.set_xscale("log")
    ax.set_xlabel("swept size")
    ax.set_ylabel("max relative deviation")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_covariance(points, path, title=None):
    """Empirical vs reference variance along t; ``points`` are (series, t, empirical, reference)."""
    fig, ax = _figure()
    for series in sorted({p[0] for p in points}):
        pp = sorted((p for p in points if p[0] == series), key=lambda p: p[1])
        t = [p[1] for p in pp]
        line, = ax.plot(t, [p[2] for p in pp], "o", label=f"{series} empirical")
        ax.plot(t, [p[3] for p in pp], "-", color=line.get_color(), label=f"{series} reference")
    ax.set_xlabel("t")
    ax.set_ylabel("variance")
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_slope(rows, path):
    """Median slope statistic with interquartile bars against N; ``rows`` are dicts."""
    fig, ax = _figure()
    rows = sorted(rows, key=lambda r: r["N"])
    xs = [r["N"] for r in rows]
    med = [r["median"] for r in rows]
    err = [[m - r["q25"] for m, r in zip(med, rows)], [r["q75"] - m for m, r in zip(med, rows)]]
    ax.errorbar(xs, med, yerr=err, fmt="o-", capsize=3, label="median (IQR)")
    if rows:
        ax.axhline(rows[0]["target"], color="k", lw=1, ls=":", label="lam psi1")
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("slope statistic")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_panel(points, path):
    """Normalized aggregates against t, one marker cloud per normalization."""
    fig, ax = _figure()
    for label in sorted({p[0] for p in points}):
        pp = [p for p in points if p[0] == label]
        ax.plot([p[1] for p in pp], [p[2] for p in pp], ".", alpha=0.5, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("normalized aggregate")
    ax.legend(fontsize=7)
    return _save(fig, path)
