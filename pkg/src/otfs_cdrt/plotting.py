"""Static charts rendered from sweep CSV files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweep import read_csv  # noqa: E402

_STYLE = {"proposed": "C0", "oma": "C1", "ncdrt": "C2"}
_MARK = {"xc": "o", "xe": "s", "xbarc": "^"}


class EmptyCsv(ValueError):
    pass


def figure_from_rows(rows: list[dict]):
    """Outage rows give a log-y chart, sum-rate rows a linear one.

    Analytic values are lines, Monte Carlo estimates are hollow markers; one
    line per (scheme, signal) for outage and per scheme for sum rate.
    """
    if not rows:
        raise EmptyCsv("no data rows to plot")
    fig, ax = plt.subplots(figsize=(5, 3.6))
    if "signal" in rows[0]:
        for scheme, signal in sorted({(r["scheme"], r["signal"]) for r in rows}):
            pts = sorted((r["snr_db"], r["p_analytic"], r["p_mc"]) for r in rows
                         if r["scheme"] == scheme and r["signal"] == signal)
            x = [p[0] for p in pts]
            color = _STYLE.get(scheme)
            ax.plot(x, [p[1] for p in pts], "-", color=color, label=f"{scheme} {signal}")
            ax.plot(x, [p[2] for p in pts], _MARK.get(signal, "x"), color=color,
                    mfc="none", ls="none")
        ax.set_yscale("log")
        ax.set_ylabel("outage probability")
    else:
        for scheme in sorted({r["scheme"] for r in rows}):
            pts = sorted((r["snr_db"], r["sr_analytic"], r["sr_mc"]) for r in rows
                         if r["scheme"] == scheme)
            x = [p[0] for p in pts]
            color = _STYLE.get(scheme)
            ax.plot(x, [p[1] for p in pts], "-", color=color, label=scheme)
            ax.plot(x, [p[2] for p in pts], "o", color=color, mfc="none", ls="none")
        ax.set_ylabel("outage sum rate (BPCU)")
    ax.set_xlabel("transmit SNR (dB)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def plot_csv(csv_path: str | Path, out_dir: str | Path, fmt: str = "svg") -> list[Path]:
    """Render an outage or sum-rate CSV; returns the written files."""
    rows = read_csv(csv_path)
    if not rows:
        raise EmptyCsv(f"{csv_path} has no data rows")
    fig = figure_from_rows(rows)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{Path(csv_path).stem}.{fmt}"
    fig.savefig(path)
    plt.close(fig)
    return [path]
