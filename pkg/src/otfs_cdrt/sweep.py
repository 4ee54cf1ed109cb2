"""SNR sweeps producing outage and sum-rate tables, plus their CSV I/O."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .analysis import analytic_outage, is_special_case, outage_sum_rate
from .config import SweepConfig
from .montecarlo import OutageReport, estimate_outage_schemes
from .protocol import SIGNALS

log = logging.getLogger(__name__)

OUTAGE_COLUMNS = ("snr_db", "scheme", "signal", "p_analytic", "p_mc", "ci95", "trials")
SUMRATE_COLUMNS = ("snr_db", "scheme", "sr_analytic", "sr_mc")


@dataclass(frozen=True)
class SweepPoint:
    snr_db: float
    scheme: str
    analytic: tuple[float, float, float]
    mc: OutageReport


def signals_for(scheme: str) -> tuple[str, ...]:
    # nCDRT never sends xbar_c, so it has no outage curve for it
    return SIGNALS[:2] if scheme == "ncdrt" else SIGNALS


def sweep_points(cfg: SweepConfig, monte_carlo: bool = True) -> Iterator[SweepPoint]:
    method = "special" if is_special_case(cfg.scenario) else "general"
    for snr_db in cfg.snr_grid_db:
        s = cfg.scenario_at(snr_db)
        reports = estimate_outage_schemes(s, cfg.mc, cfg.schemes) if monte_carlo else {}
        for scheme in cfg.schemes:
            analytic = analytic_outage(s, scheme, method=method)
            log.info("%5.1f dB %-8s analytic=%s", snr_db, scheme, analytic)
            yield SweepPoint(snr_db, scheme, analytic, reports.get(scheme))


def outage_rows(points: Iterable[SweepPoint]) -> list[dict]:
    rows = []
    for pt in points:
        for i, signal in enumerate(SIGNALS):
            if signal not in signals_for(pt.scheme):
                continue
            est = pt.mc[signal] if pt.mc is not None else None
            rows.append({
                "snr_db": pt.snr_db,
                "scheme": pt.scheme,
                "signal": signal,
                "p_analytic": pt.analytic[i],
                "p_mc": est.p_hat if est else float("nan"),
                "ci95": est.ci95_halfwidth if est else float("nan"),
                "trials": est.trials if est else 0,
            })
    return rows


def sumrate_rows(points: Iterable[SweepPoint], cfg: SweepConfig) -> list[dict]:
    rates = cfg.scenario.rates
    rows = []
    for pt in points:
        sr_mc = outage_sum_rate(*pt.mc.p_hat, rates, pt.scheme) if pt.mc is not None else float("nan")
        rows.append({
            "snr_db": pt.snr_db,
            "scheme": pt.scheme,
            "sr_analytic": outage_sum_rate(*pt.analytic, rates, pt.scheme),
            "sr_mc": sr_mc,
        })
    return rows


def write_csv(rows: list[dict], path: str | Path, columns: tuple[str, ...]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in columns})


def read_csv(path: str | Path) -> list[dict]:
    """Parse a sweep CSV back into typed rows."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    typed = []
    for row in rows:
        out = {}
        for key, value in row.items():
            if key in ("scheme", "signal"):
                out[key] = value
            elif key == "trials":
                out[key] = int(value)
            else:
                out[key] = float(value)
        typed.append(out)
    return typed
