"""Regression checks for the characteristic function and its inversion."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import CfSpec, InversionParams, auto_tune_inversion, cf_theta, gil_pelaez_cdf
from .channel import LINKS
from .config import SweepConfig
from .montecarlo import McConfig, ecdf, sample_theta_model

CDF_TOL_MODEL = 0.01
CDF_TOL_EXACT = 0.005
CF_TOL = 1e-12


@dataclass
class LinkCheck:
    link: str
    G: int
    sup_norm_model: float
    sup_norm_exact: float | None
    cf_ok: bool

    @property
    def passed(self) -> bool:
        ok = self.cf_ok and self.sup_norm_model <= CDF_TOL_MODEL
        if self.sup_norm_exact is not None:
            ok = ok and self.sup_norm_exact <= CDF_TOL_EXACT
        return ok


@dataclass
class CfReport:
    checks: list[LinkCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def cf_axioms_hold(cf: CfSpec, t_max: float) -> bool:
    t = np.linspace(-t_max, t_max, 201)
    v = cf_theta(t, cf)
    return bool(
        abs(cf_theta(0.0, cf) - 1.0) < CF_TOL
        and np.all(np.abs(v) <= 1.0 + CF_TOL)
        and np.allclose(cf_theta(-t, cf), np.conj(v), atol=CF_TOL)
    )


def check_cf(cf: CfSpec, samples: int = 200_000, seed: int = 11, mu_scale: float = 1.0,
             grid_points: int = 25, link: str = "") -> LinkCheck:
    """Compare the inverted CDF with independent-group samples of theta.

    ``mu_scale`` multiplies the tuned step (keeping ``I``); values well
    above one make the check fail, which is used as a negative control.
    """
    draws = sample_theta_model(cf.multiplicities, cf.omega, McConfig(samples, seed))
    zs = np.quantile(draws, np.linspace(0.02, 0.98, grid_points))
    model_err = 0.0
    exact_err = 0.0 if cf.G == 1 else None
    for z in zs:
        p = auto_tune_inversion(cf, z)
        p = InversionParams(p.mu * mu_scale, p.I)
        v = gil_pelaez_cdf(z, p, cf)
        model_err = max(model_err, abs(v - ecdf(draws, z)))
        if exact_err is not None:
            exact_err = max(exact_err, abs(v - np.exp(-cf.NM / (cf.omega * z))))
    t_max = 4.0 / max(zs[0], 1e-12)
    return LinkCheck(link, cf.G, model_err, exact_err, cf_axioms_hold(cf, t_max))


def validate_cf(cfg: SweepConfig, samples: int = 200_000, mu_scale: float = 1.0) -> CfReport:
    report = CfReport()
    seen = {}
    for link in LINKS:
        if link == "rc_t2":
            continue
        cf = CfSpec.from_profile(cfg.scenario.profiles[link], cfg.scenario.frame)
        if cf not in seen:
            seen[cf] = check_cf(cf, samples, cfg.mc.master_seed, mu_scale, link=link)
        c = seen[cf]
        report.checks.append(LinkCheck(link, c.G, c.sup_norm_model, c.sup_norm_exact, c.cf_ok))
    return report
