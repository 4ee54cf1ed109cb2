"""Two-phase OTFS-NOMA coordinated direct and relay transmission.

Phase t1: the source superposes ``x_c`` (near user) and ``x_e`` (far user).
The near user decodes ``x_e`` then ``x_c`` by SIC; the relay decodes ``x_e``
treating ``x_c`` as noise. Phase t2: the relay forwards ``x_e`` to the far
user while the source sends fresh symbols ``xbar_c`` to the near user, who
cancels the relay's signal using the ``x_e`` it already decoded.

Every SINR depends on its link only through ``theta = sum_w |lambda_w|^-2``.
All functions accept scalars or NumPy arrays (one entry per trial).

Baselines:

* ``oma``: four orthogonal phases at full power, thresholds ``2^(4R) - 1``.
* ``ncdrt``: two phases, the source stays silent in t2, so ``xbar_c`` is never
  delivered.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

import numpy as np

from . import channel as ch
from .channel import LINKS, ChannelProfile, ChannelRealization
from .frame import FrameParams, to_vector
from .modem import PAYLOADS, PowerAllocation, apply_dd_channel, superpose, zf_equalize

SCHEMES = ("proposed", "oma", "ncdrt")
SIGNALS = ("xc", "xe", "xbarc")


@dataclass(frozen=True)
class RateTargets:
    """Target rates in bits per channel use, shared by all NM symbols."""

    R_xc: float = 1.8
    R_xe: float = 1.0
    R_xbarc: float = 1.0

    def __post_init__(self):
        for name in ("R_xc", "R_xe", "R_xbarc"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def thresholds(self, phases: int = 2) -> tuple[float, float, float]:
        """SINR thresholds ``2^(phases R) - 1`` for ``(xc, xe, xbarc)``."""
        return tuple(2.0 ** (phases * r) - 1.0 for r in (self.R_xc, self.R_xe, self.R_xbarc))

    @property
    def total(self) -> float:
        return self.R_xc + self.R_xe + self.R_xbarc


@dataclass(frozen=True)
class Scenario:
    frame: FrameParams
    profiles: Mapping[str, ChannelProfile]
    alloc: PowerAllocation
    rho_s: float
    rho_r: float
    rates: RateTargets
    scheme: str = "proposed"
    strict_eq19: bool = False
    payload: str = "qpsk"

    def __post_init__(self):
        missing = set(LINKS) - set(self.profiles)
        if missing:
            raise ValueError(f"scenario lacks profiles for {sorted(missing)}")
        object.__setattr__(self, "profiles", MappingProxyType(dict(self.profiles)))
        for p in self.profiles.values():
            p.check_fits(self.frame)
        if not (self.rho_s > 0 and self.rho_r > 0):
            raise ValueError("rho_s and rho_r must be positive")
        if not self.profiles["sr_t1"].omega_total < self.profiles["sc_t1"].omega_total:
            raise ValueError("the relay link must be weaker than the direct link in t1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.payload not in PAYLOADS:
            raise ValueError(f"unknown payload {self.payload!r}")

    @property
    def NM(self) -> int:
        return self.frame.size

    def omega(self, link: str) -> float:
        return self.profiles[link].omega_total

    def with_snr(self, rho_s: float, rho_r: float | None = None, **changes) -> "Scenario":
        ratio = self.rho_r / self.rho_s
        changes.setdefault("rho_s", rho_s)
        changes.setdefault("rho_r", rho_s * ratio if rho_r is None else rho_r)
        return replace(self, **changes)


@dataclass
class SinrSet:
    g_c_xe_t1: np.ndarray
    g_c_xc_t1: np.ndarray
    g_r_xe_t1: np.ndarray
    g_c_xbarc_t2: np.ndarray
    g_e_xe_t2: np.ndarray


@dataclass
class TrialOutcome:
    outage_xc: np.ndarray
    outage_xe: np.ndarray
    outage_xbarc: np.ndarray
    sinrs: SinrSet | None = None
    measured: dict | None = field(default=None, repr=False)

    def counts(self) -> np.ndarray:
        return np.array(
            [np.count_nonzero(self.outage_xc), np.count_nonzero(self.outage_xe),
             np.count_nonzero(self.outage_xbarc)],
            dtype=np.int64,
        )


def _noise_term(theta, NM):
    theta = np.asarray(theta, dtype=float)
    return theta / NM


def sinr_phase1(theta_sc, theta_sr, alloc: PowerAllocation, rho_s: float, NM: int):
    """SINRs ``(g_c_xe, g_c_xc, g_r_xe)`` in t1 after ZF.

    An infinite theta (singular channel) yields zero SINR.
    """
    ac, ae = alloc.alpha_c, alloc.alpha_e
    with np.errstate(divide="ignore"):
        g_c_xe = ae * rho_s / (ac * rho_s + _noise_term(theta_sc, NM))
        g_r_xe = ae * rho_s / (ac * rho_s + _noise_term(theta_sr, NM))
        g_c_xc = ac * rho_s / _noise_term(theta_sc, NM)
    return g_c_xe, g_c_xc, g_r_xe


def sinr_phase2(theta_sc2, theta_re2, rho_s: float, rho_r: float, NM: int):
    """SINRs ``(g_c_xbarc, g_e_xe)`` in t2, relay interference removed at U_c."""
    with np.errstate(divide="ignore"):
        g_c_xbarc = rho_s / _noise_term(theta_sc2, NM)
        g_e_xe = rho_r / _noise_term(theta_re2, NM)
    return g_c_xbarc, g_e_xe


def decide_outages(s: SinrSet, rates: RateTargets, strict_eq19: bool = False) -> TrialOutcome:
    phi_xc, phi_xe, phi_xbarc = rates.thresholds()
    sic_ok = np.asarray(s.g_c_xe_t1) > phi_xe
    outage_xc = ~(sic_ok & (np.asarray(s.g_c_xc_t1) > phi_xc))
    outage_xe = ~((np.asarray(s.g_r_xe_t1) > phi_xe) & (np.asarray(s.g_e_xe_t2) > phi_xe))
    outage_xbarc = ~(np.asarray(s.g_c_xbarc_t2) > phi_xbarc)
    if strict_eq19:
        # relay interference can only be cancelled with a correctly decoded x_e
        outage_xbarc = outage_xbarc | ~sic_ok
    return TrialOutcome(outage_xc, outage_xe, outage_xbarc, sinrs=s)


@lru_cache(maxsize=64)
def _phases(profile: ChannelProfile, frame: FrameParams) -> np.ndarray:
    return ch.phase_matrix(profile, frame)


def draw_link_gains(scenario: Scenario, rng: np.random.Generator, n: int) -> dict[str, np.ndarray]:
    """Independent gains for all five links, each of shape ``(n, P)``.

    Links are drawn in the fixed order of ``LINKS`` so a stream always maps
    to the same realizations.
    """
    return {link: ch.draw_gains(scenario.profiles[link], rng, n) for link in LINKS}


def thetas_from_gains(scenario: Scenario, gains: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    out = {}
    for link in ("sc_t1", "sr_t1", "sc_t2", "re_t2"):
        lam = gains[link] @ _phases(scenario.profiles[link], scenario.frame)
        out[link] = ch.theta_values(lam)
    return out


def draw_thetas(scenario: Scenario, rng: np.random.Generator, n: int) -> dict[str, np.ndarray]:
    return thetas_from_gains(scenario, draw_link_gains(scenario, rng, n))


def outcome_from_thetas(scenario: Scenario, thetas: Mapping[str, np.ndarray], scheme: str | None = None) -> TrialOutcome:
    scheme = scenario.scheme if scheme is None else scheme
    NM = scenario.NM
    if scheme in ("proposed", "ncdrt"):
        g_c_xe, g_c_xc, g_r_xe = sinr_phase1(
            thetas["sc_t1"], thetas["sr_t1"], scenario.alloc, scenario.rho_s, NM
        )
        g_c_xbarc, g_e_xe = sinr_phase2(
            thetas["sc_t2"], thetas["re_t2"], scenario.rho_s, scenario.rho_r, NM
        )
        sinrs = SinrSet(g_c_xe, g_c_xc, g_r_xe, g_c_xbarc, g_e_xe)
        out = decide_outages(sinrs, scenario.rates, scenario.strict_eq19)
        if scheme == "ncdrt":
            # the source is silent in t2: xbar_c is never delivered
            out.outage_xbarc = np.ones_like(out.outage_xbarc, dtype=bool)
        return out
    if scheme == "oma":
        phi_xc, phi_xe, phi_xbarc = scenario.rates.thresholds(phases=4)
        with np.errstate(divide="ignore"):
            g_xc = scenario.rho_s * NM / thetas["sc_t1"]
            g_sr = scenario.rho_s * NM / thetas["sr_t1"]
            g_re = scenario.rho_r * NM / thetas["re_t2"]
            g_xbarc = scenario.rho_s * NM / thetas["sc_t2"]
        return TrialOutcome(
            outage_xc=~(g_xc > phi_xc),
            outage_xe=~((g_sr > phi_xe) & (g_re > phi_xe)),
            outage_xbarc=~(g_xbarc > phi_xbarc),
        )
    raise ValueError(f"unknown scheme {scheme!r}")


def run_trials(scenario: Scenario, rng: np.random.Generator, n: int, scheme: str | None = None) -> TrialOutcome:
    """Vectorised batch of ``n`` independent trials."""
    return outcome_from_thetas(scenario, draw_thetas(scenario, rng, n), scheme)


def _scalar(outcome: TrialOutcome) -> TrialOutcome:
    outcome.outage_xc = bool(np.asarray(outcome.outage_xc).reshape(-1)[0])
    outcome.outage_xe = bool(np.asarray(outcome.outage_xe).reshape(-1)[0])
    outcome.outage_xbarc = bool(np.asarray(outcome.outage_xbarc).reshape(-1)[0])
    if outcome.sinrs is not None:
        for name, value in vars(outcome.sinrs).items():
            setattr(outcome.sinrs, name, float(np.asarray(value).reshape(-1)[0]))
    return outcome


def run_trial(scenario: Scenario, rng: np.random.Generator, debug: bool = False,
              noise_draws: int = 1000, scheme: str | None = None) -> TrialOutcome:
    """One channel realization per link and the resulting outage events.

    With ``debug=True`` the full symbol chain is also simulated over
    ``noise_draws`` payload/noise draws; the empirical per-symbol SINRs land in
    ``outcome.measured`` next to the analytic ones in ``outcome.sinrs``.
    """
    gains = draw_link_gains(scenario, rng, 1)
    outcome = _scalar(outcome_from_thetas(scenario, thetas_from_gains(scenario, gains), scheme))
    if debug:
        real = {
            link: ChannelRealization(scenario.profiles[link], g[0]) for link, g in gains.items()
        }
        outcome.measured = measure_sinrs(scenario, real, rng, noise_draws)
    return outcome


def run_trial_oma(scenario: Scenario, rng: np.random.Generator) -> TrialOutcome:
    return run_trial(scenario, rng, scheme="oma")


def run_trial_ncdrt(scenario: Scenario, rng: np.random.Generator) -> TrialOutcome:
    return run_trial(scenario, rng, scheme="ncdrt")


def _noise(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def measure_sinrs(scenario: Scenario, real: Mapping[str, ChannelRealization],
                  rng: np.random.Generator, noise_draws: int) -> dict[str, np.ndarray]:
    """Empirical per-symbol SINRs from the full DD symbol chain (sigma^2 = 1).

    Each entry has shape ``(NM,)`` in ``l * N + k`` order. Also returns the
    equalised noise samples of the near user after SIC in t1 under
    ``"noise_c_t1"`` for statistical checks.
    """
    frame = scenario.frame
    shape = (noise_draws,) + frame.shape
    make = PAYLOADS[scenario.payload]
    ac, ae = scenario.alloc.alpha_c, scenario.alloc.alpha_e
    rho_s, rho_r = scenario.rho_s, scenario.rho_r
    spectra = {link: ch.eigen_spectrum(r, frame) for link, r in real.items()}

    x_c = make(rng, shape)
    x_e = make(rng, shape)
    x_s = superpose(x_c, x_e, scenario.alloc)
    out = {}
    for rx, link in (("c", "sc_t1"), ("r", "sr_t1")):
        y = np.sqrt(rho_s) * apply_dd_channel(real[link], x_s, frame) + _noise(rng, shape)
        y_eq = zf_equalize(to_vector(y), spectra[link], frame)
        # x_e decoded first with x_c as interference
        err_xe = y_eq - np.sqrt(ae * rho_s) * to_vector(x_e)
        out[f"g_{rx}_xe_t1"] = ae * rho_s / np.mean(np.abs(err_xe) ** 2, axis=0)
        if rx == "c":
            residual = y_eq - np.sqrt(rho_s) * to_vector(x_s)
            out["g_c_xc_t1"] = ac * rho_s / np.mean(np.abs(residual) ** 2, axis=0)
            out["noise_c_t1"] = residual

    xbar_c = make(rng, shape)
    y_c2 = (
        np.sqrt(rho_s) * apply_dd_channel(real["sc_t2"], xbar_c, frame)
        + np.sqrt(rho_r) * apply_dd_channel(real["rc_t2"], x_e, frame)
        + _noise(rng, shape)
    )
    # cancel the relay's x_e using the copy decoded in t1
    y_c2 = y_c2 - np.sqrt(rho_r) * apply_dd_channel(real["rc_t2"], x_e, frame)
    res_c2 = zf_equalize(to_vector(y_c2), spectra["sc_t2"], frame) - np.sqrt(rho_s) * to_vector(xbar_c)
    out["g_c_xbarc_t2"] = rho_s / np.mean(np.abs(res_c2) ** 2, axis=0)

    y_e2 = np.sqrt(rho_r) * apply_dd_channel(real["re_t2"], x_e, frame) + _noise(rng, shape)
    res_e2 = zf_equalize(to_vector(y_e2), spectra["re_t2"], frame) - np.sqrt(rho_r) * to_vector(x_e)
    out["g_e_xe_t2"] = rho_r / np.mean(np.abs(res_e2) ** 2, axis=0)
    return out
