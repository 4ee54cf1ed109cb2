"""Closed-form outage analysis built on the characteristic function of theta.

Each distinct-modulus eigenvalue group contributes ``C / E`` to ``theta``
with ``E`` exponential of mean ``omega``. The characteristic function of
``1/E`` is ``psi(t) = z K1(z)`` with ``z = 2 sqrt(-j t omega) / omega``, and
the CDF is recovered by a midpoint-rule Gil-Pelaez sum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .bessel import bessel_k1
from .channel import ChannelProfile, GroupStructure, group_structure
from .frame import FrameParams
from .modem import PowerAllocation
from .protocol import RateTargets, Scenario

log = logging.getLogger(__name__)

CF_FLOOR = 1e-8
ALIAS_TOL = 2e-4
MIN_TERMS = 2000
MAX_TERMS = 1 << 22
_CHUNK = 1 << 17


class NonDecayingCf(ValueError):
    """The characteristic function does not fall below the floor for any usable t."""


@dataclass(frozen=True)
class CfSpec:
    """Characteristic function of ``theta = sum_g C_g / E_g`` with ``E_g ~ Exp(omega)``."""

    multiplicities: tuple[int, ...]
    omega: float

    def __post_init__(self):
        mult = tuple(int(c) for c in self.multiplicities)
        if not mult or min(mult) < 1:
            raise ValueError("multiplicities must be positive integers")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        object.__setattr__(self, "multiplicities", mult)

    @classmethod
    def from_groups(cls, groups: GroupStructure, omega: float) -> "CfSpec":
        return cls(groups.multiplicities, omega)

    @classmethod
    def from_profile(cls, profile: ChannelProfile, frame: FrameParams) -> "CfSpec":
        return cls(group_structure(profile, frame).multiplicities, profile.omega_total)

    @property
    def NM(self) -> int:
        return sum(self.multiplicities)

    @property
    def G(self) -> int:
        return len(self.multiplicities)

    @property
    def tail_constant(self) -> float:
        """``A`` in ``Pr(theta > y) ~ A / y`` for large ``y``."""
        return self.NM / self.omega


@dataclass(frozen=True)
class InversionParams:
    mu: float
    I: int

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if int(self.I) != self.I or self.I < 1:
            raise ValueError("I must be a positive integer")


def psi(t, omega: float):
    """Characteristic function of ``1/E``, ``E`` exponential with mean ``omega``."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    t = np.asarray(t, dtype=float)
    out = np.ones(t.shape, dtype=complex)
    nz = t != 0
    if np.any(nz):
        a = np.abs(t[nz])
        z = 2.0 * np.sqrt(a / omega) * np.exp(-0.25j * np.pi)
        val = z * bessel_k1(z)
        out[nz] = np.where(t[nz] > 0, val, np.conj(val))
    return out[()] if out.ndim == 0 else out


def cf_theta(t, spec: CfSpec):
    """``prod_g psi(C_g t, omega)``; equal multiplicities are evaluated once."""
    t = np.asarray(t, dtype=float)
    sizes, counts = np.unique(np.array(spec.multiplicities), return_counts=True)
    out = np.ones(t.shape, dtype=complex)
    with np.errstate(under="ignore"):
        for c, n in zip(sizes, counts):
            out = out * psi(c * t, spec.omega) ** int(n)
    return out[()] if out.ndim == 0 else out


def auto_tune_inversion(cf: CfSpec, z: float, tol: float = ALIAS_TOL) -> InversionParams:
    """Pick ``(mu, I)`` for :func:`gil_pelaez_cdf` at threshold ``z``.

    ``T*`` is the smallest power of two where ``|cf| < 1e-8``. The sum
    reconstructs the CDF of ``theta`` folded with period ``L = 2 pi / mu``;
    ``theta`` has a ``A / y`` tail, so the folding error is about
    ``A ln 2 / L``. ``L`` is set to ``A / tol``; larger ``z`` doubles it until it
    exceeds ``1.25 z``.
    """
    if not z > 0:
        raise ValueError("z must be positive")
    t_star = None
    for j in range(-40, 41):
        t = 2.0 ** j
        if abs(cf_theta(t, cf)) < CF_FLOOR:
            t_star = t
            break
    if t_star is None:
        raise NonDecayingCf(f"|cf| stays above {CF_FLOOR} up to t = 2^40")
    period = cf.tail_constant / tol
    if 1.25 * z > period:
        # round up to a power-of-two multiple so nearby z share cached samples
        period *= 2.0 ** math.ceil(math.log2(1.25 * z / period))
    mu = 2.0 * math.pi / period
    terms = max(MIN_TERMS, math.ceil(t_star / mu))
    if terms > MAX_TERMS:
        log.debug("inversion at z=%g capped at %d terms (wanted %d)", z, MAX_TERMS, terms)
        terms = MAX_TERMS
    return InversionParams(mu=float(mu), I=int(terms))


@lru_cache(maxsize=16)
def _weighted_cf(cf: CfSpec, mu: float, I: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample times ``t_i`` and ``cf(t_i) / (i + 0.5)`` for ``i = 0..I``."""
    i = np.arange(I + 1, dtype=float) + 0.5
    t = i * mu
    values = np.empty(t.shape, dtype=complex)
    for start in range(0, t.size, _CHUNK):
        values[start:start + _CHUNK] = cf_theta(t[start:start + _CHUNK], cf)
    return t, values / i


def gil_pelaez_cdf(z: float, p: InversionParams, cf: CfSpec) -> float:
    """``Pr(theta < z)`` from the truncated half-offset inversion sum.

    ``0.5 - (1/pi) sum_{i=0}^{I} Im(exp(-j t_i z) cf(t_i)) / (i + 0.5)``
    with ``t_i = (i + 0.5) mu``, clamped to ``[0, 1]``.
    """
    if not z > 0:
        raise ValueError("z must be positive")
    t, weighted = _weighted_cf(cf, float(p.mu), int(p.I))
    total = 0.0
    for start in range(0, t.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        total += float(np.sum((np.exp(-1j * t[sl] * z) * weighted[sl]).imag))
    raw = 0.5 - total / math.pi
    if raw < -1e-3 or raw > 1 + 1e-3:
        log.warning("inversion result %.4g outside [0, 1] at z=%g; clamping", raw, z)
    return min(1.0, max(0.0, raw))


def theta_cdf(z: float, cf: CfSpec, params: InversionParams | None = None) -> float:
    """``Pr(theta < z)``.

    Without explicit ``params``, thresholds beyond ``A / ALIAS_TOL`` use the
    single-big-jump bound ``Pr(theta >= z) >= Pr(max_g C_g / E_g >= z)
    = 1 - exp(-A / z)``, exact for one group. Its error is of relative order
    ``A ln(G) / z``, far below the inversion's folding error there, and it
    avoids sums with millions of terms.
    """
    if params is None:
        if z >= cf.tail_constant / ALIAS_TOL:
            return math.exp(-cf.tail_constant / z)
        params = auto_tune_inversion(cf, z)
    return gil_pelaez_cdf(z, params, cf)


@dataclass(frozen=True)
class OutageInputs:
    alloc: PowerAllocation
    rho_s: float
    rho_r: float
    NM: int
    rates: RateTargets

    @classmethod
    def from_scenario(cls, s: Scenario) -> "OutageInputs":
        return cls(s.alloc, s.rho_s, s.rho_r, s.NM, s.rates)

    @property
    def phi_xc(self) -> float:
        return self.rates.thresholds()[0]

    @property
    def phi_xe(self) -> float:
        return self.rates.thresholds()[1]

    @property
    def phi_xbarc(self) -> float:
        return self.rates.thresholds()[2]

    @property
    def feasible(self) -> bool:
        """NOMA works only when ``alpha_e / alpha_c`` exceeds ``phi_xe``."""
        return self.alloc.ratio > self.phi_xe

    @property
    def _margin(self) -> float:
        return self.alloc.alpha_e - self.phi_xe * self.alloc.alpha_c

    @property
    def xi1(self) -> float:
        return min(self.NM * self._margin * self.rho_s / self.phi_xe,
                   self.NM * self.alloc.alpha_c * self.rho_s / self.phi_xc)

    @property
    def xi2(self) -> float:
        return self.NM * self._margin * self.rho_s / self.phi_xe

    @property
    def xi3(self) -> float:
        return self.NM * self.rho_r / self.phi_xe

    @property
    def xi4(self) -> float:
        return self.NM * self.rho_s / self.phi_xbarc

    @property
    def xi5(self) -> float:
        return max(self.phi_xe / (self._margin * self.rho_s),
                   self.phi_xc / (self.alloc.alpha_c * self.rho_s))


def outage_xc_general(inp: OutageInputs, cf_sc1: CfSpec) -> float:
    if not inp.feasible:
        return 1.0
    return 1.0 - theta_cdf(inp.xi1, cf_sc1)


def outage_xe_general(inp: OutageInputs, cf_sr1: CfSpec, cf_re2: CfSpec) -> float:
    if not inp.feasible:
        return 1.0
    return 1.0 - theta_cdf(inp.xi2, cf_sr1) * theta_cdf(inp.xi3, cf_re2)


def outage_xbarc_general(inp: OutageInputs, cf_sc2: CfSpec) -> float:
    return 1.0 - theta_cdf(inp.xi4, cf_sc2)


def special_exponents(inp: OutageInputs, omegas: Mapping[str, float],
                      scheme: str = "proposed") -> tuple[float, float, float]:
    """Exponents ``e`` of the single-group closed forms, ``p = 1 - exp(-e)``.

    Two outages compare exactly through their exponents even where both
    round to 1.0 in floating point. Infeasible branches give ``inf``.
    """
    if scheme == "oma":
        phi_xc, phi_xe, phi_xbarc = inp.rates.thresholds(phases=4)
        return (phi_xc / (inp.rho_s * omegas["sc_t1"]),
                phi_xe / (inp.rho_s * omegas["sr_t1"]) + phi_xe / (inp.rho_r * omegas["re_t2"]),
                phi_xbarc / (inp.rho_s * omegas["sc_t2"]))
    e_xbarc = inp.phi_xbarc / (inp.rho_s * omegas["sc_t2"])
    if scheme == "ncdrt":
        e_xbarc = math.inf
    if not inp.feasible:
        return math.inf, math.inf, e_xbarc
    e_xc = inp.xi5 / omegas["sc_t1"]
    e_xe = (inp.phi_xe / (inp.rho_r * omegas["re_t2"])
            + inp.phi_xe / (inp._margin * inp.rho_s * omegas["sr_t1"]))
    return e_xc, e_xe, e_xbarc


def _from_exponents(e) -> tuple[float, float, float]:
    return tuple(-math.expm1(-x) for x in e)


def outage_special(inp: OutageInputs, omegas: Mapping[str, float]) -> tuple[float, float, float]:
    """Closed forms for single-group links; ``omegas`` keyed by link name."""
    return _from_exponents(special_exponents(inp, omegas))


def outage_oma_general(inp: OutageInputs, cfs: Mapping[str, CfSpec]) -> tuple[float, float, float]:
    phi_xc, phi_xe, phi_xbarc = inp.rates.thresholds(phases=4)
    NM = inp.NM
    p_xc = 1.0 - theta_cdf(NM * inp.rho_s / phi_xc, cfs["sc_t1"])
    p_xe = 1.0 - (theta_cdf(NM * inp.rho_s / phi_xe, cfs["sr_t1"])
                  * theta_cdf(NM * inp.rho_r / phi_xe, cfs["re_t2"]))
    p_xbarc = 1.0 - theta_cdf(NM * inp.rho_s / phi_xbarc, cfs["sc_t2"])
    return p_xc, p_xe, p_xbarc


def outage_oma_special(inp: OutageInputs, omegas: Mapping[str, float]) -> tuple[float, float, float]:
    return _from_exponents(special_exponents(inp, omegas, "oma"))


def outage_sum_rate(p_xc: float, p_xe: float, p_xbarc: float, rates: RateTargets,
                    scheme: str = "proposed") -> float:
    """Normalised outage sum rate in BPCU."""
    for p in (p_xc, p_xe, p_xbarc):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"outage probability {p} outside [0, 1]")
    delivered = ((1 - p_xc) * rates.R_xc, (1 - p_xe) * rates.R_xe, (1 - p_xbarc) * rates.R_xbarc)
    if scheme == "proposed":
        return sum(delivered) / 2
    if scheme == "ncdrt":
        return (delivered[0] + delivered[1]) / 2
    if scheme == "oma":
        return sum(delivered) / 4
    raise ValueError(f"unknown scheme {scheme!r}")


ANALYTIC_LINKS = ("sc_t1", "sr_t1", "sc_t2", "re_t2")


def link_cfs(s: Scenario) -> dict[str, CfSpec]:
    return {link: CfSpec.from_profile(s.profiles[link], s.frame) for link in ANALYTIC_LINKS}


def is_special_case(s: Scenario) -> bool:
    return all(cf.G == 1 for cf in link_cfs(s).values())


def analytic_outage(s: Scenario, scheme: str | None = None,
                    method: str = "auto") -> tuple[float, float, float]:
    """Analytic ``(p_xc, p_xe, p_xbarc)`` for a scenario.

    ``method`` is ``"special"`` (closed forms), ``"general"`` (CF inversion)
    or ``"auto"`` (closed forms when every link has a single group). For
    ``ncdrt`` the ``xbar_c`` entry is 1: it is never transmitted.
    """
    scheme = s.scheme if scheme is None else scheme
    inp = OutageInputs.from_scenario(s)
    cfs = link_cfs(s)
    if method == "auto":
        method = "special" if all(cf.G == 1 for cf in cfs.values()) else "general"
    omegas = {link: cf.omega for link, cf in cfs.items()}
    if scheme == "oma":
        if method == "special":
            return outage_oma_special(inp, omegas)
        return outage_oma_general(inp, cfs)
    if method == "special":
        p = outage_special(inp, omegas)
    elif method == "general":
        p = (outage_xc_general(inp, cfs["sc_t1"]),
             outage_xe_general(inp, cfs["sr_t1"], cfs["re_t2"]),
             outage_xbarc_general(inp, cfs["sc_t2"]))
    else:
        raise ValueError(f"unknown method {method!r}")
    if scheme == "ncdrt":
        return p[0], p[1], 1.0
    return p
