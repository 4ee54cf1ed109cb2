"""Deterministic, parallel Monte Carlo outage estimation.

Trials are grouped into fixed blocks of ``BLOCK`` consecutive indices. Block
``b`` draws from ``SeedSequence(master_seed, spawn_key=(b,))`` and always
draws a full block, so the randomness behind trial ``i`` depends only on
``(master_seed, i)``. Workers return integer counts per block, which are
summed; results are therefore bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.stats import ks_2samp

from .channel import ChannelProfile, draw_gains, group_structure, phase_matrix, theta_values
from .frame import FrameParams
from .protocol import SIGNALS, Scenario, draw_thetas, outcome_from_thetas

BLOCK = 1024
WORKERS_ENV = "OTFS_CDRT_WORKERS"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


@dataclass(frozen=True)
class McConfig:
    trials: int = 100_000
    master_seed: int = 2024
    parallelism: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")

    @property
    def blocks(self) -> int:
        return math.ceil(self.trials / BLOCK)

    def block_size(self, b: int) -> int:
        return min(BLOCK, self.trials - b * BLOCK)


@dataclass(frozen=True)
class OutageEstimate:
    count: int
    trials: int

    @property
    def p_hat(self) -> float:
        return self.count / self.trials

    @property
    def ci95_halfwidth(self) -> float:
        p = self.p_hat
        return 1.96 * math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def low_confidence(self) -> bool:
        """Too few outage events for the normal-approximation interval."""
        return self.count < 10


@dataclass(frozen=True)
class OutageReport:
    xc: OutageEstimate
    xe: OutageEstimate
    xbarc: OutageEstimate

    def __getitem__(self, signal: str) -> OutageEstimate:
        if signal not in SIGNALS:
            raise KeyError(signal)
        return getattr(self, signal)

    @property
    def p_hat(self) -> tuple[float, float, float]:
        return (self.xc.p_hat, self.xe.p_hat, self.xbarc.p_hat)


def block_rng(master_seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(block,)))


def _map_blocks(fn: Callable[[int], np.ndarray], mc: McConfig) -> list:
    if mc.parallelism == 1 or mc.blocks == 1:
        return [fn(b) for b in range(mc.blocks)]
    with ThreadPoolExecutor(max_workers=mc.parallelism) as pool:
        return list(pool.map(fn, range(mc.blocks)))


def count_outages(s: Scenario, mc: McConfig, schemes: Sequence[str]) -> np.ndarray:
    """Outage counts, shape ``(len(schemes), 3)``, from common channel draws."""

    def run_block(b: int) -> np.ndarray:
        thetas = draw_thetas(s, block_rng(mc.master_seed, b), BLOCK)
        n = mc.block_size(b)
        thetas = {link: v[:n] for link, v in thetas.items()}
        return np.stack([outcome_from_thetas(s, thetas, scheme).counts() for scheme in schemes])

    return np.sum(_map_blocks(run_block, mc), axis=0)


def _report(counts: np.ndarray, trials: int) -> OutageReport:
    return OutageReport(*(OutageEstimate(int(c), trials) for c in counts))


def estimate_outage(s: Scenario, mc: McConfig) -> OutageReport:
    return _report(count_outages(s, mc, [s.scheme])[0], mc.trials)


def estimate_outage_schemes(s: Scenario, mc: McConfig, schemes: Sequence[str]) -> dict[str, OutageReport]:
    counts = count_outages(s, mc, schemes)
    return {scheme: _report(c, mc.trials) for scheme, c in zip(schemes, counts)}


def sample_theta(profile: ChannelProfile, frame: FrameParams, mc: McConfig,
                 mode: str = "exact") -> np.ndarray:
    """Sorted samples of theta for one link.

    ``exact`` computes theta from the eigenvalues of drawn realizations;
    ``model`` draws independent groups, ``theta = sum_g C_g / E_g`` with
    ``E_g`` exponential of mean ``omega``.
    """
    if mode == "model":
        return sample_theta_model(group_structure(profile, frame).multiplicities,
                                  profile.omega_total, mc)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    phases = phase_matrix(profile, frame)

    def run_block(b: int) -> np.ndarray:
        gains = draw_gains(profile, block_rng(mc.master_seed, b), BLOCK)
        return theta_values(gains @ phases)[: mc.block_size(b)]

    return np.sort(np.concatenate(_map_blocks(run_block, mc)))


def sample_theta_model(multiplicities: Sequence[int], omega: float, mc: McConfig) -> np.ndarray:
    """Sorted independent-group samples for an arbitrary multiplicity list."""
    mult = np.asarray(multiplicities, dtype=float)

    def run_block(b: int) -> np.ndarray:
        e = block_rng(mc.master_seed, b).exponential(omega, (BLOCK, mult.size))
        return (mult / e).sum(axis=1)[: mc.block_size(b)]

    return np.sort(np.concatenate(_map_blocks(run_block, mc)))


def ecdf(sorted_samples: np.ndarray, z) -> np.ndarray:
    """Empirical ``Pr(X < z)`` from sorted samples."""
    return np.searchsorted(sorted_samples, z, side="left") / sorted_samples.size


def ks_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    return float(ks_2samp(a, b).statistic)
