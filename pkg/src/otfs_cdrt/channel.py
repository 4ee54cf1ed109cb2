"""Delay-Doppler channel realizations and the spectrum of the effective channel.

A link with integer taps ``(k_w, l_w)`` and gains ``h_w`` acts on a DD grid as
a twisted 2-D circular convolution::

    y[k, l] = sum_w h_w * x[(k - k_w) mod N, (l - l_w) mod M]

The effective ``NM x NM`` matrix is doubly-block circulant, so it is
diagonalised by the symplectic Fourier basis and its eigenvalues are::

    lambda(n, m) = sum_w h_w * exp(j 2 pi (n k_w / N - m l_w / M))

stored at position ``m * N + n`` (the same ``l * N + k`` convention as the
signal vectors).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frame import FrameParams

LINKS = ("sc_t1", "sr_t1", "sc_t2", "rc_t2", "re_t2")

SINGULAR_RTOL = 1e-12
DENSE_MAX = 4096


@dataclass(frozen=True)
class ChannelProfile:
    """Tap layout and total average power of one link in one phase."""

    paths: tuple[tuple[int, int], ...]
    omega_total: float = 1.0
    link_id: str = ""

    def __post_init__(self):
        paths = tuple((int(k), int(l)) for k, l in self.paths)
        object.__setattr__(self, "paths", paths)
        if not paths:
            raise ValueError("a channel profile needs at least one path")
        if len(set(paths)) != len(paths):
            raise ValueError(f"duplicate tap pairs in {paths}")
        if any(k < 0 or l < 0 for k, l in paths):
            raise ValueError("tap indices must be nonnegative")
        if not self.omega_total > 0:
            raise ValueError(f"omega_total must be positive, got {self.omega_total}")

    @classmethod
    def from_taps(cls, k_taps, l_taps, omega_total=1.0, link_id=""):
        if len(k_taps) != len(l_taps):
            raise ValueError("k_taps and l_taps must have equal length")
        return cls(tuple(zip(k_taps, l_taps)), float(omega_total), link_id)

    @property
    def num_paths(self) -> int:
        return len(self.paths)

    @property
    def k_taps(self) -> np.ndarray:
        return np.array([p[0] for p in self.paths], dtype=np.int64)

    @property
    def l_taps(self) -> np.ndarray:
        return np.array([p[1] for p in self.paths], dtype=np.int64)

    def check_fits(self, frame: FrameParams) -> None:
        for k, l in self.paths:
            if k >= frame.N or l >= frame.M:
                raise ValueError(
                    f"tap (k={k}, l={l}) does not fit a {frame.N}x{frame.M} grid"
                )


@dataclass(frozen=True)
class ChannelRealization:
    profile: ChannelProfile
    gains: np.ndarray

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex).reshape(-1)
        if gains.size != self.profile.num_paths:
            raise ValueError(
                f"{gains.size} gains for a {self.profile.num_paths}-path profile"
            )
        object.__setattr__(self, "gains", gains)


@dataclass(frozen=True)
class EigenSpectrum:
    lambdas: np.ndarray


@dataclass(frozen=True)
class GroupStructure:
    """Partition of the DD grid into classes of equal-modulus eigenvalues.

    ``labels[i]`` is the group of the eigenvalue at linear position ``i``.
    """

    G: int
    multiplicities: tuple[int, ...]
    labels: np.ndarray = field(repr=False, compare=False)


def draw_gains(profile: ChannelProfile, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw CN(0, omega/P) gains, shape ``size + (P,)``."""
    shape = (profile.num_paths,) if size is None else tuple(np.atleast_1d(size)) + (profile.num_paths,)
    scale = np.sqrt(profile.omega_total / profile.num_paths / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_realization(profile: ChannelProfile, rng: np.random.Generator) -> ChannelRealization:
    return ChannelRealization(profile, draw_gains(profile, rng))


def phase_indices(profile: ChannelProfile, frame: FrameParams) -> np.ndarray:
    """Integer phases ``(n k_w M - m l_w N) mod NM``, shape ``(P, NM)``.

    Column ``m * N + n`` holds grid point ``(n, m)``; the phase of path ``w``
    there is ``2 pi r / NM``.
    """
    profile.check_fits(frame)
    N, M = frame.N, frame.M
    n = np.tile(np.arange(N, dtype=np.int64), M)
    m = np.repeat(np.arange(M, dtype=np.int64), N)
    k = profile.k_taps[:, None]
    l = profile.l_taps[:, None]
    return (n * k * M - m * l * N) % (N * M)


def phase_matrix(profile: ChannelProfile, frame: FrameParams) -> np.ndarray:
    r = phase_indices(profile, frame)
    return np.exp(2j * np.pi * r / frame.size)


def eigen_spectrum(real: ChannelRealization, frame: FrameParams) -> EigenSpectrum:
    return EigenSpectrum(real.gains @ phase_matrix(real.profile, frame))


def build_effective_matrix(real: ChannelRealization, frame: FrameParams) -> np.ndarray:
    """Dense effective DD channel matrix (testing and small grids only)."""
    NM = frame.size
    if NM > DENSE_MAX:
        raise ValueError(f"dense matrix limited to NM <= {DENSE_MAX}, got {NM}")
    real.profile.check_fits(frame)
    N, M = frame.N, frame.M
    rows = np.arange(NM)
    k = rows % N
    l = rows // N
    H = np.zeros((NM, NM), dtype=complex)
    for (kw, lw), h in zip(real.profile.paths, real.gains):
        cols = ((l - lw) % M) * N + (k - kw) % N
        H[rows, cols] += h
    return H


def group_structure(profile: ChannelProfile, frame: FrameParams) -> GroupStructure:
    """Group grid points whose eigenvalues have identical modulus for every draw.

    Two points belong together when their per-path phase vectors differ only
    by a common rotation. The comparison uses the integer phases relative to
    the first path, so it is exact and independent of any realization.
    """
    r = phase_indices(profile, frame)
    rel = (r - r[0]) % frame.size
    _, labels, counts = np.unique(rel.T, axis=0, return_inverse=True, return_counts=True)
    return GroupStructure(
        G=int(counts.size),
        multiplicities=tuple(int(c) for c in counts),
        labels=labels.reshape(-1),
    )


def theta_values(lambdas: np.ndarray) -> np.ndarray:
    """Sum of ``|lambda|^-2`` along the last axis; ``inf`` for near-singular spectra."""
    power = np.abs(np.asarray(lambdas)) ** 2
    mean = power.mean(axis=-1, keepdims=True)
    singular = np.any(power < SINGULAR_RTOL * mean, axis=-1) | (mean[..., 0] == 0)
    with np.errstate(divide="ignore"):
        out = np.sum(1.0 / power, axis=-1)
    return np.where(singular, np.inf, out)


def theta(spec: EigenSpectrum) -> float:
    return float(theta_values(spec.lambdas))
