"""Delay-Doppler transmit/receive chain.

Grids are ``(N, M)`` arrays indexed ``[k, l]`` in the DD domain and
``[n, m]`` in the TF domain. The ISFFT carries the ``1/NM`` factor and the
SFFT none, so ``sfft(isfft(x)) == x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import SINGULAR_RTOL, ChannelRealization, EigenSpectrum
from .frame import FrameParams, to_grid, to_vector


class SingularChannel(ArithmeticError):
    """The effective channel has a (numerically) zero eigenvalue."""


@dataclass(frozen=True)
class PowerAllocation:
    alpha_c: float = 0.1
    alpha_e: float = 0.9

    def __post_init__(self):
        if not (0 < self.alpha_c < self.alpha_e < 1):
            raise ValueError(
                f"need 0 < alpha_c < alpha_e < 1, got ({self.alpha_c}, {self.alpha_e})"
            )
        if abs(self.alpha_c + self.alpha_e - 1.0) > 1e-12:
            raise ValueError("power fractions must sum to one")

    @property
    def ratio(self) -> float:
        return self.alpha_e / self.alpha_c


def _check_grid(x: np.ndarray, frame: FrameParams) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape[-2:] != frame.shape:
        raise ValueError(f"grid shape {x.shape[-2:]} does not match frame {frame.shape}")
    return x


def isfft(dd: np.ndarray, frame: FrameParams) -> np.ndarray:
    """DD grid ``x[k, l]`` to TF grid ``X[n, m]``.

    ``X[n, m] = (1/NM) sum_{k,l} x[k, l] exp(j 2 pi (n k / N - m l / M))``
    """
    x = _check_grid(dd, frame)
    return np.fft.fft(np.fft.ifft(x, axis=-2), axis=-1) / frame.M


def sfft(tf: np.ndarray, frame: FrameParams) -> np.ndarray:
    """TF grid ``X[n, m]`` back to the DD grid; exact inverse of :func:`isfft`."""
    X = _check_grid(tf, frame)
    return np.fft.fft(np.fft.ifft(X, axis=-1), axis=-2) * frame.M


def qpsk_symbols(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-energy QPSK symbols."""
    bits = rng.integers(0, 2, size=tuple(shape) + (2,))
    return ((2 * bits[..., 0] - 1) + 1j * (2 * bits[..., 1] - 1)) / np.sqrt(2.0)


def gaussian_symbols(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-energy circularly-symmetric Gaussian codebook."""
    shape = tuple(shape)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


PAYLOADS = {"qpsk": qpsk_symbols, "gaussian": gaussian_symbols}


def superpose(x_c: np.ndarray, x_e: np.ndarray, alloc: PowerAllocation) -> np.ndarray:
    x_c = np.asarray(x_c)
    x_e = np.asarray(x_e)
    if x_c.shape != x_e.shape:
        raise ValueError(f"shape mismatch: {x_c.shape} vs {x_e.shape}")
    return np.sqrt(alloc.alpha_c) * x_c + np.sqrt(alloc.alpha_e) * x_e


def apply_dd_channel(real: ChannelRealization, x: np.ndarray, frame: FrameParams) -> np.ndarray:
    """Noise-free received DD grid, ``y[k,l] = sum_w h_w x[(k-k_w)_N, (l-l_w)_M]``."""
    x = _check_grid(x, frame)
    real.profile.check_fits(frame)
    y = np.zeros_like(x)
    for (kw, lw), h in zip(real.profile.paths, real.gains):
        y += h * np.roll(x, shift=(kw, lw), axis=(-2, -1))
    return y


def zf_equalize(y: np.ndarray, spec: EigenSpectrum, frame: FrameParams) -> np.ndarray:
    """Zero-forcing equalisation of a received DD vector (``l * N + k`` order).

    Equivalent to ``(H^H H)^{-1} H^H y`` but computed as an element-wise
    division in the TF domain, where the effective channel is diagonal.
    """
    lam = np.asarray(spec.lambdas)
    power = np.abs(lam) ** 2
    if np.any(power < SINGULAR_RTOL * power.mean()) or not power.mean() > 0:
        raise SingularChannel("effective channel is singular")
    Y = isfft(to_grid(y, frame), frame)
    return to_vector(sfft(Y / to_grid(lam, frame), frame))
