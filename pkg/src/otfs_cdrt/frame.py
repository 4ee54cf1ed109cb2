"""OTFS grid geometry and the delay-Doppler index convention.

Grids are held as ``(N, M)`` arrays indexed ``[k, l]`` (Doppler bin, delay
bin). Vectorised forms put element ``[k, l]`` at position ``l * N + k``,
which is exactly Fortran-order raveling of the ``(N, M)`` array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


class FrameTooSmall(ValueError):
    """Raised when the grid cannot resolve the channel's delay or Doppler spread."""

    def __init__(self, bound: str, message: str):
        super().__init__(message)
        self.bound = bound


@dataclass(frozen=True)
class FrameParams:
    """Rectangular OTFS frame of ``M`` subcarriers by ``N`` time slots."""

    M: int
    N: int
    delta_f: float
    carrier_hz: float = 4e9

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if not self.delta_f > 0:
            raise ValueError(f"delta_f must be positive, got {self.delta_f}")

    @property
    def T(self) -> float:
        return 1.0 / self.delta_f

    @property
    def size(self) -> int:
        """Number of delay-Doppler bins, ``N * M``."""
        return self.N * self.M

    @property
    def delay_resolution(self) -> float:
        return 1.0 / (self.M * self.delta_f)

    @property
    def doppler_resolution(self) -> float:
        return 1.0 / (self.N * self.T)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.M)


@dataclass(frozen=True)
class DdIndex:
    k: int
    l: int

    def check(self, frame: FrameParams) -> None:
        if not (0 <= self.k < frame.N and 0 <= self.l < frame.M):
            raise IndexError(
                f"DD index (k={self.k}, l={self.l}) outside {frame.N}x{frame.M} grid"
            )


@dataclass(frozen=True)
class ValidatedFrame:
    params: FrameParams
    tau_max: float
    v_max: float

    @property
    def delay_resolution(self) -> float:
        return self.params.delay_resolution

    @property
    def doppler_resolution(self) -> float:
        return self.params.doppler_resolution


def validate_frame(params: FrameParams, tau_max: float, v_max: float) -> ValidatedFrame:
    """Check that slot duration covers ``tau_max`` and spacing covers ``v_max``."""
    if tau_max < 0 or v_max < 0:
        raise ValueError("tau_max and v_max must be nonnegative")
    if params.T < tau_max:
        raise FrameTooSmall(
            "delay",
            f"slot duration T={params.T:.6g} s is below the delay spread {tau_max:.6g} s",
        )
    if params.delta_f < v_max:
        raise FrameTooSmall(
            "doppler",
            f"subcarrier spacing {params.delta_f:.6g} Hz is below the Doppler spread {v_max:.6g} Hz",
        )
    return ValidatedFrame(params, float(tau_max), float(v_max))


def linear_index(idx: DdIndex, params: FrameParams) -> int:
    idx.check(params)
    return idx.l * params.N + idx.k


def dd_index(i: int, params: FrameParams) -> DdIndex:
    """Inverse of :func:`linear_index`."""
    if not 0 <= i < params.size:
        raise IndexError(f"linear index {i} outside [0, {params.size})")
    l, k = divmod(i, params.N)
    return DdIndex(k=k, l=l)


def to_vector(grid: np.ndarray) -> np.ndarray:
    """Flatten an ``(..., N, M)`` grid so ``[k, l]`` lands at ``l * N + k``."""
    grid = np.asarray(grid)
    return np.swapaxes(grid, -1, -2).reshape(grid.shape[:-2] + (-1,))


def to_grid(vec: np.ndarray, params: FrameParams) -> np.ndarray:
    vec = np.asarray(vec)
    if vec.shape[-1] != params.size:
        raise ValueError(f"expected {params.size} entries, got {vec.shape[-1]}")
    return np.swapaxes(vec.reshape(vec.shape[:-1] + (params.M, params.N)), -1, -2)


def max_doppler(speed_mps: float, carrier_hz: float) -> float:
    if speed_mps < 0 or carrier_hz < 0:
        raise ValueError("speed and carrier must be nonnegative")
    return speed_mps * carrier_hz / SPEED_OF_LIGHT
