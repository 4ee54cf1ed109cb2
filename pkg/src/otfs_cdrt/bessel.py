"""Modified Bessel function of the second kind, order one, complex argument.

Three regimes, chosen on ``|z|``:

* ``|z| <= 2``: ascending series (Abramowitz & Stegun 9.6.11 with n = 1).
* ``2 < |z| < 20``: Steed's continued fraction (Temme's CF2), which yields
  ``K0`` and ``K1`` together and converges quickly off the real axis.
* ``|z| >= 20``: Hankel asymptotic expansion.

Only the closed right half-plane is supported.
"""

from __future__ import annotations

import numpy as np

EULER_GAMMA = 0.57721566490153286061

_SERIES_MAX = 2.0
_ASYMPTOTIC_MIN = 20.0
_SERIES_TERMS = 24
_ASYMPTOTIC_TERMS = 24
_CF_MAXITER = 400
_CF_EPS = 1e-16


def _k1_series(z: np.ndarray) -> np.ndarray:
    q = 0.25 * z * z
    term = np.ones_like(z)  # (z^2/4)^k / (k! (k+1)!)
    i1_sum = np.zeros_like(z)
    psi_sum = np.zeros_like(z)
    harmonic = 0.0
    for k in range(_SERIES_TERMS):
        # digamma(k+1) + digamma(k+2) = -2*gamma + 2*H_k + 1/(k+1)
        digammas = -2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (k + 1)
        i1_sum = i1_sum + term
        psi_sum = psi_sum + digammas * term
        harmonic += 1.0 / (k + 1)
        term = term * q / ((k + 1) * (k + 2))
    i1 = 0.5 * z * i1_sum
    return 1.0 / z + np.log(0.5 * z) * i1 - 0.25 * z * psi_sum


def _k1_continued_fraction(z: np.ndarray) -> np.ndarray:
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(z)
    q2 = np.ones_like(z)
    a1 = 0.25
    q = np.full_like(z, a1)
    c = np.full_like(z, a1)
    a = -a1
    s = 1.0 + q * delh
    active = np.ones(z.shape, dtype=bool)
    for i in range(1, _CF_MAXITER + 1):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        # freeze converged entries so later round-off cannot disturb them
        s = np.where(active, s + dels, s)
        active &= np.abs(dels) >= _CF_EPS * np.abs(s)
        if not active.any():
            break
    k0 = np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) / s
    return k0 * (z + 0.5 - a1 * h) / z


def _k1_asymptotic(z: np.ndarray) -> np.ndarray:
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        term = term * (4.0 - (2 * k - 1) ** 2) / (k * 8.0 * z)
        total = total + term
    return np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) * total


def bessel_k1(z):
    """Evaluate ``K_1(z)`` on the principal branch for ``Re(z) >= 0``.

    Parameters
    ----------
    z : complex or array_like of complex
        Arguments in the closed right half-plane, excluding the origin.

    Returns
    -------
    complex or ndarray
        ``K_1(z)`` with the shape of ``z``.

    Raises
    ------
    ValueError
        If any argument is zero or has a negative real part.
    """
    arr = np.asarray(z, dtype=complex)
    if np.any(arr.real < 0):
        raise ValueError("bessel_k1 requires Re(z) >= 0")
    if np.any(arr == 0):
        raise ValueError("bessel_k1 is singular at z = 0")
    flat = arr.ravel()
    out = np.empty_like(flat)
    mag = np.abs(flat)
    small = mag <= _SERIES_MAX
    large = mag >= _ASYMPTOTIC_MIN
    middle = ~(small | large)
    if small.any():
        out[small] = _k1_series(flat[small])
    if middle.any():
        out[middle] = _k1_continued_fraction(flat[middle])
    if large.any():
        with np.errstate(under="ignore"):
            out[large] = _k1_asymptotic(flat[large])
    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out
