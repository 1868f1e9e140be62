"""Closed-form quantum Fisher information for loss estimation with pure Gaussian probes.

All quantities are per copy and refer to the channel angle ``phi``
(``z = tan(phi)**2``), with the displacement already aligned to the squeezed
quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# below this z the x/z bracket term is evaluated through its analytic limit
Z_LIMIT = 1e-12


@dataclass(frozen=True)
class QfiResult:
    h: float
    nbar: float
    x: float
    z: float


@dataclass(frozen=True)
class AsymptoticQfi:
    h: float
    in_regime: bool


@dataclass(frozen=True)
class AsymptoticX:
    x: float
    clamped: bool


def _check(nbar, z, x=None):
    if not nbar >= 0:
        raise DomainError(f"nbar must be >= 0, got {nbar}")
    if not z >= 0:
        raise DomainError(f"z must be >= 0, got {z}")
    if x is not None and not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")


def qfi_value(nbar, x, z):
    """Vectorised closed-form QFI without argument checks.

    Broadcasts over numpy arrays; used by the optimiser's grid scans.
    """
    nbar, x, z = np.broadcast_arrays(
        np.asarray(nbar, dtype=float), np.asarray(x, dtype=float), np.asarray(z, dtype=float)
    )
    small = z < Z_LIMIT
    zz = np.where(small, 1.0, z)
    nx = nbar * x
    pre = 4.0 * zz * nbar / (1.0 + zz * (2.0 + zz + 4.0 * nx))
    bracket = (
        1.0
        - x
        + 2.0 * nx
        + x / zz
        + zz
        - 4.0 * nx * x * zz * (1.0 + nx) / (1.0 + zz * (2.0 + zz + 2.0 * nx))
        + 2.0 * (1.0 - x) * np.sqrt(nx * (1.0 + nx))
    )
    out = np.where(small, 4.0 * nx, pre * bracket)
    return out if out.ndim else float(out)


def qfi_general(nbar: float, x: float, z: float) -> QfiResult:
    """QFI of the probe (nbar, x) after loss ``z``.

    For ``z < 1e-12`` the removable singularity is replaced by its limit ``4*nbar*x``.
    """
    _check(nbar, z, x)
    return QfiResult(h=float(qfi_value(nbar, x, z)), nbar=nbar, x=x, z=z)


def qfi_coherent(nbar: float, z: float) -> float:
    _check(nbar, z)
    return 4.0 * nbar * z / (1.0 + z)


def qfi_squeezed_vacuum(nbar: float, z: float) -> float:
    _check(nbar, z)
    return 4.0 * nbar * (1.0 + z * z) / (1.0 + 2.0 * z * (1.0 + nbar) + z * z)


def qfi_large_energy_asymptote(nbar: float, z: float) -> AsymptoticQfi:
    """Large-energy, small-loss expansion ``4/z (1 - sqrt(nbar z)) + 2 + 4 nbar + 2z``.

    The expression is returned as is.  It is meaningless once ``nbar*z >= 1``
    (the leading term turns negative); ``in_regime`` is False there.
    """
    if not z > 0:
        raise DomainError(f"z must be > 0 for the asymptotic form, got {z}")
    if not nbar > 0:
        raise DomainError(f"nbar must be > 0 for the asymptotic form, got {nbar}")
    root = math.sqrt(nbar * z)
    h = 4.0 / z * (1.0 - root) + (2.0 + 4.0 * nbar) + 2.0 * z
    return AsymptoticQfi(h=h, in_regime=root < 1.0)


def x_opt_asymptotic(nbar: float, z: float) -> AsymptoticX:
    """Leading-order optimal squeezing fraction ``(4 nbar z)**-0.5``, clamped to [0, 1]."""
    if not (nbar > 0 and z > 0):
        raise DomainError(f"nbar and z must be > 0, got nbar={nbar}, z={z}")
    x = (4.0 * nbar * z) ** -0.5
    return AsymptoticX(x=min(x, 1.0), clamped=x > 1.0)


def crb_variance(h: float, n_copies: int) -> float:
    """Quantum Cramer-Rao variance bound ``1/(N H)``."""
    if not h > 0:
        raise DomainError(f"Fisher information must be > 0, got {h}")
    if n_copies < 1:
        raise DomainError(f"n_copies must be >= 1, got {n_copies}")
    return 1.0 / (n_copies * h)


def variance_phi_to_gamma(var_phi: float, phi: float, t: float) -> float:
    """Delta-method map of a variance in ``phi`` to one in ``gamma`` (``d gamma/d phi = 2 tan(phi)/t``)."""
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if not 0.0 < phi < math.pi / 2:
        raise DomainError(f"phi must lie in (0, pi/2), got {phi}")
    return (2.0 * math.tan(phi) / t) ** 2 * var_phi


def qfi_dilation_bound(nbar: float) -> float:
    """QFI available with access to the environment mode: ``4 nbar``."""
    if not nbar >= 0:
        raise DomainError(f"nbar must be >= 0, got {nbar}")
    return 4.0 * nbar
