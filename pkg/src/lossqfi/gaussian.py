"""Single-mode Gaussian states and their closed-form evolution through a pure-loss channel.

Conventions
-----------
Quadratures are ``x = (a + a†)/√2`` and ``p = (a - a†)/(i√2)``, so the vacuum
covariance matrix is ``I/2``.  Squeezing is ``S(r) = exp(r/2 (a² - a†²))`` for
real ``r``: the ``x`` quadrature is squeezed by ``e^{-r}``.  A displacement with
phase ``theta = 0`` therefore points along the squeezed quadrature, which is the
orientation that maximises the loss QFI.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedInputError

_CHANNEL_KINDS = ("phi", "z", "gamma_t")


@dataclass(frozen=True)
class GaussianState:
    """Displaced, squeezed thermal state ``D(alpha) S(r, sq_angle) rho_mu S† D†``.

    ``alpha = s * exp(i theta)``; ``sq_angle`` rotates the squeezed quadrature;
    ``mu`` is the purity ``Tr[rho^2]``.
    """

    s: float
    theta: float = 0.0
    r: float = 0.0
    sq_angle: float = 0.0
    mu: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.mu <= 1.0:
            raise DomainError(f"purity mu must lie in (0, 1], got {self.mu}")
        if self.s < 0:
            raise DomainError(f"displacement magnitude s must be >= 0, got {self.s}")
        if self.r < 0:
            raise DomainError(f"squeezing magnitude r must be >= 0, got {self.r}")

    @property
    def alpha(self) -> complex:
        return self.s * complex(math.cos(self.theta), math.sin(self.theta))

    @property
    def is_pure(self) -> bool:
        return self.mu == 1.0


@dataclass(frozen=True)
class ProbeSpec:
    """Pure probe of mean energy ``nbar`` with a fraction ``x`` spent on squeezing."""

    nbar: float
    x: float
    theta: float = 0.0

    def __post_init__(self):
        if not self.nbar >= 0:
            raise DomainError(f"nbar must be >= 0, got {self.nbar}")
        if not 0.0 <= self.x <= 1.0:
            raise DomainError(f"squeezing fraction x must lie in [0, 1], got {self.x}")

    @property
    def r0(self) -> float:
        return math.asinh(math.sqrt(self.x * self.nbar))

    @property
    def s0(self) -> float:
        return math.sqrt((1.0 - self.x) * self.nbar)


@dataclass(frozen=True)
class ChannelPoint:
    """One loss operating point: ``exp(-gamma_t) = cos(phi)**2`` and ``z = tan(phi)**2``."""

    phi: float
    z: float
    gamma_t: float

    @property
    def transmissivity(self) -> float:
        return math.cos(self.phi) ** 2


def make_channel_point(value: float, which: str = "phi") -> ChannelPoint:
    """Build a consistent :class:`ChannelPoint` from any one of its parametrisations."""
    if which not in _CHANNEL_KINDS:
        raise DomainError(f"unknown parametrization {which!r}; expected one of {_CHANNEL_KINDS}")
    value = float(value)
    if which == "phi":
        if not 0.0 <= value < math.pi / 2:
            raise DomainError(f"phi must lie in [0, pi/2), got {value}")
        phi = value
        z = math.tan(phi) ** 2
        # -log(cos^2) loses digits near 0; log1p(z) = log(1 + tan^2) = -log(cos^2) does not
        gamma_t = math.log1p(z)
    elif which == "z":
        if not (value >= 0.0 and math.isfinite(value)):
            raise DomainError(f"z must be finite and >= 0, got {value}")
        z = value
        phi = math.atan(math.sqrt(z))
        gamma_t = math.log1p(z)
    else:
        if not (value >= 0.0 and math.isfinite(value)):
            raise DomainError(f"gamma_t must be finite and >= 0, got {value}")
        gamma_t = value
        z = math.expm1(gamma_t)
        phi = math.atan(math.sqrt(z))
    return ChannelPoint(phi=phi, z=z, gamma_t=gamma_t)


def make_probe(spec: ProbeSpec) -> GaussianState:
    """Pure probe with ``sinh(r)**2 = x*nbar`` and ``s**2 = (1-x)*nbar``."""
    return GaussianState(s=spec.s0, theta=spec.theta, r=spec.r0, sq_angle=0.0, mu=1.0)


def evolve(probe: GaussianState, point: ChannelPoint) -> GaussianState:
    """Propagate a pure probe through the loss channel in closed form.

    Only pure probes with ``sq_angle = 0`` are covered; the displacement phase is
    carried through unchanged.
    """
    if not probe.is_pure:
        raise UnsupportedInputError("closed-form evolution needs a pure probe (mu = 1)")
    if probe.sq_angle != 0.0:
        raise UnsupportedInputError("closed-form evolution needs sq_angle = 0")
    c2 = math.cos(point.phi) ** 2
    s2 = math.sin(point.phi) ** 2
    ch = math.cosh(2.0 * probe.r)
    mu = 1.0 / math.sqrt(c2 * c2 + s2 * s2 + 2.0 * c2 * s2 * ch)
    mu = min(mu, 1.0)
    # rounding can push the argument a hair below 1
    r = 0.5 * math.acosh(max(1.0, mu * (c2 * ch + s2)))
    return GaussianState(
        s=probe.s * math.cos(point.phi), theta=probe.theta, r=r, sq_angle=0.0, mu=mu
    )


def mean_photon(state: GaussianState) -> float:
    return state.s**2 + math.cosh(2.0 * state.r) / (2.0 * state.mu) - 0.5


def covariance(state: GaussianState) -> np.ndarray:
    """Quadrature covariance matrix (vacuum = I/2)."""
    c, s = math.cos(state.sq_angle), math.sin(state.sq_angle)
    rot = np.array([[c, -s], [s, c]])
    diag = np.diag([math.exp(-2.0 * state.r), math.exp(2.0 * state.r)])
    return rot @ diag @ rot.T / (2.0 * state.mu)


def mean_quadratures(state: GaussianState) -> np.ndarray:
    a = state.alpha
    return math.sqrt(2.0) * np.array([a.real, a.imag])


def photon_number_variance(state: GaussianState) -> float:
    cov = covariance(state)
    d = mean_quadratures(state)
    return 0.5 * (np.trace(cov @ cov) - 0.5) + float(d @ cov @ d)
