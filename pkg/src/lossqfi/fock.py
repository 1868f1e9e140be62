"""Truncated photon-number-basis engine used as ground truth for the closed forms.

States are built by applying padded matrix exponentials of the squeeze and
displacement generators to a thermal diagonal, then cropping to the requested
dimension.  Padding keeps the truncation artefacts of the generators far away
from the retained block.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh, expm
from scipy.special import gammaln

from .errors import DomainError, InsufficientDimensionError, NonConvergenceError
from .gaussian import (
    ChannelPoint,
    GaussianState,
    ProbeSpec,
    evolve,
    make_probe,
    mean_photon,
    photon_number_variance,
)

TAIL_BUDGET = 1e-10
PURE_CUTOFF = 1e-12


@dataclass(frozen=True)
class FockDensity:
    """Density matrix in the photon-number basis, renormalised to unit trace.

    ``trace_deficit`` is the probability that fell outside the truncation before
    renormalisation.
    """

    dim: int
    elements: np.ndarray
    trace_deficit: float = 0.0

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.elements, self.elements)))

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.elements @ op))


class SldSolution(NamedTuple):
    sld: np.ndarray
    dropped_norm: float


class FisherInfo(NamedTuple):
    value: float
    dropped_mass: float


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def _as_matrix(rho) -> np.ndarray:
    return rho.elements if isinstance(rho, FockDensity) else np.asarray(rho)


def _padded(dim: int) -> int:
    return 2 * dim + 32


def gaussian_unitary(alpha: complex, r: float, sq_angle: float, size: int) -> np.ndarray:
    """``D(alpha) S(r, sq_angle)`` on a ``size``-dimensional truncation.

    Only the upper-left block well inside ``size`` is accurate; callers pad.
    """
    a = annihilation(size)
    ad = a.conj().T
    xi = r * np.exp(2j * sq_angle)
    squeeze = expm(0.5 * (np.conj(xi) * (a @ a) - xi * (ad @ ad)))
    if alpha == 0:
        return squeeze
    return expm(alpha * ad - np.conj(alpha) * a) @ squeeze


def default_dim(state: GaussianState) -> int:
    """Initial truncation ``ceil(8 (n_eff + 1))`` with ``n_eff`` = mean + 3 std of the photon number."""
    n_eff = mean_photon(state) + 3.0 * math.sqrt(max(photon_number_variance(state), 0.0))
    return max(int(math.ceil(8.0 * (n_eff + 1.0))), 8)


def build_fock_state(
    state: GaussianState, dim: int, tail_budget: float = TAIL_BUDGET
) -> FockDensity:
    """Realise ``D S rho_mu S† D†`` in the first ``dim`` Fock levels."""
    if dim < 2:
        raise DomainError(f"dim must be >= 2, got {dim}")
    size = _padded(dim)
    u = gaussian_unitary(state.alpha, state.r, state.sq_angle, size)
    q = (1.0 - state.mu) / (1.0 + state.mu)
    if q == 0.0:
        weights = np.array([1.0])
    else:
        weights = (1.0 - q) * q ** np.arange(dim)
        weights = weights[weights > 1e-20 * weights[0]]
    cols = u[:dim, : len(weights)]
    rho = (cols * weights) @ cols.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    tr = float(np.trace(rho).real)
    deficit = 1.0 - tr
    if deficit > tail_budget:
        raise InsufficientDimensionError(
            f"dim={dim} leaves trace deficit {deficit:.3g} > budget {tail_budget:.3g}; "
            f"try dim={2 * dim}"
        )
    return FockDensity(dim=dim, elements=rho / tr, trace_deficit=max(deficit, 0.0))


def lindblad_apply(rho) -> np.ndarray:
    """Loss generator ``2 a rho a† - a†a rho - rho a†a``."""
    m = _as_matrix(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    a = annihilation(dim)
    n = np.arange(dim, dtype=float)
    return 2.0 * (a @ m @ a.conj().T) - n[:, None] * m - m * n[None, :]


def drho_dphi(rho_phi, phi: float) -> np.ndarray:
    """Exact derivative ``tan(phi) L[a] rho`` of the channel output."""
    if not 0.0 <= phi < math.pi / 2:
        raise DomainError(f"phi must lie in [0, pi/2), got {phi}")
    return math.tan(phi) * lindblad_apply(rho_phi)


def apply_loss(rho, phi: float) -> np.ndarray:
    """Exact action of the loss channel at angle ``phi`` via its Kraus decomposition.

    ``rho'_{mn} = eta^{(m+n)/2} sum_l (1-eta)^l sqrt(C(m+l,l) C(n+l,l)) rho_{m+l,n+l}``
    with ``eta = cos(phi)**2``.
    """
    return LossFamily(rho).density(phi)


class LossFamily:
    """Channel outputs ``E_phi(rho0)`` for many ``phi`` from one precomputed Kraus stack.

    ``T[l, m, n] = sqrt(C(m+l,l) C(n+l,l)) rho0[m+l, n+l]`` so that
    ``E_phi(rho0)_{mn} = eta^{(m+n)/2} sum_l (1-eta)^l T[l, m, n]``.
    """

    def __init__(self, rho0):
        m = _as_matrix(rho0)
        dim = m.shape[0]
        idx = np.arange(dim)
        stack = np.zeros((dim, dim, dim), dtype=m.dtype)
        for l in range(dim):
            k = dim - l
            logc = 0.5 * (gammaln(idx[:k] + l + 1) - gammaln(idx[:k] + 1) - gammaln(l + 1))
            stack[l, :k, :k] = np.exp(logc[:, None] + logc[None, :]) * m[l:, l:]
        self.dim = dim
        self._stack = stack.reshape(dim, dim * dim)
        self._half_sum = 0.5 * (idx[:, None] + idx[None, :]).ravel()
        self._levels = idx

    def _flat(self, phis) -> np.ndarray:
        eta = np.cos(np.atleast_1d(np.asarray(phis, dtype=float))) ** 2
        weights = (1.0 - eta)[:, None] ** self._levels[None, :]
        flat = weights @ self._stack
        return flat * eta[:, None] ** self._half_sum[None, :]

    def density(self, phi: float) -> np.ndarray:
        return self._flat(phi)[0].reshape(self.dim, self.dim)

    def pmfs(self, phis, basis: np.ndarray) -> np.ndarray:
        """Outcome probabilities, shape ``(len(phis), n_outcomes)``, for a fixed basis."""
        pairs = (basis.conj()[:, None, :] * basis[None, :, :]).reshape(self.dim * self.dim, -1)
        return np.clip(np.real(self._flat(phis) @ pairs), 0.0, None)


def integrate_master_equation(rho0, phi: float, rtol: float = 1e-10) -> np.ndarray:
    """Integrate ``d rho/d phi = tan(phi) L[a] rho`` from 0 to ``phi``.

    Classical RK4 with step-doubling error control.
    """
    y = np.array(_as_matrix(rho0), dtype=complex)

    def f(p, m):
        return math.tan(p) * lindblad_apply(m)

    def rk4(p, m, h):
        k1 = f(p, m)
        k2 = f(p + h / 2, m + h / 2 * k1)
        k3 = f(p + h / 2, m + h / 2 * k2)
        k4 = f(p + h, m + h * k3)
        return m + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    p, h = 0.0, min(1e-2, phi) if phi > 0 else 0.0
    while p < phi:
        h = min(h, phi - p)
        full = rk4(p, y, h)
        half = rk4(p + h / 2, rk4(p, y, h / 2), h / 2)
        err = np.linalg.norm(half - full) / 15.0
        if err <= rtol or h < 1e-12:
            y = half + (half - full) / 15.0
            p += h
        h *= min(4.0, max(0.1, 0.9 * (rtol / max(err, 1e-300)) ** 0.2))
    return y


def solve_sld(rho, drho: np.ndarray, eigen_floor: float = 1e-12) -> SldSolution:
    """Solve ``rho L + L rho = 2 drho`` in the eigenbasis of ``rho``.

    Pairs with ``rho_p + rho_q`` below ``eigen_floor * max(rho_p)`` are set to zero;
    the Frobenius norm of the derivative discarded there is returned alongside.
    """
    w, v = eigh(_as_matrix(rho))
    dt = v.conj().T @ drho @ v
    denom = w[:, None] + w[None, :]
    keep = denom > eigen_floor * w.max()
    sld = np.zeros_like(dt)
    sld[keep] = 2.0 * dt[keep] / denom[keep]
    sld = v @ sld @ v.conj().T
    sld = 0.5 * (sld + sld.conj().T)
    return SldSolution(sld=sld, dropped_norm=float(np.linalg.norm(dt[~keep])))


def pure_state_sld(drho: np.ndarray) -> np.ndarray:
    """SLD of a pure state, ``2 drho`` (from differentiating ``rho**2 = rho``)."""
    return 2.0 * np.asarray(drho)


def lyapunov_residual(rho, sld: np.ndarray, drho: np.ndarray) -> float:
    """``||rho L + L rho - 2 drho||_F / ||drho||_F``."""
    m = _as_matrix(rho)
    scale = np.linalg.norm(drho)
    res = np.linalg.norm(m @ sld + sld @ m - 2.0 * drho)
    return float(res / scale) if scale > 0 else float(res)


def qfi_from_sld(rho, sld: np.ndarray) -> float:
    return float(np.real(np.trace(_as_matrix(rho) @ sld @ sld)))


def oracle_state(
    probe: ProbeSpec, point: ChannelPoint, dim: int, tail_budget: float = TAIL_BUDGET
) -> tuple[FockDensity, np.ndarray, GaussianState]:
    """Evolved probe in the Fock basis together with its exact ``phi`` derivative."""
    evolved = evolve(make_probe(probe), point)
    rho = build_fock_state(evolved, dim, tail_budget)
    return rho, drho_dphi(rho, point.phi), evolved


def oracle_sld(rho: FockDensity, drho: np.ndarray, evolved: GaussianState) -> np.ndarray:
    if evolved.mu >= 1.0 - PURE_CUTOFF:
        return pure_state_sld(drho)
    return solve_sld(rho, drho).sld


def qfi_oracle(
    probe: ProbeSpec,
    point: ChannelPoint,
    dim: int | None = None,
    *,
    rtol: float = 1e-8,
    max_dim: int = 512,
    full_output: bool = False,
):
    """QFI ``Tr[rho L**2]`` from the Fock-space SLD.

    Starting from ``dim`` (or the truncation policy), the dimension is doubled
    until successive values agree to ``rtol``.  With ``full_output`` a dict of
    diagnostics is returned as well.
    """
    evolved = evolve(make_probe(probe), point)
    dim = dim or default_dim(evolved)
    history = []
    previous = None
    while True:
        if dim > max_dim:
            raise NonConvergenceError(
                f"QFI did not converge to rtol={rtol} below dim={max_dim}; history={history}"
            )
        try:
            rho, drho, _ = oracle_state(probe, point, dim)
        except InsufficientDimensionError:
            dim *= 2
            continue
        h = qfi_from_sld(rho, oracle_sld(rho, drho, evolved))
        history.append((dim, h))
        if previous is not None and abs(h - previous) <= rtol * max(abs(h), 1e-300):
            break
        if previous is not None and h == 0.0 and previous == 0.0:
            break
        previous = h
        dim *= 2
    if full_output:
        return h, {"dim": dim, "history": history, "trace_deficit": rho.trace_deficit}
    return h


def sld_eigenbasis(sld: np.ndarray) -> np.ndarray:
    """Orthonormal eigenvectors (columns) of a Hermitian SLD."""
    return eigh(sld)[1]


def _check_basis(basis: np.ndarray, tol: float = 1e-10):
    gram = basis.conj().T @ basis
    err = np.abs(gram - np.eye(gram.shape[0])).max()
    if err > tol:
        raise DomainError(f"measurement basis is not orthonormal (max deviation {err:.3g})")


def project_diagonal(op: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """``<v_k| op |v_k>`` for each column ``v_k``."""
    return np.real(np.einsum("ik,ij,jk->k", basis.conj(), op, basis))


def measurement_pmf(rho, basis: np.ndarray) -> np.ndarray:
    """Outcome probabilities for a projective measurement onto the columns of ``basis``."""
    basis = np.asarray(basis)
    _check_basis(basis)
    return np.clip(project_diagonal(_as_matrix(rho), basis), 0.0, None)


def classical_fisher(pmf: np.ndarray, dpmf: np.ndarray, floor: float = 1e-14) -> FisherInfo:
    """``sum_k dp_k**2 / p_k`` over outcomes with ``p_k >= floor``."""
    pmf = np.asarray(pmf, dtype=float)
    dpmf = np.asarray(dpmf, dtype=float)
    keep = pmf >= floor
    value = float(np.sum(dpmf[keep] ** 2 / pmf[keep]))
    return FisherInfo(value=value, dropped_mass=float(pmf[~keep].sum()))


def dump_density_csv(rho, path) -> None:
    """Write non-zero matrix elements as ``row,col,re,im`` lines."""
    m = _as_matrix(rho)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "re", "im"])
        for i, j in zip(*np.nonzero(m)):
            writer.writerow([i, j, repr(float(m[i, j].real)), repr(float(m[i, j].imag))])
