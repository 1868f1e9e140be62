"""Closed-form SLD coefficients, the Gaussian measurement basis built from them,
and a harness that checks the closed form against the Fock-space solution.

The closed form is transcribed verbatim.  It is *not* trusted: at the
squeezed-vacuum point (nbar=1, x=1, z=1) it gives ``Tr[rho L] != 0``, which an
SLD cannot do.  :func:`compare_with_oracle` records such findings instead of
correcting the formulas.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateStateError, EllipticViolationError
from .fock import (
    _padded,
    annihilation,
    default_dim,
    gaussian_unitary,
    lyapunov_residual,
    oracle_sld,
    oracle_state,
    qfi_from_sld,
)
from .gaussian import ChannelPoint, GaussianState, ProbeSpec, evolve, make_probe
from .qfi import qfi_value

PURITY_EPS = 1e-6

ORACLE_RESIDUAL_TOL = 1e-8
EXPECTATION_TOL = 1e-9
QFI_RTOL = 1e-6

CSV_HEADER = ("nbar", "x", "z", "path", "residual", "expectation", "qfi_rel_err", "verdict")


@dataclass(frozen=True)
class SldCoefficients:
    """``L = tan_prefactor * U K U†`` with
    ``K = A a†a + B (a² + a†²) - C a - C* a† + F`` and ``U = D(alpha) S(r)``."""

    a_coef: float
    b_coef: float
    c_coef: complex
    f_coef: float
    tan_prefactor: float


@dataclass(frozen=True)
class SldBasis:
    tau: float
    eta: float
    beta: complex
    f_prime: float
    outer_alpha: complex
    outer_r: float


def sld_coefficients(
    state: GaussianState, phi: float, eps: float = PURITY_EPS
) -> SldCoefficients:
    """Closed-form coefficients A, B, C, F evaluated on the evolved state."""
    mu, r = state.mu, state.r
    if mu > 1.0 - eps:
        raise DegenerateStateError(
            f"evolved state is pure to within {eps:g} (mu={mu:.12g}); use the Fock-space SLD"
        )
    alpha = state.alpha
    a_coef = 2.0 * mu / (1.0 - mu**2) * (mu * math.cosh(2 * r) - 1.0)
    b_coef = mu**2 / (1.0 + mu**2) * math.sinh(2 * r)
    c_coef = mu * (alpha * math.cosh(r) + alpha.conjugate() * math.sinh(r))
    f_coef = 1.0 - 2.0 * mu * math.cosh(r) ** 2 / (1.0 + mu**2)
    return SldCoefficients(a_coef, b_coef, complex(c_coef), f_coef, 2.0 * math.tan(phi))


def sld_basis(coeffs: SldCoefficients, state: GaussianState) -> SldBasis:
    """Rewrite K as ``F' + tau S†(eta) D(beta) a†a D(beta) S(eta)``.

    Only possible when ``A**2 > 4 B**2``.
    """
    a, b, c = coeffs.a_coef, coeffs.b_coef, coeffs.c_coef
    if not a * a > 4.0 * b * b:
        raise EllipticViolationError(a, b)
    tau = math.sqrt(a * a - 4.0 * b * b)
    eta = 0.5 * math.atan(-2.0 * b / a)
    beta = (c * math.cosh(state.r) + c.conjugate() * math.sinh(state.r)) / (state.mu * tau)
    f_prime = coeffs.f_coef + 0.5 * (tau - a - 2.0 * tau * abs(beta) ** 2)
    return SldBasis(tau, eta, complex(beta), f_prime, state.alpha, state.r)


def _frame(state: GaussianState, size: int) -> np.ndarray:
    return gaussian_unitary(state.alpha, state.r, state.sq_angle, size)


def closed_form_sld(state: GaussianState, phi: float, dim: int) -> np.ndarray:
    """Fock-basis matrix of the closed-form SLD on the first ``dim`` levels."""
    co = sld_coefficients(state, phi)
    size = _padded(dim)
    a = annihilation(size)
    ad = a.conj().T
    k = (
        co.a_coef * (ad @ a)
        + co.b_coef * (a @ a + ad @ ad)
        - co.c_coef * a
        - np.conj(co.c_coef) * ad
        + co.f_coef * np.eye(size)
    )
    u = _frame(state, size)
    return co.tan_prefactor * (u @ k @ u.conj().T)[:dim, :dim]


def basis_vectors(basis: SldBasis, dim: int, count: int | None = None) -> np.ndarray:
    """Columns ``D(alpha) S(r) S†(eta) D†(beta) |n>`` for ``n < count``."""
    count = dim if count is None else count
    size = _padded(dim)
    outer = gaussian_unitary(basis.outer_alpha, basis.outer_r, 0.0, size)
    # S†(eta) D†(beta) = (D(beta) S(eta))†
    inner = gaussian_unitary(basis.beta, basis.eta, 0.0, size).conj().T
    return (outer @ inner)[:dim, :count]


def oracle_coefficients(sld: np.ndarray, state: GaussianState, phi: float) -> SldCoefficients:
    """Read A, B, C, F off a numerical SLD by moving it into the frame of ``state``.

    Meaningful only when the SLD is (numerically) quadratic in a, a†, which holds
    for Gaussian states.
    """
    dim = sld.shape[0]
    u = _frame(state, _padded(dim))[:dim, :3]
    pre = 2.0 * math.tan(phi)
    k = u.conj().T @ sld @ u / pre
    return SldCoefficients(
        a_coef=float((k[1, 1] - k[0, 0]).real),
        b_coef=float((k[2, 0] / math.sqrt(2.0)).real),
        c_coef=complex(-k[0, 1]),
        f_coef=float(k[0, 0].real),
        tan_prefactor=pre,
    )


@dataclass(frozen=True)
class PathResult:
    path: str
    residual: float
    expectation: float
    qfi: float
    qfi_rel_err: float
    verdict: str


@dataclass
class DiscrepancyReport:
    nbar: float
    x: float
    z: float
    dim: int
    qfi_closed: float
    rows: list[PathResult] = field(default_factory=list)

    def path(self, name: str) -> PathResult:
        return next(r for r in self.rows if r.path == name)

    @property
    def oracle_ok(self) -> bool:
        return self.path("oracle").verdict == "pass"

    def csv_rows(self):
        for r in self.rows:
            yield (
                self.nbar, self.x, self.z, r.path,
                r.residual, r.expectation, r.qfi_rel_err, r.verdict,
            )

    def to_csv(self, fh=None) -> str:
        buf = fh if fh is not None else io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.csv_rows():
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
        return buf.getvalue() if fh is None else ""

    def to_table(self) -> str:
        lines = [
            f"nbar={self.nbar:g}  x={self.x:g}  z={self.z:g}  dim={self.dim}  "
            f"H(closed form)={self.qfi_closed:.10g}",
            f"{'path':<8}{'residual':>14}{'Tr[rho L]':>14}{'Tr[rho L^2]':>16}{'rel.err':>12}  verdict",
        ]
        for r in self.rows:
            lines.append(
                f"{r.path:<8}{r.residual:>14.3e}{r.expectation:>14.3e}"
                f"{r.qfi:>16.10g}{r.qfi_rel_err:>12.3e}  {r.verdict}"
            )
        return "\n".join(lines)


def _path_result(name, rho, sld, drho, h_closed, verdict_fn) -> PathResult:
    residual = lyapunov_residual(rho, sld, drho)
    expectation = float(np.real(np.trace(rho.elements @ sld)))
    h = qfi_from_sld(rho, sld)
    rel = abs(h - h_closed) / h_closed if h_closed > 0 else abs(h)
    return PathResult(name, residual, expectation, h, rel, verdict_fn(residual, expectation, rel))


def compare_with_oracle(
    probe: ProbeSpec, point: ChannelPoint, dim: int | None = None
) -> DiscrepancyReport:
    """Check both the Fock-space SLD and the closed form against the SLD equation.

    The oracle row passes or fails at fixed tolerances.  The closed-form row is
    a finding: ``consistent``, ``discrepancy`` or ``degenerate (pure)``.
    """
    evolved = evolve(make_probe(probe), point)
    dim = dim or default_dim(evolved)
    rho, drho, _ = oracle_state(probe, point, dim)
    h_closed = float(qfi_value(probe.nbar, probe.x, point.z))
    report = DiscrepancyReport(probe.nbar, probe.x, point.z, dim, h_closed)

    def oracle_verdict(res, ex, rel):
        ok = res <= ORACLE_RESIDUAL_TOL and abs(ex) <= EXPECTATION_TOL and rel <= QFI_RTOL
        return "pass" if ok else "fail"

    def closed_verdict(res, ex, rel):
        ok = res <= QFI_RTOL and abs(ex) <= EXPECTATION_TOL and rel <= QFI_RTOL
        return "consistent" if ok else "discrepancy"

    report.rows.append(
        _path_result("oracle", rho, oracle_sld(rho, drho, evolved), drho, h_closed, oracle_verdict)
    )
    try:
        closed = closed_form_sld(evolved, point.phi, dim)
    except DegenerateStateError:
        nan = float("nan")
        report.rows.append(PathResult("closed_form", nan, nan, nan, nan, "degenerate (pure)"))
    else:
        report.rows.append(_path_result("closed_form", rho, closed, drho, h_closed, closed_verdict))
    return report
