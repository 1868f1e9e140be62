import csv
import io
import math

import numpy as np
import pytest

from lossqfi.errors import DegenerateStateError, EllipticViolationError
from lossqfi.fock import (
    _padded,
    annihilation,
    oracle_sld,
    oracle_state,
)
from lossqfi.gaussian import GaussianState, ProbeSpec, evolve, make_channel_point, make_probe
from lossqfi.sld import (
    CSV_HEADER,
    SldCoefficients,
    basis_vectors,
    closed_form_sld,
    compare_with_oracle,
    oracle_coefficients,
    sld_basis,
    sld_coefficients,
)

ORACLE_GRID = [
    (n, x, z) for n in (0.5, 1.0, 2.0) for x in (0.25, 0.5, 0.75, 1.0) for z in (0.1, 1.0, 5.0)
]


def evolved_state(nbar, x, z):
    point = make_channel_point(z, "z")
    return evolve(make_probe(ProbeSpec(nbar, x)), point), point


def test_coefficients_squeezed_vacuum_point():
    state, point = evolved_state(1.0, 1.0, 1.0)
    co = sld_coefficients(state, point.phi)
    assert co.a_coef == pytest.approx(0.0, abs=1e-14)
    assert co.b_coef == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert co.c_coef == 0
    assert co.f_coef == pytest.approx(-0.13807118745769809, abs=1e-12)
    assert co.tan_prefactor == pytest.approx(2.0)


def test_c_vanishes_without_displacement():
    co = sld_coefficients(GaussianState(s=0.0, r=0.3, mu=0.6), 0.4)
    assert co.c_coef == 0


def test_coefficients_reject_pure_states():
    with pytest.raises(DegenerateStateError):
        sld_coefficients(GaussianState(s=1.0, r=0.0, mu=1.0 - 1e-9), 0.5)


def test_basis_number_operator_case():
    state = GaussianState(s=0.0, mu=0.5)
    b = sld_basis(SldCoefficients(1.5, 0.0, 0j, 0.2, 1.0), state)
    assert b.tau == 1.5 and b.eta == 0.0 and b.beta == 0
    assert b.f_prime == pytest.approx(0.2)


def test_basis_hyperbolic_at_squeezed_vacuum():
    state, point = evolved_state(1.0, 1.0, 1.0)
    with pytest.raises(EllipticViolationError) as err:
        sld_basis(sld_coefficients(state, point.phi), state)
    assert err.value.a_coef == pytest.approx(0.0, abs=1e-14)
    assert err.value.b_coef == pytest.approx(1.0 / 3.0)


def test_basis_elliptic_example():
    b = sld_basis(SldCoefficients(2.0, 0.5, 0j, 0.0, 1.0), GaussianState(s=0.0, mu=0.5))
    assert b.tau == pytest.approx(math.sqrt(3.0))
    assert math.tan(2 * b.eta) == pytest.approx(-0.5)


def test_basis_vectors_orthonormal():
    b = sld_basis(SldCoefficients(2.0, 0.5, 0.3 + 0.1j, 0.0, 1.0), GaussianState(s=0.4, r=0.2, mu=0.5))
    v = basis_vectors(b, 60, 10)
    assert np.abs(v.conj().T @ v - np.eye(10)).max() < 1e-9


def _k_operator(co, size):
    a = annihilation(size)
    ad = a.conj().T
    return (
        co.a_coef * ad @ a
        + co.b_coef * (a @ a + ad @ ad)
        - co.c_coef * a
        - np.conj(co.c_coef) * ad
        + co.f_coef * np.eye(size)
    )


def test_closed_form_basis_diagonalises_pure_number_form():
    co = SldCoefficients(2.0, 0.0, 0j, 0.1, 1.0)
    b = sld_basis(co, GaussianState(s=0.0, mu=0.5))
    dim = 30
    size = _padded(dim)
    v = np.zeros((size, 6), complex)
    v[:dim] = basis_vectors(b, dim, 6)
    kv = _k_operator(co, size) @ v
    lam = b.f_prime + b.tau * np.arange(6)
    assert np.abs(kv - v * lam).max() < 1e-10


def test_closed_form_basis_angle_does_not_diagonalise_squeezing_term():
    # Finding: with B != 0 tan(2 eta) = -2B/A leaves off-diagonal weight.
    co = SldCoefficients(2.0, 0.5, 0j, 0.0, 1.0)
    b = sld_basis(co, GaussianState(s=0.0, mu=0.5))
    dim = 30
    size = _padded(dim)
    v = np.zeros((size, 6), complex)
    v[:dim] = basis_vectors(b, dim, 6)
    kv = _k_operator(co, size) @ v
    lam = np.real(np.einsum("ik,ik->k", v.conj(), kv))
    assert np.abs(kv - v * lam).max() > 1e-3


@pytest.mark.parametrize("nbar, x, z", ORACLE_GRID)
def test_oracle_sld_suite(nbar, x, z):
    rep = compare_with_oracle(ProbeSpec(nbar, x), make_channel_point(z, "z"))
    row = rep.path("oracle")
    assert row.residual <= 1e-8
    assert abs(row.expectation) <= 1e-9
    assert row.qfi_rel_err <= 1e-6
    assert rep.oracle_ok


def test_report_flags_closed_form_sld_at_squeezed_vacuum():
    rep = compare_with_oracle(ProbeSpec(1.0, 1.0), make_channel_point(1.0, "z"), 64)
    closed = rep.path("closed_form")
    assert closed.verdict == "discrepancy"
    # Tr[rho L] = 2 tan(phi) F with A = 0 at this point
    assert closed.expectation == pytest.approx(2 * -0.13807118745769809, abs=1e-9)
    assert rep.oracle_ok


def test_report_marks_pure_output_degenerate():
    rep = compare_with_oracle(ProbeSpec(1.0, 0.0), make_channel_point(1.0, "z"), 40)
    assert rep.path("closed_form").verdict == "degenerate (pure)"
    assert rep.oracle_ok


@pytest.mark.parametrize("nbar, x, z", [(1.0, 0.5, 0.1), (2.0, 0.25, 5.0), (0.5, 0.75, 1.0)])
def test_closed_form_a_b_c_agree_with_oracle(nbar, x, z):
    # Finding: only the scalar term differs from the numerically exact SLD.
    state, point = evolved_state(nbar, x, z)
    rho, d, ev = oracle_state(ProbeSpec(nbar, x), point, 80)
    true = oracle_coefficients(oracle_sld(rho, d, ev), state, point.phi)
    cf = sld_coefficients(state, point.phi)
    assert true.a_coef == pytest.approx(cf.a_coef, rel=1e-8, abs=1e-8)
    assert true.b_coef == pytest.approx(cf.b_coef, rel=1e-8, abs=1e-8)
    assert abs(true.c_coef - cf.c_coef) < 1e-8
    assert abs(true.f_coef - cf.f_coef) > 1e-3


@pytest.mark.parametrize("nbar, x, z", ORACLE_GRID[::5])
def test_closed_form_scalar_term_breaks_zero_mean(nbar, x, z):
    # Finding: Tr[rho L] != 0 for the closed-form SLD at every mixed grid point.
    rep = compare_with_oracle(ProbeSpec(nbar, x), make_channel_point(z, "z"))
    closed = rep.path("closed_form")
    assert closed.verdict == "discrepancy"
    assert closed.expectation < -1e-3


def test_closed_form_sld_is_hermitian():
    state, point = evolved_state(1.0, 0.5, 0.1)
    lam = closed_form_sld(state, point.phi, 50)
    assert np.abs(lam - lam.conj().T).max() < 1e-10


def test_report_serialisation():
    rep = compare_with_oracle(ProbeSpec(1.0, 0.5), make_channel_point(0.1, "z"), 50)
    text = rep.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_HEADER
    assert [r[3] for r in rows[1:]] == ["oracle", "closed_form"]
    assert rows[1][-1] == "pass"
    table = rep.to_table()
    assert "oracle" in table and "discrepancy" in table
