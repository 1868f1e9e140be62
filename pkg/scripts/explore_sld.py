#!/usr/bin/env python3
"""Compare the closed-form SLD coefficients with those read off the Fock-space SLD.

For each point prints the closed-form (A, B, C, F), the oracle values, the
trace ``Tr[rho L]`` of the closed form, and whether ``A**2 > 4 B**2`` (the
condition under which the closed-form eigenbasis is a displaced squeezed
number basis).  Also reports which rotation angle diagonalises the quadratic
part: ``tan 2eta = -2B/A`` or ``tanh 2eta = -2B/A``.
"""
import math

import numpy as np
from scipy.linalg import expm

from lossqfi.fock import _padded, annihilation, oracle_sld, oracle_state
from lossqfi.gaussian import ProbeSpec, evolve, make_channel_point, make_probe
from lossqfi.sld import oracle_coefficients, sld_coefficients

GRID = [(n, x, z) for n in (0.5, 1.0, 2.0) for x in (0.25, 0.5, 1.0) for z in (0.1, 1.0, 5.0)]


def off_diagonal_weight(a_coef, b_coef, eta, dim=40):
    # K = A a+a + B(a^2 + a+^2) in the basis S(eta)^dagger |n>
    size = _padded(dim)
    a = annihilation(size)
    ad = a.conj().T
    k = a_coef * ad @ a + b_coef * (a @ a + ad @ ad)
    s = expm(-0.5 * eta * (a @ a - ad @ ad))
    m = (s.conj().T @ k @ s)[:dim // 2, :dim // 2]
    return float(np.abs(m - np.diag(np.diag(m))).max())


def main():
    print(f"{'nbar':>5} {'x':>5} {'z':>5} | {'A':>9} {'B':>9} {'F':>9} | "
          f"{'F_oracle':>9} {'Tr[rhoL]':>9} ell | off(tan) off(tanh)")
    for nbar, x, z in GRID:
        point = make_channel_point(z, "z")
        probe = ProbeSpec(nbar, x)
        state = evolve(make_probe(probe), point)
        cf = sld_coefficients(state, point.phi)
        rho, drho, ev = oracle_state(probe, point, 120)
        true = oracle_coefficients(oracle_sld(rho, drho, ev), state, point.phi)
        # closed-form Tr[rho L] only depends on F once A, B, C agree
        trace = cf.tan_prefactor * (cf.f_coef - true.f_coef)
        elliptic = cf.a_coef**2 > 4 * cf.b_coef**2
        r = -2 * cf.b_coef / cf.a_coef if cf.a_coef else math.inf
        off_tan = off_diagonal_weight(cf.a_coef, cf.b_coef, 0.5 * math.atan(r)) if elliptic else math.nan
        off_tanh = off_diagonal_weight(cf.a_coef, cf.b_coef, 0.5 * math.atanh(r)) if elliptic else math.nan
        print(f"{nbar:5.2f} {x:5.2f} {z:5.2f} | {cf.a_coef:9.5f} {cf.b_coef:9.5f} "
              f"{cf.f_coef:9.5f} | {true.f_coef:9.5f} {trace:9.5f} {'y' if elliptic else 'n':>3} | "
              f"{off_tan:8.1e} {off_tanh:8.1e}")


if __name__ == "__main__":
    main()
