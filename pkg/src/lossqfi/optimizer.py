"""Maximisation of the QFI over the squeezing fraction, and the figure sweeps."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError
from .qfi import qfi_coherent, qfi_value

PRESCAN_POINTS = 129
TIE_TOL = 1e-9

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimumX:
    x_opt: float
    h_max: float
    boundary: str  # "interior", "at_zero" or "at_one"
    evaluations: int


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200
) -> tuple[float, float, int]:
    """Golden-section search for a maximum of ``f`` on ``[lo, hi]``.

    Returns ``(x, f(x), evaluations)``; ``x`` is the best point visited.
    """
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    best = (c, fc) if fc >= fd else (d, fd)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
            evals += 1
            if fc > best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
            evals += 1
            if fd > best[1]:
                best = (d, fd)
    return best[0], best[1], evals


def _candidate_cells(h: np.ndarray) -> list[int]:
    """Indices of pre-scan maxima tied within TIE_TOL, one per separated run."""
    top = h.max()
    tied = np.flatnonzero(h >= top - TIE_TOL * max(abs(top), 1.0))
    picks = []
    for i in tied:
        if picks and i - picks[-1] <= 1:
            # same run: keep the larger
            if h[i] > h[picks[-1]]:
                picks[-1] = i
            continue
        picks.append(int(i))
    return picks


def optimize_x(nbar: float, z: float, tol: float = 1e-10) -> OptimumX:
    """Maximise ``H(x)`` on [0, 1] at fixed ``nbar`` and ``z``.

    A 129-point pre-scan picks the bracketing cell(s); each is refined by golden
    section.  When the pre-scan maximum sits on an end point and refinement of
    the adjacent cell cannot beat it, the end point is reported with a flag.
    """
    if not (nbar > 0 and z > 0):
        raise DomainError(f"nbar and z must be > 0, got nbar={nbar}, z={z}")
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol}")
    grid = np.linspace(0.0, 1.0, PRESCAN_POINTS)
    h = qfi_value(nbar, grid, z)
    evals = PRESCAN_POINTS

    def f(x):
        return float(qfi_value(nbar, x, z))

    best = None
    last = PRESCAN_POINTS - 1
    for i in _candidate_cells(h):
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, last)]
        x, hx, n = golden_section_max(f, lo, hi, tol)
        evals += n
        if i in (0, last) and hx <= h[i]:
            x, hx = grid[i], float(h[i])
            flag = "at_zero" if i == 0 else "at_one"
        else:
            flag = "interior"
        if hx < h[i]:
            # never report less than the pre-scan point
            x, hx = grid[i], float(h[i])
        if best is None or hx > best.h_max:
            best = OptimumX(float(x), float(hx), flag, evals)
    return OptimumX(best.x_opt, best.h_max, best.boundary, evals)


class Fig1Row(NamedTuple):
    nbar: float
    x: float
    H: float
    H_over_nbar: float


class Fig2LeftRow(NamedTuple):
    z: float
    nbar: float
    inv_Hmax: float


class Fig2RightRow(NamedTuple):
    nbar: float
    z: float
    inv_Hopt: float
    inv_Hcoh: float
    ratio: float


def sweep_x(nbars: Sequence[float], z: float, grid: int = 101) -> list[Fig1Row]:
    """Normalised QFI versus squeezing fraction for each probe energy."""
    if grid < 2:
        raise DomainError(f"grid must be >= 2, got {grid}")
    xs = np.linspace(0.0, 1.0, grid)
    rows = []
    for nbar in nbars:
        h = qfi_value(nbar, xs, z)
        rows.extend(Fig1Row(float(nbar), float(x), float(v), float(v / nbar)) for x, v in zip(xs, h))
    return rows


def sweep_energy(zs: Sequence[float], nbar_grid: Sequence[float]) -> list[Fig2LeftRow]:
    """Optimal rescaled variance ``1/H_max`` versus probe energy."""
    return [
        Fig2LeftRow(float(z), float(n), 1.0 / optimize_x(n, z).h_max)
        for z in zs
        for n in nbar_grid
    ]


def sweep_compare_coherent(nbars: Sequence[float], z_grid: Sequence[float]) -> list[Fig2RightRow]:
    """Optimal versus coherent-probe variance; ``ratio = inv_Hcoh / inv_Hopt``."""
    rows = []
    for n in nbars:
        for z in z_grid:
            inv_opt = 1.0 / optimize_x(n, z).h_max
            inv_coh = 1.0 / qfi_coherent(n, z)
            rows.append(Fig2RightRow(float(n), float(z), inv_opt, inv_coh, inv_coh / inv_opt))
    return rows


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
