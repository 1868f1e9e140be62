"""Monte-Carlo check that a one-step adaptive SLD measurement reaches the quantum Cramer-Rao bound.

Each trial spends ``ceil(N**delta)`` copies on plain photon counting to get a
rough value ``phi0``, fixes the SLD eigenbasis at ``phi0`` and measures the
remaining copies in it.  The final estimate is the maximum-likelihood value of
``phi`` for the second-stage counts.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .fock import (
    LossFamily,
    build_fock_state,
    classical_fisher,
    default_dim,
    drho_dphi,
    project_diagonal,
    solve_sld,
    sld_eigenbasis,
)
from .gaussian import ChannelPoint, ProbeSpec, make_probe
from .optimizer import golden_section_max

PHI_MAX = math.pi / 2 - 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    probe: ProbeSpec
    true_point: ChannelPoint
    n_copies: int
    delta: float = 0.6
    trials: int = 200
    seed: int = 0
    phi_grid: tuple[float, float, int] | None = None  # fixed (min, max, steps); None = adaptive
    grid_steps: int = 512
    refine_tol: float = 1e-6
    dim: int | None = None
    basis: str = "sld"  # "sld" or "fock"

    def __post_init__(self):
        if not 0.5 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (1/2, 1), got {self.delta}")
        if self.n_copies ** self.delta < 10:
            raise DomainError(
                f"rough stage too small: N**delta = {self.n_copies ** self.delta:.3g} < 10"
            )
        if self.trials < 2:
            raise DomainError(f"need at least 2 trials, got {self.trials}")
        if self.basis not in ("sld", "fock"):
            raise DomainError(f"basis must be 'sld' or 'fock', got {self.basis!r}")
        if self.probe.nbar <= 0:
            raise DomainError("the probe must carry energy (nbar > 0)")
        if self.phi_grid is not None:
            lo, hi, steps = self.phi_grid
            if not lo <= self.true_point.phi <= hi or steps < 3:
                raise DomainError(f"phi_grid {self.phi_grid} must bracket phi={self.true_point.phi}")

    @property
    def n_rough(self) -> int:
        return math.ceil(self.n_copies**self.delta)


@dataclass
class TrialStats:
    estimates: np.ndarray
    rough_estimates: np.ndarray
    fisher: np.ndarray  # F(phi_true) of each trial's measurement basis
    n_copies: int
    empirical_var: float
    crb: float
    z_score: float
    phi_true: float = field(default=float("nan"))

    @property
    def trials(self) -> int:
        return len(self.estimates)

    @property
    def effective_fisher(self) -> float:
        return 1.0 / float(np.mean(1.0 / self.fisher))

    @property
    def scaled_var(self) -> float:
        return self.n_copies * self.empirical_var

    @property
    def sampling_se(self) -> float:
        """Standard error of the sample variance, evaluated at the bound."""
        return self.crb * math.sqrt(2.0 / (self.trials - 1))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trial", "phi_hat", "phi_rough", "fisher"])
            for i, (p, p0, f) in enumerate(zip(self.estimates, self.rough_estimates, self.fisher)):
                w.writerow([i, f"{p:.17g}", f"{p0:.17g}", f"{f:.17g}"])

    def write_summary_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N", "M", "empirical_var", "crb", "z_score"])
            w.writerow([
                self.n_copies, self.trials,
                f"{self.empirical_var:.17g}", f"{self.crb:.17g}", f"{self.z_score:.17g}",
            ])


@dataclass
class PmfModel:
    """Outcome distributions ``p_k(phi)`` on a search grid plus an evaluator off the grid."""

    grid: np.ndarray
    grid_pmfs: np.ndarray  # (len(grid), n_outcomes)
    pmf: Callable[[float], np.ndarray]


def rough_estimate(counts: np.ndarray, probe: ProbeSpec) -> float:
    """Invert the mean photon count ``nbar cos(phi)**2`` of a photon-counting sample.

    ``counts[k]`` is the number of shots that registered ``k`` photons.
    """
    if probe.nbar <= 0:
        raise DomainError("rough estimate needs nbar > 0")
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise DomainError("empty photon-count sample")
    mean = float(np.arange(len(counts)) @ counts) / total
    ratio = min(max(mean / probe.nbar, 0.0), 1.0)
    return math.acos(math.sqrt(ratio))


def _rough_spread(counts: np.ndarray, probe: ProbeSpec, phi0: float) -> float:
    k = np.arange(len(counts))
    total = counts.sum()
    mean = k @ counts / total
    sd = math.sqrt(max(((k - mean) ** 2) @ counts / total, 0.0) / total)
    slope = probe.nbar * abs(math.sin(2.0 * phi0))
    if slope < 1e-6:
        return math.pi / 8
    return min(max(sd / slope, 1e-3), math.pi / 4)


def simulate_counts(pmf: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial outcome counts for ``n`` shots."""
    pmf = np.clip(np.asarray(pmf, dtype=float), 0.0, None)
    if n == 0:
        return np.zeros(len(pmf), dtype=np.int64)
    return rng.multinomial(n, pmf / pmf.sum())


def _log_likelihood(counts: np.ndarray, pmf: np.ndarray) -> np.ndarray:
    hit = counts > 0
    with np.errstate(divide="ignore"):
        return np.log(pmf[..., hit]) @ counts[hit]


def ml_estimate(counts: np.ndarray, model: PmfModel, tol: float = 1e-6) -> float:
    """Grid argmax of the log-likelihood, refined by golden section between neighbours."""
    counts = np.asarray(counts, dtype=float)
    hit = np.flatnonzero(counts > 0)
    support = model.grid_pmfs[:, hit] > 0
    dead = hit[~support.any(axis=0)]
    if dead.size:
        raise DomainError(f"outcome {int(dead[0])} has zero probability everywhere on the grid")
    ll = _log_likelihood(counts, model.grid_pmfs)
    i = int(np.argmax(ll))
    lo = model.grid[max(i - 1, 0)]
    hi = model.grid[min(i + 1, len(model.grid) - 1)]

    def f(phi):
        value = float(_log_likelihood(counts, model.pmf(phi)))
        return value if math.isfinite(value) else -math.inf

    phi, value, _ = golden_section_max(f, lo, hi, tol)
    return float(phi) if value >= ll[i] else float(model.grid[i])


def _basis_at(family: LossFamily, phi: float) -> np.ndarray:
    rho = family.density(phi)
    return sld_eigenbasis(solve_sld(rho, drho_dphi(rho, phi)).sld)


def basis_fisher(family: LossFamily, phi_true: float, basis: np.ndarray) -> float:
    """Classical Fisher information at ``phi_true`` of a projective measurement in ``basis``."""
    rho = family.density(phi_true)
    pmf = np.clip(project_diagonal(rho, basis), 0.0, None)
    dpmf = project_diagonal(drho_dphi(rho, phi_true), basis)
    return classical_fisher(pmf, dpmf).value


def _grid_for(config: ExperimentConfig, phi0: float, sigma0: float) -> np.ndarray:
    if config.phi_grid is not None:
        lo, hi, steps = config.phi_grid
        return np.linspace(lo, hi, int(steps))
    lo = max(0.0, phi0 - 5.0 * sigma0)
    hi = min(PHI_MAX, phi0 + 5.0 * sigma0)
    return np.linspace(lo, hi, config.grid_steps)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def run_trials(config: ExperimentConfig) -> TrialStats:
    """Run ``config.trials`` independent one-step adaptive experiments."""
    probe_state = make_probe(config.probe)
    dim = config.dim or default_dim(probe_state)
    family = LossFamily(build_fock_state(probe_state, dim))
    phi_true = config.true_point.phi
    rho_true = family.density(phi_true)
    counting_pmf = np.clip(np.real(np.diag(rho_true)), 0.0, None)
    n_second = config.n_copies - config.n_rough
    identity = np.eye(dim)

    estimates, roughs, fishers = [], [], []
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        rough_counts = simulate_counts(counting_pmf, config.n_rough, rng)
        phi0 = rough_estimate(rough_counts, config.probe)
        sigma0 = _rough_spread(rough_counts, config.probe, phi0)

        basis = identity if config.basis == "fock" else _basis_at(family, phi0)
        true_pmf = family.pmfs(phi_true, basis)[0]
        counts = simulate_counts(true_pmf, n_second, rng)

        grid = _grid_for(config, phi0, sigma0)
        model = PmfModel(grid, family.pmfs(grid, basis), lambda p, b=basis: family.pmfs(p, b)[0])
        estimates.append(ml_estimate(counts, model, config.refine_tol))
        roughs.append(phi0)
        fishers.append(basis_fisher(family, phi_true, basis))

    estimates = np.array(estimates)
    fishers = np.array(fishers)
    empirical_var = float(np.var(estimates, ddof=1))
    crb = float(np.mean(1.0 / fishers)) / config.n_copies
    se = crb * math.sqrt(2.0 / (config.trials - 1))
    return TrialStats(
        estimates=estimates,
        rough_estimates=np.array(roughs),
        fisher=fishers,
        n_copies=config.n_copies,
        empirical_var=empirical_var,
        crb=crb,
        z_score=(empirical_var - crb) / se,
        phi_true=phi_true,
    )
