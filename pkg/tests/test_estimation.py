import math

import numpy as np
import pytest

from lossqfi.errors import DomainError
from lossqfi.estimation import (
    ExperimentConfig,
    PmfModel,
    _basis_at,
    basis_fisher,
    ml_estimate,
    rough_estimate,
    run_trials,
    simulate_counts,
    trial_rng,
)
from lossqfi.fock import LossFamily, build_fock_state
from lossqfi.gaussian import ProbeSpec, make_channel_point, make_probe
from lossqfi.qfi import qfi_value

PROBE = ProbeSpec(1.0, 1.0)
POINT = make_channel_point(1.0, "z")


def counts_with_mean(mean, shots=1000):
    # two-bin histogram over 0 and 2 photons with the requested mean
    hi = round(mean / 2 * shots)
    return np.array([shots - hi, 0, hi])


def test_rough_estimate_lossless():
    assert rough_estimate(counts_with_mean(1.0), ProbeSpec(1.0, 0.5)) == pytest.approx(0.0, abs=1e-12)


def test_rough_estimate_half_transmission():
    assert rough_estimate(counts_with_mean(1.0), ProbeSpec(2.0, 0.5)) == pytest.approx(math.pi / 4)


def test_rough_estimate_clamps():
    assert rough_estimate(counts_with_mean(2.0), ProbeSpec(1.0, 0.5)) == 0.0
    assert rough_estimate(np.array([10, 0, 0]), ProbeSpec(1.0, 0.5)) == pytest.approx(math.pi / 2)


def test_rough_estimate_errors():
    with pytest.raises(DomainError):
        rough_estimate(np.array([10]), ProbeSpec(0.0, 0.5))
    with pytest.raises(DomainError):
        rough_estimate(np.zeros(3), ProbeSpec(1.0, 0.5))


def test_simulate_counts():
    pmf = np.array([0.2, 0.5, 0.3])
    assert simulate_counts(pmf, 0, trial_rng(0, 0)).tolist() == [0, 0, 0]
    a = simulate_counts(pmf, 1000, trial_rng(3, 4))
    b = simulate_counts(pmf, 1000, trial_rng(3, 4))
    assert a.sum() == 1000 and np.array_equal(a, b)
    assert not np.array_equal(a, simulate_counts(pmf, 1000, trial_rng(3, 5)))


def _binary_model():
    grid = np.linspace(0.0, 1.0, 101)

    def pmf(p):
        p = np.atleast_1d(p)
        return np.stack([p, 1 - p], axis=-1)

    return PmfModel(grid, pmf(grid), lambda p: pmf(p)[0])


def test_ml_estimate_proportional_counts():
    assert ml_estimate(np.array([30, 70]), _binary_model(), tol=1e-10) == pytest.approx(0.3, abs=1e-7)


def test_ml_single_count_is_grid_argmax():
    model = _binary_model()
    assert ml_estimate(np.array([1, 0]), model) == pytest.approx(1.0, abs=1e-6)


def test_ml_dead_outcome():
    grid = np.linspace(0, 1, 5)
    pmfs = np.stack([np.ones(5), np.zeros(5)], axis=-1)
    model = PmfModel(grid, pmfs, lambda p: np.array([1.0, 0.0]))
    with pytest.raises(DomainError, match="outcome 1"):
        ml_estimate(np.array([3, 1]), model)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_copies": 10_000, "delta": 0.5},
        {"n_copies": 10_000, "delta": 1.0},
        {"n_copies": 20, "delta": 0.6},
        {"n_copies": 1000, "trials": 1},
        {"n_copies": 1000, "basis": "heterodyne"},
        {"n_copies": 1000, "phi_grid": (0.9, 1.0, 50)},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        ExperimentConfig(PROBE, POINT, **kwargs)


def test_config_rough_size():
    assert ExperimentConfig(PROBE, POINT, 10_000).n_rough == 252


def test_run_trials_deterministic():
    cfg = ExperimentConfig(PROBE, POINT, 2000, trials=6, seed=11, dim=80)
    a, b = run_trials(cfg), run_trials(cfg)
    assert np.array_equal(a.estimates, b.estimates)
    assert a.empirical_var == b.empirical_var
    c = run_trials(ExperimentConfig(PROBE, POINT, 2000, trials=6, seed=12, dim=80))
    assert not np.array_equal(a.estimates, c.estimates)


def test_adaptive_basis_converges_to_qfi():
    family = LossFamily(build_fock_state(make_probe(PROBE), 80))
    h = float(qfi_value(PROBE.nbar, PROBE.x, POINT.z))
    pmf = np.clip(np.real(np.diag(family.density(POINT.phi))), 0, None)

    def mean_gap(n):
        gaps = []
        for t in range(10):
            counts = simulate_counts(pmf, math.ceil(n**0.6), trial_rng(5, t))
            phi0 = rough_estimate(counts, PROBE)
            gaps.append(1 - basis_fisher(family, POINT.phi, _basis_at(family, phi0)) / h)
        return float(np.mean(gaps))

    small, large = mean_gap(1e3), mean_gap(1e5)
    assert 0 <= large < small


def test_sld_basis_at_truth_attains_qfi():
    family = LossFamily(build_fock_state(make_probe(PROBE), 80))
    h = float(qfi_value(PROBE.nbar, PROBE.x, POINT.z))
    f = basis_fisher(family, POINT.phi, _basis_at(family, POINT.phi))
    assert f == pytest.approx(h, rel=1e-4)


@pytest.mark.slow
def test_small_run_near_bound():
    stats = run_trials(ExperimentConfig(PROBE, POINT, 4000, trials=60, seed=3, dim=80))
    assert stats.fisher.max() <= float(qfi_value(1.0, 1.0, 1.0)) * (1 + 1e-6)
    assert abs(np.mean(stats.estimates) - POINT.phi) < 4 * math.sqrt(stats.empirical_var / 60)
    assert abs(stats.z_score) < 4
