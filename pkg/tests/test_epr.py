import numpy as np

from qflow import rng as qrng
from qflow.epr import CHSH_ANGLES, chsh, epr_correlation, epr_trial, expected_correlation, rotated_basis
from qflow.statevec import check_basis


def test_rotated_basis():
    for a in (0.0, 0.7, np.pi):
        check_basis(rotated_basis(a), (2,))


def test_scalar_and_batch_agree():
    a, b = 0.4, 1.3
    est = epr_correlation(a, b, 3000, seed=6)
    scalar = np.mean([epr_trial(a, b, qrng.trial_rng(6, t, 2)) for t in range(3000)])
    assert est.estimate == scalar


def test_perfect_anticorrelation():
    est = epr_correlation(0.5, 0.5, 2000, seed=1)
    assert est.estimate == -1.0 and est.within(1)


def test_correlation_estimates():
    for k, (a, b) in enumerate([(0, 0.3), (0.2, 2.0), (1.0, -1.0)]):
        est = epr_correlation(a, b, 100_000, seed=k)
        assert est.exact == expected_correlation(a, b)
        assert est.within(4)


def test_chsh():
    res = chsh(100_000, seed=2)
    assert abs(res.exact - 2 * np.sqrt(2)) < 1e-12
    assert res.value > 2.7
    assert len(res.terms) == 4 and CHSH_ANGLES[1] == np.pi / 2
