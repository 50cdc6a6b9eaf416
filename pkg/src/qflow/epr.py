"""Singlet correlations under measurements in rotated bases.

Each qubit is measured along a direction at angle ``a`` in the x-z plane,
with outcome +1 on ``cos(a/2)|0> + sin(a/2)|1>`` and -1 on the orthogonal
state. For the singlet the expected product of outcomes is ``-cos(a - b)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as qrng
from .statevec import MultiState, apply_projector, branch_probabilities, cdf_from, measure_in_basis, pick
from .teleport import singlet

CHSH_ANGLES = (0.0, np.pi / 2, np.pi / 4, 3 * np.pi / 4)


def rotated_basis(angle: float) -> tuple[MultiState, MultiState]:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return MultiState([c, s]), MultiState([-s, c])


def expected_correlation(a: float, b: float) -> float:
    return -float(np.cos(a - b))


def epr_trial(a: float, b: float, gen: np.random.Generator) -> int:
    """One shot: measure qubit 1 along ``a``, then qubit 2 along ``b``; returns the product of signs."""
    first = measure_in_basis(rotated_basis(a), singlet(), [1], gen)
    second = measure_in_basis(rotated_basis(b), first.post, [2], gen)
    return (1 - 2 * first.outcome) * (1 - 2 * second.outcome)


def _branch_table(a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Born probabilities for qubit 1, and for qubit 2 conditioned on each qubit-1 outcome."""
    theta = singlet()
    ba, bb = rotated_basis(a), rotated_basis(b)
    p1 = branch_probabilities(ba, theta, [1])
    p2 = np.array([branch_probabilities(bb, apply_projector(ba[k], theta, [1]).normalize(), [2]) for k in range(2)])
    return p1, p2


@dataclass(frozen=True)
class CorrelationEstimate:
    a: float
    b: float
    estimate: float
    stderr: float
    exact: float
    trials: int

    def within(self, n_sigma: float) -> bool:
        sigma = np.sqrt(max(1.0 - self.exact**2, 0.0) / self.trials)
        return abs(self.estimate - self.exact) <= n_sigma * sigma + 1e-9


def epr_correlation(a: float, b: float, trials: int, seed: int, offset: int = 0) -> CorrelationEstimate:
    """Estimate the correlation from trials ``offset .. offset + trials - 1`` of ``seed``.

    Gives the same outcomes as :func:`epr_trial` run on ``trial_rng(seed, t, 2)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p1, p2 = _branch_table(a, b)
    u = qrng.trial_uniforms(seed, offset, offset + trials, 2)
    k1 = pick(np.broadcast_to(cdf_from(p1), (trials, 2)), u[:, 0])
    k2 = pick(cdf_from(p2)[k1], u[:, 1])
    signs = (1 - 2 * k1) * (1 - 2 * k2)
    est = float(signs.mean())
    stderr = float(signs.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return CorrelationEstimate(a, b, est, stderr, expected_correlation(a, b), trials)


@dataclass(frozen=True)
class ChshResult:
    terms: tuple[CorrelationEstimate, ...]
    value: float
    exact: float


def chsh(trials: int, seed: int, angles: tuple[float, float, float, float] = CHSH_ANGLES) -> ChshResult:
    """``|E(a,b) - E(a,b') + E(a',b) + E(a',b')|`` from independent trial blocks."""
    a, a2, b, b2 = angles
    pairs = [(a, b), (a, b2), (a2, b), (a2, b2)]
    terms = tuple(epr_correlation(x, y, trials, seed, offset=k * trials) for k, (x, y) in enumerate(pairs))
    sign = (1, -1, 1, 1)
    value = abs(sum(s * t.estimate for s, t in zip(sign, terms)))
    exact = abs(sum(s * t.exact for s, t in zip(sign, terms)))
    return ChshResult(terms, value, exact)
