"""Measurement-only simulation of single-qubit phase gates.

The gate ``U(phi): a|0> + b|1> -> a|0> + e^{i phi} b|1>`` is simulated by

1. preparing ``a|00> + b|11>``,
2. measuring qubit 1 in ``eta_pm = (|0> +- e^{-i phi}|1>) / sqrt(2)``, which
   leaves qubit 2 in ``a|0> +- e^{i phi} b|1>``, and
3. measuring the final projector onto ``omega`` on a "+" record, or onto
   ``Z omega`` on a "-" record.

Over a sequence of gates the "-" records accumulate in a Z byproduct frame,
which is what the final measurement consults.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from . import rng as qrng
from .statevec import (
    MultiState,
    NormalizationError,
    cdf_from,
    measure_in_basis,
    partial_inner,
    pick,
)

SQRT_HALF = 1.0 / np.sqrt(2.0)
Z = np.diag([1.0, -1.0]).astype(complex)


def _qubit(psi) -> MultiState:
    psi = psi if isinstance(psi, MultiState) else MultiState(psi)
    if psi.dims != (2,):
        raise ValueError(f"expected a single qubit, got dims {psi.dims}")
    if not psi.normalized:
        raise NormalizationError(f"qubit norm {psi.norm} is not 1")
    return psi


@dataclass(frozen=True)
class PhaseGateRun:
    phi: float
    branch: str  # "+" or "-"
    post: MultiState
    classical_bit: int


@dataclass(frozen=True)
class ByproductFrame:
    z_parity: int = 0

    def absorb(self, bit: int) -> "ByproductFrame":
        return ByproductFrame(self.z_parity ^ (bit & 1))


def entangle_input(psi) -> MultiState:
    """``a|00> + b|11>`` built from the amplitudes of ``psi``."""
    a, b = _qubit(psi).amp
    return MultiState([a, 0, 0, b], (2, 2))


def eta_basis(phi: float) -> tuple[MultiState, MultiState]:
    """``(|0> + e^{-i phi}|1>)/sqrt(2)`` and ``(|0> - e^{-i phi}|1>)/sqrt(2)``.

    The conjugate phase makes the surviving qubit pick up ``e^{+i phi}``.
    """
    w = np.exp(-1j * phi)
    return MultiState([SQRT_HALF, SQRT_HALF * w]), MultiState([SQRT_HALF, -SQRT_HALF * w])


def unitary_oracle(psi, phi: float) -> MultiState:
    psi = psi if isinstance(psi, MultiState) else MultiState(psi)
    a, b = psi.amp
    return MultiState([a, np.exp(1j * phi) * b])


def branch_components(psi, phi: float) -> tuple[MultiState, MultiState]:
    """Exact unnormalized qubit-2 components ``<eta_pm| (x) 1`` of the entangled state.

    Each carries the branch amplitude ``1/sqrt(2)``.
    """
    ent = entangle_input(psi)
    plus, minus = eta_basis(phi)
    return partial_inner(plus, ent, [1]), partial_inner(minus, ent, [1])


def simulate_phase_gate(psi, phi: float, gen: np.random.Generator) -> PhaseGateRun:
    """Steps 1 and 2: entangle, then measure qubit 1 in the eta basis."""
    ent = entangle_input(psi)
    basis = eta_basis(phi)
    rec = measure_in_basis(basis, ent, [1], gen)
    post = partial_inner(basis[rec.outcome], rec.post, [1])
    return PhaseGateRun(phi, "+-"[rec.outcome], post, rec.outcome)


def corrected_basis_state(omega, branch) -> MultiState:
    """``omega`` for a "+" record (or parity 0), ``Z omega`` for "-" (or parity 1)."""
    omega = _qubit(omega)
    flip = branch in ("-", 1, True)
    if branch not in ("+", "-", 0, 1, True, False):
        raise ValueError(f"branch must be '+', '-', 0 or 1, got {branch!r}")
    return MultiState(Z @ omega.amp) if flip else omega


@dataclass(frozen=True)
class AmplitudeReport:
    plus: complex
    unitary: complex
    minus: complex
    max_deviation: float

    def passed(self, tol: float = 1e-12) -> bool:
        return self.max_deviation <= tol


def amplitude_identity_check(psi, phi: float, omega) -> AmplitudeReport:
    """``<omega|psi_+> = <omega|U|psi>/sqrt(2) = <Z omega|psi_->`` with exact branch components."""
    omega = _qubit(omega)
    psi_plus, psi_minus = branch_components(psi, phi)
    plus = complex(np.vdot(omega.amp, psi_plus.amp))
    unitary = complex(np.vdot(omega.amp, unitary_oracle(psi, phi).amp)) * SQRT_HALF
    minus = complex(np.vdot(corrected_basis_state(omega, "-").amp, psi_minus.amp))
    dev = max(abs(plus - unitary), abs(minus - unitary), abs(plus - minus))
    return AmplitudeReport(plus, unitary, minus, dev)


def _complement(omega: MultiState) -> MultiState:
    a, b = omega.amp
    return MultiState([-np.conj(b), np.conj(a)])


def exact_probability(psi, angles: Sequence[float], omega) -> float:
    """``|<omega| U(angles[-1]) ... U(angles[0]) |psi>|^2``."""
    state = _qubit(psi)
    for phi in angles:
        state = unitary_oracle(state, phi)
    return float(abs(np.vdot(_qubit(omega).amp, state.amp)) ** 2)


def forced_branch_probability(psi, angles: Sequence[float], omega, bits: Sequence[int], correct: bool = True) -> float:
    """Success probability along a fixed record of classical bits.

    With ``correct`` the final projector follows the byproduct frame; without
    it the uncorrected ``omega`` is always used.
    """
    if len(bits) != len(angles):
        raise ValueError("need one bit per angle")
    state = _qubit(psi)
    frame = ByproductFrame()
    for phi, bit in zip(angles, bits):
        comp = branch_components(state, phi)[bit]
        state = comp.normalize()
        frame = frame.absorb(bit)
    target = corrected_basis_state(omega, frame.z_parity) if correct else _qubit(omega)
    return float(abs(np.vdot(target.amp, state.amp)) ** 2)


def mbqc_trial(psi, angles: Sequence[float], omega, gen: np.random.Generator) -> bool:
    """One shot of the measurement-only chain; True on a final "yes"."""
    state = _qubit(psi)
    frame = ByproductFrame()
    for phi in angles:
        run = simulate_phase_gate(state, phi, gen)
        state = run.post
        frame = frame.absorb(run.classical_bit)
    target = corrected_basis_state(omega, frame.z_parity)
    rec = measure_in_basis([target, _complement(target)], state, [1], gen)
    return rec.outcome == 0


def _batch_trials(psi, angles, omega, uniforms: np.ndarray) -> np.ndarray:
    """Vectorized equivalent of :func:`mbqc_trial` over rows of ``uniforms``."""
    n = uniforms.shape[0]
    state = np.tile(_qubit(psi).amp, (n, 1))
    parity = np.zeros(n, dtype=np.int64)
    for k, phi in enumerate(angles):
        w = np.exp(1j * phi)
        plus = np.stack([state[:, 0], w * state[:, 1]], axis=1) * SQRT_HALF
        minus = np.stack([state[:, 0], -w * state[:, 1]], axis=1) * SQRT_HALF
        probs = np.stack([np.sum(abs(plus) ** 2, 1), np.sum(abs(minus) ** 2, 1)], axis=1)
        bit = pick(cdf_from(probs), uniforms[:, k])
        chosen = np.where(bit[:, None] == 0, plus, minus)
        state = chosen / np.linalg.norm(chosen, axis=1, keepdims=True)
        parity ^= bit
    om = _qubit(omega).amp
    target = np.where(parity[:, None] == 0, om, Z @ om)
    p_yes = np.abs(np.sum(np.conj(target) * state, axis=1)) ** 2
    # complement of (a, b) is (-conj b, conj a); its overlap with the state
    comp = np.stack([-np.conj(target[:, 1]), np.conj(target[:, 0])], axis=1)
    p_no = np.abs(np.sum(np.conj(comp) * state, axis=1)) ** 2
    final = pick(cdf_from(np.stack([p_yes, p_no], axis=1)), uniforms[:, len(angles)])
    return final == 0


@dataclass(frozen=True)
class TransitionEstimate:
    estimate: float
    stderr: float
    exact: float
    trials: int
    successes: int

    @property
    def z_score(self) -> float:
        sigma = np.sqrt(self.exact * (1 - self.exact) / self.trials)
        diff = abs(self.estimate - self.exact)
        if sigma == 0:
            return 0.0 if diff <= 1e-9 else np.inf
        return float(diff / sigma)

    def within(self, n_sigma: float) -> bool:
        sigma = np.sqrt(self.exact * (1 - self.exact) / self.trials)
        return abs(self.estimate - self.exact) <= n_sigma * sigma + 1e-9


def mbqc_transition_probability(
    psi,
    angles: Sequence[float],
    omega,
    trials: int,
    seed: int,
    chunk: int = 65536,
) -> TransitionEstimate:
    """Monte Carlo estimate of the transition probability through the one-way chain.

    Trial ``t`` draws ``len(angles) + 1`` uniforms from its own stream
    :func:`qflow.rng.trial_rng` ``(seed, t)``; the estimate does not depend on
    ``chunk``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    angles = [float(a) for a in angles]
    draws = len(angles) + 1
    successes = 0
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        u = qrng.trial_uniforms(seed, start, stop, draws)
        successes += int(np.count_nonzero(_batch_trials(psi, angles, omega, u)))
    est = successes / trials
    stderr = float(np.sqrt(est * (1 - est) / trials))
    return TransitionEstimate(est, stderr, exact_probability(psi, angles, omega), trials, successes)
