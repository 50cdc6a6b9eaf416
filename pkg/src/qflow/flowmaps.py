"""Flow maps induced by a bipartite vector.

A two-factor vector ``Omega`` with amplitude matrix ``W[i, j]`` defines

* ``g``: kets on leg 1 to bras on leg 2, ``out[j] = sum_i conj(W[i, j]) x[i]``
  (for ``Omega = a (x) b`` this is ``|phi> -> <a|phi> <b|``);
* ``f``: bras on leg 1 to kets on leg 2, ``out[j] = sum_i c[i] W[i, j]``
  (for ``Omega = a (x) b`` this is ``<phi| -> <phi|a> |b>``).

The ``op`` variants enter on leg 2 and exit on leg 1.

A bra is stored by its covector components: ``<v|`` is held as ``conj(v)``,
so that applying it to a ket ``x`` is ``sum_k c[k] x[k]``. The only
conjugations between kets and bras happen in :meth:`FlowVector.bra_of` and
:meth:`FlowVector.to_ket`.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .statevec import DimensionError, MultiState, StateError


class Polarity(enum.Enum):
    KET = "ket"
    BRA = "bra"

    def flipped(self) -> "Polarity":
        return Polarity.BRA if self is Polarity.KET else Polarity.KET


class Kind(enum.Enum):
    G = "g"
    F = "f"


class PolarityError(StateError):
    """A flow map received a vector of the wrong polarity."""


class ChainError(StateError):
    """A chain breaks at a given step."""

    def __init__(self, step: int, reason: str):
        super().__init__(f"chain breaks at step {step}: {reason}")
        self.step = step
        self.reason = reason


class FlowVector:
    """Single-factor vector with explicit ket/bra polarity."""

    __slots__ = ("polarity", "comp")

    def __init__(self, comp, polarity: Polarity):
        arr = np.array(comp, dtype=complex).reshape(-1)
        if arr.size < 1 or not np.all(np.isfinite(arr)):
            raise StateError("flow vector components must be finite and nonempty")
        arr.setflags(write=False)
        self.comp = arr
        self.polarity = Polarity(polarity)

    @classmethod
    def ket(cls, state) -> "FlowVector":
        amp = state.amp if isinstance(state, MultiState) else state
        return cls(amp, Polarity.KET)

    @classmethod
    def bra_of(cls, state) -> "FlowVector":
        """The bra ``<state|`` of a ket given by its amplitudes."""
        amp = state.amp if isinstance(state, MultiState) else np.asarray(state, dtype=complex)
        return cls(np.conj(amp), Polarity.BRA)

    @property
    def dim(self) -> int:
        return self.comp.size

    def to_ket(self) -> MultiState:
        """The ket this vector represents, or whose bra it is."""
        if self.polarity is Polarity.KET:
            return MultiState(self.comp)
        return MultiState(np.conj(self.comp))

    def allclose(self, other: "FlowVector", atol: float = 1e-9) -> bool:
        return (
            self.polarity is other.polarity
            and self.dim == other.dim
            and bool(np.allclose(self.comp, other.comp, rtol=0.0, atol=atol))
        )

    def __mul__(self, c):
        return FlowVector(self.comp * complex(c), self.polarity)

    __rmul__ = __mul__

    def __repr__(self):
        return f"FlowVector({self.polarity.value}, {np.array2string(self.comp, precision=4)})"


@dataclass(frozen=True)
class FlowStep:
    kind: Kind
    op: bool
    omega: MultiState
    label: str = ""

    def __post_init__(self):
        if self.omega.n_factors != 2:
            raise DimensionError(f"flow step needs a two-factor vector, got dims {self.omega.dims}")
        object.__setattr__(self, "kind", Kind(self.kind))

    @property
    def entry_dim(self) -> int:
        return self.omega.dims[1] if self.op else self.omega.dims[0]

    @property
    def exit_dim(self) -> int:
        return self.omega.dims[0] if self.op else self.omega.dims[1]

    @property
    def consumes(self) -> Polarity:
        return Polarity.KET if self.kind is Kind.G else Polarity.BRA


def _matrix(omega: MultiState) -> np.ndarray:
    return omega.tensor_view()


def _check_entry(step: FlowStep, x: FlowVector) -> None:
    if x.polarity is not step.consumes:
        raise PolarityError(f"{step.kind.value} consumes a {step.consumes.value}, got a {x.polarity.value}")
    if x.dim != step.entry_dim:
        raise DimensionError(f"entry leg has dim {step.entry_dim}, vector has dim {x.dim}")


def g_apply(step: FlowStep, x: FlowVector) -> FlowVector:
    if step.kind is not Kind.G:
        raise ValueError("g_apply needs a g step")
    _check_entry(step, x)
    w = np.conj(_matrix(step.omega))
    out = w @ x.comp if step.op else x.comp @ w
    return FlowVector(out, Polarity.BRA)


def f_apply(step: FlowStep, x: FlowVector) -> FlowVector:
    if step.kind is not Kind.F:
        raise ValueError("f_apply needs an f step")
    _check_entry(step, x)
    w = _matrix(step.omega)
    out = w @ x.comp if step.op else x.comp @ w
    return FlowVector(out, Polarity.KET)


def apply_step(step: FlowStep, x: FlowVector) -> FlowVector:
    return g_apply(step, x) if step.kind is Kind.G else f_apply(step, x)


def evaluate_chain(steps: Sequence[FlowStep], x: FlowVector) -> FlowVector:
    """Apply ``steps`` in order, the first step first."""
    for k, step in enumerate(steps):
        if x.polarity is not step.consumes:
            raise ChainError(k, f"expected a {step.consumes.value}, got a {x.polarity.value}")
        if x.dim != step.entry_dim:
            raise ChainError(k, f"entry dim {step.entry_dim} != vector dim {x.dim}")
        x = apply_step(step, x)
    return x


def swap_legs(omega: MultiState) -> MultiState:
    """The same two-factor vector with its factors exchanged."""
    return MultiState(omega.tensor_view().T.reshape(-1), omega.dims[::-1])
