"""Dense pure states on ordered tensor products of finite-dimensional factors.

Factors are numbered from 1. Amplitudes are stored big-endian: factor 1 is
the slowest-varying index, so the amplitude vector of ``|a>|b>`` over dims
``(2, 2)`` is indexed ``2 * a + b``.

Operations never renormalize, except :func:`measure_in_basis`, which returns a
normalized post-measurement state.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np

MAX_TOTAL_DIM = 1 << 24
NORM_TOL = 1e-9
AMP_TOL = 1e-9
SPLIT_RTOL = 1e-9


class StateError(ValueError):
    """Base class for invalid state operations."""


class DimensionError(StateError):
    """Factor dimensions do not line up."""


class BasisError(StateError):
    """A measurement basis is not orthonormal and complete."""


class NormalizationError(StateError):
    """A state required to be normalized is not."""


class ZeroStateError(StateError):
    """The zero vector was given where a nonzero state is required."""


class NotNormalizedWarning(UserWarning):
    pass


def _check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if any(d < 1 for d in out):
        raise DimensionError(f"factor dimensions must be >= 1, got {out}")
    total = math.prod(out)
    if total >= MAX_TOTAL_DIM:
        raise DimensionError(f"total dimension {total} exceeds the limit {MAX_TOTAL_DIM - 1}")
    return out


@dataclass(frozen=True)
class FactorSpace:
    """Ordered list of factor dimensions."""

    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", _check_dims(self.dims))

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def select(self, factors: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.dims[i - 1] for i in check_selector(factors, self.n))

    def complement(self, factors: Sequence[int]) -> tuple[int, ...]:
        chosen = set(check_selector(factors, self.n))
        return tuple(i for i in range(1, self.n + 1) if i not in chosen)


def check_selector(factors: Sequence[int], n: int) -> tuple[int, ...]:
    """Validate a strictly increasing, nonempty list of 1-based factor indices."""
    sel = tuple(int(i) for i in factors)
    if not sel:
        raise DimensionError("selector must name at least one factor")
    if any(b <= a for a, b in zip(sel, sel[1:])):
        raise DimensionError(f"selector {sel} is not strictly increasing")
    if sel[0] < 1 or sel[-1] > n:
        raise DimensionError(f"selector {sel} out of range 1..{n}")
    return sel


class MultiState:
    """Immutable pure (not necessarily normalized) state on ``dims``."""

    __slots__ = ("_dims", "_amp")

    def __init__(self, amp, dims: Sequence[int] | None = None):
        arr = np.array(amp, dtype=complex).reshape(-1)
        dims = (arr.size,) if dims is None else _check_dims(dims)
        if arr.size != math.prod(dims):
            raise DimensionError(f"{arr.size} amplitudes do not fit dims {tuple(dims)}")
        if not np.all(np.isfinite(arr)):
            raise StateError("amplitudes must be finite")
        arr.setflags(write=False)
        self._dims = tuple(dims)
        self._amp = arr

    @classmethod
    def basis(cls, index: int, dims: Sequence[int]) -> "MultiState":
        amp = np.zeros(math.prod(dims), dtype=complex)
        amp[index] = 1.0
        return cls(amp, dims)

    @classmethod
    def zero(cls, dims: Sequence[int]) -> "MultiState":
        return cls(np.zeros(math.prod(dims), dtype=complex), dims)

    @classmethod
    def scalar(cls, value: complex) -> "MultiState":
        """A state on zero factors holding a single amplitude."""
        return cls([value], ())

    @property
    def dims(self) -> tuple[int, ...]:
        return self._dims

    @property
    def space(self) -> FactorSpace:
        return FactorSpace(self._dims)

    @property
    def n_factors(self) -> int:
        return len(self._dims)

    @property
    def amp(self) -> np.ndarray:
        return self._amp

    def tensor_view(self) -> np.ndarray:
        return self._amp.reshape(self._dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self._amp))

    @property
    def normalized(self) -> bool:
        return abs(float(np.vdot(self._amp, self._amp).real) - 1.0) <= NORM_TOL

    def is_zero(self, atol: float = AMP_TOL) -> bool:
        return bool(np.all(np.abs(self._amp) <= atol))

    def normalize(self) -> "MultiState":
        nrm = self.norm
        if nrm == 0.0:
            raise ZeroStateError("cannot normalize the zero state")
        return MultiState(self._amp / nrm, self._dims)

    def value(self) -> complex:
        """Amplitude of a zero-factor (scalar) state."""
        if self._dims:
            raise DimensionError("value() is only defined for zero-factor states")
        return complex(self._amp[0])

    def allclose(self, other: "MultiState", atol: float = AMP_TOL) -> bool:
        return self._dims == other._dims and bool(np.allclose(self._amp, other._amp, rtol=0.0, atol=atol))

    def max_diff(self, other: "MultiState") -> float:
        if self._dims != other._dims:
            raise DimensionError(f"dims {self._dims} != {other._dims}")
        return float(np.max(np.abs(self._amp - other._amp), initial=0.0))

    def __eq__(self, other):
        if not isinstance(other, MultiState):
            return NotImplemented
        return self._dims == other._dims and bool(np.array_equal(self._amp, other._amp))

    def __hash__(self):
        return hash((self._dims, self._amp.tobytes()))

    def __mul__(self, c):
        return MultiState(self._amp * complex(c), self._dims)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return MultiState(self._amp / complex(c), self._dims)

    def __neg__(self):
        return MultiState(-self._amp, self._dims)

    def __add__(self, other: "MultiState"):
        if self._dims != other._dims:
            raise DimensionError(f"dims {self._dims} != {other._dims}")
        return MultiState(self._amp + other._amp, self._dims)

    def __sub__(self, other: "MultiState"):
        return self + (-other)

    def __repr__(self):
        return f"MultiState(dims={self._dims}, amp={np.array2string(self._amp, precision=4)})"


StateLike = Union[MultiState, Sequence[complex], np.ndarray]


def as_state(x: StateLike, dims: Sequence[int] | None = None) -> MultiState:
    if isinstance(x, MultiState):
        if dims is not None and tuple(dims) != x.dims:
            raise DimensionError(f"expected dims {tuple(dims)}, got {x.dims}")
        return x
    return MultiState(x, dims)


def tensor(*parts: MultiState) -> MultiState:
    """Kronecker product, factor lists concatenated in order."""
    if not parts:
        raise StateError("tensor() needs at least one part")
    dims: tuple[int, ...] = ()
    for p in parts:
        dims += p.dims
    _check_dims(dims)
    amp = parts[0].amp
    for p in parts[1:]:
        amp = np.kron(amp, p.amp)
    return MultiState(amp, dims)


def embed(part: MultiState, factors: Sequence[int], rest: MultiState) -> MultiState:
    """Tensor ``part`` into positions ``factors`` and ``rest`` into the remaining slots."""
    n = part.n_factors + rest.n_factors
    sel = check_selector(factors, n) if part.n_factors else ()
    if len(sel) != part.n_factors:
        raise DimensionError(f"{part.n_factors}-factor part cannot fill slots {sel}")
    comp = [i for i in range(1, n + 1) if i not in sel]
    joint = np.multiply.outer(part.tensor_view(), rest.tensor_view())
    # joint axes are (sel..., comp...); move them to natural order
    order = list(sel) + comp
    perm = np.argsort([i - 1 for i in order])
    out = np.transpose(joint, perm) if n else joint
    dims = [0] * n
    for pos, i in enumerate(order):
        dims[i - 1] = (part.dims + rest.dims)[pos]
    return MultiState(out.reshape(-1), dims)


def _selected(omega: MultiState, phi: MultiState, factors: Sequence[int]) -> tuple[int, ...]:
    sel = check_selector(factors, phi.n_factors)
    want = tuple(phi.dims[i - 1] for i in sel)
    if omega.dims != want:
        raise DimensionError(f"state dims {omega.dims} do not match factors {sel} with dims {want}")
    return sel


def partial_inner(omega: MultiState, phi: MultiState, factors: Sequence[int]) -> MultiState:
    """Contract ``omega`` (anti-linearly) against ``phi`` on ``factors``.

    The result lives on the complementary factors in their original order; if
    ``factors`` covers everything it is the scalar ``<omega, phi>``.
    """
    sel = _selected(omega, phi, factors)
    axes = [i - 1 for i in sel]
    out = np.tensordot(np.conj(omega.tensor_view()), phi.tensor_view(), axes=(list(range(len(sel))), axes))
    dims = tuple(d for i, d in enumerate(phi.dims, start=1) if i not in sel)
    return MultiState(np.asarray(out).reshape(-1), dims)


def apply_rank_one(lam: MultiState, omega: MultiState, phi: MultiState, factors: Sequence[int]) -> MultiState:
    """``|lam><omega|`` acting on ``factors`` of ``phi``; no renormalization."""
    sel = _selected(omega, phi, factors)
    if lam.dims != omega.dims:
        raise DimensionError(f"lambda dims {lam.dims} != omega dims {omega.dims}")
    return embed(lam, sel, partial_inner(omega, phi, sel))


def apply_projector(omega: MultiState, phi: MultiState, factors: Sequence[int]) -> MultiState:
    """``|omega><omega|`` on ``factors``. Warns if ``omega`` is not normalized."""
    if not omega.normalized:
        warnings.warn("projector state is not normalized", NotNormalizedWarning, stacklevel=2)
    return apply_rank_one(omega, omega, phi, factors)


def inner(a: MultiState, b: MultiState) -> complex:
    if a.dims != b.dims:
        raise DimensionError(f"dims {a.dims} != {b.dims}")
    return complex(np.vdot(a.amp, b.amp))


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: int
    probability: float
    post: MultiState
    bits: tuple[int, ...]


def outcome_bits(outcome: int, n_outcomes: int) -> tuple[int, ...]:
    width = max(1, (n_outcomes - 1).bit_length())
    return tuple((outcome >> (width - 1 - k)) & 1 for k in range(width))


def check_basis(basis: Sequence[MultiState], dims: Sequence[int], tol: float = NORM_TOL) -> None:
    dims = tuple(dims)
    if len(basis) != math.prod(dims):
        raise BasisError(f"basis has {len(basis)} elements, need {math.prod(dims)} for dims {dims}")
    for b in basis:
        if b.dims != dims:
            raise BasisError(f"basis element dims {b.dims} != {dims}")
    mat = np.array([b.amp for b in basis])
    gram = mat.conj() @ mat.T
    if not np.allclose(gram, np.eye(len(basis)), rtol=0.0, atol=tol):
        raise BasisError("basis is not orthonormal")


def branch_probabilities(basis: Sequence[MultiState], phi: MultiState, factors: Sequence[int]) -> np.ndarray:
    """Born probabilities ``||P_k phi||^2`` for every basis element."""
    return np.array([partial_inner(b, phi, factors).norm ** 2 for b in basis])


def cdf_from(probs: np.ndarray) -> np.ndarray:
    """Cumulative distribution with the last entry exactly 1 (along the last axis)."""
    c = np.cumsum(probs, axis=-1)
    return c / c[..., -1:]


def pick(cdf: np.ndarray, u):
    """Inverse-CDF selection: the first index ``k`` with ``u < cdf[k]``.

    Works elementwise on a batch when ``cdf`` is 2-D and ``u`` 1-D.
    """
    cdf = np.asarray(cdf)
    if cdf.ndim == 1:
        return min(int(np.count_nonzero(cdf <= u)), cdf.size - 1)
    u = np.asarray(u)[:, None]
    return np.minimum(np.count_nonzero(cdf <= u, axis=1), cdf.shape[1] - 1)


def measure_in_basis(
    basis: Sequence[MultiState],
    phi: MultiState,
    factors: Sequence[int],
    rng: np.random.Generator,
) -> MeasurementRecord:
    """Projective measurement of ``factors`` in an orthonormal basis.

    Draws exactly one uniform from ``rng`` and selects the outcome by inverse
    CDF over the Born probabilities.
    """
    sel = check_selector(factors, phi.n_factors)
    check_basis(basis, tuple(phi.dims[i - 1] for i in sel))
    if not phi.normalized:
        raise NormalizationError(f"state norm {phi.norm} is not 1")
    probs = branch_probabilities(basis, phi, sel)
    if abs(probs.sum() - 1.0) > NORM_TOL:
        raise BasisError(f"branch probabilities sum to {probs.sum()}")
    k = pick(cdf_from(probs), rng.random())
    post = apply_projector(basis[k], phi, sel).normalize()
    return MeasurementRecord(k, float(probs[k]), post, outcome_bits(k, len(basis)))


def split_across_cut(phi: MultiState, left: Sequence[int]) -> tuple[MultiState, MultiState] | None:
    """Factor ``phi`` as ``A (x) B`` across the cut ``left | rest``.

    Returns ``None`` when the state is entangled across the cut and raises
    :class:`ZeroStateError` for the zero state. The right factor ``B`` is
    returned with unit norm and a nonnegative real amplitude at the pivot.
    """
    sel = check_selector(left, phi.n_factors)
    comp = [i for i in range(1, phi.n_factors + 1) if i not in sel]
    if not comp:
        raise DimensionError("cut must leave at least one factor on the right")
    ldims = tuple(phi.dims[i - 1] for i in sel)
    rdims = tuple(phi.dims[i - 1] for i in comp)
    mat = np.transpose(phi.tensor_view(), [i - 1 for i in sel] + [i - 1 for i in comp])
    mat = mat.reshape(math.prod(ldims), math.prod(rdims))
    peak = np.max(np.abs(mat), initial=0.0)
    if peak == 0.0:
        raise ZeroStateError("zero state has no product split")
    r, c = np.unravel_index(np.argmax(np.abs(mat)), mat.shape)
    a = mat[:, c]
    b = mat[r, :] / mat[r, c]
    if np.max(np.abs(np.outer(a, b) - mat)) > SPLIT_RTOL * peak:
        return None
    scale = np.linalg.norm(b)
    return MultiState(a * scale, ldims), MultiState(b / scale, rdims)
