"""Measurement-box diagrams: temporal evaluation versus flow evaluation.

A scenario is a product input ``phi (x) Phi_rest`` hit by a time-ordered list
of bipartite rank-one boxes ``|Lambda><Omega|``. Each box has a lower
``Omega`` half (a bra joining two wires) and an upper ``Lambda`` half (a ket
emitting two wires).

:func:`extract_flow` walks the wire diagram from the bottom of the input
line, reversing direction at every box half it enters, and records the
visited halves as ``f`` (``Omega`` entered moving up) and ``g`` (``Lambda``
entered moving down) flow maps. The walk ends either at the top of a line
(the output factor) or at the bottom of a rest line, where the chain vector
is contracted into the rest state. Everything not visited forms the
residual, evaluated densely and tensored with the chain result.

The recorded chain maps the bra of the input to the bra of the output; see
:func:`flow_apply`.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as qrng
from .flowmaps import FlowStep, FlowVector, Kind, evaluate_chain
from .statevec import (
    AMP_TOL,
    DimensionError,
    FactorSpace,
    MultiState,
    StateError,
    apply_rank_one,
    embed,
    partial_inner,
    split_across_cut,
    tensor,
)


class Half(enum.Enum):
    OMEGA = "omega"
    LAMBDA = "lambda"


class FlowError(StateError):
    """The scenario has no single flow line from input to output."""


class CyclicFlowError(FlowError):
    pass


class NonTraceableError(FlowError):
    pass


@dataclass(frozen=True)
class Box:
    """Rank-one box ``|lam><omega|`` on ``pair`` at temporal rank ``time``."""

    time: int
    pair: tuple[int, int]
    omega: MultiState
    lam: MultiState | None = None

    def __post_init__(self):
        pair = tuple(int(i) for i in self.pair)
        if len(pair) != 2 or not 1 <= pair[0] < pair[1]:
            raise DimensionError(f"box pair must be (i, j) with 1 <= i < j, got {self.pair}")
        object.__setattr__(self, "pair", pair)
        if self.time < 1:
            raise ValueError(f"box time must be >= 1, got {self.time}")
        if self.omega.n_factors != 2:
            raise DimensionError(f"box omega must have two factors, got dims {self.omega.dims}")
        if self.lam is not None and self.lam.dims != self.omega.dims:
            raise DimensionError(f"box lambda dims {self.lam.dims} != omega dims {self.omega.dims}")

    @property
    def is_projector(self) -> bool:
        return self.lam is None

    @property
    def lam_state(self) -> MultiState:
        return self.omega if self.lam is None else self.lam

    def half_state(self, half: Half) -> MultiState:
        return self.omega if half is Half.OMEGA else self.lam_state


@dataclass(frozen=True)
class Scenario:
    space: FactorSpace
    boxes: tuple[Box, ...]
    input_factor: int
    input_state: MultiState
    rest_state: MultiState

    def __post_init__(self):
        n = self.space.n
        object.__setattr__(self, "boxes", tuple(sorted(self.boxes, key=lambda b: b.time)))
        times = [b.time for b in self.boxes]
        if len(set(times)) != len(times):
            raise ValueError(f"duplicate box time ranks in {times}")
        if not 1 <= self.input_factor <= n:
            raise DimensionError(f"input factor {self.input_factor} out of range 1..{n}")
        if self.input_state.dims != (self.space.dims[self.input_factor - 1],):
            raise DimensionError(
                f"input state dims {self.input_state.dims} do not match factor {self.input_factor}"
            )
        rest = tuple(d for i, d in enumerate(self.space.dims, start=1) if i != self.input_factor)
        if self.rest_state.dims != rest:
            raise DimensionError(f"rest state dims {self.rest_state.dims} != {rest}")
        for b in self.boxes:
            if b.pair[1] > n:
                raise DimensionError(f"box at time {b.time} acts on {b.pair}, but there are {n} factors")
            want = (self.space.dims[b.pair[0] - 1], self.space.dims[b.pair[1] - 1])
            if b.omega.dims != want:
                raise DimensionError(f"box at time {b.time} has dims {b.omega.dims}, factors have {want}")

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def rest_factors(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.n + 1) if i != self.input_factor)

    @property
    def is_projector(self) -> bool:
        return all(b.is_projector for b in self.boxes)

    def box(self, time: int) -> Box:
        for b in self.boxes:
            if b.time == time:
                return b
        raise KeyError(time)

    def initial_state(self) -> MultiState:
        return embed(self.input_state, [self.input_factor], self.rest_state)

    def with_times(self, times: dict[int, int]) -> "Scenario":
        """Copy with box time ranks relabelled by ``times`` (old -> new)."""
        boxes = tuple(replace(b, time=times.get(b.time, b.time)) for b in self.boxes)
        return replace(self, boxes=boxes)


@dataclass(frozen=True)
class PathStep:
    box: int
    half: Half
    kind: Kind
    op: bool
    symbol: str = field(default="", compare=False)

    @property
    def label(self) -> str:
        op = "^op" if self.op else ""
        return f"{self.kind.value}{op}_{self.symbol}{self.box}"


@dataclass(frozen=True)
class ResidualOp:
    box: int
    half: Half
    action: str  # "contract" or "emit"
    pair: tuple[int, int]


@dataclass(frozen=True)
class FlowPath:
    steps: tuple[PathStep, ...]
    output_factor: int
    offpath: tuple[tuple[int, Half], ...]
    residual: tuple[ResidualOp, ...]
    terminal: str = "top"  # "top": open output wire; "rest": ends in the rest state

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.steps]

    def describe_residual(self) -> str:
        if not self.residual:
            return "Phi_rest"
        parts = []
        for r in self.residual:
            sym = "Omega" if r.half is Half.OMEGA else "Lambda"
            verb = "contract" if r.action == "contract" else "emit"
            parts.append(f"{verb} {sym}{r.box} on {r.pair}")
        return "; ".join(parts) + " (in time order, starting from Phi_rest)"


def _line_events(scn: Scenario) -> dict[int, list[tuple[int, Half]]]:
    events: dict[int, list[tuple[int, Half]]] = {i: [] for i in range(1, scn.n + 1)}
    for b in scn.boxes:
        for line in b.pair:
            events[line].append((b.time, Half.OMEGA))
            events[line].append((b.time, Half.LAMBDA))
    for ev in events.values():
        ev.sort(key=lambda e: (e[0], e[1] is Half.LAMBDA))
    return events


def extract_flow(scn: Scenario) -> FlowPath:
    """Trace the single flow line starting at the bottom of the input factor."""
    events = _line_events(scn)
    line, seg, up = scn.input_factor, 0, True
    seen_halves: set[tuple[int, Half]] = set()
    seen_segs = {(line, seg)}
    terminal = "top"
    steps: list[PathStep] = []
    while True:
        ev = events[line]
        if up:
            if seg == len(ev):
                break
            time, half = ev[seg]
            if half is not Half.OMEGA:
                raise NonTraceableError(f"moving up on line {line} met the Lambda half of box {time}")
        else:
            if seg == 0:
                if line == scn.input_factor:
                    raise CyclicFlowError(f"flow returned to the input at the bottom of line {line}")
                terminal = "rest"
                break
            time, half = ev[seg - 1]
            if half is not Half.LAMBDA:
                raise NonTraceableError(f"moving down on line {line} met the Omega half of box {time}")
        if (time, half) in seen_halves:
            raise CyclicFlowError(f"box {time} {half.value} half visited twice")
        seen_halves.add((time, half))
        box = scn.box(time)
        partner = box.pair[1] if line == box.pair[0] else box.pair[0]
        sym = "Omega" if (half is Half.OMEGA or box.is_projector) else "Lambda"
        steps.append(
            PathStep(time, half, Kind.F if up else Kind.G, line == box.pair[1], sym)
        )
        k = events[partner].index((time, half))
        line, seg, up = partner, (k if up else k + 1), not up
        if (line, seg) in seen_segs:
            raise CyclicFlowError(f"segment {seg} of line {line} visited twice")
        seen_segs.add((line, seg))
    offpath = tuple(
        (b.time, h) for b in scn.boxes for h in (Half.OMEGA, Half.LAMBDA) if (b.time, h) not in seen_halves
    )
    residual = tuple(
        ResidualOp(t, h, "contract" if h is Half.OMEGA else "emit", scn.box(t).pair) for t, h in offpath
    )
    return FlowPath(tuple(steps), line, offpath, residual, terminal)


def temporal_apply(scn: Scenario) -> MultiState:
    """Apply every box to the initial state in ascending time order."""
    state = scn.initial_state()
    for b in scn.boxes:
        state = apply_rank_one(b.lam_state, b.omega, state, b.pair)
    return state


def chain_steps(path: FlowPath, scn: Scenario) -> list[FlowStep]:
    return [
        FlowStep(s.kind, s.op, scn.box(s.box).half_state(s.half), s.label) for s in path.steps
    ]


def chain_output(path: FlowPath, scn: Scenario) -> MultiState:
    """Ket on the output factor: the chain maps ``<phi_in|`` to ``<phi_out|``."""
    out = evaluate_chain(chain_steps(path, scn), FlowVector.bra_of(scn.input_state))
    return out.to_ket()


def residual_state(path: FlowPath, scn: Scenario, chain: MultiState | None = None) -> MultiState:
    """Value of the off-path network.

    For a path ending at the top this is a state on every factor except the
    output. For a path ending in the rest state, ``chain`` (the chain output)
    is first contracted into the rest state and the result spans all factors.
    """
    live = list(scn.rest_factors)
    state = scn.rest_state
    if path.terminal == "rest":
        if chain is None:
            chain = chain_output(path, scn)
        state = partial_inner(chain, state, [live.index(path.output_factor) + 1])
        live.remove(path.output_factor)
    for op in path.residual:
        box = scn.box(op.box)
        if op.action == "contract":
            if not all(i in live for i in op.pair):
                raise NonTraceableError(f"residual Omega{op.box} meets a wire outside the residual")
            state = partial_inner(box.omega, state, [live.index(i) + 1 for i in op.pair])
            live = [i for i in live if i not in op.pair]
        else:
            if any(i in live for i in op.pair):
                raise NonTraceableError(f"residual Lambda{op.box} emits onto an occupied wire")
            live = sorted(live + list(op.pair))
            state = embed(box.lam_state, [live.index(i) + 1 for i in op.pair], state)
    expected = [i for i in range(1, scn.n + 1) if path.terminal == "rest" or i != path.output_factor]
    if live != expected:
        raise NonTraceableError(f"residual ends on lines {live}, expected {expected}")
    return state


def flow_apply(path: FlowPath, scn: Scenario) -> MultiState:
    """Assemble the chain output and the residual into a full state."""
    chain = chain_output(path, scn)
    if path.terminal == "rest":
        return residual_state(path, scn, chain)
    return embed(chain, [path.output_factor], residual_state(path, scn))


@dataclass(frozen=True)
class TheoremReport:
    passed: bool
    projector: bool
    zero_case: bool
    max_discrepancy: float
    output_factor: int
    labels: tuple[str, ...]
    factorized: bool | None = None
    proportional_discrepancy: float | None = None


def verify_theorem(scn: Scenario, tol: float = 1e-9) -> TheoremReport:
    """Compare temporal evaluation against flow evaluation.

    Rank-one scenarios must agree amplitude by amplitude. Projector scenarios
    must in addition have the temporal output factorize across the output
    factor with the output part proportional to the chain result (or both
    sides be zero). A path that ends in the rest state has no output factor
    and is checked amplitude by amplitude only.
    """
    path = extract_flow(scn)
    temporal = temporal_apply(scn)
    chain = chain_output(path, scn)
    flow = flow_apply(path, scn)
    exact = temporal.max_diff(flow)
    labels = tuple(path.labels)
    if not scn.is_projector or path.terminal == "rest":
        zero = temporal.is_zero(tol) and flow.is_zero(tol)
        return TheoremReport(exact <= tol, False, zero, exact, path.output_factor, labels)

    t_zero, f_zero = temporal.is_zero(tol), flow.is_zero(tol)
    if t_zero or f_zero:
        return TheoremReport(t_zero and f_zero, True, True, exact, path.output_factor, labels)
    if scn.n == 1:
        return TheoremReport(exact <= tol, True, False, exact, path.output_factor, labels, True, exact)
    left = [i for i in range(1, scn.n + 1) if i != path.output_factor]
    split = split_across_cut(temporal, left)
    if split is None:
        return TheoremReport(False, True, False, exact, path.output_factor, labels, False, None)
    a, b = split
    unit = chain.normalize()
    phase = complex(np.vdot(unit.amp, b.amp))
    prop = temporal.max_diff(embed(unit, [path.output_factor], a * phase))
    worst = max(exact, prop)
    return TheoremReport(worst <= tol, True, False, worst, path.output_factor, labels, True, prop)


def random_state(dims: Sequence[int], gen: np.random.Generator, product: bool = False) -> MultiState:
    """Haar-like random normalized state; a random product state if ``product``."""
    if product and len(dims) > 1:
        return tensor(*(random_state([d], gen) for d in dims))
    n = int(np.prod(dims)) if dims else 1
    z = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    return MultiState(z / np.linalg.norm(z), dims)


def randomize(
    template: Scenario,
    gen: np.random.Generator,
    product: bool = False,
    dims: Sequence[int] | None = None,
) -> Scenario:
    """Same box structure with fresh random states (and optionally new dims)."""
    space = FactorSpace(template.space.dims if dims is None else tuple(dims))

    def pick(pair):
        return [space.dims[pair[0] - 1], space.dims[pair[1] - 1]]

    boxes = []
    for b in template.boxes:
        omega = random_state(pick(b.pair), gen, product)
        lam = None if b.is_projector else random_state(pick(b.pair), gen, product)
        boxes.append(Box(b.time, b.pair, omega, lam))
    rest = [d for i, d in enumerate(space.dims, start=1) if i != template.input_factor]
    return Scenario(
        space,
        tuple(boxes),
        template.input_factor,
        random_state([space.dims[template.input_factor - 1]], gen),
        random_state(rest, gen, product) if rest else MultiState.scalar(1.0),
    )


@dataclass(frozen=True)
class ProbeReport:
    trials: int
    product_max_discrepancy: float
    entangled_max_discrepancy: float
    failures: int
    zero_cases: int

    @property
    def passed(self) -> bool:
        return self.failures == 0


def universality_probe(template: Scenario, trials: int, seed: int, tol: float = 1e-9) -> ProbeReport:
    """Check temporal == flow on ``trials`` product and ``trials`` entangled draws.

    Trial ``t`` of the product sweep uses stream ``2t`` and of the entangled
    sweep stream ``2t + 1``.
    """
    extract_flow(template)
    worst = {True: 0.0, False: 0.0}
    failures = zeros = 0
    for t in range(trials):
        for product in (True, False):
            gen = qrng.free_rng(seed, 2 * t + (0 if product else 1))
            rep = verify_theorem(randomize(template, gen, product), tol)
            worst[product] = max(worst[product], rep.max_discrepancy)
            failures += not rep.passed
            zeros += rep.zero_case
    return ProbeReport(trials, worst[True], worst[False], failures, zeros)
