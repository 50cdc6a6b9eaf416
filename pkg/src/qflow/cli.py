"""Command-line entry point.

Every command prints a report (json by default) and exits 0 if all of its
checks pass, 1 if any fails and 2 on usage or input errors. Reports are
deterministic for a given seed and flags; the only varying field,
``wall_time_s``, is last and can be dropped with ``--no-timing``.
"""

from __future__ import annotations

import argparse
import ast
import itertools
import json
import math
import operator
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import coecke, epr, oneway, relfilter, teleport
from . import rng as qrng
from .scenario_io import ScenarioError, load_scenario
from .statevec import MultiState, StateError


@dataclass
class RunReport:
    command: str
    seed: int
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    wall_time_s: float | None = None

    @property
    def passed(self) -> bool:
        return bool(all(self.checks.values()))

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "command": self.command,
            "seed": self.seed,
            "inputs": _plain(self.inputs),
            "results": _plain(self.results),
            "checks": {k: bool(v) for k, v in self.checks.items()},
            "passed": self.passed,
        }
        if timing and self.wall_time_s is not None:
            out["wall_time_s"] = self.wall_time_s
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2) + "\n"

    def to_text(self, timing: bool = True) -> str:
        lines = []

        def walk(prefix, obj):
            if isinstance(obj, dict):
                for k, v in obj.items():
                    walk(f"{prefix}.{k}" if prefix else k, v)
            else:
                lines.append(f"{prefix}: {json.dumps(obj)}")

        walk("", self.to_dict(timing))
        return "\n".join(lines) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, MultiState):
        return [_plain(complex(z)) for z in obj.amp]
    return obj


# ---------------------------------------------------------------- value parsing

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_angle(text: str) -> float:
    """A float or a simple arithmetic expression in ``pi``, e.g. ``3*pi/4``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported angle expression {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except SyntaxError:
        raise ValueError(f"unsupported angle expression {text!r}") from None


def parse_angles(text: str) -> list[float]:
    return [parse_angle(t) for t in text.split(",") if t.strip()] if text.strip() else []


def parse_qubit(text: str) -> MultiState:
    """Two comma-separated Python complex literals, normalized, e.g. ``0.6,0.8j``."""
    parts = [complex(t.strip().replace(" ", "")) for t in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"a qubit needs two amplitudes, got {text!r}")
    return MultiState(parts).normalize()


def parse_function(text: str, dom: int, cod: int) -> tuple[int, ...]:
    """``identity`` or a table ``x:y,...`` covering every element of the domain."""
    if text.strip() == "identity":
        if dom != cod:
            raise ValueError("identity needs equal domain and codomain sizes")
        return tuple(range(dom))
    table = {}
    for item in text.split(","):
        x, _, y = item.partition(":")
        table[int(x)] = int(y)
    if sorted(table) != list(range(dom)):
        raise ValueError(f"function {text!r} is not total on 0..{dom - 1}")
    if any(not 0 <= v < cod for v in table.values()):
        raise ValueError(f"function {text!r} has values outside 0..{cod - 1}")
    return tuple(table[x] for x in range(dom))


def _pairs(text: str) -> list[tuple[float, float]]:
    out = []
    for item in text.split(","):
        a, _, b = item.partition(":")
        out.append((parse_angle(a), parse_angle(b)))
    return out


# ---------------------------------------------------------------- commands


def _scenario_arg(args):
    if not args.scenario:
        raise ValueError("--scenario is required for this command")
    return load_scenario(args.scenario)


def cmd_verify_coecke(args) -> RunReport:
    scn = _scenario_arg(args)
    trials = 100 if args.trials is None else args.trials
    rep = coecke.verify_theorem(scn, args.tolerance)
    worst, failures, zeros = 0.0, 0, 0
    for t in range(trials):
        gen = qrng.free_rng(args.seed, t)
        dims = gen.choice([2, 3], size=scn.n).tolist() if args.mixed_dims else None
        r = coecke.verify_theorem(coecke.randomize(scn, gen, product=(t % 2 == 0), dims=dims), args.tolerance)
        worst = max(worst, r.max_discrepancy)
        failures += not r.passed
        zeros += r.zero_case
    return RunReport(
        "verify-coecke",
        args.seed,
        {"scenario": args.scenario, "trials": trials, "tolerance": args.tolerance, "mixed_dims": args.mixed_dims},
        {
            "labels": list(rep.labels),
            "output_factor": rep.output_factor,
            "projector": rep.projector,
            "file": {"max_discrepancy": rep.max_discrepancy, "zero_case": rep.zero_case},
            "random": {"max_discrepancy": worst, "failures": failures, "zero_cases": zeros},
        },
        {"file_scenario": rep.passed, "random_scenarios": failures == 0},
    )


def cmd_flow_path(args) -> RunReport:
    scn = _scenario_arg(args)
    path = coecke.extract_flow(scn)
    steps = [
        {"box": s.box, "half": s.half.value, "kind": s.kind.value, "op": s.op, "label": s.label} for s in path.steps
    ]
    return RunReport(
        "flow-path",
        args.seed,
        {"scenario": args.scenario},
        {
            "steps": steps,
            "output_factor": path.output_factor,
            "offpath": [[b, h.value] for b, h in path.offpath],
            "residual": [
                {"box": r.box, "half": r.half.value, "action": r.action, "pair": list(r.pair)} for r in path.residual
            ],
            "residual_text": path.describe_residual(),
        },
        {"traceable": True},
    )


def cmd_universality(args) -> RunReport:
    scn = _scenario_arg(args)
    trials = 200 if args.trials is None else args.trials
    rep = coecke.universality_probe(scn, trials, args.seed, args.tolerance)
    return RunReport(
        "universality",
        args.seed,
        {"scenario": args.scenario, "trials": trials, "tolerance": args.tolerance},
        {
            "product_max_discrepancy": rep.product_max_discrepancy,
            "entangled_max_discrepancy": rep.entangled_max_discrepancy,
            "failures": rep.failures,
            "zero_cases": rep.zero_cases,
        },
        {"product": rep.product_max_discrepancy <= args.tolerance, "entangled": rep.entangled_max_discrepancy <= args.tolerance, "all_trials": rep.passed},
    )


def _random_qubit(seed: int, stream: int) -> MultiState:
    return coecke.random_state([2], qrng.free_rng(seed, stream))


def cmd_teleport(args) -> RunReport:
    phi = parse_qubit(args.state) if args.state else _random_qubit(args.seed, 0)
    trials = 1000 if args.trials is None else args.trials
    tol = args.tolerance
    flow_dev = (teleport.flow_teleport(phi) - (-0.5) * phi).norm
    branches = teleport.teleport_branches(phi)
    counts = [0, 0, 0, 0]
    worst_sampled = 0.0
    for t in range(trials):
        outcome, out = teleport.teleport_protocol(phi, qrng.trial_rng(args.seed, t, 1))
        counts[outcome.index] += 1
        worst_sampled = max(worst_sampled, abs(1.0 - teleport.fidelity(phi, out)))
    return RunReport(
        "teleport",
        args.seed,
        {"state": phi, "trials": trials, "tolerance": tol},
        {
            "flow_scalar_deviation": flow_dev,
            "correction_table": list(teleport.correction_table()),
            "branches": [
                {
                    "index": b.outcome.index,
                    "name": b.outcome.name,
                    "correction": b.outcome.correction,
                    "probability": b.probability,
                    "fidelity": b.fidelity,
                }
                for b in branches
            ],
            "sampled_counts": counts,
            "sampled_max_infidelity": worst_sampled,
        },
        {
            "flow_scalar": flow_dev <= tol,
            "branch_fidelity": all(abs(1.0 - b.fidelity) <= tol for b in branches),
            "branch_probability": all(abs(b.probability - 0.25) <= tol for b in branches),
            "sampled_fidelity": worst_sampled <= tol,
        },
    )


def _oneway(args, angles: list[float], name: str) -> RunReport:
    psi = parse_qubit(args.psi)
    omega = parse_qubit(args.omega)
    trials = 100000 if args.trials is None else args.trials
    est = oneway.mbqc_transition_probability(psi, angles, omega, trials, args.seed)
    results = {}
    checks = {}
    if len(angles) == 1:
        ident = oneway.amplitude_identity_check(psi, angles[0], omega)
        results["amplitudes"] = {"plus": ident.plus, "unitary": ident.unitary, "minus": ident.minus}
        results["amplitude_max_deviation"] = ident.max_deviation
        checks["amplitude_identity"] = ident.max_deviation <= min(args.tolerance, 1e-12)
    if len(angles) <= 10:
        frame_dev = max(
            (
                abs(oneway.forced_branch_probability(psi, angles, omega, bits) - est.exact)
                for bits in itertools.product((0, 1), repeat=len(angles))
            ),
            default=0.0,
        )
        results["byproduct_frame_max_deviation"] = frame_dev
        checks["byproduct_frame"] = frame_dev <= args.tolerance
    results.update(
        {
            "exact": est.exact,
            "estimate": est.estimate,
            "stderr": est.stderr,
            "successes": est.successes,
            "z_score": est.z_score if math.isfinite(est.z_score) else None,
        }
    )
    checks["estimate_within_4sigma"] = est.within(4.0)
    return RunReport(
        name,
        args.seed,
        {"psi": psi, "omega": omega, "angles": angles, "trials": trials, "tolerance": args.tolerance},
        results,
        checks,
    )


def cmd_oneway_phase(args) -> RunReport:
    return _oneway(args, [parse_angle(args.angle)], "oneway-phase")


def cmd_oneway_chain(args) -> RunReport:
    return _oneway(args, parse_angles(args.angles), "oneway-chain")


def cmd_relfilter(args) -> RunReport:
    sizes = [int(s) for s in args.sizes.split(",")]
    if len(sizes) != 3:
        raise ValueError("--sizes needs three set sizes")
    f = parse_function(args.f, sizes[0], sizes[1])
    g = parse_function(args.g, sizes[1], sizes[2])
    xs = range(sizes[0]) if args.x is None else [args.x]
    full_y = [(y, z) for y in range(sizes[1]) for z in range(sizes[2])]
    outputs = []
    ok = True
    for x in xs:
        out = relfilter.relational_coecke(x, full_y, f, g, sizes)
        predicted = [x, f[x], g[f[x]]]
        outputs.append({"x": x, "survivors": sorted(list(t) for t in out), "predicted": predicted})
        ok &= [list(t) for t in out] == [predicted]
    full = relfilter.TripleRelation.full(sizes)
    commute = relfilter.filters_commute_check(
        full, relfilter.GraphFilter(f, (1, 2)), relfilter.GraphFilter(g, (2, 3))
    )
    return RunReport(
        "relfilter",
        args.seed,
        {"sizes": sizes, "f": list(f), "g": list(g)},
        {"outputs": outputs, "filters_commute": commute},
        {"predicted_triple": ok, "commute": commute},
    )


DEFAULT_EPR_PAIRS = "0:0,0:pi/4,0:pi/2,0:pi,pi/4:3*pi/4,pi/2:pi/4,pi/3:-pi/3,pi/2:3*pi/4"


def cmd_epr(args) -> RunReport:
    pairs = _pairs(args.pairs)
    trials = 100000 if args.trials is None else args.trials
    rows, ok = [], True
    for k, (a, b) in enumerate(pairs):
        est = epr.epr_correlation(a, b, trials, args.seed, offset=k * trials)
        rows.append({"a": a, "b": b, "estimate": est.estimate, "stderr": est.stderr, "exact": est.exact})
        ok &= est.within(4.0)
    bell = epr.chsh(trials, args.seed + 1 if args.seed + 1 < 1 << 64 else 0)
    return RunReport(
        "epr",
        args.seed,
        {"pairs": [[a, b] for a, b in pairs], "trials": trials},
        {"correlations": rows, "chsh": bell.value, "chsh_exact": bell.exact},
        {"correlations_within_4sigma": ok, "chsh_above_2.7": bell.value > 2.7},
    )


COMMANDS = {
    "verify-coecke": cmd_verify_coecke,
    "flow-path": cmd_flow_path,
    "teleport": cmd_teleport,
    "oneway-phase": cmd_oneway_phase,
    "oneway-chain": cmd_oneway_chain,
    "relfilter": cmd_relfilter,
    "epr": cmd_epr,
    "universality": cmd_universality,
}


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--tolerance", type=float, default=1e-9)
    common.add_argument("--scenario", default=None, help="scenario file or bundled name (eq1, eq2, teleport)")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--no-timing", action="store_true", help="omit wall_time_s from the report")

    parser = argparse.ArgumentParser(prog="qflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("verify-coecke", parents=[common], help="temporal vs flow evaluation of a scenario")
    p.add_argument("--mixed-dims", action="store_true", help="redraw factor dims from {2, 3} in random trials")
    sub.add_parser("flow-path", parents=[common], help="print the extracted flow path")
    sub.add_parser("universality", parents=[common], help="product and entangled random draws of a scenario")
    p = sub.add_parser("teleport", parents=[common], help="singlet flow identity and corrected protocol")
    p.add_argument("--state", default=None, help="input qubit, e.g. 0.6,0.8j (default: random from seed)")
    p = sub.add_parser("oneway-phase", parents=[common], help="measurement-only single phase gate")
    p.add_argument("--angle", default="pi/3", help="gate angle, e.g. pi/3")
    p2 = sub.add_parser("oneway-chain", parents=[common], help="chain of phase gates with a Z byproduct frame")
    p2.add_argument("--angles", default="pi/2,pi/2", help="comma-separated gate angles")
    for q in (p, p2):
        q.add_argument("--psi", default="0.6,0.8j", help="input qubit amplitudes (normalized on input)")
        q.add_argument("--omega", default="1,1", help="target qubit amplitudes (normalized on input)")
    p = sub.add_parser("relfilter", parents=[common], help="graph filters on a ternary relation")
    p.add_argument("--sizes", default="3,3,3")
    p.add_argument("--f", default="identity")
    p.add_argument("--g", default="identity")
    p.add_argument("--x", type=int, default=None)
    p = sub.add_parser("epr", parents=[common], help="singlet correlations and CHSH")
    p.add_argument("--pairs", default=DEFAULT_EPR_PAIRS, help="comma-separated a:b angle pairs")
    return parser


def run(argv=None) -> tuple[RunReport, argparse.Namespace]:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    report = COMMANDS[args.command](args)
    report.wall_time_s = round(time.perf_counter() - start, 6)
    return report, args


def main(argv=None) -> int:
    try:
        report, args = run(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ScenarioError, StateError, ValueError, FileNotFoundError) as exc:
        print(f"qflow: error: {exc}", file=sys.stderr)
        return 2
    timing = not args.no_timing
    sys.stdout.write(report.to_json(timing) if args.format == "json" else report.to_text(timing))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
