"""Command-line interface: ``qdc {simulate,ci,discover,enumerate,report}``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Optional

from . import _jsonio
from .discovery import CIOracle, ic_star
from .distributions import DEFAULT_TOL, CISet, JointDistribution, all_ci_relations, semigraphoid_closure
from .enumeration import PAPER_CI, DetectionOrdering, enumerate_structures
from .graphs import to_dot
from .qsim import CircuitParams, DomainError, closed_form_state, joint_distribution
from .report import BASE_POINT, DEFAULT_SEED, circuit_residual, paper_pattern, relations_text, render_checks, write_report

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("qdc")


@dataclass(frozen=True)
class RunConfig:
    eta: float = BASE_POINT.eta
    alpha: float = BASE_POINT.alpha
    phi: float = BASE_POINT.phi
    tol: float = DEFAULT_TOL
    ordering: Optional[str] = None
    format: str = "text"
    seed: int = DEFAULT_SEED

    @property
    def params(self) -> CircuitParams:
        return CircuitParams(self.eta, self.alpha, self.phi)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


class UsageError(Exception):
    pass


def _add_params(p):
    p.add_argument("--eta", type=float, default=BASE_POINT.eta, help="entanglement parameter in [0, 1]")
    p.add_argument("--alpha", type=float, default=BASE_POINT.alpha, help="rotation of qubit C, radians")
    p.add_argument("--phi", type=float, default=BASE_POINT.phi, help="interferometer phase, radians")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="independence tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdc", description="Causal discovery on the entanglement-controlled delayed-choice interferometer.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="joint detection table and circuit cross-check")
    _add_params(p)
    p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("ci", help="conditional independence relations")
    _add_params(p)
    p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("discover", help="IC* pattern")
    _add_params(p)
    p.add_argument("--ci-file", help="JSON file with a CI set or a joint distribution")
    p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("enumerate", help="causal structures for one detection ordering")
    p.add_argument("--ordering", required=True, help="permutation of ABC, earliest detection first")
    p.add_argument("--ci-file", help="JSON file with a CI set or a joint distribution")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--format", choices=("json", "dot", "text"), default="text")

    p = sub.add_parser("report", help="full reproduction report with JSON and DOT output")
    p.add_argument("--out", default="qdc-report", help="output directory")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for random CPTs (QDC_SEED overrides)")
    return parser


def _config(args) -> RunConfig:
    seed = getattr(args, "seed", DEFAULT_SEED)
    if "QDC_SEED" in os.environ:
        seed = int(os.environ["QDC_SEED"])
    cfg = RunConfig(
        eta=getattr(args, "eta", BASE_POINT.eta),
        alpha=getattr(args, "alpha", BASE_POINT.alpha),
        phi=getattr(args, "phi", BASE_POINT.phi),
        tol=args.tol if hasattr(args, "tol") else DEFAULT_TOL,
        ordering=getattr(args, "ordering", None),
        format=getattr(args, "format", "text"),
        seed=seed,
    )
    cfg.params  # validates the domain
    if cfg.tol < 0:
        raise DomainError("tolerance must be non-negative")
    return cfg


def _load_oracle(path: str, tol: float) -> CIOracle:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "probabilities" in data:
        return CIOracle.from_distribution(JointDistribution.from_json(data), tol)
    cis = CISet.from_json(data)
    names = data.get("variables") if isinstance(data, dict) else None
    return CIOracle.from_ciset(cis, names)


def cmd_simulate(cfg: RunConfig, args) -> int:
    dist = joint_distribution(closed_form_state(cfg.params))
    residual = circuit_residual(cfg.params)
    if cfg.format == "json":
        out = dist.to_json()
        out["circuit_residual"] = residual
        out["params"] = {"eta": cfg.eta, "alpha": cfg.alpha, "phi": cfg.phi}
        sys.stdout.write(_jsonio.dumps(out))
        return EXIT_OK
    print("A B C  P")
    for idx, p in enumerate(dist.probabilities()):
        print(f"{idx >> 2 & 1} {idx >> 1 & 1} {idx & 1}  {p:.17g}")
    print(f"circuit residual: {residual:.3g}")
    return EXIT_OK


def cmd_ci(cfg: RunConfig, args) -> int:
    dist = joint_distribution(closed_form_state(cfg.params))
    cis = semigraphoid_closure(all_ci_relations(dist, cfg.tol))
    if cfg.format == "json":
        sys.stdout.write(_jsonio.dumps({"relations": cis.to_json(), "tol": cfg.tol}))
    else:
        print(relations_text(cis))
    return EXIT_OK


def cmd_discover(cfg: RunConfig, args) -> int:
    if args.ci_file:
        oracle = _load_oracle(args.ci_file, cfg.tol)
    else:
        oracle = CIOracle.from_distribution(joint_distribution(closed_form_state(cfg.params)), cfg.tol)
    pattern = ic_star(oracle)
    if cfg.format == "json":
        out = pattern.to_json()
        out["trace"] = pattern.trace
        sys.stdout.write(_jsonio.dumps(out))
    else:
        print(pattern.describe())
        for line in pattern.trace:
            print(f"# {line}")
    return EXIT_OK


def cmd_enumerate(cfg: RunConfig, args) -> int:
    ordering = DetectionOrdering.parse(cfg.ordering)
    pattern = ic_star(_load_oracle(args.ci_file, cfg.tol)) if args.ci_file else paper_pattern()
    group = enumerate_structures(pattern, ordering)
    if not group:
        print(f"no causal structures for ordering {ordering}", file=sys.stdout if cfg.format == "text" else sys.stderr)
    if cfg.format == "json":
        sys.stdout.write(_jsonio.dumps({"ordering": str(ordering), "structures": [s.to_json() for s in group]}))
    elif cfg.format == "dot":
        for i, s in enumerate(group):
            sys.stdout.write(to_dot(s.graph, name=f"{ordering.code}_{i}"))
    else:
        for s in group:
            flags = f"hidden={s.hidden_count} superluminal_free={s.superluminal_free} objective={s.objective}"
            print(f"{s.label()}  [{flags}]")
    return EXIT_OK


def cmd_report(cfg: RunConfig, args) -> int:
    data = write_report(args.out, cfg.tol, cfg.seed)
    print(render_checks(data))
    print(f"wrote {args.out}/report.json and {args.out}/dot/")
    return EXIT_OK if data["passed"] else EXIT_FAILED


COMMANDS = {
    "simulate": cmd_simulate,
    "ci": cmd_ci,
    "discover": cmd_discover,
    "enumerate": cmd_enumerate,
    "report": cmd_report,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
        cfg = _config(args)
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help exits through argparse
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (DomainError, ValueError, OSError) as exc:
        print(f"qdc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())
