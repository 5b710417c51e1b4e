"""Concrete latent-variable causal structures compatible with an IC* pattern.

Every undetermined pattern edge X o-o Y is realized in one of five ways,
always in this order:

    1. X -> Y
    2. Y -> X
    3. X <- L -> Y           (latent common cause only)
    4. X -> Y  plus  X <- L -> Y
    5. Y -> X  plus  X <- L -> Y

Latents are exogenous roots; detection orderings constrain observed edges only.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .discovery import UNDETERMINED, Pattern, PatternEdge
from .distributions import CIRelation, CISet
from .graphs import CausalGraph, CycleError, VStructure, d_separated, markov_consistent, to_dot, v_structures

LATENT_NAMES = {frozenset("AB"): "lambda", frozenset("BC"): "mu", frozenset("AC"): "nu"}
DEFAULT_SPACELIKE = frozenset({frozenset("AC"), frozenset("BC")})
PAPER_CI = CISet([CIRelation("A", "C", "B")])

OPTION_LABELS = {1: "{x}->{y}", 2: "{y}->{x}", 3: "{x}<-{l}->{y}", 4: "{x}->{y}+{l}", 5: "{y}->{x}+{l}"}


def latent_name(x: str, y: str) -> str:
    return LATENT_NAMES.get(frozenset((x, y)), f"L_{min(x, y)}{max(x, y)}")


@dataclass(frozen=True)
class EdgeRealization:
    x: str
    y: str
    option: int
    latent: str

    def __post_init__(self):
        if self.option not in OPTION_LABELS:
            raise ValueError(f"option must be 1..5, got {self.option}")

    @property
    def directed(self) -> list[tuple[str, str]]:
        if self.option in (1, 4):
            return [(self.x, self.y)]
        if self.option in (2, 5):
            return [(self.y, self.x)]
        return []

    @property
    def has_latent(self) -> bool:
        return self.option >= 3

    @property
    def edges(self) -> list[tuple[str, str]]:
        out = list(self.directed)
        if self.has_latent:
            out += [(self.latent, self.x), (self.latent, self.y)]
        return out

    def graph(self) -> CausalGraph:
        return CausalGraph(self.edges, latent=[self.latent] if self.has_latent else ())

    def __str__(self):
        return OPTION_LABELS[self.option].format(x=self.x, y=self.y, l=self.latent)


def expand_edge(edge: PatternEdge, latent: Optional[str] = None) -> list[EdgeRealization]:
    if edge.mark != UNDETERMINED:
        raise ValueError(f"only undetermined edges can be expanded, {edge.u}-{edge.v} is {edge.mark!r}")
    latent = latent or latent_name(edge.u, edge.v)
    return [EdgeRealization(edge.u, edge.v, k, latent) for k in range(1, 6)]


@dataclass(frozen=True)
class DetectionOrdering:
    order: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError(f"ordering {self.order} repeats a variable")

    @classmethod
    def parse(cls, text: str, variables: Iterable[str] = "ABC") -> "DetectionOrdering":
        names = tuple(text.replace("<", "").replace(",", "").replace(" ", ""))
        if sorted(names) != sorted(variables):
            raise ValueError(f"ordering {text!r} is not a permutation of {''.join(variables)}")
        return cls(names)

    def rank(self, node: str) -> int:
        return self.order.index(node)

    @property
    def code(self) -> str:
        return "".join(self.order)

    def __str__(self):
        return "<".join(self.order)


# order in which groups are reported
ORDERINGS = tuple(DetectionOrdering.parse(s) for s in ("ABC", "BAC", "BCA", "CBA", "ACB", "CAB"))


@dataclass(frozen=True)
class CausalStructure:
    graph: CausalGraph
    realizations: tuple[EdgeRealization, ...]
    spacelike: frozenset = field(default=DEFAULT_SPACELIKE, compare=False)

    @property
    def hidden_count(self) -> int:
        return hidden_variable_count(self)

    @property
    def superluminal_free(self) -> bool:
        return is_superluminal_free(self, self.spacelike)

    @property
    def objective(self) -> bool:
        return assumes_objectivity(self)

    @property
    def objective_strict(self) -> bool:
        return assumes_objectivity(self, strict=True)

    def label(self) -> str:
        return ", ".join(str(r) for r in self.realizations)

    def options(self) -> tuple[int, ...]:
        return tuple(r.option for r in self.realizations)

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "realizations": [str(r) for r in self.realizations],
            "hidden_count": self.hidden_count,
            "superluminal_free": self.superluminal_free,
            "objective": self.objective,
            "objective_strict": self.objective_strict,
        }


def build_structure(realizations: Iterable[EdgeRealization], nodes: Iterable[str] = (), spacelike=DEFAULT_SPACELIKE) -> CausalStructure:
    """Union of the realizations; raises CycleError if it is not acyclic."""
    realizations = tuple(realizations)
    edges, latents = [], []
    for r in realizations:
        edges.extend(r.edges)
        if r.has_latent:
            latents.append(r.latent)
    if len(set(latents)) != len(latents):
        raise ValueError("a latent node may serve only one pattern edge")
    order = list(nodes) + [n for r in realizations for n in (r.x, r.y)] + latents
    graph = CausalGraph(edges, latent=latents, nodes=dict.fromkeys(order))
    return CausalStructure(graph, realizations, frozenset(spacelike))


def new_v_structures(s: CausalStructure, pattern: Pattern) -> list[VStructure]:
    known = {(a, c, b) for a, c, b in pattern.colliders()}
    return [v for v in v_structures(s.graph) if (v.left, v.collider, v.right) not in known]


def creates_new_v_structure(s: CausalStructure, pattern: Pattern) -> bool:
    return bool(new_v_structures(s, pattern))


def respects_ordering(s: CausalStructure, ordering: DetectionOrdering) -> bool:
    observed = set(s.graph.observed)
    for u, v in s.graph.edges:
        if u in observed and v in observed and ordering.rank(u) > ordering.rank(v):
            return False
    return True


def _undetermined_edges(pattern: Pattern) -> list[PatternEdge]:
    edges = sorted(pattern.edges.values(), key=lambda e: (e.u, e.v))
    for e in edges:
        if e.mark != UNDETERMINED:
            raise ValueError(f"pattern edge {e.u}-{e.v} is {e.mark!r}; only undetermined edges are expanded")
    return edges


def candidate_structures(pattern: Pattern, spacelike=DEFAULT_SPACELIKE) -> list[CausalStructure]:
    """All acyclic combinations of edge realizations, before any filtering."""
    choices = [expand_edge(e) for e in _undetermined_edges(pattern)]
    out = []
    for combo in itertools.product(*choices):
        try:
            out.append(build_structure(combo, pattern.nodes, spacelike))
        except CycleError:
            continue
    return out


def admissible_structures(pattern: Pattern, spacelike=DEFAULT_SPACELIKE) -> list[CausalStructure]:
    """Candidates that add no v-structure beyond the pattern's colliders; no ordering imposed."""
    return [s for s in candidate_structures(pattern, spacelike) if not creates_new_v_structure(s, pattern)]


def enumerate_structures(pattern: Pattern, ordering: DetectionOrdering, spacelike=DEFAULT_SPACELIKE) -> list[CausalStructure]:
    return [s for s in admissible_structures(pattern, spacelike) if respects_ordering(s, ordering)]


def hidden_variable_count(s: CausalStructure) -> int:
    return len(s.graph.latent)


def is_superluminal_free(s: CausalStructure, spacelike=DEFAULT_SPACELIKE) -> bool:
    return not any(s.graph.adjacent(*sorted(pair)) for pair in spacelike)


def assumes_objectivity(s: CausalStructure, strict: bool = False, photon: str = "A", control: str = "B") -> bool:
    """Photon and control share a latent cause and the control does not act on the photon.

    ``strict`` also rules out a direct photon -> control edge alongside the latent.
    """
    for r in s.realizations:
        if {r.x, r.y} == {photon, control}:
            if not r.has_latent or s.graph.has_edge(control, photon):
                return False
            return not (strict and s.graph.has_edge(photon, control))
    return False


@dataclass
class Assertion:
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "witnesses": self.witnesses}


@dataclass
class NoGoReport:
    groups: dict
    assertions: list

    @property
    def counts(self) -> dict:
        return {code: len(group) for code, group in self.groups.items()}

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def all_structures(self) -> list[CausalStructure]:
        seen = []
        for group in self.groups.values():
            for s in group:
                if s not in seen:
                    seen.append(s)
        return seen

    def to_json(self) -> dict:
        return {
            "orderings": {
                code: {"ordering": str(DetectionOrdering.parse(code)), "structures": [s.to_json() for s in group]}
                for code, group in self.groups.items()
            },
            "counts": self.counts,
            "assertions": [a.to_json() for a in self.assertions],
            "passed": self.passed,
        }

    def summary(self) -> str:
        lines = []
        for code, group in self.groups.items():
            lines.append(f"{DetectionOrdering.parse(code)}: {len(group)} structure(s)")
            for s in group:
                lines.append(f"    {s.label()}  [hidden={s.hidden_count}]")
        for a in self.assertions:
            lines.append(f"{'PASS' if a.passed else 'FAIL'}  {a.name}" + (f"  witnesses={a.witnesses}" if a.witnesses else ""))
        return "\n".join(lines)


def no_go_report(pattern: Pattern, cis: Optional[CISet] = None, spacelike=DEFAULT_SPACELIKE, orderings=ORDERINGS) -> NoGoReport:
    cis = PAPER_CI if cis is None else cis
    groups = {o.code: enumerate_structures(pattern, o, spacelike) for o in orderings}
    report = NoGoReport(groups, [])
    everything = report.all_structures()

    too_many = [s.label() for s in everything if s.hidden_count > 1]
    report.assertions.append(Assertion("at most one hidden variable", not too_many, too_many))

    for strict in (False, True):
        both = [s.label() for s in everything if s.superluminal_free and assumes_objectivity(s, strict=strict)]
        name = "no structure is superluminal-free and objective" + (" (strict objectivity)" if strict else "")
        report.assertions.append(Assertion(name, not both, both))

    inconsistent = []
    for s in everything:
        if not markov_consistent(s.graph, cis):
            inconsistent.append(s.label())
    report.assertions.append(Assertion(f"Markov-consistent with {'; '.join(map(str, cis))}", not inconsistent, inconsistent))

    unseparated = [s.label() for s in everything if not all(d_separated(s.graph, r.x, r.y, r.given) for r in cis)]
    report.assertions.append(Assertion("every relation is a d-separation", not unseparated, unseparated))
    return report


def write_dot_bundle(report: NoGoReport, directory) -> list[Path]:
    """One DOT file per structure, named ``<ordering>_<index>.dot``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for code, group in report.groups.items():
        for i, s in enumerate(group):
            path = directory / f"{code}_{i}.dot"
            path.write_text(to_dot(s.graph, name=f"{code}_{i}"))
            written.append(path)
    return written
