"""IC* causal discovery: from independence answers to a marked pattern.

The pattern keeps, for every adjacent pair, an arrowhead flag at each end and
a "marked" flag for links established as genuine causes. Edges are rendered
with the mark strings

    ``oo``   no arrowhead at either end (undetermined)
    ``->``   arrowhead at the second node only (potential cause)
    ``*->``  marked link, genuine cause
    ``<->``  arrowheads at both ends (latent common cause)
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional

from .distributions import DEFAULT_TOL, CISet, JointDistribution, is_conditionally_independent, semigraphoid_closure

log = logging.getLogger(__name__)

UNDETERMINED, DIRECTED, MARKED, BIDIRECTED = "oo", "->", "*->", "<->"
MARKS = (UNDETERMINED, DIRECTED, MARKED, BIDIRECTED)
MAX_VARIABLES = 8


class OracleInconsistencyError(RuntimeError):
    """The independence oracle answered (a, b | S) and (b, a | S) differently."""


class CIOracle:
    """Answers ``x _||_ y | given`` queries for single variables."""

    def __init__(self, query: Callable[[str, str, frozenset], bool], variables: Iterable[str], source: str = "callable"):
        self._query = query
        self.variables = tuple(variables)
        self.source = source

    def __call__(self, x: str, y: str, given: Iterable[str] = ()) -> bool:
        return bool(self._query(x, y, frozenset(given)))

    @classmethod
    def from_distribution(cls, dist: JointDistribution, tol: float = DEFAULT_TOL) -> "CIOracle":
        def query(x, y, given):
            return is_conditionally_independent(dist, x, y, given, tol)

        return cls(query, dist.variables, source=f"distribution(tol={tol:g})")

    @classmethod
    def from_ciset(cls, cis: CISet, variables: Optional[Iterable[str]] = None) -> "CIOracle":
        closed = semigraphoid_closure(cis)
        names = tuple(variables) if variables is not None else tuple(sorted(cis.variables))

        def query(x, y, given):
            return closed.holds(x, y, given)

        return cls(query, names, source="ci-set")


@dataclass
class PatternEdge:
    u: str
    v: str
    head_u: bool = False
    head_v: bool = False
    marked: bool = False

    def head_at(self, node: str) -> bool:
        return self.head_u if node == self.u else self.head_v

    def set_head(self, node: str):
        if node == self.u:
            self.head_u = True
        else:
            self.head_v = True

    def other(self, node: str) -> str:
        return self.v if node == self.u else self.u

    def rendered(self) -> tuple[str, str, str]:
        if self.head_u and self.head_v:
            return self.u, self.v, BIDIRECTED
        if self.head_v:
            return self.u, self.v, MARKED if self.marked else DIRECTED
        if self.head_u:
            return self.v, self.u, MARKED if self.marked else DIRECTED
        return self.u, self.v, UNDETERMINED

    @property
    def mark(self) -> str:
        return self.rendered()[2]


def _key(a: str, b: str) -> frozenset:
    return frozenset((a, b))


@dataclass
class Pattern:
    nodes: tuple[str, ...]
    edges: dict = field(default_factory=dict)
    separating_sets: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    def edge(self, a: str, b: str) -> Optional[PatternEdge]:
        return self.edges.get(_key(a, b))

    def adjacent(self, a: str, b: str) -> bool:
        return _key(a, b) in self.edges

    def neighbors(self, node: str) -> list[str]:
        return sorted(e.other(node) for k, e in self.edges.items() if node in k)

    def separating_set(self, a: str, b: str) -> Optional[frozenset]:
        return self.separating_sets.get(_key(a, b))

    def edge_list(self) -> list[tuple[str, str, str]]:
        return sorted(e.rendered() for e in self.edges.values())

    def arrowhead_count(self) -> int:
        return sum(int(e.head_u) + int(e.head_v) for e in self.edges.values())

    def colliders(self) -> list[tuple[str, str, str]]:
        """Triples (a, c, b) with arrowheads into c from both sides and a, b non-adjacent."""
        out = []
        for c in self.nodes:
            into = [n for n in self.neighbors(c) if self.edge(n, c).head_at(c)]
            for a, b in itertools.combinations(sorted(into), 2):
                if not self.adjacent(a, b):
                    out.append((a, c, b))
        return sorted(out)

    def with_edge(self, a: str, b: str) -> "Pattern":
        """Copy with an extra undetermined edge, dropping the pair's separating set."""
        edges = {k: PatternEdge(e.u, e.v, e.head_u, e.head_v, e.marked) for k, e in self.edges.items()}
        u, v = sorted((a, b))
        edges[_key(a, b)] = PatternEdge(u, v)
        seps = {k: s for k, s in self.separating_sets.items() if k != _key(a, b)}
        return Pattern(self.nodes, edges, seps, list(self.trace))

    def __eq__(self, other):
        if not isinstance(other, Pattern):
            return NotImplemented
        return (
            set(self.nodes) == set(other.nodes)
            and self.edge_list() == other.edge_list()
            and self.separating_sets == other.separating_sets
        )

    def describe(self) -> str:
        lines = []
        for x, y, mark in self.edge_list():
            glyph = {"oo": "o-o", "->": "o->", "*->": "-*->", "<->": "<->"}[mark]
            lines.append(f"{x} {glyph} {y}")
        if not lines:
            lines.append("(no edges)")
        for k in sorted(self.separating_sets, key=sorted):
            a, b = sorted(k)
            s = ",".join(sorted(self.separating_sets[k])) or "{}"
            lines.append(f"S({a},{b}) = {s}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [list(e) for e in self.edge_list()],
            "separating_sets": {
                ",".join(sorted(k)): sorted(s) for k, s in sorted(self.separating_sets.items(), key=lambda kv: sorted(kv[0]))
            },
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Pattern":
        edges = {}
        for x, y, mark in data["edges"]:
            if mark not in MARKS:
                raise ValueError(f"unknown edge mark {mark!r}")
            e = PatternEdge(x, y)
            if mark != UNDETERMINED:
                e.head_v = True
            if mark == BIDIRECTED:
                e.head_u = True
            e.marked = mark == MARKED
            edges[_key(x, y)] = e
        seps = {frozenset(k.split(",")): frozenset(v) for k, v in data["separating_sets"].items()}
        return cls(tuple(data["nodes"]), edges, seps)


def _ask(oracle: Callable, a: str, b: str, given: frozenset) -> bool:
    forward, backward = oracle(a, b, given), oracle(b, a, given)
    if forward != backward:
        raise OracleInconsistencyError(f"oracle is not symmetric for ({a}, {b} | {sorted(given)})")
    return forward


def find_separating_set(oracle: Callable, a: str, b: str, variables: Optional[Iterable[str]] = None) -> Optional[frozenset]:
    """Smallest set rendering ``a`` and ``b`` independent, lexicographic among equals."""
    if a == b:
        raise ValueError("need two distinct variables")
    if variables is None:
        variables = oracle.variables
    rest = sorted(v for v in variables if v not in (a, b))
    for k in range(len(rest) + 1):
        for combo in itertools.combinations(rest, k):
            if _ask(oracle, a, b, frozenset(combo)):
                return frozenset(combo)
    return None


def _marked_reach(p: Pattern, start: str) -> set:
    """Nodes reachable from ``start`` along marked links in their marked direction."""
    seen, stack = set(), [start]
    while stack:
        n = stack.pop()
        for m in p.neighbors(n):
            e = p.edge(n, m)
            if e.marked and e.head_at(m) and not e.head_at(n) and m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def _rule1(p: Pattern) -> bool:
    # a *-> c, c - b with no head at c, a and b non-adjacent: orient c *-> b
    for c in p.nodes:
        nbrs = p.neighbors(c)
        for a, b in itertools.permutations(nbrs, 2):
            if p.adjacent(a, b):
                continue
            ac, cb = p.edge(a, c), p.edge(c, b)
            if ac.head_at(c) and not cb.head_at(c) and not (cb.head_at(b) and cb.marked):
                cb.set_head(b)
                cb.marked = True
                p.trace.append(f"R1: {c} *-> {b} (arrow {a} into {c}, {a} and {b} non-adjacent)")
                return True
    return False


def _rule2(p: Pattern) -> bool:
    # a marked directed path a ... b forces an arrowhead at b on the a - b link
    for key in sorted(p.edges, key=sorted):
        e = p.edges[key]
        for a, b in ((e.u, e.v), (e.v, e.u)):
            if e.head_at(b):
                continue
            if b in _marked_reach(p, a):
                e.set_head(b)
                p.trace.append(f"R2: arrowhead at {b} on {a}-{b} (marked path {a} ~> {b})")
                return True
    return False


def ic_star(oracle: Callable, variables: Optional[Iterable[str]] = None) -> Pattern:
    """Run the three IC* phases and return the marked pattern.

    The closure phase applies two rules to a fixed point: R1 propagates an
    arrowhead through a non-collider and marks the continuation as genuine,
    R2 adds an arrowhead at the end of any marked directed path. Each firing
    is appended to ``Pattern.trace``.
    """
    names = tuple(variables) if variables is not None else tuple(oracle.variables)
    if len(names) > MAX_VARIABLES:
        raise ValueError(f"IC* is limited to {MAX_VARIABLES} variables here")
    p = Pattern(names)

    for a, b in itertools.combinations(sorted(names), 2):
        sep = find_separating_set(oracle, a, b, names)
        if sep is None:
            p.edges[_key(a, b)] = PatternEdge(a, b)
        else:
            p.separating_sets[_key(a, b)] = sep

    for key in sorted(p.separating_sets, key=sorted):
        a, b = sorted(key)
        sep = p.separating_sets[key]
        for c in sorted(set(p.neighbors(a)) & set(p.neighbors(b))):
            if c not in sep:
                p.edge(a, c).set_head(c)
                p.edge(b, c).set_head(c)
                p.trace.append(f"collider: {a} *-> {c} <-* {b} ({c} not in S({a},{b}))")

    while _rule1(p) or _rule2(p):
        pass
    log.debug("IC* finished with %d edges, %d trace entries", len(p.edges), len(p.trace))
    return p


def closure_firings(p: Pattern) -> list[str]:
    return [t for t in p.trace if t.startswith("R")]
