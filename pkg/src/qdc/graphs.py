"""Causal DAGs with observed and latent nodes."""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .distributions import CIRelation, CISet, JointDistribution, marginalize, semigraphoid_closure

OBSERVED = "observed"
LATENT = "latent"

# display labels for the conventional hidden-variable names
GREEK = {"lambda": "λ", "mu": "μ", "nu": "ν"}


class CycleError(ValueError):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"edge {edge[0]} -> {edge[1]} would close a directed cycle")


class UnknownNodeError(KeyError):
    pass


class CausalGraph:
    """Immutable DAG whose nodes are either observed or latent.

    Node order is the order of first appearance (explicit ``nodes`` first,
    then edge endpoints) and is used for tables and serialization.
    """

    __slots__ = ("_kinds", "_edges", "_parents", "_children")

    def __init__(self, edges: Iterable[tuple[str, str]] = (), latent: Iterable[str] = (), nodes: Iterable[str] = ()):
        latent = set(latent)
        kinds: dict[str, str] = {}
        for name in nodes:
            kinds.setdefault(name, LATENT if name in latent else OBSERVED)
        edge_list = [tuple(e) for e in edges]
        for u, v in edge_list:
            for name in (u, v):
                kinds.setdefault(name, LATENT if name in latent else OBSERVED)
        for name in sorted(latent - set(kinds)):
            kinds[name] = LATENT
        self._kinds = kinds
        self._edges: frozenset = frozenset()
        self._parents = {n: set() for n in kinds}
        self._children = {n: set() for n in kinds}
        seen = set()
        for edge in edge_list:
            if edge[0] == edge[1]:
                raise ValueError(f"self-loop on {edge[0]}")
            if edge in seen:
                raise ValueError(f"duplicate edge {edge[0]} -> {edge[1]}")
            seen.add(edge)
            self._insert(edge)
        self._edges = frozenset(seen)

    def _insert(self, edge):
        u, v = edge
        if u == v or u in self._descendants_of(v):
            raise CycleError(edge)
        self._parents[v].add(u)
        self._children[u].add(v)

    def _descendants_of(self, node) -> set:
        out, stack = set(), [node]
        while stack:
            for ch in self._children[stack.pop()]:
                if ch not in out:
                    out.add(ch)
                    stack.append(ch)
        return out

    def with_edge(self, u: str, v: str) -> "CausalGraph":
        return CausalGraph(self.edges + [(u, v)], latent=self.latent, nodes=self.nodes)

    @property
    def nodes(self) -> list[str]:
        return list(self._kinds)

    @property
    def edges(self) -> list[tuple[str, str]]:
        return sorted(self._edges)

    @property
    def observed(self) -> list[str]:
        return [n for n, k in self._kinds.items() if k == OBSERVED]

    @property
    def latent(self) -> list[str]:
        return [n for n, k in self._kinds.items() if k == LATENT]

    def kind(self, node: str) -> str:
        self._check(node)
        return self._kinds[node]

    def _check(self, *names):
        for name in names:
            if name not in self._kinds:
                raise UnknownNodeError(name)

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self._edges

    def adjacent(self, u: str, v: str) -> bool:
        return (u, v) in self._edges or (v, u) in self._edges

    def parents(self, node: str) -> list[str]:
        self._check(node)
        return sorted(self._parents[node])

    def children(self, node: str) -> list[str]:
        self._check(node)
        return sorted(self._children[node])

    def descendants(self, node: str) -> set[str]:
        self._check(node)
        return self._descendants_of(node)

    def ancestors(self, nodes: Iterable[str]) -> set[str]:
        """Ancestors of ``nodes``, the nodes themselves included."""
        out, stack = set(), list(nodes)
        self._check(*stack)
        while stack:
            n = stack.pop()
            if n not in out:
                out.add(n)
                stack.extend(self._parents[n])
        return out

    def in_degree(self, node: str) -> int:
        return len(self.parents(node))

    def out_degree(self, node: str) -> int:
        return len(self.children(node))

    def topological_order(self) -> list[str]:
        indeg = {n: len(p) for n, p in self._parents.items()}
        ready = [n for n in self._kinds if indeg[n] == 0]
        order = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for ch in sorted(self._children[n], key=self.nodes.index):
                indeg[ch] -= 1
                if indeg[ch] == 0:
                    ready.append(ch)
        return order

    def __eq__(self, other):
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return self._kinds == other._kinds and self._edges == other._edges

    def __hash__(self):
        return hash((frozenset(self._kinds.items()), self._edges))

    def __repr__(self):
        arcs = ", ".join(f"{u}->{v}" for u, v in self.edges)
        hidden = f"; latent={self.latent}" if self.latent else ""
        return f"CausalGraph({arcs}{hidden})"

    def to_json(self) -> dict:
        return {
            "nodes": [{"name": n, "kind": k} for n, k in self._kinds.items()],
            "edges": [[u, v] for u, v in self.edges],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "CausalGraph":
        nodes = [n["name"] for n in data["nodes"]]
        latent = [n["name"] for n in data["nodes"] if n["kind"] == LATENT]
        return cls([tuple(e) for e in data["edges"]], latent=latent, nodes=nodes)


def _names(x) -> set[str]:
    return {x} if isinstance(x, str) else set(x)


def d_separated(g: CausalGraph, x, y, given=()) -> bool:
    """Whether every path between ``x`` and ``y`` is blocked by ``given``.

    ``x`` and ``y`` may be single names or sets of names. Uses the reachability
    (Bayes-ball) formulation: a trail may pass a collider only if the collider
    is an ancestor of the conditioning set, and a non-collider only if it is
    not conditioned on.
    """
    xs, ys, zs = _names(x), _names(y), _names(given)
    g._check(*xs, *ys, *zs)
    if xs & ys or xs & zs or ys & zs:
        raise ValueError("x, y and given must be disjoint")
    anc_z = g.ancestors(zs) if zs else set()

    # direction "up": arrived from a child; "down": arrived from a parent
    queue = deque((n, "up") for n in xs)
    visited = set()
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in zs and node in ys:
            return False
        if direction == "up" and node not in zs:
            queue.extend((p, "up") for p in g.parents(node))
            queue.extend((c, "down") for c in g.children(node))
        elif direction == "down":
            if node not in zs:
                queue.extend((c, "down") for c in g.children(node))
            if node in anc_z:
                queue.extend((p, "up") for p in g.parents(node))
    return True


@dataclass(frozen=True, order=True)
class VStructure:
    left: str
    collider: str
    right: str

    def __str__(self):
        return f"{self.left} -> {self.collider} <- {self.right}"


def v_structures(g: CausalGraph) -> list[VStructure]:
    found = []
    for c in g.nodes:
        for left, right in itertools.combinations(g.parents(c), 2):
            if not g.adjacent(left, right):
                found.append(VStructure(left, c, right))
    return sorted(found)


def observed_separations(g: CausalGraph) -> CISet:
    """Every pairwise d-separation among observed nodes, conditioning on observed nodes only."""
    obs = g.observed
    rels = []
    for x, y in itertools.combinations(obs, 2):
        rest = [n for n in obs if n not in (x, y)]
        for k in range(len(rest) + 1):
            for given in itertools.combinations(rest, k):
                if d_separated(g, x, y, given):
                    rels.append(CIRelation(x, y, given))
    return CISet(rels)


def markov_consistent(g: CausalGraph, cis: Iterable[CIRelation], faithful: bool = True) -> bool:
    """Check ``cis`` against the d-separations of ``g``.

    Every relation must be a d-separation of ``g``. With ``faithful`` (the
    default) every observed d-separation must also follow from ``cis`` under
    the semi-graphoid axioms, so the graph implies no independence the data
    lacks.
    """
    cis = CISet(cis)
    observed = set(g.observed)
    unknown = cis.variables - observed
    if unknown:
        raise UnknownNodeError(f"relations mention non-observed nodes {sorted(unknown)}")
    if not all(d_separated(g, r.x, r.y, r.given) for r in cis):
        return False
    if not faithful:
        return True
    return observed_separations(g) <= semigraphoid_closure(cis)


class CPTParameters:
    """Conditional probability tables, one per node.

    ``tables[node]`` has shape ``(2,) * len(parents) + (2,)``; the last axis is
    the node's own value and the leading axes follow ``parents[node]``.
    """

    def __init__(self, parents: Mapping[str, Iterable[str]], tables: Mapping[str, np.ndarray]):
        self.parents = {n: tuple(p) for n, p in parents.items()}
        self.tables = {}
        for node, pa in self.parents.items():
            if node not in tables:
                raise KeyError(f"no table for node {node}")
            t = np.asarray(tables[node], dtype=float)
            if t.shape != (2,) * len(pa) + (2,):
                raise ValueError(f"table for {node} has shape {t.shape}, expected {(2,) * len(pa) + (2,)}")
            if np.any(t < 0) or not np.allclose(t.sum(axis=-1), 1.0, rtol=0, atol=1e-12):
                raise ValueError(f"rows of the table for {node} must be distributions")
            self.tables[node] = t

    @classmethod
    def random(cls, g: CausalGraph, rng: np.random.Generator) -> "CPTParameters":
        """Rows drawn uniformly from the probability simplex."""
        parents = {n: g.parents(n) for n in g.nodes}
        tables = {n: rng.dirichlet([1.0, 1.0], size=(2,) * len(pa)) for n, pa in parents.items()}
        return cls(parents, tables)


def factorized_joint(g: CausalGraph, params: CPTParameters, observed_only: bool = False) -> JointDistribution:
    """Joint distribution from the product of each node's conditional given its parents."""
    nodes = g.nodes
    for n in nodes:
        if n not in params.tables:
            raise KeyError(f"missing conditional table for {n}")
        if set(params.parents[n]) != set(g.parents(n)):
            raise ValueError(f"table for {n} conditions on {params.parents[n]}, graph parents are {g.parents(n)}")
    pos = {n: i for i, n in enumerate(nodes)}
    table = np.empty((2,) * len(nodes))
    for assignment in itertools.product((0, 1), repeat=len(nodes)):
        p = 1.0
        for n in nodes:
            key = tuple(assignment[pos[q]] for q in params.parents[n]) + (assignment[pos[n]],)
            p *= params.tables[n][key]
        table[assignment] = p
    dist = JointDistribution(nodes, table)
    if observed_only and g.latent:
        return marginalize(dist, g.observed)
    return dist


_BARE_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _dot_id(name: str) -> str:
    return name if _BARE_ID.match(name) and name not in ("node", "edge", "graph", "digraph") else f'"{name}"'


def to_dot(g: CausalGraph, name: str = "G") -> str:
    lines = [f"digraph {_dot_id(name)} {{"]
    for n in g.nodes:
        if g.kind(n) == LATENT:
            lines.append(f'  {_dot_id(n)} [style=dashed, label="{GREEK.get(n, n)}"];')
        else:
            lines.append(f"  {_dot_id(n)};")
    for u, v in g.edges:
        lines.append(f"  {_dot_id(u)} -> {_dot_id(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
