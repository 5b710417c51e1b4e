"""Probability tables over named binary variables and conditional independence."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

DEFAULT_TOL = 1e-9
# conditioning events at or below this mass are treated as impossible
ZERO_MASS = 1e-12


class UnknownVariableError(KeyError):
    pass


class UnconditionableError(ValueError):
    """Conditioning on an event of (numerically) zero probability."""


class JointDistribution:
    """Joint distribution of binary variables, stored as an n-dimensional table.

    The flat form lists probabilities in lexicographic assignment order with the
    first variable most significant, so for (A, B, C) the entry for (a, b, c)
    sits at index ``4*a + 2*b + c``.
    """

    __slots__ = ("_variables", "_table")

    def __init__(self, variables: Iterable[str], probabilities, tol: float = 1e-9):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in {variables}")
        table = np.array(probabilities, dtype=float)
        if table.size != 2 ** len(variables):
            raise ValueError(f"{len(variables)} variables need {2 ** len(variables)} entries, got {table.size}")
        table = table.reshape((2,) * len(variables))
        if np.any(table < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(table.sum() - 1.0) > tol:
            raise ValueError(f"probabilities sum to {table.sum()!r}, not 1")
        table.setflags(write=False)
        self._variables = variables
        self._table = table

    @property
    def variables(self) -> tuple[str, ...]:
        return self._variables

    @property
    def table(self) -> np.ndarray:
        return self._table

    def probabilities(self) -> np.ndarray:
        return self._table.reshape(-1)

    def index(self, name: str) -> int:
        try:
            return self._variables.index(name)
        except ValueError:
            raise UnknownVariableError(name) from None

    def prob(self, assignment: Mapping[str, int]) -> float:
        """Probability of a (possibly partial) assignment."""
        idx = [slice(None)] * len(self._variables)
        for name, value in assignment.items():
            idx[self.index(name)] = int(value)
        return float(self._table[tuple(idx)].sum())

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self._variables == other._variables and np.array_equal(self._table, other._table)

    def allclose(self, other: "JointDistribution", atol: float = 1e-12) -> bool:
        if self._variables != other.variables:
            other = other.reorder(self._variables)
        return bool(np.allclose(self._table, other.table, rtol=0.0, atol=atol))

    def reorder(self, variables: Iterable[str]) -> "JointDistribution":
        variables = tuple(variables)
        if sorted(variables) != sorted(self._variables):
            raise ValueError(f"{variables} is not a permutation of {self._variables}")
        axes = [self.index(v) for v in variables]
        return JointDistribution(variables, np.transpose(self._table, axes))

    def to_json(self) -> dict:
        return {"variables": list(self._variables), "probabilities": [float(p) for p in self.probabilities()]}

    @classmethod
    def from_json(cls, data: Mapping) -> "JointDistribution":
        return cls(data["variables"], data["probabilities"])

    def __repr__(self):
        return f"JointDistribution({list(self._variables)}, {self.probabilities().round(6).tolist()})"


def marginalize(dist: JointDistribution, keep: Iterable[str]) -> JointDistribution:
    keep = set(keep)
    if not keep:
        raise ValueError("must keep at least one variable")
    for name in keep:
        dist.index(name)
    axes = tuple(i for i, v in enumerate(dist.variables) if v not in keep)
    table = dist.table.sum(axis=axes)
    kept = [v for v in dist.variables if v in keep]
    return JointDistribution(kept, table / table.sum())


def condition(dist: JointDistribution, evidence: Mapping[str, int], keep_evidence: bool = False) -> JointDistribution:
    """Condition on a partial assignment.

    By default the evidence variables are dropped; with ``keep_evidence`` they
    stay in the table as point masses.
    """
    mass = dist.prob(evidence)
    if mass <= ZERO_MASS:
        raise UnconditionableError(f"P({_fmt_assignment(evidence)}) = {mass:.3g}")
    if keep_evidence:
        table = np.zeros_like(dist.table)
        idx = [slice(None)] * len(dist.variables)
        for name, value in evidence.items():
            idx[dist.index(name)] = int(value)
        table[tuple(idx)] = dist.table[tuple(idx)]
        return JointDistribution(dist.variables, table / mass)
    idx = [slice(None)] * len(dist.variables)
    for name, value in evidence.items():
        idx[dist.index(name)] = int(value)
    rest = [v for v in dist.variables if v not in evidence]
    return JointDistribution(rest, dist.table[tuple(idx)] / mass)


def _fmt_assignment(assignment: Mapping[str, int]) -> str:
    return ", ".join(f"{k}={v}" for k, v in sorted(assignment.items()))


def _as_names(x) -> frozenset[str]:
    if isinstance(x, str):
        return frozenset([x])
    return frozenset(x)


def ci_deviation(dist: JointDistribution, x, y, given=()) -> float:
    """Largest |P(x,y|z) - P(x|z)P(y|z)| over assignments with P(z) above ZERO_MASS."""
    xs, ys, zs = _as_names(x), _as_names(y), _as_names(given)
    if not xs or not ys:
        raise ValueError("both sides of an independence statement must be nonempty")
    if xs & ys or xs & zs or ys & zs:
        raise ValueError(f"variable sets overlap: {sorted(xs)}, {sorted(ys)}, {sorted(zs)}")
    order = sorted(xs) + sorted(ys) + sorted(zs)
    for name in order:
        dist.index(name)
    sub = marginalize(dist, order).reorder(order).table
    m = sub.reshape(2 ** len(xs), 2 ** len(ys), 2 ** len(zs))
    worst = 0.0
    for k in range(m.shape[2]):
        block = m[:, :, k]
        pz = block.sum()
        if pz <= ZERO_MASS:
            continue
        joint = block / pz
        gap = np.abs(joint - np.outer(joint.sum(axis=1), joint.sum(axis=0))).max()
        worst = max(worst, float(gap))
    return worst


def is_conditionally_independent(dist: JointDistribution, x, y, given=(), tol: float = DEFAULT_TOL) -> bool:
    return ci_deviation(dist, x, y, given) <= tol


@dataclass(frozen=True, init=False)
class CIRelation:
    """``x _||_ y | given`` with ``x``, ``y`` and ``given`` sets of names.

    The two sides are stored in canonical order, so a relation and its
    symmetric form compare equal.
    """

    x: frozenset
    y: frozenset
    given: frozenset

    def __init__(self, x, y, given=()):
        xs, ys, zs = _as_names(x), _as_names(y), _as_names(given)
        if not xs or not ys:
            raise ValueError("both sides of an independence statement must be nonempty")
        if xs & ys or xs & zs or ys & zs:
            raise ValueError(f"variable sets overlap: {sorted(xs)}, {sorted(ys)}, {sorted(zs)}")
        if sorted(ys) < sorted(xs):
            xs, ys = ys, xs
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "y", ys)
        object.__setattr__(self, "given", zs)

    def sort_key(self):
        return (sorted(self.x), sorted(self.y), sorted(self.given))

    def oriented(self) -> tuple[tuple[frozenset, frozenset, frozenset], ...]:
        return ((self.x, self.y, self.given), (self.y, self.x, self.given))

    @property
    def variables(self) -> frozenset:
        return self.x | self.y | self.given

    def is_pairwise(self) -> bool:
        return len(self.x) == 1 and len(self.y) == 1

    def __str__(self):
        def side(s):
            return ",".join(sorted(s)) if len(s) == 1 else "{" + ",".join(sorted(s)) + "}"

        text = f"{side(self.x)} _||_ {side(self.y)}"
        return text + (" | " + ",".join(sorted(self.given)) if self.given else " | {}")

    def to_json(self) -> dict:
        return {"x": sorted(self.x), "y": sorted(self.y), "given": sorted(self.given)}

    @classmethod
    def from_json(cls, data: Mapping) -> "CIRelation":
        return cls(data["x"], data["y"], data.get("given", ()))


class CISet:
    """Immutable set of independence relations, iterated in canonical order."""

    __slots__ = ("_relations",)

    def __init__(self, relations: Iterable[CIRelation] = ()):
        self._relations = frozenset(relations)

    def __iter__(self) -> Iterator[CIRelation]:
        return iter(sorted(self._relations, key=CIRelation.sort_key))

    def __len__(self):
        return len(self._relations)

    def __contains__(self, rel):
        return rel in self._relations

    def __eq__(self, other):
        if isinstance(other, CISet):
            return self._relations == other._relations
        if isinstance(other, (set, frozenset)):
            return self._relations == other
        return NotImplemented

    def __hash__(self):
        return hash(self._relations)

    def __or__(self, other: "CISet") -> "CISet":
        return CISet(self._relations | set(other))

    def __le__(self, other: "CISet") -> bool:
        return self._relations <= frozenset(other)

    def __lt__(self, other: "CISet") -> bool:
        return self._relations < frozenset(other)

    def holds(self, x, y, given=()) -> bool:
        return CIRelation(x, y, given) in self._relations

    def pairwise(self) -> "CISet":
        return CISet(r for r in self._relations if r.is_pairwise())

    @property
    def variables(self) -> frozenset:
        out = frozenset()
        for r in self._relations:
            out |= r.variables
        return out

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self]

    @classmethod
    def from_json(cls, data) -> "CISet":
        if isinstance(data, Mapping):
            data = data["relations"]
        return cls(CIRelation.from_json(r) for r in data)

    def __repr__(self):
        return "CISet({" + "; ".join(str(r) for r in self) + "})"


def all_ci_relations(dist: JointDistribution, tol: float = DEFAULT_TOL) -> CISet:
    """Test every pair of variables against every conditioning subset of the rest."""
    names = dist.variables
    if len(names) > 12:
        raise ValueError("exhaustive scan limited to 12 variables")
    found = []
    for x, y in itertools.combinations(names, 2):
        rest = [v for v in names if v not in (x, y)]
        for k in range(len(rest) + 1):
            for given in itertools.combinations(rest, k):
                if is_conditionally_independent(dist, x, y, given, tol):
                    found.append(CIRelation(x, y, given))
    return CISet(found)


def _proper_subsets(s: frozenset) -> Iterator[frozenset]:
    items = sorted(s)
    for k in range(1, len(items)):
        for combo in itertools.combinations(items, k):
            yield frozenset(combo)


def semigraphoid_closure(cis: Iterable[CIRelation]) -> CISet:
    """Close under symmetry, decomposition, weak union and contraction.

    Symmetry is implicit in the canonical form of CIRelation.
    """
    closed = set(cis)
    frontier = set(closed)
    while frontier:
        new = set()
        for rel in frontier:
            for x, y, z in rel.oriented():
                for part in _proper_subsets(y):
                    new.add(CIRelation(x, part, z))
                    new.add(CIRelation(x, y - part, z | part))
        # contraction: x _||_ y | z  and  x _||_ w | z+y  =>  x _||_ y+w | z
        pool = closed | new
        oriented = [o for rel in pool for o in rel.oriented()]
        by_x = {}
        for x, y, z in oriented:
            by_x.setdefault(x, []).append((y, z))
        for x, entries in by_x.items():
            for y, z in entries:
                for w, z2 in entries:
                    if z2 == z | y and not (w & y) and not (w & z):
                        new.add(CIRelation(x, y | w, z))
        frontier = new - closed
        closed |= frontier
    return CISet(closed)
