import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_ci
from qdc.distributions import (
    CIRelation,
    CISet,
    JointDistribution,
    UnconditionableError,
    UnknownVariableError,
    all_ci_relations,
    condition,
    is_conditionally_independent,
    marginalize,
    semigraphoid_closure,
)
from qdc.qsim import CircuitParams, closed_form_state, joint_distribution


def paper(eta, alpha, phi):
    return joint_distribution(closed_form_state(CircuitParams(eta, alpha, phi)))


def as_dict(dist):
    return {a: float(dist.table[a]) for a in itertools.product((0, 1), repeat=len(dist.variables))}


@st.composite
def distributions(draw, n=3):
    weights = draw(st.lists(st.floats(0.0, 1.0), min_size=2**n, max_size=2**n).filter(lambda w: sum(w) > 1e-3))
    w = np.array(weights)
    return JointDistribution("ABCD"[:n], w / w.sum())


def test_table_validation():
    with pytest.raises(ValueError):
        JointDistribution(["A", "A"], [0.25] * 4)
    with pytest.raises(ValueError):
        JointDistribution(["A"], [0.5, 0.6])
    with pytest.raises(ValueError):
        JointDistribution(["A"], [1.5, -0.5])
    with pytest.raises(ValueError):
        JointDistribution(["A", "B"], [0.5, 0.5])


def test_marginalize_examples(generic_dist):
    uniform = JointDistribution("AB", [0.25] * 4)
    assert marginalize(uniform, {"A"}).probabilities().tolist() == [0.5, 0.5]
    assert marginalize(generic_dist, "ABC").allclose(generic_dist)
    d = paper(0.5, math.pi / 4, math.pi / 2)
    assert marginalize(d, {"B"}).prob({"B": 0}) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(UnknownVariableError):
        marginalize(d, {"Z"})
    with pytest.raises(ValueError):
        marginalize(d, set())


@pytest.mark.parametrize("eta", [0.2, 0.5, 0.9])
def test_marginal_of_b_is_eta(eta):
    d = paper(eta, 0.37, 1.9)
    assert marginalize(d, {"B"}).prob({"B": 0}) == pytest.approx(eta, abs=1e-12)


def test_condition_examples(generic_dist):
    given_b0 = condition(generic_dist, {"B": 0})
    assert given_b0.variables == ("A", "C")
    assert marginalize(given_b0, {"A"}).prob({"A": 0}) == pytest.approx(0.5, abs=1e-12)
    # brute force on the raw table
    t = generic_dist.table
    assert t[0, 0, :].sum() / t[:, 0, :].sum() == pytest.approx(0.5, abs=1e-12)

    point = condition(generic_dist, {"A": 1, "B": 1, "C": 0}, keep_evidence=True)
    assert point.prob({"A": 1, "B": 1, "C": 0}) == pytest.approx(1.0)
    assert np.count_nonzero(point.table) == 1

    with pytest.raises(UnconditionableError):
        condition(paper(1.0, 0.3, 0.3), {"B": 1})
    assert not issubclass(UnconditionableError, UnknownVariableError)


def test_ci_examples():
    d = paper(0.5, math.pi / 6, math.pi / 3)
    assert is_conditionally_independent(d, "A", "C", ["B"])
    assert not is_conditionally_independent(d, "A", "C", [])
    prod = JointDistribution("AB", np.outer([0.3, 0.7], [0.6, 0.4]).reshape(-1))
    assert is_conditionally_independent(prod, "A", "B")
    with pytest.raises(ValueError):
        is_conditionally_independent(d, "A", "A", [])
    with pytest.raises(ValueError):
        is_conditionally_independent(d, "A", "C", ["A"])


def test_generic_relations_exactly_paper():
    for eta, alpha, phi in [(0.5, math.pi / 6, math.pi / 3), (0.3, 0.4, 2.0), (0.8, 1.2, 0.5)]:
        assert all_ci_relations(paper(eta, alpha, phi)) == CISet([CIRelation("A", "C", "B")])


def test_degenerate_relations():
    cis = all_ci_relations(paper(0.5, math.pi / 4, math.pi / 2))
    assert CIRelation("A", "B") in cis
    assert CIRelation("A", "C") in cis
    assert CIRelation("A", "C", "B") in cis


def test_alpha_quarter_pi_makes_c_a_fair_coin():
    for eta, phi in [(0.25, math.pi / 6), (0.75, 2 * math.pi / 3)]:
        cis = all_ci_relations(paper(eta, math.pi / 4, phi))
        assert CIRelation("B", "C") in cis and CIRelation("A", "C") in cis


def test_point_mass_satisfies_everything():
    t = np.zeros(8)
    t[5] = 1.0
    cis = all_ci_relations(JointDistribution("ABC", t))
    assert len(cis) == 6


@pytest.mark.parametrize("eta,alpha,phi", [(0.5, math.pi / 6, math.pi / 3), (0.0, 0.3, 0.3), (0.5, 0.0, 1.0), (0.4, 0.7, math.pi / 2)])
def test_ci_matches_brute_force(eta, alpha, phi):
    d = paper(eta, alpha, phi)
    table = as_dict(d)
    for x, y in itertools.combinations("ABC", 2):
        rest = [v for v in "ABC" if v not in (x, y)]
        for k in range(2):
            for z in itertools.combinations(rest, k):
                assert is_conditionally_independent(d, x, y, z) == brute_ci(table, list("ABC"), x, y, z)


def test_relation_canonical_form():
    assert CIRelation("C", "A", "B") == CIRelation("A", "C", ["B"])
    assert str(CIRelation("C", "A", "B")) == "A _||_ C | B"
    with pytest.raises(ValueError):
        CIRelation("A", "A")
    with pytest.raises(ValueError):
        CIRelation("A", "B", "A")
    r = CIRelation("A", ["B", "D"], ["C"])
    assert CIRelation.from_json(r.to_json()) == r


def test_ciset_json_roundtrip_and_order():
    cis = CISet([CIRelation("B", "C"), CIRelation("A", "C", "B"), CIRelation("A", "B")])
    assert [str(r) for r in cis] == ["A _||_ B | {}", "A _||_ C | B", "B _||_ C | {}"]
    assert CISet.from_json(cis.to_json()) == cis
    assert CISet.from_json({"relations": cis.to_json()}) == cis


def test_closure_examples():
    closed = semigraphoid_closure(CISet([CIRelation("A", "C", "B")]))
    assert closed.holds("C", "A", ["B"])
    assert len(closed) == 1

    closed = semigraphoid_closure([CIRelation("X", ["Y", "W"])])
    assert closed.holds("X", "Y")
    assert closed.holds("X", "Y", ["W"])
    assert closed.holds("X", "W", ["Y"])
    assert semigraphoid_closure([]) == CISet()


def test_closure_contraction():
    closed = semigraphoid_closure([CIRelation("X", "Y", "Z"), CIRelation("X", "W", ["Z", "Y"])])
    assert closed.holds("X", ["Y", "W"], ["Z"])


relations = st.builds(
    lambda names, split: CIRelation(names[:1], names[1 : 1 + split], names[1 + split :]),
    st.permutations("ABCD"),
    st.integers(1, 3),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(relations, max_size=3), st.lists(relations, max_size=2))
def test_closure_idempotent_and_monotone(base, extra):
    once = semigraphoid_closure(base)
    assert semigraphoid_closure(once) == once
    assert CISet(base) <= once
    assert once <= semigraphoid_closure(base + extra)


@settings(max_examples=100, deadline=None)
@given(distributions())
def test_ci_symmetric(d):
    for x, y in itertools.permutations("ABC", 2):
        z = [v for v in "ABC" if v not in (x, y)]
        assert is_conditionally_independent(d, x, y, z) == is_conditionally_independent(d, y, x, z)


@settings(max_examples=100, deadline=None)
@given(distributions(n=4), st.sampled_from([{"A": 0}, {"B": 1}, {"A": 1, "C": 0}]), st.sampled_from([{"B"}, {"C"}, {"B", "C"}, {"D"}]))
def test_condition_marginalize_commute(d, evidence, keep):
    keep = keep - set(evidence)
    if not keep:
        return
    try:
        lhs = marginalize(condition(d, evidence), keep)
    except UnconditionableError:
        return
    rhs = condition(marginalize(d, keep | set(evidence)), evidence)
    assert lhs.allclose(rhs, atol=1e-12)


def test_distribution_json_roundtrip(generic_dist):
    data = generic_dist.to_json()
    assert data["variables"] == ["A", "B", "C"]
    assert len(data["probabilities"]) == 8
    assert JointDistribution.from_json(data) == generic_dist
