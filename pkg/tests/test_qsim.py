import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import circuit_unitary, law_table
from qdc.qsim import (
    CircuitParams,
    DomainError,
    StateVector,
    apply_controlled,
    apply_delayed_choice_circuit,
    apply_single,
    build_initial_state,
    closed_form_state,
    joint_distribution,
    particle_state,
    phase,
    rotation,
    wave_state,
)

etas = st.floats(0.0, 1.0)
angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
GRID = [(e, a, p) for e in np.linspace(0, 1, 5) for a in np.linspace(0, math.pi, 5) for p in np.linspace(-math.pi, math.pi, 5)]


def test_initial_state_limits():
    assert build_initial_state(1.0).amplitude(0, 0, 0) == 1
    assert build_initial_state(0.0).amplitude(0, 1, 1) == 1
    s = build_initial_state(0.5)
    assert s.amplitude(0, 0, 0) == pytest.approx(math.sqrt(0.5))
    assert s.amplitude(0, 1, 1) == pytest.approx(math.sqrt(0.5))
    others = [s.amplitude(*lab) for lab in s.labels() if lab not in [(0, 0, 0), (0, 1, 1)]]
    assert not any(others)


@pytest.mark.parametrize("eta", [-0.1, 1.5, float("nan")])
def test_initial_state_rejects_bad_eta(eta):
    with pytest.raises(DomainError):
        build_initial_state(eta)


def test_params_validation():
    with pytest.raises(DomainError):
        CircuitParams(0.5, float("inf"), 0.0)
    with pytest.raises(DomainError):
        CircuitParams(1.01, 0.0, 0.0)


def test_state_vector_rejects_unnormalized():
    with pytest.raises(DomainError):
        StateVector([1, 1, 0, 0, 0, 0, 0, 0])
    with pytest.raises(ValueError):
        StateVector([1, 0])


def test_lone_hadamard_on_zero():
    zero = StateVector([1, 0, 0, 0, 0, 0, 0, 0])
    out = apply_delayed_choice_circuit(zero, CircuitParams(0.5, 0.0, 0.0))
    r = 1 / math.sqrt(2)
    assert np.allclose(out.amplitudes, [r, 0, 0, 0, r, 0, 0, 0], atol=1e-12)


@pytest.mark.parametrize("phi", [0.0, 0.4, math.pi / 2, 2.5, -1.0])
def test_particle_branch(phi):
    out = apply_delayed_choice_circuit(build_initial_state(1.0), CircuitParams(1.0, 0.0, phi))
    p = particle_state(phi)
    assert out.amplitude(0, 0, 0) == pytest.approx(p.amp0, abs=1e-12)
    assert out.amplitude(1, 0, 0) == pytest.approx(p.amp1, abs=1e-12)


def test_wave_branch_at_quarter_turn():
    phi = math.pi / 2
    out = apply_delayed_choice_circuit(build_initial_state(0.0), CircuitParams(0.0, 0.0, phi))
    w = wave_state(phi)
    got = np.array([out.amplitude(0, 1, 1), out.amplitude(1, 1, 1)])
    overlap = abs(np.vdot(w.vector, got))
    assert overlap == pytest.approx(1.0, abs=1e-12)


def test_qubit_states():
    for phi in (0.0, 1.0, 3.0):
        p = particle_state(phi)
        assert abs(p.amp0) ** 2 == pytest.approx(0.5)
        assert abs(p.amp1) ** 2 == pytest.approx(0.5)
    w0 = wave_state(0.0)
    assert abs(w0.amp0) ** 2 == pytest.approx(1.0)
    assert abs(w0.amp1) ** 2 == pytest.approx(0.0)
    wq = wave_state(math.pi / 2)
    assert abs(wq.amp0) ** 2 == pytest.approx(0.5)
    assert abs(wq.amp1) ** 2 == pytest.approx(0.5)


def test_wave_is_hadamard_of_particle():
    for phi in np.linspace(-3, 3, 13):
        h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        assert np.allclose(h @ particle_state(phi).vector, wave_state(phi).vector, atol=1e-12)


def test_closed_form_limits():
    s = closed_form_state(CircuitParams(1.0, 0.0, 0.7))
    p = particle_state(0.7)
    assert s.amplitude(0, 0, 0) == pytest.approx(p.amp0)
    assert s.amplitude(1, 0, 0) == pytest.approx(p.amp1)
    assert np.sum(s.probabilities()[[0, 4]]) == pytest.approx(1.0)

    s = closed_form_state(CircuitParams(0.0, 0.0, 0.7))
    probs = s.probabilities().reshape(2, 2, 2)
    assert probs[:, 1, 1].sum() == pytest.approx(1.0)


@pytest.mark.parametrize("eta,alpha,phi", GRID)
def test_circuit_matches_kron_unitary(eta, alpha, phi):
    expected = circuit_unitary(alpha, phi) @ build_initial_state(eta).amplitudes
    got = apply_delayed_choice_circuit(build_initial_state(eta), CircuitParams(eta, alpha, phi))
    assert np.allclose(got.amplitudes, expected, atol=1e-12)


@pytest.mark.parametrize("eta,alpha,phi", GRID)
def test_closed_form_agrees_with_circuit(eta, alpha, phi):
    params = CircuitParams(eta, alpha, phi)
    circuit = apply_delayed_choice_circuit(build_initial_state(eta), params)
    closed = closed_form_state(params)
    literal = closed_form_state(params, convention="literal")
    assert np.abs(joint_distribution(circuit).table - joint_distribution(closed).table).max() <= 1e-12
    assert np.abs(joint_distribution(literal).table - joint_distribution(closed).table).max() <= 1e-12
    assert np.allclose(circuit.amplitudes, closed.amplitudes, atol=1e-12)


@pytest.mark.parametrize("eta,alpha,phi", GRID)
def test_probability_law(eta, alpha, phi):
    table = joint_distribution(closed_form_state(CircuitParams(eta, alpha, phi))).table
    assert np.allclose(table, law_table(eta, alpha, phi), atol=1e-12, rtol=0)


def test_literal_convention_differs_only_in_wave_c1_sign():
    params = CircuitParams(0.3, 0.4, 1.1)
    a = closed_form_state(params).amplitudes.reshape(2, 2, 2)
    b = closed_form_state(params, convention="literal").amplitudes.reshape(2, 2, 2)
    assert np.allclose(a[:, 1, 1], -b[:, 1, 1])
    mask = np.ones((2, 2, 2), bool)
    mask[:, 1, 1] = False
    assert np.allclose(a[mask], b[mask])
    with pytest.raises(ValueError):
        closed_form_state(params, convention="other")


def test_worked_probabilities():
    dist = joint_distribution(closed_form_state(CircuitParams(0.5, math.pi / 4, math.pi / 2)))
    assert dist.prob({"A": 0, "B": 1, "C": 0}) == pytest.approx(0.125, abs=1e-12)
    for a in (0, 1):
        assert dist.prob({"A": a, "B": 0, "C": 0}) == pytest.approx(0.125, abs=1e-12)


def _random_state(rng):
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    return StateVector(v / np.linalg.norm(v))


@pytest.mark.parametrize(
    "gate,apply",
    [
        ("H", lambda s, g: apply_single(s, g, 0)),
        ("phase", lambda s, g: apply_single(s, g, 0)),
        ("CH", lambda s, g: apply_controlled(s, g, control=1, target=0)),
        ("rot", lambda s, g: apply_single(s, g, 2)),
    ],
)
def test_gates_preserve_inner_products(gate, apply):
    mats = {
        "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
        "CH": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
        "phase": phase(0.83),
        "rot": rotation(1.27),
    }
    rng = np.random.default_rng(7)
    for _ in range(20):
        s, t = _random_state(rng), _random_state(rng)
        before = s.inner(t)
        after = apply(s, mats[gate]).inner(apply(t, mats[gate]))
        assert abs(before - after) <= 1e-12


def test_controlled_gate_on_other_axes():
    # control on A, target C: X flips C only where A = 1
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    s = StateVector(np.eye(8)[0b100])
    assert apply_controlled(s, x, control=0, target=2).amplitude(1, 0, 1) == 1
    s = StateVector(np.eye(8)[0b000])
    assert apply_controlled(s, x, control=0, target=2).amplitude(0, 0, 0) == 1


def test_state_json_roundtrip():
    s = closed_form_state(CircuitParams(0.3, 0.2, 0.1))
    data = s.to_json()
    assert len(data) == 8 and all(len(pair) == 2 for pair in data)
    assert np.allclose(StateVector.from_json(data).amplitudes, s.amplitudes)


@settings(max_examples=200, deadline=None)
@given(etas, angles, angles)
def test_normalization_property(eta, alpha, phi):
    params = CircuitParams(eta, alpha, phi)
    for s in (closed_form_state(params), apply_delayed_choice_circuit(build_initial_state(eta), params)):
        assert abs(s.probabilities().sum() - 1.0) <= 1e-12
