"""Exact statevector simulation of the entanglement-controlled delayed-choice circuit.

Three qubits in the order (A, B, C). The basis label (a, b, c) maps to the
flat index ``4*a + 2*b + c``.

* A -- the photon; its two basis states are the interferometer exits.
* B -- the control qubit; ``|1>`` means the second beamsplitter is present.
* C -- entangled with B and rotated by ``alpha`` before detection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .distributions import JointDistribution

NORM_TOL = 1e-12
QUBITS = ("A", "B", "C")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


class DomainError(ValueError):
    """A parameter lies outside its mathematical domain."""


@dataclass(frozen=True)
class CircuitParams:
    eta: float
    alpha: float
    phi: float

    def __post_init__(self):
        for name in ("eta", "alpha", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite, got {getattr(self, name)!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta!r}")


@dataclass(frozen=True)
class QubitState:
    amp0: complex
    amp1: complex

    def __post_init__(self):
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"qubit state not normalized: |amp|^2 sums to {norm!r}")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)


class StateVector:
    """Immutable normalized state of the three qubits."""

    __slots__ = ("_amps",)

    def __init__(self, amplitudes):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (8,):
            raise ValueError(f"expected 8 amplitudes, got {amps.size}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state not normalized: sum |amp|^2 = {norm!r}")
        amps.setflags(write=False)
        self._amps = amps

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    def amplitude(self, a: int, b: int, c: int) -> complex:
        return complex(self._amps[4 * a + 2 * b + c])

    def probabilities(self) -> np.ndarray:
        return np.abs(self._amps) ** 2

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self._amps, other._amps))

    def labels(self) -> Iterator[tuple[int, int, int]]:
        for idx in range(8):
            yield (idx >> 2) & 1, (idx >> 1) & 1, idx & 1

    def to_json(self) -> list[list[float]]:
        return [[float(z.real), float(z.imag)] for z in self._amps]

    @classmethod
    def from_json(cls, pairs) -> "StateVector":
        return cls([complex(re, im) for re, im in pairs])

    def __repr__(self):
        return f"StateVector({np.array2string(self._amps, precision=6)})"


def rotation(alpha: float) -> np.ndarray:
    """Real rotation acting on C: ``|0> -> cos|0> - sin|1>``, ``|1> -> sin|0> + cos|1>``."""
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, s], [-s, c]], dtype=complex)


def phase(phi: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=complex)


def apply_single(state: StateVector, gate: np.ndarray, qubit: int) -> StateVector:
    tensor = state.amplitudes.reshape(2, 2, 2)
    out = np.moveaxis(np.tensordot(gate, tensor, axes=([1], [qubit])), 0, qubit)
    return StateVector(out.reshape(-1))


def apply_controlled(state: StateVector, gate: np.ndarray, control: int, target: int) -> StateVector:
    """Apply ``gate`` to ``target`` on the subspace where ``control`` is 1."""
    tensor = state.amplitudes.reshape(2, 2, 2).copy()
    idx = [slice(None)] * 3
    idx[control] = 1
    sub = tensor[tuple(idx)]
    # the control axis is gone from ``sub``, shift target index accordingly
    t = target - (1 if target > control else 0)
    tensor[tuple(idx)] = np.moveaxis(np.tensordot(gate, sub, axes=([1], [t])), 0, t)
    return StateVector(tensor.reshape(-1))


def build_initial_state(eta: float) -> StateVector:
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta must lie in [0, 1], got {eta!r}")
    amps = np.zeros(8, dtype=complex)
    amps[0b000] = math.sqrt(eta)
    amps[0b011] = math.sqrt(1.0 - eta)
    return StateVector(amps)


def apply_delayed_choice_circuit(state: StateVector, params: CircuitParams) -> StateVector:
    """First beamsplitter, phase shift, B-controlled second beamsplitter, then rotation of C."""
    state = apply_single(state, _H, 0)
    state = apply_single(state, phase(params.phi), 0)
    state = apply_controlled(state, _H, control=1, target=0)
    return apply_single(state, rotation(params.alpha), 2)


def particle_state(phi: float) -> QubitState:
    r = 1 / math.sqrt(2)
    return QubitState(complex(r), r * complex(np.exp(1j * phi)))


def wave_state(phi: float) -> QubitState:
    g = complex(np.exp(0.5j * phi))
    return QubitState(g * math.cos(phi / 2), g * -1j * math.sin(phi / 2))


def closed_form_state(params: CircuitParams, convention: str = "unitary") -> StateVector:
    """Pre-measurement state assembled from the particle and wave registers.

    ``convention="unitary"`` matches the circuit exactly. ``"literal"`` keeps the
    minus sign on the whole C=1 branch, which no rotation of C alone produces;
    it differs only in the sign of the (wave, B=1, C=1) amplitudes.
    """
    if convention not in ("unitary", "literal"):
        raise ValueError(f"unknown convention {convention!r}")
    root_eta, root_rest = math.sqrt(params.eta), math.sqrt(1.0 - params.eta)
    cos_a, sin_a = math.cos(params.alpha), math.sin(params.alpha)
    p = particle_state(params.phi).vector
    w = wave_state(params.phi).vector
    wave_c1 = root_rest * cos_a if convention == "unitary" else -root_rest * cos_a

    amps = np.zeros((2, 2, 2), dtype=complex)
    amps[:, 0, 0] = root_eta * cos_a * p
    amps[:, 1, 0] = root_rest * sin_a * w
    amps[:, 0, 1] = -root_eta * sin_a * p
    amps[:, 1, 1] = wave_c1 * w
    return StateVector(amps.reshape(-1))


def simulate(params: CircuitParams) -> StateVector:
    return apply_delayed_choice_circuit(build_initial_state(params.eta), params)


def joint_distribution(state: StateVector) -> JointDistribution:
    return JointDistribution(QUBITS, state.probabilities())
