"""Dense statevector simulation of a small qubit register.

Qubit ordering is little-endian: qubit 0 is the least significant bit of the
amplitude index, so the two-qubit basis state with qubit 0 set lives at
index 1. Gates mutate a complex128 amplitude array of length 2^n in place.
Measurement is an exact Pauli-Z expectation by default; a shot-sampled
estimate exists for realism but is never used by the trainer.

The noise channel is a minimal depolarizing + readout-flip model (a stand-in
for calibrated hardware noise): after a gate, each touched qubit suffers a
uniformly chosen Pauli kick with some probability, and readout expectations
are shrunk by (1 - 2 * flip probability). All randomness flows through an
explicit numpy Generator so runs are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, sin, pi

import numpy as np

MAX_QUBITS = 14

_SQRT2_INV = 1.0 / np.sqrt(2.0)
_H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV

ROTATION_KINDS = ("rx", "ry", "rz", "zz")
GATE_KINDS = ("h", "cnot") + ROTATION_KINDS


@dataclass(frozen=True)
class GateOp:
    """One gate: kind, target qubits, and an angle for rotation kinds."""

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n_targets = 2 if self.kind in ("cnot", "zz") else 1
        if len(self.targets) != n_targets:
            raise ValueError(f"{self.kind} takes {n_targets} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"{self.kind} targets must be distinct, got {self.targets}")
        if self.kind in ROTATION_KINDS:
            if self.angle is None:
                raise ValueError(f"{self.kind} requires an angle")
        elif self.angle is not None:
            raise ValueError(f"{self.kind} carries no angle")


def h(q: int) -> GateOp:
    return GateOp("h", (q,))


def cnot(control: int, target: int) -> GateOp:
    return GateOp("cnot", (control, target))


def rx(q: int, angle: float) -> GateOp:
    return GateOp("rx", (q,), float(angle))


def ry(q: int, angle: float) -> GateOp:
    return GateOp("ry", (q,), float(angle))


def rz(q: int, angle: float) -> GateOp:
    return GateOp("rz", (q,), float(angle))


def zz(qa: int, qb: int, angle: float) -> GateOp:
    """Two-qubit interaction exp(-i * angle/2 * Z(x)Z)."""
    return GateOp("zz", (qa, qb), float(angle))


@dataclass(frozen=True)
class NoiseChannel:
    """Per-gate depolarizing probability plus a readout bit-flip probability.

    (0, 0) is exactly the noiseless simulator.
    """

    depolarizing_prob: float = 0.0
    readout_flip_prob: float = 0.0

    def __post_init__(self):
        for name in ("depolarizing_prob", "readout_flip_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    @property
    def is_noiseless(self) -> bool:
        return self.depolarizing_prob == 0.0 and self.readout_flip_prob == 0.0


@dataclass
class StateVector:
    """Amplitudes of an n-qubit register, length exactly 2^n."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise ValueError(
                f"amplitude vector of length {self.amplitudes.size} does not match "
                f"{self.n_qubits} qubits (need {2**self.n_qubits})"
            )

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probabilities()))


def init_zero(n_qubits: int) -> StateVector:
    """All-qubits-|0> state; n is capped at MAX_QUBITS to bound memory."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def _rotation_matrix(kind: str, angle: float) -> np.ndarray:
    half = 0.5 * angle
    if kind == "rx":
        return np.array([[cos(half), -1j * sin(half)], [-1j * sin(half), cos(half)]])
    if kind == "ry":
        return np.array([[cos(half), -sin(half)], [sin(half), cos(half)]], dtype=complex)
    if kind == "rz":
        return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]])
    raise ValueError(f"not a single-qubit rotation: {kind}")


def _apply_1q(amps: np.ndarray, q: int, u: np.ndarray) -> None:
    # view amplitudes as (high bits, bit q, low bits); axis 1 is qubit q
    m = amps.reshape(-1, 2, 1 << q)
    a0 = m[:, 0, :].copy()
    a1 = m[:, 1, :]
    m[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    m[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def _apply_cnot(amps: np.ndarray, control: int, target: int) -> None:
    idx = np.arange(amps.size)
    sel = ((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 0)
    i0 = idx[sel]
    i1 = i0 | (1 << target)
    amps[i0], amps[i1] = amps[i1], amps[i0]


def _apply_zz(amps: np.ndarray, qa: int, qb: int, angle: float) -> None:
    idx = np.arange(amps.size)
    parity = ((idx >> qa) ^ (idx >> qb)) & 1
    amps *= np.where(parity == 0, np.exp(-0.5j * angle), np.exp(0.5j * angle))


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Apply one gate in place and return the state."""
    for q in gate.targets:
        if not 0 <= q < state.n_qubits:
            raise ValueError(f"gate target {q} out of range for {state.n_qubits} qubits")
    amps = state.amplitudes
    if gate.kind == "h":
        _apply_1q(amps, gate.targets[0], _H_MATRIX)
    elif gate.kind in ("rx", "ry", "rz"):
        _apply_1q(amps, gate.targets[0], _rotation_matrix(gate.kind, gate.angle))
    elif gate.kind == "cnot":
        _apply_cnot(amps, gate.targets[0], gate.targets[1])
    elif gate.kind == "zz":
        _apply_zz(amps, gate.targets[0], gate.targets[1], gate.angle)
    return state


def apply_noise(
    state: StateVector,
    channel: NoiseChannel,
    rng: np.random.Generator,
    targets: tuple[int, ...] | None = None,
) -> StateVector:
    """Depolarizing kick: each target qubit gets a uniformly chosen Pauli
    (as a rotation by pi) with probability depolarizing_prob.

    Called per gate by run_circuit with that gate's targets; with
    targets=None every qubit is exposed once.
    """
    if channel.depolarizing_prob <= 0.0:
        return state
    if targets is None:
        targets = tuple(range(state.n_qubits))
    for q in targets:
        if rng.random() < channel.depolarizing_prob:
            kind = ROTATION_KINDS[rng.integers(3)]
            _apply_1q(state.amplitudes, q, _rotation_matrix(kind, pi))
    return state


def run_circuit(
    n_qubits: int,
    gates,
    channel: NoiseChannel | None = None,
    rng: np.random.Generator | None = None,
) -> StateVector:
    """Execute a gate list on |0...0>, injecting noise after each gate."""
    noisy = channel is not None and channel.depolarizing_prob > 0.0
    if noisy and rng is None:
        raise ValueError("a seeded rng is required when the noise channel is active")
    state = init_zero(n_qubits)
    for gate in gates:
        apply_gate(state, gate)
        if noisy:
            apply_noise(state, channel, rng, gate.targets)
    return state


def expect_z(state: StateVector, qubit: int, channel: NoiseChannel | None = None) -> float:
    """Exact <Z> of one qubit: +1 weight where its bit is 0, -1 where it is 1.

    A readout_flip_prob r shrinks the value to (1 - 2r) * <Z>.
    """
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    probs = state.probabilities().reshape(-1, 2, 1 << qubit)
    value = float(probs[:, 0, :].sum() - probs[:, 1, :].sum())
    if channel is not None:
        value *= 1.0 - 2.0 * channel.readout_flip_prob
    return value


def measure_all_z(state: StateVector, channel: NoiseChannel | None = None) -> np.ndarray:
    """Vector of <Z> over all qubits, in qubit order."""
    return np.array([expect_z(state, q, channel) for q in range(state.n_qubits)])


def sample_expect_z(
    state: StateVector, qubit: int, shots: int, rng: np.random.Generator
) -> float:
    """Shot-sampled <Z> estimate (optional realism mode; tests use exact)."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    probs = state.probabilities().reshape(-1, 2, 1 << qubit)
    p_one = float(probs[:, 1, :].sum())
    ones = rng.random(shots) < p_one
    return 1.0 - 2.0 * float(np.mean(ones))
