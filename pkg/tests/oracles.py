"""Independent reference implementations used only by tests.

The dense oracle builds explicit 2^n x 2^n unitaries by kron-embedding
2x2 / 4x4 blocks and multiplying them onto the state, sharing no code with
the package's bit-twiddling kernels. Qubit ordering matches the package:
qubit 0 is the least significant bit of the basis index.
"""
from __future__ import annotations

from math import cos, sin

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def single_qubit_matrix(kind: str, angle: float | None) -> np.ndarray:
    if kind == "h":
        return H
    half = 0.5 * angle
    if kind == "rx":
        return np.array([[cos(half), -1j * sin(half)], [-1j * sin(half), cos(half)]])
    if kind == "ry":
        return np.array([[cos(half), -sin(half)], [sin(half), cos(half)]], dtype=complex)
    if kind == "rz":
        return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]])
    raise ValueError(kind)


def embed_1q(u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    high = np.eye(2 ** (n - 1 - qubit), dtype=complex)
    low = np.eye(2**qubit, dtype=complex)
    return np.kron(high, np.kron(u, low))


def gate_matrix(gate, n: int) -> np.ndarray:
    """Full 2^n x 2^n unitary of one package GateOp."""
    if gate.kind in ("h", "rx", "ry", "rz"):
        return embed_1q(single_qubit_matrix(gate.kind, gate.angle), gate.targets[0], n)
    if gate.kind == "cnot":
        control, target = gate.targets
        return embed_1q(P0, control, n) + embed_1q(P1, control, n) @ embed_1q(X, target, n)
    if gate.kind == "zz":
        qa, qb = gate.targets
        generator = embed_1q(Z, qa, n) @ embed_1q(Z, qb, n)
        return expm(-0.5j * gate.angle * generator)
    raise ValueError(gate.kind)


def run_dense(n: int, gates) -> np.ndarray:
    """Apply a gate list to |0...0> via explicit matrix products."""
    state = np.zeros(2**n, dtype=complex)
    state[0] = 1.0
    for gate in gates:
        state = gate_matrix(gate, n) @ state
    return state


def dense_expect_z(state: np.ndarray, qubit: int, n: int) -> float:
    z_full = embed_1q(Z, qubit, n)
    return float(np.real(np.conj(state) @ (z_full @ state)))


def dense_all_z(state: np.ndarray, n: int) -> np.ndarray:
    return np.array([dense_expect_z(state, q, n) for q in range(n)])


def fd_gradient(f, x, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function of a flat vector."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        plus, minus = x.copy(), x.copy()
        plus[i] += h
        minus[i] -= h
        grad[i] = (f(plus) - f(minus)) / (2 * h)
    return grad


def fd_jacobian(f, x, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a vector function; columns follow x."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        plus, minus = x.copy(), x.copy()
        plus[i] += h
        minus[i] -= h
        cols.append((np.asarray(f(plus)) - np.asarray(f(minus))) / (2 * h))
    return np.stack(cols, axis=-1)


def random_gate_list(n: int, n_gates: int, rng: np.random.Generator):
    """Random circuit over the package's gate set, as GateOps."""
    from qcae.statevector import cnot, h as h_gate, rx, ry, rz, zz

    gates = []
    for _ in range(n_gates):
        kind = rng.choice(["h", "cnot", "rx", "ry", "rz", "zz"])
        if kind in ("cnot", "zz") and n < 2:
            kind = "h"
        if kind == "h":
            gates.append(h_gate(int(rng.integers(n))))
        elif kind == "cnot":
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(cnot(int(a), int(b)))
        elif kind == "zz":
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(zz(int(a), int(b), float(rng.uniform(-np.pi, np.pi))))
        else:
            maker = {"rx": rx, "ry": ry, "rz": rz}[kind]
            gates.append(maker(int(rng.integers(n)), float(rng.uniform(-np.pi, np.pi))))
    return gates
