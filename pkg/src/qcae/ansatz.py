"""Parameterized circuit templates: angle encoding, QAOA layers, and the
hardware-efficient comparison families.

A template is an immutable gate program in which rotation angles refer to
parameter slots filled in at bind time. Families:

  ours  p alternations of a ring ZZ cost layer and an RX mixer layer on a
        uniform superposition; parameter vector [g_1..g_p, b_1..b_p], 2p
        slots. Gate angles absorb a factor 2 so that ZZ(2g) and RX(2b)
        realize exp(-i g Z_i Z_{i+1}) and exp(-i b X_j). One g (or b) feeds
        every edge (or qubit) of its layer.
  a     per layer: RY on each qubit, then a CNOT chain q0->q1->...  (p*n slots)
  b     per layer: RY column, RZ column, CNOT chain                 (2*p*n slots)
  c     per layer: RY column, CNOT ring (chain plus q_{n-1}->q0),
        then RZ column                                              (2*p*n slots)

Slot indices follow gate order within each family, so identical inputs
always produce identical gate lists.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from .statevector import GateOp, rx, ry, rz

FAMILIES = ("a", "b", "c", "ours")

ROLE_GAMMA = "gamma"
ROLE_BETA = "beta"
ROLE_GENERIC = "generic_rotation"


@dataclass(frozen=True)
class ParameterSlot:
    """One trainable parameter: where it sits and which gates it feeds."""

    index: int
    role: str
    gate_kind: str
    targets: tuple[int, ...]
    angle_scale: float = 1.0


@dataclass(frozen=True)
class TemplateGate:
    """Gate program entry; slot is None for fixed gates like H/CNOT."""

    kind: str
    targets: tuple[int, ...]
    slot: int | None = None
    angle: float | None = None
    scale: float = 1.0


@dataclass(frozen=True)
class CircuitTemplate:
    n_qubits: int
    p: int
    family: str
    gates: tuple[TemplateGate, ...]
    slots: tuple[ParameterSlot, ...]

    @property
    def slot_count(self) -> int:
        return len(self.slots)

    def bound_gate_indices(self) -> list[int]:
        """Positions of parameterized gates, in program order."""
        return [i for i, g in enumerate(self.gates) if g.slot is not None]

    def _check_params(self, params: np.ndarray) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.slot_count,):
            raise ValueError(
                f"family {self.family!r} (n={self.n_qubits}, p={self.p}) takes "
                f"{self.slot_count} parameters, got shape {params.shape}"
            )
        return params

    def bind(self, params) -> list[GateOp]:
        """Fill every slot and return a concrete gate list."""
        return self.bind_with_shift(params, None, 0.0)

    def bind_with_shift(self, params, gate_index: int | None, delta: float) -> list[GateOp]:
        """Bind, adding delta to the gate angle of one parameterized gate.

        The shift is in gate-angle space (after the slot's scale factor),
        which is what the two-point parameter-shift rule requires.
        """
        params = self._check_params(params)
        if gate_index is not None:
            if not 0 <= gate_index < len(self.gates):
                raise ValueError(f"gate index {gate_index} out of range")
            if self.gates[gate_index].slot is None:
                raise ValueError(f"gate {gate_index} is not parameterized")
        out = []
        for i, g in enumerate(self.gates):
            if g.slot is None:
                angle = g.angle
            else:
                angle = g.scale * params[g.slot]
                if i == gate_index:
                    angle += delta
            out.append(GateOp(g.kind, g.targets, angle))
        return out


def ring_edges(n_qubits: int) -> list[tuple[int, int]]:
    """Nearest-neighbour ring; a 2-qubit ring is the single edge (0, 1)."""
    if n_qubits < 2:
        return []
    if n_qubits == 2:
        return [(0, 1)]
    return [(i, (i + 1) % n_qubits) for i in range(n_qubits)]


def _chain_pairs(n_qubits: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(n_qubits - 1)]


def qaoa_template(n_qubits: int, p: int) -> CircuitTemplate:
    """H wall, then p rounds of ZZ(2g_k) on ring edges and RX(2b_k) on all qubits."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    gates = [TemplateGate("h", (q,)) for q in range(n_qubits)]
    for k in range(p):
        for a, b in ring_edges(n_qubits):
            gates.append(TemplateGate("zz", (a, b), slot=k, scale=2.0))
        for q in range(n_qubits):
            gates.append(TemplateGate("rx", (q,), slot=p + k, scale=2.0))
    everything = tuple(range(n_qubits))
    slots = [ParameterSlot(k, ROLE_GAMMA, "zz", everything, 2.0) for k in range(p)]
    slots += [ParameterSlot(p + k, ROLE_BETA, "rx", everything, 2.0) for k in range(p)]
    return CircuitTemplate(n_qubits, p, "ours", tuple(gates), tuple(slots))


def family_template(family: str, n_qubits: int, p: int) -> CircuitTemplate:
    """Build one of the comparison templates (or the QAOA one for 'ours')."""
    family = family.lower()
    if family not in FAMILIES:
        raise ValueError(f"unknown circuit family {family!r}; choose from {FAMILIES}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if family == "ours":
        return qaoa_template(n_qubits, p)

    gates: list[TemplateGate] = []
    slots: list[ParameterSlot] = []

    def rotation_column(kind: str) -> None:
        for q in range(n_qubits):
            idx = len(slots)
            gates.append(TemplateGate(kind, (q,), slot=idx))
            slots.append(ParameterSlot(idx, ROLE_GENERIC, kind, (q,)))

    for _ in range(p):
        if family == "a":
            rotation_column("ry")
            for c, t in _chain_pairs(n_qubits):
                gates.append(TemplateGate("cnot", (c, t)))
        elif family == "b":
            rotation_column("ry")
            rotation_column("rz")
            for c, t in _chain_pairs(n_qubits):
                gates.append(TemplateGate("cnot", (c, t)))
        else:  # c
            rotation_column("ry")
            entangler = _chain_pairs(n_qubits)
            if n_qubits > 1:
                entangler = entangler + [(n_qubits - 1, 0)]
            for c, t in entangler:
                gates.append(TemplateGate("cnot", (c, t)))
            rotation_column("rz")
    return CircuitTemplate(n_qubits, p, family, tuple(gates), tuple(slots))


def angle_encode(values, rotation: str = "ry", n_qubits: int | None = None) -> list[GateOp]:
    """One rotation gate per qubit, angle taken directly from the value vector.

    Values are expected to be pre-normalized to [0, 2*pi]; see
    normalize_to_angle. RY is the default axis.
    """
    values = np.asarray(values, dtype=float).ravel()
    if rotation not in ("rx", "ry", "rz"):
        raise ValueError(f"rotation must be rx/ry/rz, got {rotation!r}")
    if n_qubits is not None and values.size != n_qubits:
        raise ValueError(f"got {values.size} values for {n_qubits} qubits")
    maker = {"rx": rx, "ry": ry, "rz": rz}[rotation]
    return [maker(q, v) for q, v in enumerate(values)]


def normalize_to_angle(raw, lo: float, hi: float) -> np.ndarray:
    """Affine map of [lo, hi] onto [0, 2*pi], clamped outside the range."""
    if hi <= lo:
        raise ValueError(f"need hi > lo, got lo={lo}, hi={hi}")
    raw = np.asarray(raw, dtype=float)
    return np.clip(2.0 * pi * (raw - lo) / (hi - lo), 0.0, 2.0 * pi)


def build_qaoa(n_qubits: int, p: int, gammas, betas) -> list[GateOp]:
    """Concrete QAOA gate list for parameter vectors of length p each."""
    gammas = np.asarray(gammas, dtype=float).ravel()
    betas = np.asarray(betas, dtype=float).ravel()
    if gammas.size != p or betas.size != p:
        raise ValueError(
            f"expected {p} gammas and {p} betas, got {gammas.size} and {betas.size}"
        )
    return qaoa_template(n_qubits, p).bind(np.concatenate([gammas, betas]))


def build_family(family: str, n_qubits: int, p: int, params) -> list[GateOp]:
    """Concrete gate list for any family; params length must match its slots."""
    return family_template(family, n_qubits, p).bind(params)
