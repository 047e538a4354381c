"""Parameter-shift gradients for bound circuit templates.

Every parameterized gate here is generated by an operator squaring to the
identity (X, Y, Z, or Z(x)Z), so for a gate angle phi the exact two-point
rule holds: df/dphi = (f(phi + pi/2) - f(phi - pi/2)) / 2, where each f is a
full circuit evaluation. A template parameter may feed several gates (the
QAOA layers tie one gamma to every ring edge and one beta to every qubit);
the gradient with respect to that parameter is then the chain-rule sum of
per-gate shift terms, each weighted by the slot's angle scale. Shifts never
alter circuit structure and use no ancilla qubits.

The engine is loss-agnostic: it emits a jacobian of per-qubit Z expectations
against parameters, and chain_loss_gradient contracts it with whatever
downstream gradient the classical side produced (MSE for the denoiser;
softmax_xent reproduces the classification path).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from .ansatz import CircuitTemplate
from .statevector import GateOp, NoiseChannel, measure_all_z, run_circuit


@dataclass(frozen=True)
class ShiftEvaluation:
    """Per-qubit expectations at one gate's +pi/2 and -pi/2 shifts."""

    parameter_index: int
    f_plus: np.ndarray
    f_minus: np.ndarray

    @property
    def gradient(self) -> np.ndarray:
        return (self.f_plus - self.f_minus) / 2.0


@dataclass(frozen=True)
class QuantumJacobian:
    """d<Z_row>/d theta_col, plus the unshifted forward expectations.

    n_executions counts full circuit runs: two per parameterized gate
    occurrence plus one forward pass (equal to 2 * slot_count + 1 whenever
    slots bind one gate each, as in families a/b/c).
    """

    entries: np.ndarray
    forward: np.ndarray
    n_executions: int
    shifts: tuple[ShiftEvaluation, ...] = ()

    @property
    def n_qubits(self) -> int:
        return self.entries.shape[0]

    @property
    def n_parameters(self) -> int:
        return self.entries.shape[1]


def psr_gradient(
    template: CircuitTemplate,
    params,
    prelude: tuple[GateOp, ...] = (),
    channel: NoiseChannel | None = None,
    rng: np.random.Generator | None = None,
) -> QuantumJacobian:
    """Jacobian of all per-qubit <Z> against the template's parameters.

    The prelude (e.g. angle-encoding gates) is parameter-independent and is
    replayed in front of every evaluation.
    """
    params = np.asarray(params, dtype=float)
    n = template.n_qubits
    executions = 0

    def evaluate(gates: list[GateOp]) -> np.ndarray:
        nonlocal executions
        executions += 1
        state = run_circuit(n, list(prelude) + gates, channel, rng)
        return measure_all_z(state, channel)

    forward = evaluate(template.bind(params))
    entries = np.zeros((n, template.slot_count))
    shifts = []
    for gi in template.bound_gate_indices():
        gate = template.gates[gi]
        f_plus = evaluate(template.bind_with_shift(params, gi, +pi / 2))
        f_minus = evaluate(template.bind_with_shift(params, gi, -pi / 2))
        shifts.append(ShiftEvaluation(gate.slot, f_plus, f_minus))
        entries[:, gate.slot] += gate.scale * (f_plus - f_minus) / 2.0
    return QuantumJacobian(entries, forward, executions, tuple(shifts))


def chain_loss_gradient(jacobian, downstream) -> np.ndarray:
    """Loss gradient w.r.t. quantum parameters: downstream^T . jacobian."""
    entries = jacobian.entries if isinstance(jacobian, QuantumJacobian) else np.asarray(jacobian)
    downstream = np.asarray(downstream, dtype=float).ravel()
    if downstream.size != entries.shape[0]:
        raise ValueError(
            f"downstream gradient has {downstream.size} entries for a jacobian "
            f"with {entries.shape[0]} measured qubits"
        )
    return downstream @ entries


def softmax_xent(logits, target) -> tuple[float, np.ndarray]:
    """Cross entropy of softmax(logits) against a probability vector.

    Returns (loss, gradient w.r.t. logits); the fused gradient is
    softmax(logits) - target.
    """
    logits = np.asarray(logits, dtype=float).ravel()
    target = np.asarray(target, dtype=float).ravel()
    if logits.shape != target.shape:
        raise ValueError(f"shape mismatch: logits {logits.shape} vs target {target.shape}")
    if np.any(target < 0) or abs(target.sum() - 1.0) > 1e-6:
        raise ValueError("target must be a probability vector")
    shifted = logits - logits.max()
    log_z = np.log(np.sum(np.exp(shifted)))
    log_probs = shifted - log_z
    loss = float(-np.sum(target * log_probs))
    grad = np.exp(log_probs) - target
    return loss, grad
