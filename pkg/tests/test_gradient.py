"""Parameter-shift rule against analytics and finite differences."""
import numpy as np
import pytest

from qcae.ansatz import CircuitTemplate, ParameterSlot, TemplateGate, family_template
from qcae.gradient import QuantumJacobian, chain_loss_gradient, psr_gradient, softmax_xent
from qcae.statevector import measure_all_z, run_circuit, ry

from oracles import fd_jacobian


def single_ry_template() -> CircuitTemplate:
    return CircuitTemplate(
        n_qubits=1, p=1, family="a",
        gates=(TemplateGate("ry", (0,), slot=0),),
        slots=(ParameterSlot(0, "generic_rotation", "ry", (0,)),),
    )


def template_forward(template, params, prelude=()):
    state = run_circuit(template.n_qubits, list(prelude) + template.bind(params))
    return measure_all_z(state)


# ------------------------------------------------------------- single gate

def test_single_ry_gradient_is_minus_sine():
    jac = psr_gradient(single_ry_template(), [0.7])
    assert np.isclose(jac.entries[0, 0], -np.sin(0.7), atol=1e-12)
    assert np.isclose(jac.forward[0], np.cos(0.7), atol=1e-12)
    fd = fd_jacobian(lambda p: template_forward(single_ry_template(), p), [0.7])
    assert np.isclose(jac.entries[0, 0], fd[0, 0], atol=1e-5)


def test_single_ry_gradient_vanishes_at_zero():
    jac = psr_gradient(single_ry_template(), [0.0])
    assert abs(jac.entries[0, 0]) < 1e-12


def test_qaoa_two_qubit_jacobian_matches_finite_differences():
    template = family_template("ours", 2, 1)
    rng = np.random.default_rng(0)
    params = rng.uniform(0, 2 * np.pi, 2)
    jac = psr_gradient(template, params)
    fd = fd_jacobian(lambda p: template_forward(template, p), params)
    assert np.max(np.abs(jac.entries - fd)) < 1e-5


def test_psr_exactness_small_grid():
    rng = np.random.default_rng(17)
    for family in ("a", "b", "c", "ours"):
        for n in (2, 3):
            for p in (1, 2):
                template = family_template(family, n, p)
                for _ in range(3):
                    params = rng.uniform(0, 2 * np.pi, template.slot_count)
                    jac = psr_gradient(template, params)
                    fd = fd_jacobian(lambda v: template_forward(template, v), params)
                    assert np.max(np.abs(jac.entries - fd)) < 1e-5, (family, n, p)


def test_prelude_is_replayed_before_every_evaluation():
    template = single_ry_template()
    prelude = (ry(0, 0.3),)
    jac = psr_gradient(template, [0.5], prelude=prelude)
    # RY angles add: <Z> = cos(0.3 + theta), d/dtheta = -sin(0.3 + theta)
    assert np.isclose(jac.forward[0], np.cos(0.8), atol=1e-12)
    assert np.isclose(jac.entries[0, 0], -np.sin(0.8), atol=1e-12)


def test_execution_count_bookkeeping():
    # one-gate-per-slot families: exactly 2 * |params| + 1 executions
    for family in ("a", "b", "c"):
        template = family_template(family, 3, 2)
        jac = psr_gradient(template, np.zeros(template.slot_count))
        assert jac.n_executions == 2 * template.slot_count + 1
    # shared-slot QAOA: two executions per bound gate occurrence plus forward
    template = family_template("ours", 3, 2)
    occurrences = len(template.bound_gate_indices())
    jac = psr_gradient(template, np.zeros(2 * 2))
    assert occurrences == 2 * (3 + 3)  # per layer: 3 ring edges + 3 mixers
    assert jac.n_executions == 2 * occurrences + 1


def test_shift_records_stay_bounded():
    template = family_template("b", 2, 2)
    rng = np.random.default_rng(4)
    jac = psr_gradient(template, rng.uniform(0, 2 * np.pi, template.slot_count))
    for shift in jac.shifts:
        assert np.all(np.abs(shift.gradient) <= 1.0 + 1e-12)
        assert np.allclose(shift.gradient, (shift.f_plus - shift.f_minus) / 2)


def test_param_length_validation():
    with pytest.raises(ValueError):
        psr_gradient(family_template("a", 2, 1), [0.1])


# ------------------------------------------------------------- chain rule

def test_chain_identity_jacobian_passes_downstream_through():
    jac = QuantumJacobian(np.eye(2), np.zeros(2), 0)
    assert np.allclose(chain_loss_gradient(jac, [0.3, -0.1]), [0.3, -0.1])


def test_chain_zero_downstream_gives_zero():
    jac = QuantumJacobian(np.arange(6.0).reshape(2, 3), np.zeros(2), 0)
    assert np.allclose(chain_loss_gradient(jac, [0.0, 0.0]), np.zeros(3))


def test_chain_matches_matrix_vector_product():
    rng = np.random.default_rng(8)
    entries = rng.normal(size=(4, 2))
    downstream = rng.normal(size=4)
    expected = entries.T @ downstream
    assert np.allclose(chain_loss_gradient(QuantumJacobian(entries, np.zeros(4), 0), downstream),
                       expected)


def test_chain_is_linear_in_downstream():
    rng = np.random.default_rng(21)
    entries = rng.normal(size=(3, 5))
    jac = QuantumJacobian(entries, np.zeros(3), 0)
    d1, d2 = rng.normal(size=3), rng.normal(size=3)
    a, b = 0.6, -1.7
    combined = chain_loss_gradient(jac, a * d1 + b * d2)
    split = a * chain_loss_gradient(jac, d1) + b * chain_loss_gradient(jac, d2)
    assert np.max(np.abs(combined - split)) < 1e-12


def test_chain_dimension_mismatch():
    with pytest.raises(ValueError):
        chain_loss_gradient(QuantumJacobian(np.eye(2), np.zeros(2), 0), [1.0, 2.0, 3.0])


# ----------------------------------------------------------- softmax + xent

def test_softmax_xent_uniform_case():
    loss, grad = softmax_xent([0.0, 0.0], [0.5, 0.5])
    assert np.isclose(loss, np.log(2))
    assert np.allclose(grad, [0.0, 0.0], atol=1e-12)


def test_softmax_xent_confident_correct_logit():
    loss, _ = softmax_xent([10.0, 0.0], [1.0, 0.0])
    assert np.isclose(loss, np.log(1 + np.exp(-10.0)), rtol=1e-9)
    assert loss < 5e-5


def test_softmax_xent_one_hot_gradient_sign():
    rng = np.random.default_rng(12)
    for _ in range(10):
        logits = rng.normal(size=4)
        j = int(rng.integers(4))
        target = np.zeros(4)
        target[j] = 1.0
        _, grad = softmax_xent(logits, target)
        assert grad[j] < 0.0


def test_softmax_probabilities_normalize_and_loss_nonnegative():
    rng = np.random.default_rng(13)
    for _ in range(10):
        logits = rng.normal(scale=5.0, size=6)
        target = rng.dirichlet(np.ones(6))
        loss, grad = softmax_xent(logits, target)
        probs = grad + target
        assert abs(probs.sum() - 1.0) < 1e-12
        assert loss >= 0.0


def test_softmax_xent_validation():
    with pytest.raises(ValueError):
        softmax_xent([0.0, 0.0], [0.7, 0.7])
    with pytest.raises(ValueError):
        softmax_xent([0.0], [0.5, 0.5])
