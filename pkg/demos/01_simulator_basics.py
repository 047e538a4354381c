"""Walk through the statevector simulator: states, gates, measurement, noise.

Run with: python3 demos/01_simulator_basics.py
"""
import numpy as np

from qcae import (
    NoiseChannel,
    apply_gate,
    cnot,
    expect_z,
    h,
    init_zero,
    measure_all_z,
    run_circuit,
    ry,
    sample_expect_z,
    zz,
)

print("== qubit registers ==")
state = init_zero(2)
print("fresh 2-qubit register:", np.round(state.amplitudes, 3))

print("\n== building a Bell pair ==")
apply_gate(state, h(0))
apply_gate(state, cnot(0, 1))
print("after H(0), CNOT(0->1):", np.round(state.amplitudes, 4))
print("per-qubit <Z> (both maximally mixed):", measure_all_z(state))
print("norm stays exactly 1:", state.norm())

print("\n== rotations and expectations ==")
theta = 0.7
state = apply_gate(init_zero(1), ry(0, theta))
print(f"RY({theta})|0> gives <Z> = cos({theta}) = {expect_z(state, 0):.6f}")
shots = sample_expect_z(state, 0, 10_000, np.random.default_rng(0))
print(f"shot-sampled estimate over 10k shots: {shots:.4f}")

print("\n== the ZZ interaction ==")
state = run_circuit(2, [h(0), h(1), zz(0, 1, 1.2)])
print("ZZ entangles a product state; amplitudes now carry phases:")
print(np.round(state.amplitudes, 4))

print("\n== noise channel ==")
channel = NoiseChannel(depolarizing_prob=0.6, readout_flip_prob=0.1)
rng = np.random.default_rng(42)
noisy = run_circuit(2, [h(0), cnot(0, 1)], channel, rng)
print("depolarizing kicks perturb amplitudes:", np.round(noisy.amplitudes, 4))
tilted = apply_gate(init_zero(1), ry(0, theta))
print(f"readout flips shrink expectations: {expect_z(tilted, 0):.4f} -> "
      f"{expect_z(tilted, 0, channel):.4f} (factor 1 - 2*0.1)")
print("same seed, same result:",
      np.array_equal(
          run_circuit(2, [h(0), cnot(0, 1)], channel, np.random.default_rng(42)).amplitudes,
          noisy.amplitudes,
      ))
