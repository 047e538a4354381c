"""Hybrid quantum-classical convolutional autoencoder for image denoising.

The package splits into small, composable pieces:

  statevector  dense n-qubit simulator with gates, exact Z expectations,
               and an optional depolarizing/readout noise channel
  ansatz       circuit templates (QAOA layers plus comparison families),
               angle encoding and normalization
  gradient     parameter-shift jacobians and classical chain-rule glue
  nn           conv/tconv/dense layers with manual backprop, MSE, Adam
  model        the assembled denoisers (classical and hybrid) and training
  data_io      IDX datasets, Gaussian noising, PGM export, synthetic corpus
  metrics      SSIM and CSV run reporting
  cli          train / denoise / sweep / eval entry points
"""

from .ansatz import (
    CircuitTemplate,
    ParameterSlot,
    angle_encode,
    build_family,
    build_qaoa,
    family_template,
    normalize_to_angle,
    qaoa_template,
)
from .data_io import (
    MnistSet,
    NoiseSpec,
    add_gaussian_noise,
    export_pgm,
    filter_classes,
    load_idx,
    make_synthetic_digits,
    montage,
    write_idx,
)
from .gradient import QuantumJacobian, ShiftEvaluation, chain_loss_gradient, psr_gradient, softmax_xent
from .metrics import RunRecord, SsimConfig, mean_ssim, ssim, write_csv
from .model import (
    DenoisingAutoencoder,
    ModelSpec,
    QuantumLatent,
    TrainConfig,
    TrainingAborted,
    denoise,
    train,
)
from .nn import Adam, LayerSpec, load_weights, mse_loss, save_weights
from .statevector import (
    GateOp,
    NoiseChannel,
    StateVector,
    apply_gate,
    apply_noise,
    cnot,
    expect_z,
    h,
    init_zero,
    measure_all_z,
    run_circuit,
    rx,
    ry,
    rz,
    sample_expect_z,
    zz,
)

__version__ = "0.1.0"
