"""Command-line front end: train, denoise, sweep, and eval.

One flat key=value config file drives everything; command-line flags
override file values (flags win). The effective configuration is hashed
into a short config_id used for output directories and CSV rows, so
repeated runs never silently overwrite differing setups. Exit codes:
0 success, 1 usage or configuration error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .data_io import filter_classes, load_idx, make_synthetic_digits
from .data_io import NoiseSpec, add_gaussian_noise, export_pgm, montage
from .metrics import mean_ssim, ssim_config_for, write_csv
from .model import DenoisingAutoencoder, ModelSpec, TrainConfig, train
from .statevector import NoiseChannel

ENV_DATA_DIR = "QCAE_DATA_DIR"

IDX_NAMES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Every tunable of a run; each field has a working default."""

    dataset: str = "idx"  # idx | synthetic
    data_dir: str = "data/mnist"
    train_images: str = ""  # blank: resolved from data_dir + standard names
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    classes: str = "0,1"
    limit: int = 2000
    val_limit: int = 100
    model: str = "qcae"  # qcae | ccae
    qubits: int = 4
    p: int = 2
    family: str = "ours"
    psr: bool = True
    sigma: float = 0.5
    epochs: int = 10
    batch_size: int = 16
    learning_rate: float = 1e-3
    seed: int = 0
    depolarizing_prob: float = 0.0
    readout_flip_prob: float = 0.0
    image_size: int = 28
    synthetic_count: int = 512
    output_dir: str = "runs"


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw):
    if key not in _FIELD_TYPES:
        raise ValueError(f"unknown config key {key!r}")
    if not isinstance(raw, str):
        return raw
    kind = _FIELD_TYPES[key]
    if kind == "bool":
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"config key {key!r}: cannot parse boolean from {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw.strip()


def load_config_file(path) -> dict:
    """Parse `key = value` lines; # starts a comment, blank lines skipped."""
    overrides = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        overrides[key] = _coerce(key, value)
    return overrides


def resolve_config(config_path=None, flag_overrides: dict | None = None) -> ExperimentConfig:
    values = asdict(ExperimentConfig())
    if config_path:
        values.update(load_config_file(config_path))
    for key, raw in (flag_overrides or {}).items():
        if raw is not None:
            values[key] = _coerce(key, raw)
    cfg = ExperimentConfig(**values)
    if cfg.dataset not in ("idx", "synthetic"):
        raise ValueError(f"dataset must be idx or synthetic, got {cfg.dataset!r}")
    if cfg.model not in ("qcae", "ccae"):
        raise ValueError(f"model must be qcae or ccae, got {cfg.model!r}")
    # fail fast on numeric ranges, naming the offending key
    _model_spec(cfg)
    _train_config(cfg)
    return cfg


def config_id(cfg: ExperimentConfig) -> str:
    canonical = "\n".join(f"{k}={v}" for k, v in sorted(asdict(cfg).items()))
    return hashlib.sha256(canonical.encode()).hexdigest()[:10]


def _model_spec(cfg: ExperimentConfig) -> ModelSpec:
    return ModelSpec(
        kind=cfg.model,
        n_qubits=cfg.qubits,
        p=cfg.p,
        family=cfg.family,
        psr_enabled=cfg.psr,
        noise=NoiseChannel(cfg.depolarizing_prob, cfg.readout_flip_prob),
        image_size=cfg.image_size,
    )


def _train_config(cfg: ExperimentConfig) -> TrainConfig:
    return TrainConfig(
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        seed=cfg.seed,
        sigma=cfg.sigma,
        learning_rate=cfg.learning_rate,
        sample_limit=cfg.limit,
        val_limit=cfg.val_limit,
    )


def _parsed_classes(cfg: ExperimentConfig) -> list[int]:
    try:
        return [int(c) for c in cfg.classes.split(",") if c.strip() != ""]
    except ValueError as e:
        raise ValueError(f"classes must be comma-separated integers: {e}") from None


def _idx_path(cfg: ExperimentConfig, key: str) -> Path:
    explicit = getattr(cfg, key)
    if explicit:
        return Path(explicit)
    data_dir = os.environ.get(ENV_DATA_DIR, cfg.data_dir)
    return Path(data_dir) / IDX_NAMES[key]


def load_datasets(cfg: ExperimentConfig):
    """Return (train_set, val_set) already filtered to the configured classes."""
    classes = _parsed_classes(cfg)
    if cfg.dataset == "synthetic":
        train_set = make_synthetic_digits(cfg.synthetic_count, classes=classes,
                                          seed=cfg.seed, size=cfg.image_size)
        val_set = make_synthetic_digits(max(cfg.val_limit, 1), classes=classes,
                                        seed=cfg.seed + 1, size=cfg.image_size)
        return filter_classes(train_set, classes, cfg.limit), val_set
    train_set = load_idx(_idx_path(cfg, "train_images"), _idx_path(cfg, "train_labels"))
    val_set = load_idx(_idx_path(cfg, "test_images"), _idx_path(cfg, "test_labels"))
    return (
        filter_classes(train_set, classes, cfg.limit),
        filter_classes(val_set, classes, cfg.val_limit),
    )


def _write_manifest(out_dir: Path, cfg: ExperimentConfig, cid: str) -> None:
    manifest = {"config_id": cid, "config": asdict(cfg)}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _read_manifest(run_dir: Path) -> ExperimentConfig:
    manifest = json.loads((run_dir / "manifest.json").read_text())
    return ExperimentConfig(**manifest["config"])


def _train_run(cfg: ExperimentConfig) -> tuple[Path, float]:
    """Shared by train and sweep: fit, persist, return (run dir, final ssim)."""
    cid = config_id(cfg)
    out_dir = Path(cfg.output_dir) / cid
    out_dir.mkdir(parents=True, exist_ok=True)
    train_set, val_set = load_datasets(cfg)
    model, records = train(_model_spec(cfg), _train_config(cfg), train_set,
                           val_set, config_id=cid)
    model.save(out_dir / "weights.bin")
    _write_manifest(out_dir, cfg, cid)
    write_csv(records, out_dir / "curve.csv")
    return out_dir, records[-1].val_ssim


def cmd_train(args) -> int:
    cfg = resolve_config(args.config, _flag_overrides(args))
    out_dir, final_ssim = _train_run(cfg)
    print(f"run {out_dir.name}: artifacts in {out_dir}")
    print(f"final val_ssim {final_ssim:.6f}")
    return 0


def cmd_denoise(args) -> int:
    run_dir = Path(args.run)
    cfg = _read_manifest(run_dir)
    if args.sigma is not None:
        cfg = replace(cfg, sigma=float(args.sigma))
    model = DenoisingAutoencoder(_model_spec(cfg), seed=cfg.seed)
    model.load(run_dir / "weights.bin")
    _, val_set = load_datasets(cfg)
    count = min(args.count, len(val_set))
    if count == 0:
        raise ValueError("no validation images available to denoise")
    clean = val_set.images[:count]
    noisy = add_gaussian_noise(clean, NoiseSpec(cfg.sigma, cfg.seed))
    denoised = model.denoise(noisy)
    for i in range(count):
        panel = montage([clean[i], noisy[i], denoised[i]])
        path = run_dir / f"denoised_{i:03d}.pgm"
        export_pgm(panel, path)
        print(f"wrote {path}")
    return 0


SWEEP_AXES = ("p", "sigma", "family", "psr")


def _parse_axis(text: str) -> tuple[str, list]:
    if "=" not in text:
        raise ValueError(f"axis must look like name=v1,v2,... got {text!r}")
    name, _, values = text.partition("=")
    name = name.strip()
    if name not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {name!r}")
    parsed = [_coerce(name, v) for v in values.split(",") if v.strip() != ""]
    if not parsed:
        raise ValueError(f"axis {name!r} has no values")
    return name, parsed


def cmd_sweep(args) -> int:
    cfg = resolve_config(args.config, _flag_overrides(args))
    axes = [_parse_axis(a) for a in args.axis]
    if not axes:
        raise ValueError("sweep needs at least one --axis")
    names = [name for name, _ in axes]
    out_root = Path(cfg.output_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    rows = []
    for index, combo in enumerate(itertools.product(*(vals for _, vals in axes))):
        point = replace(cfg, **dict(zip(names, combo)), seed=cfg.seed + index)
        cid = config_id(point)
        try:
            _, final_ssim = _train_run(point)
            rows.append((cid, combo, f"{final_ssim:.6f}", "ok"))
        except Exception as e:  # keep sweeping; mark the grid point failed
            rows.append((cid, combo, "", "FAILED"))
            print(f"grid point {combo} failed: {e}", file=sys.stderr)
    sweep_path = out_root / f"sweep_{config_id(cfg)}.csv"
    with open(sweep_path, "w", newline="") as f:
        f.write("config_id," + ",".join(names) + ",final_val_ssim,status\n")
        for cid, combo, ssim_text, status in rows:
            combo_text = ",".join(str(v) for v in combo)
            f.write(f"{cid},{combo_text},{ssim_text},{status}\n")
    print(f"wrote {sweep_path} ({len(rows)} grid points)")
    return 0


def cmd_eval(args) -> int:
    run_dir = Path(args.run)
    cfg = _read_manifest(run_dir)
    model = DenoisingAutoencoder(_model_spec(cfg), seed=cfg.seed)
    model.load(run_dir / "weights.bin")
    _, val_set = load_datasets(cfg)
    if len(val_set) == 0:
        raise ValueError("no validation images available")
    clean = val_set.images[:cfg.val_limit]
    noisy = add_gaussian_noise(clean, NoiseSpec(cfg.sigma, cfg.seed))
    cfg_ssim = ssim_config_for(clean.shape)
    ssim_noisy = mean_ssim(noisy, clean, cfg_ssim)
    ssim_denoised = mean_ssim(model.denoise(noisy), clean, cfg_ssim)
    path = run_dir / "eval.csv"
    with open(path, "w", newline="") as f:
        f.write("config_id,n_images,ssim_noisy,ssim_denoised\n")
        f.write(f"{config_id(cfg)},{len(clean)},{ssim_noisy:.6f},{ssim_denoised:.6f}\n")
    print(f"ssim noisy->clean     {ssim_noisy:.6f}")
    print(f"ssim denoised->clean  {ssim_denoised:.6f}")
    print(f"wrote {path}")
    return 0


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


_OVERRIDE_FLAGS = [f.name for f in fields(ExperimentConfig)]


def _flag_overrides(args) -> dict:
    return {name: getattr(args, name, None) for name in _OVERRIDE_FLAGS}


def _add_override_flags(parser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    for name in _OVERRIDE_FLAGS:
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None,
                            metavar="V", help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcae", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_train = sub.add_parser("train", help="fit a model and persist weights/curve")
    _add_override_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_denoise = sub.add_parser("denoise", help="write clean|noisy|denoised panels")
    p_denoise.add_argument("--run", required=True, help="training output directory")
    p_denoise.add_argument("--count", type=int, default=4)
    p_denoise.add_argument("--sigma", default=None)
    p_denoise.set_defaults(func=cmd_denoise)

    p_sweep = sub.add_parser("sweep", help="train a grid over p/sigma/family/psr")
    _add_override_flags(p_sweep)
    p_sweep.add_argument("--axis", action="append", default=[],
                         metavar="NAME=V1,V2", help="repeatable sweep axis")
    p_sweep.set_defaults(func=cmd_sweep)

    p_eval = sub.add_parser("eval", help="SSIM of a trained run on the validation set")
    p_eval.add_argument("--run", required=True)
    p_eval.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_help()
            return 1
        return args.func(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError, NotADirectoryError, KeyError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - map anything else to runtime failure
        print(f"runtime failure: {e}", file=sys.stderr)
        return 2
