"""Experiment configuration, grid execution and CSV/JSON output."""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import math
import os
import zlib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .benchmarks import EsnConfig, MapSpec, esn_run_and_fit, generate_trajectory, map_error
from .pauli import StabilizerSpec, chain_zz, single_z
from .readout import Diverged, fit, one_step_targets, predict_closed_loop, score_r2
from .reservoir import EncodingConfig, MultiplexedReservoir, ReservoirInstance, build_features
from .state import sample_ising

PRESETS = ("single_z", "chain_zz")
THREADS_ENV = "COSET_QRC_THREADS"


class ConfigError(ValueError):
    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    map: str = "logistic"
    map_params: dict = field(default_factory=dict)
    n_qubits: int = 4
    k_stabilizers: int = 3
    stabilizer_preset: list = field(default_factory=lambda: list(PRESETS))
    custom_generators: list | None = None
    num_reservoirs: int = 20
    timeplex: int = 10
    encoding: str = "exponential"
    betas: list | None = None
    input_scale: float = 1.0
    dt: float = 1.645
    trotter_steps: int = 1
    training_lengths: list = field(default_factory=lambda: [35, 68, 101, 134, 167])
    horizon: int = 100
    shots: int | None = None
    ridge_lambda: float = 1e-8
    correction_enabled: bool = True
    baseline: str = "esn"
    esn_spectral_radius: float = 0.9
    esn_leak: float = 1.0
    esn_input_scale: float = 0.5
    master_seed: int = 0
    output_dir: str = "results"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown config key")
        data = dict(data)
        if isinstance(data.get("stabilizer_preset"), str):
            data["stabilizer_preset"] = [data["stabilizer_preset"]]
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | os.PathLike) -> ExperimentConfig:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def map_spec(self) -> MapSpec:
        try:
            return MapSpec(self.map, **self.map_params)
        except (TypeError, ValueError) as exc:
            raise ConfigError("map", str(exc)) from None

    def validate(self) -> None:
        m = self.map_spec()
        n, k = self.n_qubits, self.k_stabilizers
        if not 1 <= n <= 10:
            raise ConfigError("n_qubits", "must lie in 1..10")
        for p in self.stabilizer_preset:
            if p not in PRESETS:
                raise ConfigError("stabilizer_preset", f"unknown preset {p!r}")
            if p == "single_z" and not 1 <= k <= n:
                raise ConfigError("k_stabilizers", "single_z needs n_qubits >= k_stabilizers")
            if p == "chain_zz" and not (k >= 1 and n >= k + 1):
                raise ConfigError("k_stabilizers", "chain_zz needs n_qubits >= k_stabilizers + 1")
        if self.custom_generators is not None:
            try:
                spec = StabilizerSpec.from_generators(self.custom_generators)
            except ValueError as exc:
                raise ConfigError("custom_generators", str(exc)) from None
            if spec.n != n:
                raise ConfigError("custom_generators", f"generators act on {spec.n} qubits, not {n}")
            if spec.k != k:
                raise ConfigError("custom_generators", f"need exactly k_stabilizers={k} generators")
        if not self.stabilizer_preset and self.custom_generators is None and self.baseline == "none":
            raise ConfigError("stabilizer_preset", "no methods to run")
        if self.num_reservoirs < 1:
            raise ConfigError("num_reservoirs", "must be >= 1")
        if self.timeplex < 1:
            raise ConfigError("timeplex", "must be >= 1")
        if self.encoding not in ("uniform", "exponential", "custom"):
            raise ConfigError("encoding", f"unknown strategy {self.encoding!r}")
        if self.encoding == "custom" and (self.betas is None or len(self.betas) != k):
            raise ConfigError("betas", "custom encoding needs one beta per generator")
        if not self.training_lengths:
            raise ConfigError("training_lengths", "need at least one training length")
        for t in self.training_lengths:
            if t <= self.timeplex + m.memory:
                raise ConfigError("training_lengths", f"{t} must exceed timeplex + memory")
        if self.horizon < 1:
            raise ConfigError("horizon", "must be >= 1")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots", "must be >= 1")
        if self.ridge_lambda < 0:
            raise ConfigError("ridge_lambda", "must be >= 0")
        if self.baseline not in ("esn", "none"):
            raise ConfigError("baseline", "must be 'esn' or 'none'")
        try:
            self.esn_config()
        except ValueError as exc:
            raise ConfigError("esn_spectral_radius", str(exc)) from None

    def stabilizer(self, method: str) -> StabilizerSpec:
        base = method.removesuffix("_nocorr")
        if base == "single_z":
            return single_z(self.n_qubits, self.k_stabilizers)
        if base == "chain_zz":
            return chain_zz(self.n_qubits, self.k_stabilizers)
        if base == "custom":
            return StabilizerSpec.from_generators(self.custom_generators)
        raise KeyError(method)

    def methods(self) -> list[str]:
        suffix = "" if self.correction_enabled else "_nocorr"
        out = [p + suffix for p in self.stabilizer_preset]
        if self.custom_generators is not None:
            out.append("custom" + suffix)
        if self.baseline == "esn":
            out.append("esn")
        return out

    def features_per_step(self) -> int:
        """Quantum observables per time step; the ESN gets this many neurons."""
        return self.num_reservoirs * (2 ** self.k_stabilizers - 1)

    def esn_config(self, neurons: int = 1, seed: int | None = None) -> EsnConfig:
        return EsnConfig(
            neurons=neurons,
            spectral_radius=self.esn_spectral_radius,
            input_scale=self.esn_input_scale,
            leak=self.esn_leak,
            ridge_lambda=self.ridge_lambda,
            seed=seed,
        )


def derive_seed(master_seed: int, stream: str, index: int) -> np.random.SeedSequence:
    """Seed for ``(master_seed, stream, index)`` with the stream keyed by CRC-32."""
    return np.random.SeedSequence([int(master_seed), zlib.crc32(stream.encode()), int(index)])


def _int_seed(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint32)[0])


@dataclass
class CellResult:
    training_length: int
    method: str
    error: float
    train_r2: float
    predictions: np.ndarray
    truth: np.ndarray
    diverged: bool = False


def build_ensemble(cfg: ExperimentConfig, spec: StabilizerSpec, method: str) -> list[ReservoirInstance]:
    """Reservoirs share Hamiltonians across stabilizer choices; shot streams are per method."""
    enc = EncodingConfig.make(cfg.encoding, spec.k, cfg.betas, cfg.input_scale)
    out = []
    for i in range(cfg.num_reservoirs):
        h = sample_ising(
            cfg.n_qubits,
            rng=np.random.default_rng(derive_seed(cfg.master_seed, "hamiltonian", i)),
            dt=cfg.dt,
            trotter_steps=cfg.trotter_steps,
        )
        out.append(
            ReservoirInstance.build(
                spec,
                h,
                enc,
                correction=cfg.correction_enabled,
                shots=cfg.shots,
                seed=derive_seed(cfg.master_seed, "shots/" + method, i),
            )
        )
    return out


def run_cell(cfg: ExperimentConfig, training_length: int, method: str) -> CellResult:
    mspec = cfg.map_spec()
    full = generate_trajectory(mspec, training_length + cfg.horizon - 1)
    inputs, targets = one_step_targets(full[:training_length])
    truth = full[training_length - 1 :]
    l = cfg.timeplex
    if method == "esn":
        neurons = cfg.features_per_step()
        seed = _int_seed(derive_seed(cfg.master_seed, "esn", 0))
        res = esn_run_and_fit(cfg.esn_config(neurons, seed), inputs, targets, l, mspec, cfg.horizon)
        return CellResult(training_length, method, res.error, res.train_r2, res.predictions, truth, res.diverged)

    spec = cfg.stabilizer(method)
    driver = MultiplexedReservoir(build_ensemble(cfg, spec, method), l=l)
    feats = build_features(driver.drive(inputs), l)
    y = targets[l - 1 :]
    weights = fit(feats, y, cfg.ridge_lambda)
    r2 = score_r2(weights.predict(feats), y)
    try:
        pred = predict_closed_loop(driver, weights, cfg.horizon)
    except Diverged as exc:
        return CellResult(training_length, method, math.inf, r2, exc.partial, truth, True)
    return CellResult(training_length, method, map_error(mspec, pred), r2, pred, truth)


# --- output -------------------------------------------------------------------


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return repr(float(v))


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def poincare_rows(series: Sequence[float], memory: int) -> list[tuple[float, ...]]:
    x = [float(v) for v in series]
    if len(x) <= memory:
        raise ValueError(f"series needs more than {memory} points")
    if memory == 1:
        return [(x[i], x[i + 1]) for i in range(len(x) - 1)]
    return [(x[i], x[i - 1], x[i + 1]) for i in range(memory - 1, len(x) - 1)]


def emit_poincare(series: Sequence[float], memory: int, path: str | os.PathLike | None = None) -> str:
    """Consecutive-value tuples ``(x_n[, x_{n-1}], x_{n+1})`` as CSV; written to ``path`` if given."""
    header = ["x_n", "x_next"] if memory == 1 else ["x_n", "x_prev", "x_next"]
    text = _csv_text(header, poincare_rows(series, memory))
    if path is not None:
        Path(path).write_text(text)
    return text


TABLE_HEADER = ["training_length", "method", "E_F", "train_r2", "below_one"]


def emit_table(results: Sequence[CellResult], path: str | os.PathLike | None = None) -> str:
    if not results:
        raise ValueError("no results to tabulate")
    rows = [
        [r.training_length, r.method, float(r.error), float(r.train_r2), "true" if r.error < 1 else "false"]
        for r in results
    ]
    text = _csv_text(TABLE_HEADER, rows)
    if path is not None:
        Path(path).write_text(text)
    return text


def _write_cell(cfg: ExperimentConfig, res: CellResult, out: Path) -> None:
    stem = f"train_{res.training_length}_{res.method}"
    t0 = res.training_length - 1
    rows = [[t0 + i, float(res.truth[i]), float(p)] for i, p in enumerate(res.predictions)]
    (out / f"{stem}_predictions.csv").write_text(_csv_text(["t", "x_true", "x_pred"], rows))
    memory = cfg.map_spec().memory
    if len(res.predictions) > memory:
        emit_poincare(res.predictions, memory, out / f"{stem}_poincare.csv")
    else:
        header = ["x_n", "x_next"] if memory == 1 else ["x_n", "x_prev", "x_next"]
        (out / f"{stem}_poincare.csv").write_text(_csv_text(header, []))


def _cell_job(cfg_dict: dict, training_length: int, method: str) -> CellResult:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    res = run_cell(cfg, training_length, method)
    _write_cell(cfg, res, Path(cfg.output_dir))
    return res


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError(THREADS_ENV, f"not an integer: {raw!r}") from None
    return os.cpu_count() or 1


def manifest(cfg: ExperimentConfig) -> dict[str, Any]:
    return {
        "library": "coset_qrc",
        "version": __version__,
        "numpy": np.__version__,
        "config": cfg.to_dict(),
        "methods": cfg.methods(),
        "seeding": {
            "master_seed": cfg.master_seed,
            "rule": "SeedSequence([master_seed, crc32(stream), index])",
            "streams": {
                "hamiltonian": "hamiltonian (shared by every quantum method)",
                "shots": "shots/<method>",
                "esn": "esn",
            },
        },
    }


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> list[CellResult]:
    """Run every (training length, method) cell and write the result bundle to ``cfg.output_dir``."""
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(json.dumps(manifest(cfg), indent=2, sort_keys=True) + "\n")
    cells = [(t, m) for t in cfg.training_lengths for m in cfg.methods()]
    workers = worker_count() if workers is None else workers
    cfg_dict = cfg.to_dict()
    if workers <= 1 or len(cells) == 1:
        results = [_cell_job(cfg_dict, t, m) for t, m in cells]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            futures = [pool.submit(_cell_job, cfg_dict, t, m) for t, m in cells]
            results = [f.result() for f in futures]
    emit_table(results, out / "errors.csv")
    return results


def read_table(results_dir: str | os.PathLike) -> list[dict[str, str]]:
    with open(Path(results_dir) / "errors.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def format_table(rows: Sequence[dict[str, str]]) -> str:
    """Training length by method grid of E_F; ``*`` marks values below one."""
    methods = list(dict.fromkeys(r["method"] for r in rows))
    lengths = sorted({int(r["training_length"]) for r in rows})
    cell = {(int(r["training_length"]), r["method"]): r for r in rows}
    width = max(11, *(len(m) + 2 for m in methods))
    lines = ["training".rjust(8) + "".join(m.rjust(width) for m in methods)]
    for t in lengths:
        parts = []
        for m in methods:
            r = cell.get((t, m))
            if r is None:
                parts.append("-".rjust(width))
                continue
            e = float(r["E_F"])
            mark = "*" if r["below_one"] == "true" else " "
            parts.append((f"{e:.2e}" if math.isfinite(e) else "inf").rjust(width - 1) + mark)
        lines.append(str(t).rjust(8) + "".join(parts))
    return "\n".join(lines)
