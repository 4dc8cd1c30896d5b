"""Staged end-to-end pipeline: prepare, compress, estimate.

Each stage writes its artifacts into a directory named after a content hash
of everything that determines them (its own config section plus the hash of
the stage it depends on), so re-running with an unchanged config is a no-op.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from scipy.linalg import expm

from .brickwall import BrickWallCircuit, two_qubit_gate_count
from .circuit_sim import QpdeSimulator
from .compress import (
    MultistartConfig,
    compress_multistart,
    delta_from_overlap,
    dense_delta,
    state_target_mpo,
)
from .dmrg import DmrgSchedule, dmrg_excited, dmrg_ground
from .estimator import EstimationTrace, EstimatorConfig, run_fci, run_qpde
from .fcidump import exchange_matrix, integrals_to_qubit_hamiltonian, parse_fcidump
from .hamiltonian import QubitHamiltonian, exact_spectrum, hubbard_1d
from .mpo import REFERENCE_CUTOFF, MatrixProductOperator, hamiltonian_to_mpo, trotter_product_dense, \
    trotterized_reference
from .mps import MatrixProductState, build_superposition, product_state
from .ordering import GAConfig, ga_reorder, ordering_cost

log = logging.getLogger(__name__)

DENSE_METRIC_QUBITS = 12
EXACT_QUBITS = 14


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class MissingArtifact(FileNotFoundError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass
class ModelConfig:
    kind: str = "hubbard"  # hubbard | fcidump
    n_s: int = 4
    T: float = 1.0
    U: float = 10.0
    path: str | None = None
    ordering: str | list[int] = "none"  # none | ga | explicit permutation

    def validate(self) -> None:
        if self.kind not in ("hubbard", "fcidump"):
            raise ConfigError("model.kind", f"expected 'hubbard' or 'fcidump', got {self.kind!r}")
        if self.kind == "hubbard" and (not isinstance(self.n_s, int) or self.n_s < 1):
            raise ConfigError("model.n_s", "must be an integer >= 1")
        if self.kind == "fcidump":
            if not self.path:
                raise ConfigError("model.path", "required for kind = 'fcidump'")
            if isinstance(self.ordering, list):
                if sorted(self.ordering) != list(range(len(self.ordering))):
                    raise ConfigError("model.ordering", "explicit ordering is not a permutation")
            elif self.ordering not in ("none", "ga"):
                raise ConfigError("model.ordering", "expected 'none', 'ga' or a permutation list")


@dataclass
class CompressionConfig:
    d_prep: int = 6
    d_evol: int = 5
    sweeps_prep: int = 1000
    sweeps_evol: int = 1000
    seed: int = 0
    init_scale: float = 0.01
    n_starts: int = 4
    warmup: int = 100
    reference_slices: int = 100
    reference_cutoff: float = REFERENCE_CUTOFF

    def validate(self) -> None:
        for name in ("d_prep", "d_evol", "n_starts", "reference_slices"):
            if getattr(self, name) < 1:
                raise ConfigError(f"compression.{name}", "must be >= 1")
        for name in ("sweeps_prep", "sweeps_evol", "warmup"):
            if getattr(self, name) < 0:
                raise ConfigError(f"compression.{name}", "must be >= 0")
        if not self.init_scale >= 0:
            raise ConfigError("compression.init_scale", "must be >= 0")

    def multistart(self) -> MultistartConfig:
        return MultistartConfig(self.n_starts, self.warmup, self.init_scale)


@dataclass
class EstimationConfig:
    mode: str = "gap"  # gap | fci
    mu_init: float | None = None  # None: 0 for gap, cheap DMRG for fci
    var_init: float = 4.0
    m: int = 21
    shots: int | None = 10000  # 0 or None: exact probabilities
    dt: float = 0.1
    p_dep: float = 0.0
    max_iter: int = 15
    master_seed: int = 0
    var_threshold: float = 0.005
    max_restarts: int = 3
    half_width: str = "variance"
    fci_bond: int = 2

    def validate(self) -> None:
        if self.shots == 0:
            self.shots = None
        if self.mode not in ("gap", "fci"):
            raise ConfigError("estimation.mode", "expected 'gap' or 'fci'")
        if self.half_width not in ("variance", "sigma"):
            raise ConfigError("estimation.half_width", "expected 'variance' or 'sigma'")
        try:
            self.estimator(0.0)
        except ValueError as exc:
            raise ConfigError("estimation", str(exc)) from None

    def estimator(self, mu_init: float) -> EstimatorConfig:
        return EstimatorConfig(mu_init=mu_init, var_init=self.var_init, m=self.m, shots=self.shots, dt=self.dt,
                               p_dep=self.p_dep, var_threshold=self.var_threshold, max_iter=self.max_iter,
                               max_restarts=self.max_restarts, master_seed=self.master_seed,
                               half_width=self.half_width)


@dataclass
class DmrgConfig:
    n_sweeps: int = 20
    max_bond_per_sweep: list[int] = field(default_factory=lambda: [10] * 3 + [50] * 12 + [1000] * 5)
    svd_cutoff: float | None = None  # None: 1e-12 for Hubbard, 1e-8 for molecules
    overlap_penalty_weight: float | None = None
    seed: int = 0

    def schedule(self, molecular: bool) -> DmrgSchedule:
        cutoff = self.svd_cutoff if self.svd_cutoff is not None else (1e-8 if molecular else 1e-12)
        try:
            return DmrgSchedule(self.n_sweeps, list(self.max_bond_per_sweep), cutoff, self.overlap_penalty_weight)
        except ValueError as exc:
            raise ConfigError("dmrg", str(exc)) from None


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    compression: CompressionConfig = field(default_factory=CompressionConfig)
    estimation: EstimationConfig = field(default_factory=EstimationConfig)
    dmrg: DmrgConfig = field(default_factory=DmrgConfig)
    ga: GAConfig = field(default_factory=GAConfig)
    output: str = "runs"

    def validate(self) -> "RunConfig":
        self.model.validate()
        self.compression.validate()
        self.estimation.validate()
        self.dmrg.schedule(self.model.kind == "fcidump")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        sections = {"model": ModelConfig, "compression": CompressionConfig, "estimation": EstimationConfig,
                    "dmrg": DmrgConfig, "ga": GAConfig}
        kwargs = {}
        for key, value in data.items():
            if key == "output":
                if not isinstance(value, str):
                    raise ConfigError("output", "must be a string path")
                kwargs["output"] = value
                continue
            if key not in sections:
                raise ConfigError(key, "unknown section")
            if not isinstance(value, dict):
                raise ConfigError(key, "must be a table")
            known = {f.name: f for f in fields(sections[key])}
            for name, v in value.items():
                if name not in known:
                    raise ConfigError(f"{key}.{name}", "unknown field")
                _check_type(f"{key}.{name}", v, getattr(sections[key](), name))
            kwargs[key] = sections[key](**value)
        return cls(**kwargs).validate()


def _check_type(name: str, value, default) -> None:
    if default is None or value is None:
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif isinstance(default, str):
        ok = isinstance(value, (str, list))
    elif isinstance(default, list):
        ok = isinstance(value, list)
    else:
        ok = True
    if not ok:
        raise ConfigError(name, f"expected {type(default).__name__}, got {type(value).__name__}")


def content_hash(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(json.dumps(p, sort_keys=True, default=str).encode())
    return h.hexdigest()[:16]


def _file_hash(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True, default=float) + "\n")


# ---------------------------------------------------------------- model


@dataclass
class ModelInfo:
    hamiltonian: QubitHamiltonian
    vacuum_energy: float
    ordering: dict | None = None


def build_model(model: ModelConfig, ga: GAConfig | None = None, ga_seed: int = 0) -> ModelInfo:
    if model.kind == "hubbard":
        h = hubbard_1d(model.n_s, model.T, model.U)
        return ModelInfo(h, h.diagonal_element([0] * h.n_qubits))
    ints = parse_fcidump(model.path)
    k = exchange_matrix(ints)
    ident = list(range(ints.n_orb))
    if model.ordering == "none":
        perm = ident
    elif model.ordering == "ga":
        perm = ga_reorder(k, ga, ga_seed).perm
    else:
        perm = list(model.ordering)
        if len(perm) != ints.n_orb:
            raise ConfigError("model.ordering", f"permutation length {len(perm)} != NORB {ints.n_orb}")
    h = integrals_to_qubit_hamiltonian(ints, perm)
    info = {"permutation": perm, "cost_before": ordering_cost(k, ident), "cost_after": ordering_cost(k, perm)}
    return ModelInfo(h, h.diagonal_element([0] * h.n_qubits), info)


def _stage_dir(cfg: RunConfig, stage: str, key: str) -> Path:
    return Path(cfg.output) / f"{stage}-{key}"


def prepare_key(cfg: RunConfig) -> str:
    model = asdict(cfg.model)
    if cfg.model.kind == "fcidump":
        model["file_sha256"] = _file_hash(cfg.model.path)
    return content_hash("prepare", model, asdict(cfg.dmrg), asdict(cfg.ga) if cfg.model.ordering == "ga" else None,
                        cfg.estimation.mode, cfg.estimation.dt, cfg.compression.reference_slices,
                        cfg.compression.reference_cutoff, cfg.estimation.fci_bond)


def compress_key(cfg: RunConfig) -> str:
    c = asdict(cfg.compression)
    return content_hash("compress", prepare_key(cfg), c)


def estimate_key(cfg: RunConfig) -> str:
    return content_hash("estimate", compress_key(cfg), asdict(cfg.estimation))


# ---------------------------------------------------------------- prepare


def prepare(cfg: RunConfig, force: bool = False) -> Path:
    """Hamiltonian, DMRG states, superposition target and ``U_ref``."""
    out = _stage_dir(cfg, "prepare", prepare_key(cfg))
    if (out / "manifest.json").exists() and not force:
        log.info("prepare: cached at %s", out)
        return out
    out.mkdir(parents=True, exist_ok=True)
    molecular = cfg.model.kind == "fcidump"
    info = build_model(cfg.model, cfg.ga, cfg.compression.seed)
    h = info.hamiltonian
    h.save(out / "hamiltonian.json")
    h_mpo = hamiltonian_to_mpo(h)
    schedule = cfg.dmrg.schedule(molecular)
    ground = dmrg_ground(h_mpo, schedule, cfg.dmrg.seed)
    manifest = {"n_qubits": h.n_qubits, "n_terms": len(h), "mode": cfg.estimation.mode,
                "vacuum_energy": info.vacuum_energy, "e_ground_dmrg": ground.energy}
    if info.ordering is not None:
        manifest["ordering"] = info.ordering
    if cfg.estimation.mode == "gap":
        excited = dmrg_excited(h_mpo, [ground.state], schedule, cfg.dmrg.seed + 1)
        other = excited.state
        manifest["e_excited_dmrg"] = excited.energy
        manifest["gap_dmrg"] = excited.energy - ground.energy
    else:
        other = product_state([0] * h.n_qubits)
        cheap = dmrg_ground(h_mpo, DmrgSchedule.uniform(10, cfg.estimation.fci_bond), cfg.dmrg.seed)
        manifest["e_ground_low_bond"] = cheap.energy
    ground.state.save(out / "ground.mps")
    other.save(out / "excited.mps")
    sup = build_superposition(ground.state, other)
    sup.save(out / "superposition.mps")
    if h.n_qubits <= EXACT_QUBITS:
        ev = exact_spectrum(h, 2)
        manifest["exact_ground"] = float(ev[0])
        manifest["exact_gap"] = float(ev[1] - ev[0])
    u_ref = trotterized_reference(h, cfg.estimation.dt, cfg.compression.reference_slices,
                                  cfg.compression.reference_cutoff)
    u_ref.save(out / "uref.mpo")
    manifest["uref_bonds"] = u_ref.bond_dims
    _write_json(out / "manifest.json", manifest)
    return out


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise MissingArtifact(f"missing {what}: {path} (run the earlier stage first)")
    return path


# ---------------------------------------------------------------- compress


def trotter_baselines(h: QubitHamiltonian, dt: float) -> dict:
    """δ of single-step first/second-order Trotter against ``exp(-i H dt)`` (dense)."""
    if h.n_qubits > DENSE_METRIC_QUBITS:
        return {"delta_trotter1": None, "delta_trotter2": None}
    exact = expm(-1j * dt * h.to_dense())
    n = h.n_qubits
    return {"delta_trotter1": dense_delta(trotter_product_dense(h, dt, 1), exact, n),
            "delta_trotter2": dense_delta(trotter_product_dense(h, dt, 2), exact, n)}


def compress(cfg: RunConfig, force: bool = False) -> Path:
    """Compressed preparation and evolution circuits plus the metrics report."""
    src = _stage_dir(cfg, "prepare", prepare_key(cfg))
    _require(src / "manifest.json", "prepare artifacts")
    out = _stage_dir(cfg, "compress", compress_key(cfg))
    if (out / "metrics.json").exists() and not force:
        log.info("compress: cached at %s", out)
        return out
    out.mkdir(parents=True, exist_ok=True)
    c = cfg.compression
    h = QubitHamiltonian.load(_require(src / "hamiltonian.json", "Hamiltonian"))
    sup = MatrixProductState.load(_require(src / "superposition.mps", "superposition MPS"))
    u_ref = MatrixProductOperator.load(_require(src / "uref.mpo", "reference MPO"))
    n = h.n_qubits
    ms = c.multistart()
    prep = compress_multistart(n + 1, c.d_prep, state_target_mpo(sup), c.sweeps_prep, c.seed, ms)
    evol = compress_multistart(n, c.d_evol, u_ref.dagger(), c.sweeps_evol, c.seed, ms)
    prep.circuit.save(out / "prep.json")
    evol.circuit.save(out / "evol.json")
    metrics = {
        "n_qubits": n,
        "d_prep": c.d_prep,
        "d_evol": c.d_evol,
        "f": prep.objective_history[-1] if prep.objective_history else None,
        "delta": delta_from_overlap(evol.objective_history[-1], n) if evol.objective_history else None,
        "sweeps_prep": prep.sweeps_run,
        "sweeps_evol": evol.sweeps_run,
        "monotonicity_violations": sum(d < -1e-9 for d in prep.update_deltas + evol.update_deltas),
        "gate_count_per_step": two_qubit_gate_count(n, c.d_prep, c.d_evol, 1),
        **trotter_baselines(h, cfg.estimation.dt),
    }
    _write_json(out / "metrics.json", metrics)
    with open(out / "history.csv", "w") as fh:
        fh.write("stage,sweep,objective\n")
        for name, r in (("prep", prep), ("evol", evol)):
            for k, v in enumerate(r.objective_history):
                fh.write(f"{name},{k + 1},{v!r}\n")
    return out


# ---------------------------------------------------------------- estimate


def estimate(cfg: RunConfig, force: bool = False) -> Path:
    src = _stage_dir(cfg, "prepare", prepare_key(cfg))
    cdir = _stage_dir(cfg, "compress", compress_key(cfg))
    manifest = json.loads(_require(src / "manifest.json", "prepare artifacts").read_text())
    prep = BrickWallCircuit.load(_require(cdir / "prep.json", "preparation circuit"))
    evol = BrickWallCircuit.load(_require(cdir / "evol.json", "evolution circuit"))
    out = _stage_dir(cfg, "estimate", estimate_key(cfg))
    if (out / "trace.json").exists() and not force:
        log.info("estimate: cached at %s", out)
        return out
    out.mkdir(parents=True, exist_ok=True)
    e = cfg.estimation
    trace = estimate_with_circuits(prep, evol, e, manifest)
    (out / "trace.json").write_text(trace.to_json() + "\n")
    (out / "trace.csv").write_text(trace.to_csv())
    if trace.final is None:
        raise NumericalFailure(f"estimation ended with {trace.termination!r}")
    return out


def estimate_with_circuits(prep: BrickWallCircuit, evol: BrickWallCircuit, e: EstimationConfig,
                           manifest: dict) -> EstimationTrace:
    sim = QpdeSimulator(prep, evol, e.dt)
    vac = float(manifest.get("vacuum_energy", 0.0))
    if e.mode == "gap":
        mu0 = 0.0 if e.mu_init is None else e.mu_init
        return run_qpde(sim, e.estimator(mu0))
    mu0 = e.mu_init if e.mu_init is not None else vac - float(manifest["e_ground_low_bond"])
    return run_fci(sim, e.estimator(mu0), vacuum_energy=vac)


def run_all(cfg: RunConfig, force: bool = False) -> dict:
    p = prepare(cfg, force)
    c = compress(cfg, force)
    e = estimate(cfg, force)
    trace = json.loads((e / "trace.json").read_text())
    return {"prepare": str(p), "compress": str(c), "estimate": str(e),
            "metrics": json.loads((c / "metrics.json").read_text()),
            "estimate_value": trace["estimate"], "sigma": trace["sigma"], "termination": trace["termination"]}


__all__ = [
    "ConfigError", "MissingArtifact", "NumericalFailure", "ModelConfig", "CompressionConfig", "EstimationConfig",
    "DmrgConfig", "RunConfig", "build_model", "prepare", "compress", "estimate", "estimate_with_circuits",
    "run_all", "trotter_baselines", "content_hash",
]
