"""Experiment orchestration and the command line entry point.

Ties the other modules together: loads a configuration profile, runs the
three ternary algorithms in ideal or noisy mode with optional readout
mitigation, emits device spectra and process matrices, and writes every
result as a machine-readable JSON document plus a flat CSV for plotting.
Outputs carry no timestamps, so a rerun with the same configuration and
seed reproduces them byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .qutrit_core import DIM, BasisLabel, ProbDist, QutritLabError
from .gates_compiler import (
    Circuit,
    circuit_unitary,
    compile_cphase,
    cphase_matrix,
    decompose_single,
    equal_up_to_global_phase,
    logical_gate,
    merge_streams,
    single_qutrit_circuit,
)
from .noise_sim import (
    LindbladEngine,
    NoiseModel,
    QutritCoherence,
    chi_matrix,
    chi_of_unitary,
    circuit_channel,
    measure_probs,
    process_fidelity,
    reduced_qutrit_channel,
    sample_counts,
    simulate_lindblad,
    simulate_pure,
)
from .algorithms import (
    BVString,
    DJOracle,
    GroverSpec,
    balanced_oracle_table,
    bv_circuit,
    bv_decode,
    classical_baselines,
    constant_oracles,
    dj_circuit,
    grover_circuit,
    grover_ideal_success,
)
from .readout_mitigation import (
    ConfusionMatrix,
    apply_confusion,
    load_confusion,
    mitigate_counts,
    synthetic_confusion,
)
from .device_hamiltonian import DeviceParams, flux_sweep, labeled_spectrum, sweep_to_csv

PACKAGE_VERSION = "1.0.0"

_SINGLE_GATES = ("I", "X", "Xsq", "Z", "Zsq", "H", "Hdag")

_PAIR_LABELS = [str(BasisLabel.from_index(i, 2)) for i in range(DIM * DIM)]


class ConfigError(QutritLabError, ValueError):
    """A configuration value is missing, unknown or inconsistent."""


def _default_mapping() -> dict:
    return {
        "shots": 20000,
        "seed": 7,
        "noisy": False,
        "mitigate": False,
        "step_scale": 1,
        "out_dir": None,
        "readout": {"diagonal": 0.85},
        "coherence": {
            "q1": {"t1_01": 47.9, "t1_12": 21.7, "t2r_01": 4.5, "t2r_12": 2.0},
            "q2": {"t1_01": 35.1, "t1_12": 3.9, "t2r_01": 3.2, "t2r_12": 2.4},
        },
        "coupling_khz": {"j11": -304.3, "j21": 37.8, "j12": 23.6, "j22": 5.4},
        "device": {
            "c_q1": 178.0,
            "c_q2": 131.0,
            "c_c": 193.6,
            "c_q12": 2.0,
            "e_j1": 13.6,
            "e_j2": 13.3,
            "e_jc": 1140.0,
            "flux": 0.185,
            "n_levels": 8,
        },
    }


def _merge_over(base: dict, override: dict, prefix: str = "") -> dict:
    merged = dict(base)
    for key, value in override.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown configuration key {path!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path!r} must be a mapping")
            merged[key] = _merge_over(base[key], value, path + ".")
        else:
            merged[key] = value
    return merged


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved run profile: noise tables, device circuit values, sampling."""

    noise: NoiseModel
    device: DeviceParams
    shots: int | None = 20000
    seed: int | None = 7
    noisy: bool = False
    mitigate: bool = False
    readout_diagonal: float = 0.85
    step_scale: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        if self.shots is not None and int(self.shots) < 1:
            raise ConfigError(f"shots must be positive, got {self.shots}")
        if self.mitigate:
            if self.shots is None or self.shots < (DIM * DIM) ** 2:
                raise ConfigError("mitigation needs shots >= 81 so the count floor stays feasible")
        if self.shots is not None and self.seed is None:
            raise ConfigError("sampled runs need an explicit seed")
        if not 0.0 < self.readout_diagonal <= 1.0:
            raise ConfigError("readout diagonal must lie in (0, 1]")
        if int(self.step_scale) < 1:
            raise ConfigError("step_scale must be a positive integer")

    @classmethod
    def from_mapping(cls, mapping: dict | None) -> "ExperimentConfig":
        resolved = _merge_over(_default_mapping(), mapping or {})
        coh = resolved["coherence"]
        cpl = resolved["coupling_khz"]
        noise = NoiseModel(
            q1=QutritCoherence(**coh["q1"]),
            q2=QutritCoherence(**coh["q2"]),
            j11=float(cpl["j11"]),
            j21=float(cpl["j21"]),
            j12=float(cpl["j12"]),
            j22=float(cpl["j22"]),
        )
        device = DeviceParams(**resolved["device"])
        shots = resolved["shots"]
        seed = resolved["seed"]
        return cls(
            noise=noise,
            device=device,
            shots=None if shots is None else int(shots),
            seed=None if seed is None else int(seed),
            noisy=bool(resolved["noisy"]),
            mitigate=bool(resolved["mitigate"]),
            readout_diagonal=float(resolved["readout"]["diagonal"]),
            step_scale=int(resolved["step_scale"]),
            out_dir=resolved["out_dir"],
        )

    @classmethod
    def default(cls) -> "ExperimentConfig":
        return cls.from_mapping(None)

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read configuration file: {exc}") from exc
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed configuration file: {exc}") from exc
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be a mapping")
        return cls.from_mapping(data)

    def replace(self, **changes) -> "ExperimentConfig":
        fields = {
            "noise": self.noise,
            "device": self.device,
            "shots": self.shots,
            "seed": self.seed,
            "noisy": self.noisy,
            "mitigate": self.mitigate,
            "readout_diagonal": self.readout_diagonal,
            "step_scale": self.step_scale,
            "out_dir": self.out_dir,
        }
        fields.update(changes)
        return ExperimentConfig(**fields)

    def to_mapping(self) -> dict:
        """Experiment identity: everything that shapes results.

        The output directory is deliberately left out so the same run
        written to two places hashes identically.
        """
        n, d = self.noise, self.device
        return {
            "shots": self.shots,
            "seed": self.seed,
            "noisy": self.noisy,
            "mitigate": self.mitigate,
            "step_scale": self.step_scale,
            "readout": {"diagonal": self.readout_diagonal},
            "coherence": {
                "q1": {"t1_01": n.q1.t1_01, "t1_12": n.q1.t1_12, "t2r_01": n.q1.t2r_01, "t2r_12": n.q1.t2r_12},
                "q2": {"t1_01": n.q2.t1_01, "t1_12": n.q2.t1_12, "t2r_01": n.q2.t2r_01, "t2r_12": n.q2.t2r_12},
            },
            "coupling_khz": {"j11": n.j11, "j21": n.j21, "j12": n.j12, "j22": n.j22},
            "device": {
                "c_q1": d.c_q1, "c_q2": d.c_q2, "c_c": d.c_c, "c_q12": d.c_q12,
                "e_j1": d.e_j1, "e_j2": d.e_j2, "e_jc": d.e_jc,
                "flux": d.flux, "n_levels": d.n_levels,
            },
        }

    def config_hash(self) -> str:
        canon = json.dumps(self.to_mapping(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ResultBundle:
    """One experiment's results: ordered entries, summary, figure data."""

    experiment: str
    config_hash: str
    entries: tuple
    summary: dict
    figure_csv: str

    def __post_init__(self):
        for entry in self.entries:
            dist = entry.get("distribution")
            if dist is not None and abs(sum(dist.values()) - 1.0) > 1e-6:
                raise QutritLabError(f"unnormalized distribution in entry {entry.get('name')}")
            mit = entry.get("mitigated_distribution")
            if mit is not None and abs(sum(mit.values()) - 1.0) > 1e-6:
                raise QutritLabError(f"unnormalized mitigated distribution in {entry.get('name')}")
            dur = entry.get("duration_ns")
            if dur is not None and dur <= 0.0:
                raise QutritLabError(f"non-positive circuit duration in {entry.get('name')}")

    def to_document(self) -> dict:
        return {
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "package_version": PACKAGE_VERSION,
            "entries": list(self.entries),
            "summary": self.summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True, indent=2) + "\n"

    def save(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        json_path = out / f"{self.experiment}_result.json"
        csv_path = out / f"{self.experiment}_figure.csv"
        json_path.write_text(self.to_json())
        csv_path.write_text(self.figure_csv)
        return json_path, csv_path


def _dist_dict(dist: ProbDist) -> dict:
    return {label: float(dist.probs[i]) for i, label in enumerate(_PAIR_LABELS)}


def _counts_dict(counts: np.ndarray) -> dict:
    return {label: float(counts[i]) for i, label in enumerate(_PAIR_LABELS)}


def _final_dist(circuit: Circuit, config: ExperimentConfig, engine: LindbladEngine | None) -> ProbDist:
    if config.noisy:
        rho = simulate_lindblad(circuit, config.noise, step_scale=config.step_scale, engine=engine)
        return measure_probs(rho)
    return measure_probs(simulate_pure(circuit))


def _shared_engine(config: ExperimentConfig) -> LindbladEngine | None:
    return LindbladEngine(config.noise, config.step_scale) if config.noisy else None


def _attach_sampling(entry: dict, dist: ProbDist, sp_label, config: ExperimentConfig,
                     matrix: ConfusionMatrix | None, entry_seed: int) -> None:
    """Add sampled counts, and the mitigated distribution when enabled."""
    if config.shots is None:
        return
    if matrix is None:
        counts = sample_counts(dist, config.shots, entry_seed)
        entry["counts"] = _counts_dict(counts)
        return
    measured = apply_confusion(dist, matrix)
    counts = sample_counts(measured, config.shots, entry_seed)
    corrected = mitigate_counts(counts, matrix)
    mitigated = ProbDist(corrected / corrected.sum())
    entry["counts"] = _counts_dict(counts)
    entry["mitigated_distribution"] = _dist_dict(mitigated)
    if sp_label is not None:
        entry["sp_mitigated"] = mitigated.prob_of(sp_label)


def _mitigation_matrix(config: ExperimentConfig) -> ConfusionMatrix | None:
    if not config.mitigate:
        return None
    return synthetic_confusion(DIM * DIM, config.readout_diagonal)


def run_dj(config: ExperimentConfig) -> ResultBundle:
    """All 25 single-query oracles: 9 constant and 16 balanced."""
    engine = _shared_engine(config)
    matrix = _mitigation_matrix(config)
    oracles = [(o, "0") for o in constant_oracles()]
    oracles += [(o, note) for o, note in balanced_oracle_table()]
    entries = []
    for idx, (oracle, note) in enumerate(oracles):
        circ = dj_circuit(oracle)
        dist = _final_dist(circ, config, engine)
        p00 = dist.prob_of("00")
        sp = p00 if oracle.kind == "constant" else 1.0 - p00
        entry = {
            "name": oracle.label(),
            "kind": oracle.kind,
            "function": note,
            "sp": sp,
            "duration_ns": circ.total_duration,
            "distribution": _dist_dict(dist),
        }
        if oracle.kind == "constant":
            entry["constant_value"] = oracle.constant_value
        if config.shots is not None:
            _attach_sampling(entry, dist, None, config, matrix, config.seed + idx)
            if "mitigated_distribution" in entry:
                m00 = entry["mitigated_distribution"]["00"]
                entry["sp_mitigated"] = m00 if oracle.kind == "constant" else 1.0 - m00
        entries.append(entry)
    const = [e["sp"] for e in entries if e["kind"] == "constant"]
    bal = [e["sp"] for e in entries if e["kind"] == "balanced"]
    summary = {
        "constant_avg": float(np.mean(const)),
        "balanced_avg": float(np.mean(bal)),
        "classical_baseline": classical_baselines()["dj"],
        "n_constant": len(const),
        "n_balanced": len(bal),
    }
    if config.mitigate:
        summary["constant_avg_mitigated"] = float(np.mean([e["sp_mitigated"] for e in entries if e["kind"] == "constant"]))
        summary["balanced_avg_mitigated"] = float(np.mean([e["sp_mitigated"] for e in entries if e["kind"] == "balanced"]))
    lines = ["oracle,kind,function,sp"]
    lines += [f"{e['name']},{e['kind']},{e['function'].replace(' ', '')},{e['sp']:.9g}" for e in entries]
    return ResultBundle("dj", config.config_hash(), tuple(entries), summary, "\n".join(lines) + "\n")


def run_bv(config: ExperimentConfig) -> ResultBundle:
    """All 9 hidden strings, decoded from the exact distribution."""
    engine = _shared_engine(config)
    matrix = _mitigation_matrix(config)
    entries = []
    for idx in range(DIM * DIM):
        s = BVString(BasisLabel.from_index(idx, 2).digits)
        circ = bv_circuit(s)
        dist = _final_dist(circ, config, engine)
        label = "".join(str(t) for t in s.s)
        decoded = bv_decode(dist)
        entry = {
            "name": label,
            "sp": dist.prob_of(label),
            "decoded": "".join(str(t) for t in decoded),
            "decoded_correctly": decoded == s.s,
            "duration_ns": circ.total_duration,
            "distribution": _dist_dict(dist),
        }
        if config.shots is not None:
            _attach_sampling(entry, dist, label, config, matrix, config.seed + 100 + idx)
        entries.append(entry)
    summary = {
        "average_sp": float(np.mean([e["sp"] for e in entries])),
        "classical_baseline": classical_baselines()["bv"],
        "all_decoded_correctly": all(e["decoded_correctly"] for e in entries),
    }
    if config.mitigate:
        summary["average_sp_mitigated"] = float(np.mean([e["sp_mitigated"] for e in entries]))
    lines = ["string,sp,decoded"]
    lines += [f"{e['name']},{e['sp']:.9g},{e['decoded']}" for e in entries]
    return ResultBundle("bv", config.config_hash(), tuple(entries), summary, "\n".join(lines) + "\n")


def run_grover(config: ExperimentConfig) -> ResultBundle:
    """All 9 targets for one and two amplification rounds.

    The figure CSV holds both 9 x 9 probability matrices, one row per
    (rounds, target) pair.
    """
    engine = _shared_engine(config)
    matrix = _mitigation_matrix(config)
    entries = []
    for iterations in (1, 2):
        for idx in range(DIM * DIM):
            target = str(BasisLabel.from_index(idx, 2))
            circ = grover_circuit(GroverSpec(BasisLabel.parse(target), iterations))
            dist = _final_dist(circ, config, engine)
            entry = {
                "name": f"k{iterations}_{target}",
                "rounds": iterations,
                "target": target,
                "sp": dist.prob_of(target),
                "ideal_sp": grover_ideal_success(iterations),
                "duration_ns": circ.total_duration,
                "distribution": _dist_dict(dist),
            }
            if config.shots is not None:
                _attach_sampling(entry, dist, target, config, matrix,
                                 config.seed + 200 + 9 * iterations + idx)
            entries.append(entry)
    round1 = [e["sp"] for e in entries if e["rounds"] == 1]
    round2 = [e["sp"] for e in entries if e["rounds"] == 2]
    baselines = classical_baselines()
    summary = {
        "round1_avg": float(np.mean(round1)),
        "round2_avg": float(np.mean(round2)),
        "round2_exceeds_round1": float(np.mean(round2)) > float(np.mean(round1)),
        "classical_baseline_round1": baselines["grover1"],
        "classical_baseline_round2": baselines["grover2"],
        "round2_duration_ns_22": next(
            e["duration_ns"] for e in entries if e["rounds"] == 2 and e["target"] == "22"
        ),
    }
    lines = ["rounds,target," + ",".join(_PAIR_LABELS)]
    for e in entries:
        row = ",".join(f"{e['distribution'][lbl]:.9g}" for lbl in _PAIR_LABELS)
        lines.append(f"{e['rounds']},{e['target']},{row}")
    return ResultBundle("grover", config.config_hash(), tuple(entries), summary, "\n".join(lines) + "\n")


def run_device_report(config: ExperimentConfig, flux_grid) -> ResultBundle:
    """Flux sweep of the device spectrum, plus the operating point."""
    reports = flux_sweep(config.device, flux_grid)
    operating = labeled_spectrum(config.device)
    entries = []
    for r in reports:
        entries.append({
            "name": f"flux_{r.flux:.6g}",
            "flux": r.flux,
            "w01_q1": r.w01_q1, "w12_q1": r.w12_q1,
            "w01_q2": r.w01_q2, "w12_q2": r.w12_q2,
            "j11_khz": r.j11, "j21_khz": r.j21, "j12_khz": r.j12, "j22_khz": r.j22,
            "coupler_ghz": r.coupler_ghz,
            "min_overlap": r.min_overlap,
            "sweet_spot": r.sweet_spot,
        })
    summary = {
        "points": len(reports),
        "operating_flux": config.device.flux,
        "operating_w01_q1": operating.w01_q1,
        "operating_w01_q2": operating.w01_q2,
        "operating_j11_khz": operating.j11,
        "operating_coupler_ghz": operating.coupler_ghz,
    }
    return ResultBundle("device", config.config_hash(), tuple(entries), summary, sweep_to_csv(reports))


def run_process_tomo(config: ExperimentConfig, gate: str, qutrit: int) -> ResultBundle:
    """Process matrix of a compiled gate, noiseless and under the noise model."""
    if gate not in _SINGLE_GATES:
        raise ConfigError(f"unsupported gate {gate!r}; pick one of {', '.join(_SINGLE_GATES)}")
    if qutrit not in (1, 2):
        raise ConfigError(f"qutrit must be 1 or 2, got {qutrit}")
    qidx = qutrit - 1
    ideal_chi = chi_of_unitary(logical_gate(gate))

    compiled = single_qutrit_circuit(gate, 0, n_qutrits=1)
    noiseless_chi = chi_of_unitary(circuit_unitary(compiled))
    noiseless_fid = process_fidelity(noiseless_chi, ideal_chi)

    pair = merge_streams(2, {qidx: decompose_single(gate, qidx)})
    channel = circuit_channel(pair, config.noise, config.step_scale)
    noisy_chi = chi_matrix(reduced_qutrit_channel(channel, qidx))
    noisy_fid = process_fidelity(noisy_chi, ideal_chi)

    entries = [
        {"name": "noiseless", "fidelity": noiseless_fid},
        {"name": "noisy", "fidelity": noisy_fid},
    ]
    # virtual phase gates take no pulse time, so report duration only
    # when the compiled circuit actually occupies the channel
    if pair.total_duration > 0.0:
        entries[0]["duration_ns"] = compiled.total_duration
        entries[1]["duration_ns"] = pair.total_duration
    entries = tuple(entries)
    summary = {
        "gate": gate,
        "qutrit": qutrit,
        "noiseless_fidelity": noiseless_fid,
        "noisy_fidelity": noisy_fid,
    }
    lines = ["row,col,re,im"]
    m = noisy_chi.matrix
    for r in range(m.shape[0]):
        for c in range(m.shape[1]):
            lines.append(f"{r},{c},{m[r, c].real:.9g},{m[r, c].imag:.9g}")
    return ResultBundle("tomo", config.config_hash(), entries, summary, "\n".join(lines) + "\n")


def compile_report(theta: float, target: str) -> dict:
    """Compile one conditional phase and verify it against the ideal matrix."""
    circ = compile_cphase(theta, target)
    pi_pulses = sum(
        1 for i in circ.instructions()
        if i.kind in ("R01", "R12") and abs(i.params[1] - math.pi) < 1e-12
    )
    native = next(i.kind for i in circ.instructions() if i.kind.startswith("CPhaseNative"))
    exact = equal_up_to_global_phase(circuit_unitary(circ), cphase_matrix(theta, target))
    return {
        "target": target,
        "theta": float(theta),
        "pulse_count": circ.pulse_count(),
        "pi_pulse_count": pi_pulses,
        "native_kind": native,
        "duration_ns": circ.total_duration,
        "matches_ideal": bool(exact),
        "circuit_text": circ.to_text(),
    }


def _load_counts_file(path) -> np.ndarray:
    """Counts per basis label from a 'label count' or 'label,count' text file."""
    counts = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read counts file: {exc}") from exc
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ConfigError(f"counts line needs a label and a value: {raw!r}")
        label, value = parts
        if label in counts:
            raise ConfigError(f"duplicate counts label {label!r}")
        counts[label] = float(value)
    if set(counts) != set(_PAIR_LABELS):
        raise ConfigError(f"counts file must cover exactly the labels {' '.join(_PAIR_LABELS)}")
    return np.array([counts[lbl] for lbl in _PAIR_LABELS])


def _config_from_args(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        config = ExperimentConfig.from_yaml(args.config)
    else:
        config = ExperimentConfig.default()
    changes = {}
    if getattr(args, "noisy", False):
        changes["noisy"] = True
    if getattr(args, "mitigate", False):
        changes["mitigate"] = True
    if getattr(args, "shots", None) is not None:
        changes["shots"] = args.shots
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        changes["out_dir"] = args.out
    return config.replace(**changes) if changes else config


def _emit_bundle(bundle: ResultBundle, config: ExperimentConfig) -> None:
    if config.out_dir:
        json_path, csv_path = bundle.save(config.out_dir)
        print(json.dumps({
            "experiment": bundle.experiment,
            "config_hash": bundle.config_hash,
            "summary": bundle.summary,
            "result_json": str(json_path),
            "figure_csv": str(csv_path),
        }, sort_keys=True, indent=2))
    else:
        sys.stdout.write(bundle.to_json())


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--noisy", action="store_true", help="evolve under the coherence tables instead of pure states")
    parser.add_argument("--shots", type=int, help="sample counts with this many shots")
    parser.add_argument("--seed", type=int, help="random seed for sampling")
    parser.add_argument("--mitigate", action="store_true", help="push samples through the readout mitigation pipeline")
    parser.add_argument("--config", help="YAML configuration file overriding the defaults")
    parser.add_argument("--out", help="directory for the result JSON and figure CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qutritlab",
        description="Two-qutrit transmon laboratory: algorithms, compiler, noise, device spectra.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="run a ternary algorithm over all oracles or targets")
    sim.add_argument("algorithm", choices=("dj", "bv", "grover"))
    _add_common_flags(sim)

    comp = sub.add_parser("compile", help="compile a gate to native pulses")
    comp_sub = comp.add_subparsers(dest="what", required=True)
    cph = comp_sub.add_parser("cphase", help="conditional phase on a basis state")
    cph.add_argument("--theta", type=float, required=True, help="phase angle in radians")
    cph.add_argument("--target", required=True, help="two-trit basis label, e.g. 21")
    cph.add_argument("--out", help="directory for the compiled circuit report")

    dev = sub.add_parser("device", help="device Hamiltonian spectra")
    dev_sub = dev.add_subparsers(dest="what", required=True)
    sweep = dev_sub.add_parser("sweep", help="flux sweep of frequencies and couplings")
    sweep.add_argument("--from", dest="start", type=float, required=True, help="first flux point")
    sweep.add_argument("--to", dest="stop", type=float, required=True, help="last flux point")
    sweep.add_argument("--steps", type=int, required=True, help="number of grid points")
    sweep.add_argument("--config", help="YAML configuration file overriding the defaults")
    sweep.add_argument("--out", help="directory for the result JSON and figure CSV")

    tomo = sub.add_parser("tomo", help="process tomography of compiled gates")
    tomo_sub = tomo.add_subparsers(dest="what", required=True)
    proc = tomo_sub.add_parser("process", help="chi matrix and process fidelity")
    proc.add_argument("--gate", required=True, help="logical gate name, e.g. H")
    proc.add_argument("--qutrit", type=int, choices=(1, 2), required=True)
    proc.add_argument("--config", help="YAML configuration file overriding the defaults")
    proc.add_argument("--out", help="directory for the result JSON and figure CSV")

    mit = sub.add_parser("mitigate", help="correct measured counts with a confusion matrix")
    mit.add_argument("--counts", required=True, help="text file of 'label count' lines")
    mit.add_argument("--matrix", required=True, help="confusion matrix file")
    mit.add_argument("--out", help="directory for the corrected counts JSON")

    return parser


def _dispatch(args) -> int:
    if args.command == "sim":
        config = _config_from_args(args)
        runner = {"dj": run_dj, "bv": run_bv, "grover": run_grover}[args.algorithm]
        _emit_bundle(runner(config), config)
        return 0
    if args.command == "compile":
        report = compile_report(args.theta, args.target)
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"cphase_{report['target']}_compiled.json"
            path.write_text(text)
            print(json.dumps({"written": str(path)}, sort_keys=True))
        else:
            sys.stdout.write(text)
        return 0
    if args.command == "device":
        config = _config_from_args(args)
        if args.steps < 1:
            raise ConfigError("steps must be at least 1")
        grid = np.linspace(args.start, args.stop, args.steps)
        _emit_bundle(run_device_report(config, grid), config)
        return 0
    if args.command == "tomo":
        config = _config_from_args(args)
        _emit_bundle(run_process_tomo(config, args.gate, args.qutrit), config)
        return 0
    if args.command == "mitigate":
        counts = _load_counts_file(args.counts)
        matrix = load_confusion(args.matrix)
        corrected = mitigate_counts(counts, matrix)
        doc = {
            "total": float(corrected.sum()),
            "corrected": {lbl: float(corrected[i]) for i, lbl in enumerate(_PAIR_LABELS)},
        }
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            path = out / "mitigated_counts.json"
            path.write_text(text)
            print(json.dumps({"written": str(path)}, sort_keys=True))
        else:
            sys.stdout.write(text)
        return 0
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except QutritLabError as exc:
        doc = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(doc, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
