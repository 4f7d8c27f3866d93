"""Command-line harness: configuration resolution, experiment bundles,
subcommand dispatch, on-disk outputs and byte-level determinism."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

import qutritlab
from qutritlab.qutrit_core import QutritLabError
from qutritlab.device_hamiltonian import labeled_spectrum
from qutritlab.noise_sim import sample_counts
from qutritlab.readout_mitigation import save_confusion, synthetic_confusion
from qutritlab.cli_harness import (
    ConfigError,
    ExperimentConfig,
    PACKAGE_VERSION,
    ResultBundle,
    _load_counts_file,
    build_parser,
    compile_report,
    main,
    run_bv,
    run_device_report,
    run_dj,
    run_grover,
    run_process_tomo,
)

pytestmark = pytest.mark.filterwarnings("ignore:negative 12 dephasing rate")


def exact_config() -> ExperimentConfig:
    return ExperimentConfig.default().replace(shots=None, seed=None)


class TestConfig:
    def test_defaults(self):
        c = ExperimentConfig.default()
        assert c.shots == 20000
        assert c.seed == 7
        assert c.noisy is False
        assert c.mitigate is False
        assert c.readout_diagonal == 0.85
        assert c.step_scale == 1
        assert c.out_dir is None
        assert c.noise.q1.t2r_01 == 4.5
        assert c.noise.j11 == -304.3
        assert c.device.flux == 0.185

    def test_mapping_overrides_nested_values(self):
        c = ExperimentConfig.from_mapping({
            "shots": 500,
            "coherence": {"q1": {"t2r_01": 9.9}},
            "device": {"flux": 0.2},
        })
        assert c.shots == 500
        assert c.noise.q1.t2r_01 == 9.9
        assert c.noise.q1.t1_01 == 47.9
        assert c.device.flux == 0.2

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"shotz": 100})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"coherence": {"q1": {"t2_echo": 1.0}}})

    def test_packaged_defaults_file_matches_builtin_defaults(self):
        packaged = Path(qutritlab.__file__).parent / "default_config.yaml"
        c = ExperimentConfig.from_yaml(packaged)
        assert c.config_hash() == ExperimentConfig.default().config_hash()

    def test_yaml_file_round_trip(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("shots: 300\nseed: 9\nnoisy: true\n")
        c = ExperimentConfig.from_yaml(path)
        assert (c.shots, c.seed, c.noisy) == (300, 9, True)

    def test_yaml_error_paths(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml(tmp_path / "missing.yaml")
        bad = tmp_path / "bad.yaml"
        bad.write_text("shots: [unclosed\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml(bad)
        nonmap = tmp_path / "list.yaml"
        nonmap.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml(nonmap)

    def test_validation(self):
        base = ExperimentConfig.default()
        with pytest.raises(ConfigError):
            base.replace(shots=0)
        with pytest.raises(ConfigError):
            base.replace(shots=50, mitigate=True)
        with pytest.raises(ConfigError):
            base.replace(seed=None)
        with pytest.raises(ConfigError):
            base.replace(readout_diagonal=0.0)
        with pytest.raises(ConfigError):
            base.replace(step_scale=0)

    def test_exact_mode_needs_no_seed(self):
        c = exact_config()
        assert c.shots is None and c.seed is None

    def test_replace_is_nondestructive(self):
        base = ExperimentConfig.default()
        other = base.replace(noisy=True)
        assert other.noisy is True
        assert base.noisy is False
        assert other.shots == base.shots

    def test_hash_ignores_output_directory(self, tmp_path):
        base = ExperimentConfig.default()
        a = base.replace(out_dir=str(tmp_path / "a"))
        b = base.replace(out_dir=str(tmp_path / "b"))
        assert a.config_hash() == b.config_hash() == base.config_hash()
        assert "out_dir" not in a.to_mapping()

    def test_hash_tracks_physics_fields(self):
        base = ExperimentConfig.default()
        assert base.replace(noisy=True).config_hash() != base.config_hash()
        assert base.replace(shots=19999).config_hash() != base.config_hash()
        tweaked = ExperimentConfig.from_mapping({"coupling_khz": {"j11": -300.0}})
        assert tweaked.config_hash() != base.config_hash()


class TestResultBundle:
    def test_unnormalized_distribution_rejected(self):
        with pytest.raises(QutritLabError):
            ResultBundle("t", "h", ({"name": "x", "distribution": {"00": 0.5}},), {}, "a\n")

    def test_nonpositive_duration_rejected(self):
        with pytest.raises(QutritLabError):
            ResultBundle("t", "h", ({"name": "x", "duration_ns": 0.0},), {}, "a\n")

    def test_document_carries_version(self):
        bundle = ResultBundle("t", "h", (), {"k": 1}, "a\n")
        doc = json.loads(bundle.to_json())
        assert doc["package_version"] == PACKAGE_VERSION
        assert doc["experiment"] == "t"

    def test_save_writes_named_pair(self, tmp_path):
        bundle = ResultBundle("t", "h", (), {}, "col\n1\n")
        json_path, csv_path = bundle.save(tmp_path)
        assert json_path.name == "t_result.json"
        assert csv_path.name == "t_figure.csv"
        assert csv_path.read_text() == "col\n1\n"


class TestRunners:
    def test_dj_exact(self):
        bundle = run_dj(exact_config())
        assert len(bundle.entries) == 25
        assert bundle.entries[0]["name"] == "IxI"
        assert bundle.summary["n_constant"] == 9
        assert bundle.summary["n_balanced"] == 16
        assert bundle.summary["constant_avg"] == pytest.approx(1.0, abs=1e-12)
        assert bundle.summary["balanced_avg"] == pytest.approx(1.0, abs=1e-12)
        assert bundle.summary["classical_baseline"] == 0.5
        lines = bundle.figure_csv.strip().split("\n")
        assert lines[0] == "oracle,kind,function,sp"
        assert len(lines) == 26
        constants = [e for e in bundle.entries if e["kind"] == "constant"]
        assert all("constant_value" in e for e in constants)

    def test_dj_sampling_attaches_counts(self):
        bundle = run_dj(ExperimentConfig.default().replace(shots=900, seed=3))
        entry = bundle.entries[0]
        assert sum(entry["counts"].values()) == 900

    def test_bv_exact(self):
        bundle = run_bv(exact_config())
        assert len(bundle.entries) == 9
        assert bundle.summary["average_sp"] == pytest.approx(1.0, abs=1e-12)
        assert bundle.summary["all_decoded_correctly"] is True
        assert all(e["decoded"] == e["name"] for e in bundle.entries)
        assert bundle.figure_csv.startswith("string,sp,decoded\n")

    def test_grover_exact(self):
        bundle = run_grover(exact_config())
        assert len(bundle.entries) == 18
        assert bundle.summary["round1_avg"] == pytest.approx(529.0 / 729.0, abs=1e-10)
        assert bundle.summary["round2_avg"] == pytest.approx(58081.0 / 59049.0, abs=1e-10)
        assert bundle.summary["round2_exceeds_round1"] is True
        assert bundle.summary["round2_duration_ns_22"] == pytest.approx(2114.925, abs=0.01)
        lines = bundle.figure_csv.strip().split("\n")
        assert lines[0].startswith("rounds,target,00,")
        assert len(lines) == 19

    def test_grover_durations_scale_with_rounds(self):
        bundle = run_grover(exact_config())
        one = {e["target"]: e["duration_ns"] for e in bundle.entries if e["rounds"] == 1}
        two = {e["target"]: e["duration_ns"] for e in bundle.entries if e["rounds"] == 2}
        for target in one:
            assert two[target] > one[target]

    def test_device_report_operating_point(self):
        config = exact_config()
        bundle = run_device_report(config, [0.185])
        direct = labeled_spectrum(config.device)
        assert bundle.summary["points"] == 1
        assert bundle.summary["operating_w01_q1"] == direct.w01_q1
        assert bundle.summary["operating_j11_khz"] == direct.j11
        assert bundle.entries[0]["flux"] == 0.185
        assert bundle.figure_csv.startswith("flux,w01_q1,")

    def test_tomo_hadamard_noiseless_and_noisy(self):
        bundle = run_process_tomo(exact_config(), "H", 1)
        assert bundle.summary["noiseless_fidelity"] == pytest.approx(1.0, abs=1e-10)
        assert bundle.summary["noisy_fidelity"] == pytest.approx(0.9681219739593705, abs=1e-9)
        assert 0.95 < bundle.summary["noisy_fidelity"] < 0.999
        lines = bundle.figure_csv.strip().split("\n")
        assert lines[0] == "row,col,re,im"
        assert len(lines) == 82

    def test_tomo_virtual_gate_reports_no_duration(self):
        bundle = run_process_tomo(exact_config(), "Z", 2)
        assert all("duration_ns" not in e for e in bundle.entries)
        assert bundle.summary["noisy_fidelity"] > 0.999

    def test_tomo_rejects_unknown_gate_and_qutrit(self):
        with pytest.raises(ConfigError):
            run_process_tomo(exact_config(), "CNOT", 1)
        with pytest.raises(ConfigError):
            run_process_tomo(exact_config(), "H", 3)


class TestCompileReport:
    def test_direct_native_target(self):
        report = compile_report(math.pi, "21")
        assert report["pi_pulse_count"] == 0
        assert report["native_kind"] == "CPhaseNative21"
        assert report["matches_ideal"] is True
        assert report["duration_ns"] > 0

    def test_walked_target(self):
        report = compile_report(math.pi, "00")
        assert report["pi_pulse_count"] == 6
        assert report["matches_ideal"] is True
        assert report["pulse_count"] >= 6

    def test_arbitrary_angle(self):
        report = compile_report(1.234, "01")
        assert report["theta"] == 1.234
        assert report["pi_pulse_count"] == 4
        assert report["matches_ideal"] is True
        assert "CPhaseNative" in report["circuit_text"]


class TestCountsFile:
    def good_text(self):
        labels = [f"{a}{b}" for a in range(3) for b in range(3)]
        return "# sampled counts\n" + "\n".join(f"{lbl}, {100 + i}" for i, lbl in enumerate(labels)) + "\n"

    def test_parses_comments_and_commas(self, tmp_path):
        path = tmp_path / "counts.txt"
        path.write_text(self.good_text())
        counts = _load_counts_file(path)
        assert counts[0] == 100.0
        assert counts[8] == 108.0

    def test_missing_label_rejected(self, tmp_path):
        path = tmp_path / "counts.txt"
        path.write_text("00 5\n01 5\n")
        with pytest.raises(ConfigError):
            _load_counts_file(path)

    def test_duplicate_label_rejected(self, tmp_path):
        path = tmp_path / "counts.txt"
        path.write_text(self.good_text() + "00 7\n")
        with pytest.raises(ConfigError):
            _load_counts_file(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "counts.txt"
        path.write_text("00 5 9\n")
        with pytest.raises(ConfigError):
            _load_counts_file(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            _load_counts_file(tmp_path / "nope.txt")


class TestMain:
    def test_stdout_json_without_out_dir(self, capsys):
        code = main(["sim", "bv"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["experiment"] == "bv"
        assert doc["summary"]["all_decoded_correctly"] is True

    def test_byte_identical_reruns(self, tmp_path, capsys):
        args = ["sim", "bv", "--noisy", "--mitigate", "--shots", "20000", "--seed", "5"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        capsys.readouterr()
        for name in ("bv_result.json", "bv_figure.csv"):
            a = (tmp_path / "a" / name).read_bytes()
            b = (tmp_path / "b" / name).read_bytes()
            assert a == b

    def test_device_sweep_files(self, tmp_path, capsys):
        code = main([
            "device", "sweep", "--from", "0.1", "--to", "0.2", "--steps", "2",
            "--out", str(tmp_path),
        ])
        assert code == 0
        capsys.readouterr()
        doc = json.loads((tmp_path / "device_result.json").read_text())
        assert doc["summary"]["points"] == 2
        csv = (tmp_path / "device_figure.csv").read_text().strip().split("\n")
        assert len(csv) == 3

    def test_tomo_subcommand(self, capsys):
        code = main(["tomo", "process", "--gate", "X", "--qutrit", "2"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert 0.9 < doc["summary"]["noisy_fidelity"] < 1.0

    def test_compile_subcommand(self, capsys):
        code = main(["compile", "cphase", "--theta", "3.141592653589793", "--target", "12"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["native_kind"] == "CPhaseNative22"
        assert doc["matches_ideal"] is True

    def test_mitigate_subcommand_round_trip(self, tmp_path, capsys):
        matrix = synthetic_confusion()
        matrix_path = tmp_path / "matrix.txt"
        save_confusion(matrix, matrix_path)
        true = np.zeros(9)
        true[8] = 1.0
        observed = sample_counts(matrix.m @ true, 20000, seed=13)
        labels = [f"{a}{b}" for a in range(3) for b in range(3)]
        counts_path = tmp_path / "counts.txt"
        counts_path.write_text("\n".join(f"{lbl} {observed[i]}" for i, lbl in enumerate(labels)) + "\n")
        code = main([
            "mitigate", "--counts", str(counts_path), "--matrix", str(matrix_path),
            "--out", str(tmp_path),
        ])
        assert code == 0
        capsys.readouterr()
        doc = json.loads((tmp_path / "mitigated_counts.json").read_text())
        assert doc["total"] == pytest.approx(20000.0, abs=1e-6)
        corrected = doc["corrected"]
        assert max(corrected, key=corrected.get) == "22"
        assert corrected["22"] > observed[8]

    def test_domain_errors_exit_one_with_json(self, tmp_path, capsys):
        code = main(["sim", "dj", "--config", str(tmp_path / "missing.yaml")])
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ConfigError"
        assert "message" in err

    def test_compile_bad_target_exits_one(self, capsys):
        code = main(["compile", "cphase", "--theta", "3.14", "--target", "55"])
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert "error" in err

    def test_usage_errors_exit_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["sim", "quantum-supremacy"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["compile", "cphase", "--theta", "not-a-number", "--target", "00"])
        assert exc.value.code == 2

    def test_parser_requires_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args([])
        assert exc.value.code == 2
