import json
from pathlib import Path

import numpy as np
import pytest

from tsvlab import (
    abl_probabilities,
    abl_probabilities_generalized,
    get_scenario,
    weak_value,
    weak_value_generalized,
)
from tsvlab.cli import main
from tsvlab.problemfile import load
from tsvlab.scenarios import SCENARIOS

FIXTURES = Path(__file__).parent / "fixtures"


class TestRun:
    def test_scenario_passes(self, capsys):
        assert main(["run", "spin-box"]) == 0
        out = capsys.readouterr().out
        assert "result: PASS (5/5 checks)" in out

    def test_json_format(self, capsys):
        assert main(["run", "three-box", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["scenario"] == "three-box"
        assert doc["passed"] is True
        assert all(
            {"description", "provenance", "expected", "actual", "passed"} <= set(c)
            for c in doc["checks"]
        )

    def test_mean_king_table_emitted(self, capsys):
        assert main(["run", "mean-king"]) == 0
        out = capsys.readouterr().out
        assert "value table" in out

    def test_unknown_scenario(self, capsys):
        assert main(["run", "nosuch"]) == 2
        assert "unknown scenario" in capsys.readouterr().err


@pytest.fixture()
def spin_box_file(tmp_path):
    path = tmp_path / "spin-box.json"
    assert main(["export-scenario", "spin-box", "--out", str(path)]) == 0
    return path


@pytest.fixture()
def three_box_file(tmp_path):
    path = tmp_path / "three-box.json"
    assert main(["export-scenario", "three-box", "--out", str(path)]) == 0
    return path


class TestAbl:
    def test_spin_box_certainty(self, capsys, spin_box_file):
        capsys.readouterr()  # drop fixture output
        assert main(["abl", "--file", str(spin_box_file), "--observable", "P_A_up"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        table = {line.split(":")[0].strip(): float(line.split(":")[1]) for line in lines}
        assert table["1"] == pytest.approx(1.0, abs=1e-12)
        assert table["0"] == pytest.approx(0.0, abs=1e-12)

    def test_eigenstate_file(self, capsys, tmp_path):
        path = tmp_path / "eigen.json"
        path.write_text(json.dumps({
            "dims": [2],
            "pre": [[1.0, 0.0], [0.0, 0.0]],
            "post": [[0.6, 0.0], [0.8, 0.0]],
            "observables": [{"name": "z", "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]}],
        }))
        assert main(["abl", "--file", str(path), "--observable", "z"]) == 0
        out = capsys.readouterr().out
        assert "1: 1" in out

    def test_orthogonal_everything_exits_3(self, capsys):
        code = main([
            "abl",
            "--file", str(FIXTURES / "impossible_postselection.json"),
            "--observable", "sigma_z",
        ])
        assert code == 3

    def test_unknown_observable_exits_2(self, capsys, spin_box_file):
        assert main(["abl", "--file", str(spin_box_file), "--observable", "nope"]) == 2

    def test_time_evolution_route(self, capsys, tmp_path):
        # pre up_z at t=0, rotation by pi about y over unit time: at the end
        # the forward state is down_z, so with post = down_z, sigma_z is
        # certainly -1 at t=1 and certainly +1 at t=0
        h = [[[0.0, 0.0], [0.0, -np.pi / 2]], [[0.0, np.pi / 2], [0.0, 0.0]]]  # (pi/2) sigma_y
        path = tmp_path / "evolve.json"
        path.write_text(json.dumps({
            "dims": [2],
            "pre": [[1.0, 0.0], [0.0, 0.0]],
            "post": [[0.0, 0.0], [1.0, 0.0]],
            "hamiltonian": [{"duration": 1.0, "matrix": h}],
            "observables": [{"name": "z", "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]}],
        }))
        assert main(["abl", "--file", str(path), "--observable", "z", "--time", "0.0", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        probs = {e["outcome"]: e["probability"] for e in doc["distribution"]}
        assert probs[1.0] == pytest.approx(1.0, abs=1e-12)
        assert main(["abl", "--file", str(path), "--observable", "z", "--time", "1.0", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        probs = {e["outcome"]: e["probability"] for e in doc["distribution"]}
        assert probs[-1.0] == pytest.approx(1.0, abs=1e-12)

    def test_time_outside_window_exits_2(self, capsys, tmp_path):
        path = tmp_path / "evolve.json"
        path.write_text(json.dumps({
            "dims": [2],
            "pre": [[1.0, 0.0], [0.0, 0.0]],
            "post": [[1.0, 0.0], [1.0, 0.0]],
            "hamiltonian": [{"duration": 1.0, "matrix": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}],
            "observables": [{"name": "z", "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]}],
        }))
        assert main(["abl", "--file", str(path), "--observable", "z", "--time", "5.0"]) == 2


class TestWeak:
    def test_three_box_negative_weak_value(self, capsys, three_box_file):
        capsys.readouterr()  # drop fixture output
        assert main(["weak", "--file", str(three_box_file), "--observable", "P_C"]) == 0
        assert capsys.readouterr().out.strip() == "-1.0 + 0.0i"

    def test_identity_observable(self, capsys):
        assert main(["weak", "--file", str(FIXTURES / "random_dim3.json"), "--observable", "identity"]) == 0
        assert capsys.readouterr().out.strip() == "1.0 + 0.0i"

    def test_orthogonal_selection_exits_3(self):
        code = main([
            "weak",
            "--file", str(FIXTURES / "impossible_postselection.json"),
            "--observable", "sigma_z",
        ])
        assert code == 3


class TestVerify:
    def test_spin_box_exact(self, capsys, spin_box_file):
        code = main([
            "verify",
            "--file", str(spin_box_file),
            "--observable", "P_A_up",
            "--samples", "100000",
            "--seed", "3",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "result: PASS" in out

    def test_random_fixture_within_bands(self, capsys):
        code = main([
            "verify",
            "--file", str(FIXTURES / "random_dim3.json"),
            "--observable", "obs_a",
            "--samples", "50000",
            "--seed", "9",
            "--workers", "2",
            "--format", "json",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["passed"] is True
        assert all(abs(row["z"]) <= 5 for row in doc["outcomes"])

    def test_impossible_postselection_exits_4(self, capsys):
        code = main([
            "verify",
            "--file", str(FIXTURES / "impossible_postselection.json"),
            "--observable", "sigma_z",
            "--samples", "2000",
            "--seed", "1",
        ])
        assert code == 4

    def test_deterministic_output(self, capsys, spin_box_file):
        argv = [
            "verify",
            "--file", str(spin_box_file),
            "--observable", "P_B_up",
            "--samples", "20000",
            "--seed", "77",
            "--workers", "3",
            "--format", "json",
        ]
        capsys.readouterr()  # drop fixture output
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        second = capsys.readouterr().out
        assert first == second


class TestPointer:
    def test_weak_regime_summary_and_csv(self, capsys, spin_box_file, tmp_path):
        csv_path = tmp_path / "pointer.csv"
        code = main([
            "pointer",
            "--file", str(spin_box_file),
            "--observable", "P_B_up",
            "--g", "0.001",
            "--sigma", "1.0",
            "--out", str(csv_path),
        ])
        assert code == 0
        out = capsys.readouterr().out
        shift_over_g = float(next(l for l in out.splitlines() if l.startswith("mean_shift / g")).split(":")[1])
        assert abs(shift_over_g - (-1.0)) <= 0.01
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "position,density"
        q, d = zip(*[tuple(map(float, line.split(","))) for line in lines[1:]])
        assert abs(np.trapezoid(d, q) - 1.0) <= 1e-9

    def test_identity_observable_shifts_by_g(self, capsys, tmp_path):
        csv_path = tmp_path / "pointer.csv"
        code = main([
            "pointer",
            "--file", str(FIXTURES / "random_dim3.json"),
            "--observable", "identity",
            "--g", "0.25",
            "--sigma", "1.0",
            "--out", str(csv_path),
        ])
        assert code == 0
        out = capsys.readouterr().out
        shift = float(next(l for l in out.splitlines() if l.startswith("mean_shift ")).split(":")[1])
        assert shift == pytest.approx(0.25, abs=1e-9)

    def test_orthogonal_selection_exits_3(self, tmp_path):
        code = main([
            "pointer",
            "--file", str(FIXTURES / "impossible_postselection.json"),
            "--observable", "identity",
            "--g", "0.25",
            "--sigma", "1.0",
            "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 3

    def test_strong_regime_flagged(self, capsys, spin_box_file, tmp_path):
        csv_path = tmp_path / "pointer.csv"
        code = main([
            "pointer",
            "--file", str(spin_box_file),
            "--observable", "P_B_up",
            "--g", "1000.0",
            "--sigma", "1.0",
            "--out", str(csv_path),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "strong regime: bump masses vs ABL" in out

    def test_bad_grid_exits_2(self, capsys, spin_box_file, tmp_path):
        code = main([
            "pointer",
            "--file", str(spin_box_file),
            "--observable", "P_B_up",
            "--g", "0.001",
            "--sigma", "1.0",
            "--half-range", "1.0",
            "--points", "4096",
            "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 2


class TestExportRoundTrip:
    @pytest.mark.parametrize("name", sorted(SCENARIOS))
    def test_bit_exact_round_trip(self, tmp_path, name):
        path = tmp_path / f"{name}.json"
        assert main(["export-scenario", name, "--out", str(path)]) == 0
        scenario = get_scenario(name)
        problem = load(path)
        if scenario.tsv is not None:
            assert problem.mode == "selection"
            tsv = problem.two_state_vector()
            assert np.array_equal(tsv.forward.amplitudes, scenario.tsv.forward.amplitudes)
            assert np.array_equal(tsv.backward.amplitudes, scenario.tsv.backward.amplitudes)
            for obs_name, obs in scenario.observables.items():
                direct = abl_probabilities(scenario.tsv, obs)
                via_file = abl_probabilities(tsv, problem.observables[obs_name])
                assert direct.entries == via_file.entries  # identical floats
                try:
                    assert weak_value(scenario.tsv, obs.op) == weak_value(
                        tsv, problem.observables[obs_name].op
                    )
                except Exception:
                    pass
        elif scenario.gtsv is not None:
            assert problem.mode == "generalized"
            for obs_name, obs in scenario.observables.items():
                direct = abl_probabilities_generalized(scenario.gtsv, obs)
                via_file = abl_probabilities_generalized(
                    problem.generalized, problem.observables[obs_name]
                )
                assert direct.entries == via_file.entries
                assert weak_value_generalized(scenario.gtsv, obs.op) == weak_value_generalized(
                    problem.generalized, problem.observables[obs_name].op
                )
        else:
            assert problem.mode == "kernel"
            assert np.array_equal(problem.kernel.matrix, scenario.kernel.matrix)

    def test_kernel_file_rejected_by_abl(self, tmp_path, capsys):
        path = tmp_path / "pair.json"
        assert main(["export-scenario", "correlated-pair", "--out", str(path)]) == 0
        doc = json.loads(path.read_text())
        doc["observables"] = [
            {"name": "z", "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]}
        ]
        path.write_text(json.dumps(doc))
        assert main(["abl", "--file", str(path), "--observable", "z"]) == 2
        assert main(["weak", "--file", str(path), "--observable", "z"]) == 2
