import json
from pathlib import Path

import numpy as np
import pytest

from latticebump.cli import main
from latticebump.symbols import SymbolGrid, synth_sigma, lattice_from_dict
from latticebump.bumps import make_bump
from latticebump.grid import make_grid


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_synth_writes_artifacts(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {
        "n": 1, "grid": {"L": 8, "s": 32}, "phi": "tensor-0.4",
        "a": {"entries": [[[0], [0], 1.0, 0.0]]},
        "cm": {"M": 8},
    })
    out = tmp_path / "out"
    assert main(["synth", "--config", cfg, "--out", str(out)]) == 0
    for f in ("sigma.bin", "sigma.json", "cm.json", "recon_error.csv",
              "report.json", "meta.json"):
        assert (out / f).exists()
    # the emitted symbol equals a fresh synthesis of the delta configuration
    spec = make_grid(1, 8, 32)
    phi = make_bump(2, "tensor-exp", radius=0.4)
    ref = synth_sigma(lattice_from_dict(1, {((0,), (0,)): 1.0}), phi, spec)
    back = SymbolGrid.load(out / "sigma")
    assert np.array_equal(back.samples, ref.samples)


def test_synth_missing_fixture_is_config_error(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {
        "n": 1, "phi": "no-such-fixture", "a": {"entries": [[[0], [0], 1, 0]]}})
    assert main(["synth", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_missing_config_is_config_error():
    assert main(["synth"]) == 2


def test_invalid_json_is_config_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["synth", "--config", str(p)]) == 2


def test_decompose(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {"n": 1, "phi": "tensor-0.4", "cm": {"M": 8}})
    out = tmp_path / "out"
    assert main(["decompose", "--config", cfg, "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["M"] == 8 and doc["K"] == 2.0
    assert (out / "decay.csv").exists()


def test_opnorm_delta_sequence(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {
        "n": 1, "family": "S", "a": {"entries": [[[0], [0], 1.0, 0.0]]},
        "exponents": [2, 2, 2, 2, 2, 2],
        "search": {"starts": 4, "steps": 20},
    })
    out = tmp_path / "out"
    assert main(["opnorm", "--config", cfg, "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["value"] == 1.0


def test_transfer_small_family(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {
        "n": 1, "grid": {"L": 8, "s": 32}, "phi": "tensor-0.4",
        "space": "amalgam", "exponents": [2, 2, 2, 2, 2, 2],
        "a_family": {"members": 2, "radius": 1, "count": 5, "seed": 7},
        "search": {"starts": 3, "steps": 15, "random_pool": 1},
    })
    out = tmp_path / "out"
    assert main(["transfer", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "ratios.csv").read_text().strip().splitlines()
    assert len(rows) == 3  # header + 2 members
    doc = json.loads((out / "report.json").read_text())
    assert doc["stable"] is True


def test_transfer_hypothesis_violation_exit_3(tmp_path, capsys):
    cfg = _write(tmp_path, "cfg.json", {
        "n": 1, "phi": "tensor-0.4", "space": "amalgam",
        "exponents": [2, 2, 2, 2, 2, 0.5],
        "a": {"entries": [[[0], [0], 1.0, 0.0]]},
    })
    code = main(["transfer", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 3
    err = capsys.readouterr().err
    assert "1/q <= 1/q1 + 1/q2" in err


def test_transfer_determinism(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {
        "n": 1, "grid": {"L": 8, "s": 32}, "phi": "tensor-0.4",
        "space": "wiener", "exponents": [2, 2, 2, 2, 2, 2],
        "a": {"random": {"radius": 1, "count": 4, "seed": 3}},
        "search": {"starts": 3, "steps": 10, "random_pool": 1},
    })
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["transfer", "--config", cfg, "--out", str(out1), "--seed", "42"]) == 0
    assert main(["transfer", "--config", cfg, "--out", str(out2), "--seed", "42"]) == 0
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "ratios.csv").read_bytes() == (out2 / "ratios.csv").read_bytes()


def test_scaling_reports_slopes_and_verdicts(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {
        "n": 1,
        "scaling": {
            "epsilons": [0.5, 0.25, 0.125], "box_factor": 192, "s": 8,
            "amalgam_q": [2.0], "wiener_p": [2.0],
            "verdicts": [
                {"space": "amalgam", "exponents": [2, 2, 2, 2, 2, 0.5]},
                {"space": "amalgam", "exponents": [2, 2, 2, 2, 2, 1.0]},
            ],
        },
    })
    out = tmp_path / "out"
    assert main(["scaling", "--config", cfg, "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["slopes"]["amalgam_q2.0"]["slope"] == pytest.approx(0.5, abs=0.1)
    assert doc["slopes"]["wiener_p2.0"]["slope"] == pytest.approx(0.5, abs=0.1)
    statuses = {v["status"] for v in doc["verdicts"]}
    assert statuses == {"violated", "consistent"}
    assert (out / "norms.csv").exists()


def test_scaling_two_point_ladder_is_config_error(tmp_path):
    cfg = _write(tmp_path, "cfg.json", {
        "n": 1, "scaling": {"epsilons": [0.5, 0.25]}})
    assert main(["scaling", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_selftest_passes():
    assert main(["selftest"]) == 0


def test_selftest_fault_injection(capsys):
    code = main(["selftest", "--force-window-outer", "0.45"])
    out = capsys.readouterr().out
    assert code == 4
    assert "window partition of unity" in out and "FAIL" in out


def test_selftest_seed_changes_nothing(capsys):
    assert main(["selftest", "--seed", "7"]) == 0
    out1 = capsys.readouterr().out
    assert main(["selftest", "--seed", "8"]) == 0
    out2 = capsys.readouterr().out
    names1 = [line.split("  ")[0] for line in out1.splitlines()]
    names2 = [line.split("  ")[0] for line in out2.splitlines()]
    assert names1 == names2
    assert all("PASS" in l for l in out1.splitlines()[:-1])
    assert all("PASS" in l for l in out2.splitlines()[:-1])
