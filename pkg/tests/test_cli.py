"""Experiment runner: presets, artifacts, determinism, exit codes."""

import json

import numpy as np
import pytest

from fch.cli import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    PRESETS,
    ConfigError,
    load_config,
    main,
    read_csv,
    resolve_preset,
    run_experiment,
    write_csv,
)


def tiny_schwartz(**over):
    cfg = {
        "kind": "schwartz",
        "alpha": 1.5, "omega": 0.6, "kappa2": 1.0 / 3.0,
        "L": 3.0, "N": 2**10, "t_end": 0.2, "n_steps": 200,
        "initial_data": {"type": "gaussian", "A": 0.3},
        "snapshot_times": [0.0, 0.1, 0.2],
    }
    cfg.update(over)
    return cfg


class TestPresets:
    def test_catalog_nonempty(self):
        assert PRESETS

    def test_blowup_preset_parameters(self):
        cfg = resolve_preset("fig-blowup-a09")
        assert cfg["alpha"] == 0.9
        assert cfg["initial_data"] == {"type": "gaussian", "A": 1.0}
        assert cfg["t_end"] == 1.8

    def test_dsw_a09_e1_preset_parameters(self):
        cfg = resolve_preset("fig-dsw-a09-e1")
        assert cfg["alpha"] == 0.9
        assert cfg["epsilon"] == 0.1
        assert cfg["initial_data"]["type"] == "sech_squared"
        assert cfg["t_end"] == 1.5

    def test_desk_scale_overrides(self):
        paper = resolve_preset("fig-propagate", "paper")
        desk = resolve_preset("fig-propagate", "desk")
        assert paper["N"] == 2**16
        assert desk["N"] == 2**13
        assert desk["scale"] == "desk"

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            resolve_preset("no-such-thing")


class TestRunArtifacts:
    def test_schwartz_artifacts(self, tmp_path):
        meta = run_experiment(tiny_schwartz(), tmp_path)
        assert (tmp_path / "meta.json").exists()
        header, data = read_csv(tmp_path / "monitors.csv")
        assert header == ["t", "I1", "I2", "energy_drift", "linf", "tail"]
        assert np.all(np.isfinite(data))
        for t in ("0.000000", "0.100000", "0.200000"):
            assert (tmp_path / f"snapshot_{t}.csv").exists()
            assert (tmp_path / f"spectrum_{t}.csv").exists()
        assert not meta["results"]["truncated"]
        saved = json.loads((tmp_path / "meta.json").read_text())
        assert saved["config"]["kind"] == "schwartz"
        assert saved["version"]

    def test_solitary_artifacts(self, tmp_path):
        cfg = {
            "kind": "solitary",
            "alpha": 2.0, "omega": 0.6, "kappa2": 1.0 / 3.0,
            "L": 100.0, "N": 2**12,
            "initial_data": {"type": "solitary_wave", "c": 2.0},
        }
        meta = run_experiment(cfg, tmp_path)
        header, data = read_csv(tmp_path / "wave.csv")
        assert header == ["x", "Q"]
        assert data[:, 1].max() == pytest.approx(0.8, abs=1e-8)
        wave = meta["results"]["waves"][0]
        assert wave["decay_class"] == "exponential"
        assert wave["residual_norm"] <= 1e-10

    def test_solitary_family_schedule(self, tmp_path):
        cfg = {
            "kind": "solitary",
            "alpha": 1.8, "omega": 0.6, "kappa2": 1.0 / 3.0,
            "L": 100.0, "N": 2**12,
            "schedule": [[2.0, 2.0, 0.6], [1.8, 2.0, 0.6]],
        }
        meta = run_experiment(cfg, tmp_path)
        assert (tmp_path / "wave_0.csv").exists()
        assert (tmp_path / "wave_1.csv").exists()
        assert (tmp_path / "wave.csv").exists()
        assert len(meta["results"]["waves"]) == 2

    def test_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_experiment(tiny_schwartz(), a)
        run_experiment(tiny_schwartz(), b)
        for name in ("monitors.csv", "snapshot_0.200000.csv", "spectrum_0.200000.csv",
                     "singularity.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_from_file_initial_data(self, tmp_path):
        u0 = 0.2 * np.exp(-np.linspace(-3 * np.pi, 3 * np.pi, 2**10, endpoint=False) ** 2)
        path = tmp_path / "u0.txt"
        np.savetxt(path, u0)
        cfg = tiny_schwartz(initial_data={"type": "from_file", "path": str(path)})
        meta = run_experiment(cfg, tmp_path / "out")
        assert meta["results"]["final_linf"] > 0

    def test_from_file_length_mismatch(self, tmp_path):
        path = tmp_path / "u0.txt"
        np.savetxt(path, np.zeros(100))
        cfg = tiny_schwartz(initial_data={"type": "from_file", "path": str(path)})
        with pytest.raises(ConfigError):
            run_experiment(cfg, tmp_path / "out")


class TestFitKind:
    def test_refit_from_snapshot_files(self, tmp_path):
        from fch.grid import hermitian_symmetrize, inverse_raw, make_grid
        from fch.grid import SpectralField

        grid = make_grid(3.0, 2**12)
        src = tmp_path / "src"
        src.mkdir()
        for t, delta in ((0.0, 0.02), (0.5, 0.012), (1.0, 0.004)):
            k = grid.k
            c = np.zeros(grid.N, dtype=complex)
            pos = k > 0
            c[pos] = np.abs(k[pos]) ** -1.5 * np.exp(-delta * np.abs(k[pos]))
            c[0] = 1.0
            u = inverse_raw(grid, hermitian_symmetrize(c))
            write_csv(src / f"snapshot_{t:.6f}.csv", "x,u", (grid.x, u))
        cfg = {"kind": "fit", "snapshot_dir": str(src), "fit_k_min": 10.0}
        meta = run_experiment(cfg, tmp_path / "out")
        header, data = read_csv(tmp_path / "out" / "singularity.csv")
        assert header == ["t", "mu", "delta", "xpos", "residual"]
        assert data.shape[0] == 3
        assert np.allclose(data[:, 2], [0.02, 0.012, 0.004], atol=1e-4)
        assert meta["results"]["n_snapshots"] == 3


class TestErrors:
    def test_missing_field(self, tmp_path):
        cfg = tiny_schwartz()
        del cfg["t_end"]
        with pytest.raises(ConfigError, match="t_end"):
            run_experiment(cfg, tmp_path)

    def test_bad_grid(self, tmp_path):
        with pytest.raises(ConfigError, match="grid"):
            run_experiment(tiny_schwartz(N=1000), tmp_path)

    def test_unknown_initial_type(self, tmp_path):
        cfg = tiny_schwartz(initial_data={"type": "wavelet"})
        with pytest.raises(ConfigError, match="wavelet"):
            run_experiment(cfg, tmp_path)

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(ConfigError, match="kind"):
            run_experiment({"kind": "nope"}, tmp_path)


class TestMain:
    def test_presets_command(self, capsys):
        assert main(["presets"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "fig-blowup-a09" in out

    def test_run_config_file(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_schwartz()))
        code = main(["run", str(cfg_path), "--out", str(tmp_path / "out")])
        assert code == EXIT_OK
        assert (tmp_path / "out" / "monitors.csv").exists()

    def test_invalid_json_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        assert main(["run", str(bad)]) == EXIT_CONFIG
        assert "line 1" in capsys.readouterr().err

    def test_unknown_preset_exits_2(self, capsys):
        assert main(["run", "fig-does-not-exist"]) == EXIT_CONFIG

    def test_numerical_failure_exits_3(self, tmp_path, capsys):
        cfg = {
            "kind": "solitary",
            "alpha": 0.3, "omega": 0.6, "kappa2": 1.0 / 3.0,
            "L": 100.0, "N": 2**12,
            "initial_data": {"type": "solitary_wave", "c": 2.0},
            "solver": {"max_newton": 10, "bisect_depth": 0, "max_alpha_step": 0.2},
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        code = main(["run", str(cfg_path), "--out", str(tmp_path / "out")])
        assert code == EXIT_NUMERICAL
        # partial artifacts (none here, but the directory) are retained
        assert (tmp_path / "out").exists()

    def test_fit_command(self, tmp_path):
        from fch.grid import hermitian_symmetrize, inverse_raw, make_grid

        grid = make_grid(3.0, 2**11)
        src = tmp_path / "snaps"
        src.mkdir()
        for t in (0.0, 1.0):
            c = np.zeros(grid.N, dtype=complex)
            pos = grid.k > 0
            c[pos] = np.abs(grid.k[pos]) ** -1.5 * np.exp(-0.01 * np.abs(grid.k[pos]))
            u = inverse_raw(grid, hermitian_symmetrize(c))
            write_csv(src / f"snapshot_{t:.6f}.csv", "x,u", (grid.x, u))
        code = main(["fit", str(src), "--k-min", "10", "--out", str(tmp_path / "fits")])
        assert code == EXIT_OK
        assert (tmp_path / "fits" / "singularity.csv").exists()


def test_load_config_preset_reference(tmp_path):
    # a config file can point at a preset and override fields
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"preset": "fig-propagate", "n_steps": 50}))
    cfg = load_config(str(p), "desk")
    assert cfg["kind"] == "propagate"
    assert cfg["n_steps"] == 50
    assert cfg["N"] == 2**13
