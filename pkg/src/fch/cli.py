"""Experiment runner: named presets, JSON configs, CSV/JSON artifacts.

Each run produces, in its output directory:

  meta.json          resolved config, package version, wall time, results
  monitors.csv       t,I1,I2,energy_drift,linf,tail
  snapshot_<t>.csv   x,u                      (at requested times)
  spectrum_<t>.csv   k,amp                    (positive-k magnitudes)
  wave.csv           x,Q                      (solitary-wave experiments)
  singularity.csv    t,mu,delta,xpos,residual (decay-law fit series)

CSV artifacts are byte-stable for a fixed config: floats are written with
17 significant digits and the numerics contain no randomness or clocks.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from . import __version__, ch_soliton, evolution, singularity, solitary
from .grid import forward, inverse_raw, make_grid

KINDS = ("solitary", "propagate", "perturb", "schwartz", "dsw", "fit")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    """Bad or missing configuration field."""


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Path, header: str, columns) -> None:
    rows = zip(*columns)
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path: Path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise ConfigError(f"{path}: no data rows")
    return header, data


# ---------------------------------------------------------------------------
# presets

_THIRD = 1.0 / 3.0


def _blowup_snaps():
    return [round(t, 2) for t in np.arange(0.1, 1.5, 0.1)] + [
        round(t, 2) for t in np.arange(1.5, 1.801, 0.02)
    ]


PRESETS = {
    # solitary-wave families (paper Fig. for c=2 and several alpha)
    "fig-solitary-c2": {
        "kind": "solitary",
        "schedule": [[a, 2.0, 0.6] for a in (2.0, 1.8, 1.6, 1.4, 1.2, 1.0, 0.9)],
        "alpha": 0.9, "omega": 0.6, "kappa2": _THIRD,
        "L": 100.0, "N": 2**16,
        "desk": {"N": 2**13},
    },
    # solitary-wave propagation fidelity test
    "fig-propagate": {
        "kind": "propagate",
        "alpha": 1.5, "omega": 0.6, "kappa2": _THIRD,
        "L": 100.0, "N": 2**16, "t_end": 1.0, "n_steps": 10**4,
        "initial_data": {"type": "solitary_wave", "c": 2.0},
        "snapshot_times": [0.0, 0.5, 1.0],
        "desk": {"N": 2**13},
    },
    # Gaussian perturbations of Q_2 at alpha = 1.5 (A = +-0.08)
    "fig-perturb-a15-plus": {
        "kind": "perturb",
        "alpha": 1.5, "omega": 0.6, "kappa2": _THIRD,
        "L": 100.0, "N": 2**16, "t_end": 40.0, "n_steps": 10**4,
        "initial_data": {"type": "perturbed_soliton", "c": 2.0, "A": 0.08},
        "snapshot_times": [0.0, 20.0, 40.0],
        "desk": {"N": 2**13},
    },
    "fig-perturb-a15-minus": {
        "kind": "perturb",
        "alpha": 1.5, "omega": 0.6, "kappa2": _THIRD,
        "L": 100.0, "N": 2**16, "t_end": 40.0, "n_steps": 10**4,
        "initial_data": {"type": "perturbed_soliton", "c": 2.0, "A": -0.08},
        "snapshot_times": [0.0, 20.0, 40.0],
        "desk": {"N": 2**13},
    },
    # smaller perturbations at alpha = 0.9 (A = +-0.01, t <= 100)
    "fig-perturb-a09-plus": {
        "kind": "perturb",
        "alpha": 0.9, "omega": 0.6, "kappa2": _THIRD,
        "L": 100.0, "N": 2**16, "t_end": 100.0, "n_steps": 2 * 10**4,
        "initial_data": {"type": "perturbed_soliton", "c": 2.0, "A": 0.01},
        "snapshot_times": [0.0, 50.0, 100.0],
        "desk": {"N": 2**14},
    },
    "fig-perturb-a09-minus": {
        "kind": "perturb",
        "alpha": 0.9, "omega": 0.6, "kappa2": _THIRD,
        "L": 100.0, "N": 2**16, "t_end": 100.0, "n_steps": 2 * 10**4,
        "initial_data": {"type": "perturbed_soliton", "c": 2.0, "A": -0.01},
        "snapshot_times": [0.0, 50.0, 100.0],
        "desk": {"N": 2**14},
    },
    # amplitude-scaled initial data lambda*Q_2 at alpha = 0.9
    "fig-scale-a09-lo": {
        "kind": "perturb",
        "alpha": 0.9, "omega": 0.6, "kappa2": _THIRD,
        "L": 100.0, "N": 2**16, "t_end": 100.0, "n_steps": 2 * 10**4,
        "initial_data": {"type": "scaled_soliton", "c": 2.0, "lambda": 0.99},
        "snapshot_times": [0.0, 50.0, 100.0],
        "desk": {"N": 2**14},
    },
    "fig-scale-a09-hi": {
        "kind": "perturb",
        "alpha": 0.9, "omega": 0.6, "kappa2": _THIRD,
        "L": 100.0, "N": 2**16, "t_end": 100.0, "n_steps": 2 * 10**4,
        "initial_data": {"type": "scaled_soliton", "c": 2.0, "lambda": 1.01},
        "snapshot_times": [0.0, 50.0, 100.0],
        "desk": {"N": 2**14},
    },
    # Schwartz-class data: soliton resolution at alpha = 1.5, A = 1.
    # step counts obey dt < 2.8/(max|u| k_max): the equation transports
    # the highest modes at speed u
    "fig-schwartz-a15": {
        "kind": "schwartz",
        "alpha": 1.5, "omega": 0.6, "kappa2": _THIRD,
        "L": 3.0, "N": 2**14, "t_end": 20.0, "n_steps": 4 * 10**4,
        "initial_data": {"type": "gaussian", "A": 1.0},
        "snapshot_times": [round(t, 1) for t in np.arange(0.0, 20.01, 0.5)],
        "desk": {"N": 2**13, "n_steps": 2 * 10**4},
    },
    # pure radiation at alpha = 0.9, A = 0.5
    "fig-radiate-a09": {
        "kind": "schwartz",
        "alpha": 0.9, "omega": 0.6, "kappa2": _THIRD,
        "L": 3.0, "N": 2**14, "t_end": 40.0, "n_steps": 8 * 10**4,
        "initial_data": {"type": "gaussian", "A": 0.5},
        "snapshot_times": [float(t) for t in np.arange(0.0, 40.01, 2.0)],
        "desk": {"N": 2**13, "n_steps": 4 * 10**4},
    },
    # cusp formation at alpha = 0.9, A = 1 (t ~ 1.77)
    "fig-blowup-a09": {
        "kind": "schwartz",
        "alpha": 0.9, "omega": 0.6, "kappa2": _THIRD,
        "L": 3.0, "N": 2**14, "t_end": 1.8, "n_steps": 10**4,
        "initial_data": {"type": "gaussian", "A": 1.0},
        "snapshot_times": _blowup_snaps(),
        "fit_k_min": 100.0,
        "desk": {},
    },
    # dispersive shock waves, sech^2 data
    "fig-dsw-e1": {
        "kind": "dsw",
        "alpha": 1.5, "omega": 0.6, "kappa2": _THIRD, "epsilon": 0.1,
        "L": 3.0, "N": 2**14, "t_end": 1.0, "n_steps": 10**4,
        "initial_data": {"type": "sech_squared"},
        "snapshot_times": [0.0, 0.35, 0.7, 1.0],
        "desk": {"N": 2**13},
    },
    "fig-dsw-e2": {
        "kind": "dsw",
        "alpha": 1.5, "omega": 0.6, "kappa2": _THIRD, "epsilon": 0.01,
        "L": 3.0, "N": 2**14, "t_end": 1.0, "n_steps": 10**4,
        "initial_data": {"type": "sech_squared"},
        "snapshot_times": [round(t, 3) for t in np.arange(0.0, 1.001, 0.025)],
        "desk": {},
    },
    "fig-dsw-e3": {
        "kind": "dsw",
        "alpha": 1.5, "omega": 0.6, "kappa2": _THIRD, "epsilon": 1e-3,
        "L": 3.0, "N": 2**18, "t_end": 1.0, "n_steps": 10**5,
        "initial_data": {"type": "sech_squared"},
        "snapshot_times": [0.0, 0.5, 1.0],
        "desk": {},  # paper-scale only; desk run is identical
    },
    "fig-dsw-a09-e1": {
        "kind": "dsw",
        "alpha": 0.9, "omega": 0.6, "kappa2": _THIRD, "epsilon": 0.1,
        "L": 3.0, "N": 2**14, "t_end": 1.5, "n_steps": 10**4,
        "initial_data": {"type": "sech_squared"},
        "snapshot_times": [0.0, 0.5, 1.005, 1.5],
        "desk": {"N": 2**13},
    },
    "fig-dsw-a09-e2": {
        "kind": "dsw",
        "alpha": 0.9, "omega": 0.6, "kappa2": _THIRD, "epsilon": 0.01,
        "L": 3.0, "N": 2**15, "t_end": 0.7, "n_steps": 10**4,
        "initial_data": {"type": "sech_squared"},
        "snapshot_times": [round(t, 3) for t in np.arange(0.0, 0.501, 0.05)]
        + [round(t, 3) for t in np.arange(0.51, 0.701, 0.01)],
        "fit_k_min": 100.0,
        "desk": {},
    },
}


def resolve_preset(name: str, scale: str = "paper") -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; see `fch presets`")
    cfg = {k: v for k, v in PRESETS[name].items() if k != "desk"}
    if scale == "desk":
        cfg.update(PRESETS[name]["desk"])
    cfg["preset"] = name
    cfg["scale"] = scale
    return cfg


def list_experiments() -> str:
    lines = []
    for name, p in PRESETS.items():
        bits = [p["kind"], f"alpha={p['alpha']}"]
        if p.get("epsilon", 1.0) != 1.0:
            bits.append(f"eps={p['epsilon']}")
        init = p.get("initial_data", {})
        if init:
            bits.append(init["type"] + (f" A={init['A']}" if "A" in init else ""))
        if "t_end" in p:
            bits.append(f"t_end={p['t_end']}")
        bits.append(f"N=2^{int(np.log2(p['N']))}")
        lines.append(f"{name:22s} {' '.join(bits)}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# config handling


def _require(cfg: dict, key: str, kind: str):
    if key not in cfg:
        raise ConfigError(f"missing field {key!r} (required for kind={kind})")
    return cfg[key]


def _build_grid(cfg):
    try:
        return make_grid(float(_require(cfg, "L", cfg["kind"])), int(_require(cfg, "N", cfg["kind"])))
    except ValueError as err:
        raise ConfigError(f"bad grid: {err}") from None


def _solve_wave(cfg, grid, c):
    s = cfg.get("solver", {})
    return solitary.solve_family_member(
        grid,
        alpha=float(cfg["alpha"]),
        c=float(c),
        omega=float(cfg["omega"]),
        kappa2=float(cfg.get("kappa2", _THIRD)),
        tol=float(s.get("tol", 1e-10)),
        max_newton=int(s.get("max_newton", 25)),
        bisect_depth=int(s.get("bisect_depth", 3)),
        max_alpha_step=float(s.get("max_alpha_step", 0.05)),
    )


def build_initial_data(cfg: dict, grid):
    """Resolve the initial-data descriptor to a field; returns (u0, info)."""
    desc = _require(cfg, "initial_data", cfg["kind"])
    kind = desc.get("type")
    info = {}
    if kind == "solitary_wave":
        sol = _solve_wave(cfg, grid, _require(desc, "c", kind))
        info = {"wave_peak": sol.peak, "wave_residual": sol.residual_norm,
                "wave_decay": sol.spectral_decay}
        return sol.profile, info, sol
    if kind == "perturbed_soliton":
        sol = _solve_wave(cfg, grid, _require(desc, "c", kind))
        a = float(_require(desc, "A", kind))
        info = {"wave_peak": sol.peak, "A": a}
        return sol.profile + a * np.exp(-(grid.x**2)), info, sol
    if kind == "scaled_soliton":
        sol = _solve_wave(cfg, grid, _require(desc, "c", kind))
        lam = float(_require(desc, "lambda", kind))
        info = {"wave_peak": sol.peak, "lambda": lam}
        return lam * sol.profile, info, sol
    if kind == "gaussian":
        a = float(_require(desc, "A", kind))
        return a * np.exp(-(grid.x**2)), {"A": a}, None
    if kind == "sech_squared":
        return 1.0 / np.cosh(grid.x) ** 2, {}, None
    if kind == "from_file":
        path = Path(_require(desc, "path", kind))
        u0 = np.loadtxt(path)
        if u0.ndim != 1 or u0.size != grid.N:
            raise ConfigError(
                f"from_file data has length {u0.size}, grid has N={grid.N}"
            )
        return u0, {"path": str(path)}, None
    raise ConfigError(f"unknown initial_data type {kind!r}")


# ---------------------------------------------------------------------------
# artifact writers


def _write_snapshot(out: Path, grid, snap):
    stamp = f"{snap.t:.6f}"
    u = inverse_raw(grid, snap.field.coeffs)
    write_csv(out / f"snapshot_{stamp}.csv", "x,u", (grid.x, u))
    half = slice(1, grid.N // 2 + 1)
    amp = np.abs(snap.field.coeffs[half])
    write_csv(out / f"spectrum_{stamp}.csv", "k,amp", (grid.k[half], amp))


def _write_monitors(out: Path, mon):
    write_csv(
        out / "monitors.csv",
        "t,I1,I2,energy_drift,linf,tail",
        (mon.times, mon.mass, mon.energy, mon.energy_drift, mon.linf, mon.tail),
    )


def _write_fits(out: Path, result):
    rows = [
        (t, f.mu, f.delta, f.x_pos, f.residual)
        for t, f in zip(result.times, result.fits)
        if f is not None
    ]
    cols = list(zip(*rows)) if rows else [[]] * 5
    write_csv(out / "singularity.csv", "t,mu,delta,xpos,residual", cols)


def _fit_records(result):
    recs = []
    for t, f in zip(result.times, result.fits):
        if f is None:
            continue
        recs.append(
            {"t": t, "mu": f.mu, "delta": f.delta, "x_pos": f.x_pos,
             "log_amp": f.log_amp, "k_min": f.fit_window[0],
             "k_max": f.fit_window[1], "residual": f.residual,
             "n_modes": f.n_modes}
        )
    return recs


def first_oscillation_time(snapshots, grid, prominence_rel: float = 0.005):
    """Earliest snapshot time at which the field carries more than one peak."""
    for snap in snapshots:
        u = inverse_raw(grid, snap.field.coeffs)
        prom = prominence_rel * np.max(np.abs(u))
        peaks, _ = find_peaks(u, prominence=prom)
        if len(peaks) > 1:
            return float(snap.t)
    return None


# ---------------------------------------------------------------------------
# experiment drivers


def _evolution_config(cfg, grid, kind):
    return evolution.EvolutionConfig(
        grid=grid,
        alpha=float(cfg["alpha"]),
        kappa1=2.0 * float(cfg["omega"]),
        kappa2=float(cfg.get("kappa2", _THIRD)),
        t_end=float(_require(cfg, "t_end", kind)),
        n_steps=int(_require(cfg, "n_steps", kind)),
        epsilon=float(cfg.get("epsilon", 1.0)),
        monitor_stride=int(cfg.get("monitor_stride", 10)),
        snapshot_times=tuple(cfg.get("snapshot_times", ())),
        tail_stop=float(cfg.get("tail_stop", 1e-6)),
    )


def _run_solitary(cfg, grid, out):
    schedule = cfg.get("schedule")
    if schedule is None:
        schedule = [[float(cfg["alpha"]), float(cfg["initial_data"]["c"]), float(cfg["omega"])]]
    plan = solitary.ContinuationPlan(
        schedule=tuple(tuple(map(float, step)) for step in schedule),
        kappa2=float(cfg.get("kappa2", _THIRD)),
        grid=grid,
        tol=float(cfg.get("solver", {}).get("tol", 1e-10)),
        max_alpha_step=float(cfg.get("solver", {}).get("max_alpha_step", 0.05)),
    )
    sols = solitary.trace_continuation(plan)
    waves = []
    for i, sol in enumerate(sols):
        name = f"wave_{i}.csv" if len(sols) > 1 else "wave.csv"
        write_csv(out / name, "x,Q", (grid.x, sol.profile))
        waves.append(
            {"file": name, "alpha": sol.problem.alpha, "c": sol.problem.c,
             "omega": sol.problem.omega, "peak": sol.peak,
             "residual_norm": sol.residual_norm,
             "decay_class": sol.spectral_decay, "decay_rate": sol.decay_rate}
        )
    if len(sols) > 1:
        write_csv(out / "wave.csv", "x,Q", (grid.x, sols[-1].profile))
    return {"waves": waves}


def _run_evolution_kind(cfg, grid, out):
    kind = cfg["kind"]
    u0, info, sol = build_initial_data(cfg, grid)
    ecfg = _evolution_config(cfg, grid, kind)
    info["nonbreaking_min"] = evolution.nonbreaking_functional(
        u0, grid, ecfg.alpha, float(cfg["omega"]), ecfg.epsilon
    )
    u_final, mon, snaps = evolution.evolve(u0, ecfg)
    _write_monitors(out, mon)
    for snap in snaps:
        _write_snapshot(out, grid, snap)
    results = {
        "initial": info,
        "truncated": mon.truncated,
        "truncation_time": mon.truncation_time,
        "final_linf": float(mon.linf[-1]),
        "final_energy_drift": float(mon.energy_drift[-1]),
    }
    if sol is not None:
        write_csv(out / "wave.csv", "x,Q", (grid.x, sol.profile))

    if kind == "propagate":
        c = float(cfg["initial_data"]["c"])
        target = evolution.translate(sol.profile, grid, c * mon.times[-1])
        results["shape_error"] = float(np.max(np.abs(u_final - target)))
        results["max_energy_drift"] = float(mon.energy_drift.max())

    if kind == "perturb":
        quarter = len(mon.linf) - len(mon.linf) // 4
        tail = mon.linf[quarter:]
        results["final_quarter_mean"] = float(tail.mean())
        results["final_quarter_fluctuation"] = float(
            (tail.max() - tail.min()) / tail.mean()
        )
        results["unperturbed_peak"] = info["wave_peak"]

    if kind in ("schwartz", "dsw") and snaps:
        k_min = float(cfg.get("fit_k_min", 100.0))
        track = singularity.track(snaps, k_min=k_min, truncated=mon.truncated)
        _write_fits(out, track)
        last = track.last_fit
        results["blowup"] = {
            "verdict": track.verdict,
            "t_star": track.t_star,
            "delta_threshold": track.delta_threshold,
            "mu_final": last.mu if last else None,
        }
        results["singularity_fits"] = _fit_records(track)

    if kind == "dsw":
        results["hopf_break_time"] = evolution.hopf_break_time(
            u0, grid, kappa1=2.0 * float(cfg["omega"])
        )
        results["first_oscillation_time"] = first_oscillation_time(snaps, grid)

    return results


def _run_fit(cfg, out):
    snap_dir = Path(_require(cfg, "snapshot_dir", "fit"))
    files = sorted(snap_dir.glob("snapshot_*.csv"))
    if not files:
        raise ConfigError(f"no snapshot_*.csv files in {snap_dir}")
    snaps = []
    grid = None
    for path in files:
        t = float(path.stem.split("_", 1)[1])
        _, data = read_csv(path)
        x, u = data[:, 0], data[:, 1]
        if grid is None:
            grid = make_grid(L=-x[0] / np.pi, N=len(x))
        snaps.append(evolution.Snapshot(t, forward(grid, u)))
    snaps.sort(key=lambda s: s.t)
    k_min = float(cfg.get("fit_k_min", 100.0))
    truncated = False
    meta_path = snap_dir / "meta.json"
    if meta_path.exists():  # reuse the source run's resolution-loss flag
        with open(meta_path) as fh:
            truncated = bool(
                json.load(fh).get("results", {}).get("truncated", False)
            )
    track = singularity.track(snaps, k_min=k_min, truncated=truncated)
    _write_fits(out, track)
    last = track.last_fit
    return {
        "n_snapshots": len(snaps),
        "blowup": {
            "verdict": track.verdict,
            "t_star": track.t_star,
            "delta_threshold": track.delta_threshold,
            "mu_final": last.mu if last else None,
        },
        "singularity_fits": _fit_records(track),
    }


def run_experiment(cfg: dict, out_dir) -> dict:
    """Execute one experiment config; returns the meta document."""
    kind = cfg.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if kind == "fit":
        results = _run_fit(cfg, out)
    else:
        grid = _build_grid(cfg)
        if kind == "solitary":
            results = _run_solitary(cfg, grid, out)
        else:
            results = _run_evolution_kind(cfg, grid, out)
    meta = {
        "config": cfg,
        "version": __version__,
        "scale": cfg.get("scale", "custom"),
        "wall_time_s": time.perf_counter() - t0,
        "results": results,
    }
    with open(out / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return meta


# ---------------------------------------------------------------------------
# command line


def load_config(source: str, scale: str) -> dict:
    path = Path(source)
    if path.exists():
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(
                f"{source}: invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}"
            ) from None
        if not isinstance(cfg, dict):
            raise ConfigError(f"{source}: top-level JSON value must be an object")
        if "preset" in cfg and "kind" not in cfg:
            base = resolve_preset(cfg["preset"], scale)
            base.update({k: v for k, v in cfg.items() if k != "preset"})
            cfg = base
        cfg.setdefault("scale", scale)
        return cfg
    return resolve_preset(source, scale)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fch",
        description="Fractional Camassa-Holm pseudospectral experiment runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config file or named preset")
    p_run.add_argument("config", help="path to a JSON config, or a preset name")
    p_run.add_argument("--scale", choices=("desk", "paper"), default="paper")
    p_run.add_argument("--out", default=None, help="output directory")

    sub.add_parser("presets", help="list built-in experiment presets")

    p_fit = sub.add_parser("fit", help="fit the decay law over saved snapshots")
    p_fit.add_argument("snapshot_dir")
    p_fit.add_argument("--k-min", type=float, default=100.0)
    p_fit.add_argument("--out", default=None)

    args = parser.parse_args(argv)

    if args.command == "presets":
        print(list_experiments())
        return EXIT_OK

    try:
        if args.command == "fit":
            cfg = {"kind": "fit", "snapshot_dir": args.snapshot_dir,
                   "fit_k_min": args.k_min}
            out = args.out or args.snapshot_dir
        else:
            cfg = load_config(args.config, args.scale)
            out = args.out or cfg.get("out_dir") or f"out-{cfg.get('preset', 'run')}"
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        meta = run_experiment(cfg, out)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (solitary.NoConvergence, solitary.NonSmoothLimit, evolution.NonFinite) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(meta["results"], indent=2, sort_keys=True, default=float))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
