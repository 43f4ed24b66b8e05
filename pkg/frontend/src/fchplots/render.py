"""Figure construction from fch artifact directories."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("snapshot", "waterfall", "linf", "spectrum", "continuation-family")

SNAPSHOT_RE = re.compile(r"snapshot_([0-9.]+)\.csv$")
SPECTRUM_RE = re.compile(r"spectrum_([0-9.]+)\.csv$")


class ArtifactError(Exception):
    """A required artifact is missing or malformed (reported per file)."""


@dataclass(frozen=True)
class PlotSpec:
    artifact_dir: Path
    kind: str
    out: Path
    time: float | None = None  # snapshot/spectrum selector; default: latest
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArtifactError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")


def _read_csv(path: Path, expect_columns: int):
    if not path.exists():
        raise ArtifactError(f"{path}: artifact missing")
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except ValueError as err:
        raise ArtifactError(f"{path}: unparseable CSV ({err})") from None
    if data.size == 0:
        raise ArtifactError(f"{path}: no data rows")
    if data.shape[1] != expect_columns:
        raise ArtifactError(
            f"{path}: expected {expect_columns} columns, found {data.shape[1]}"
        )
    return header, data


def _stamped_files(directory: Path, pattern: re.Pattern):
    out = []
    for p in sorted(directory.iterdir()):
        m = pattern.search(p.name)
        if m:
            out.append((float(m.group(1)), p))
    out.sort(key=lambda pair: pair[0])
    return out


def _pick_time(files, t):
    if not files:
        raise ArtifactError("no time-stamped artifacts found")
    if t is None:
        return files[-1]
    return min(files, key=lambda pair: abs(pair[0] - t))


def _load_meta(directory: Path) -> dict:
    path = directory / "meta.json"
    if not path.exists():
        return {}
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ArtifactError(f"{path}: invalid JSON ({err})") from None


def build_figure(spec: PlotSpec):
    """Assemble the matplotlib figure for a spec (rendering goes to file)."""
    d = Path(spec.artifact_dir)
    if not d.is_dir():
        raise ArtifactError(f"{d}: artifact directory missing")
    builder = {
        "snapshot": _fig_snapshot,
        "waterfall": _fig_waterfall,
        "linf": _fig_linf,
        "spectrum": _fig_spectrum,
        "continuation-family": _fig_family,
    }[spec.kind]
    return builder(spec, d)


def render(spec: PlotSpec) -> Path:
    """Write the figure to spec.out; inputs are never mutated."""
    fig = build_figure(spec)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.style.get("dpi", 150), bbox_inches="tight")
    plt.close(fig)
    return out


def _fig_snapshot(spec, d):
    t, path = _pick_time(_stamped_files(d, SNAPSHOT_RE), spec.time)
    _, data = _read_csv(path, 2)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(data[:, 0], data[:, 1], lw=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.set_title(f"t = {t:g}")
    return fig


def _fig_waterfall(spec, d):
    files = _stamped_files(d, SNAPSHOT_RE)
    if not files:
        raise ArtifactError(f"{d}: no snapshot_*.csv artifacts")
    fig, ax = plt.subplots(figsize=(7, 6))
    amps = []
    curves = []
    for t, path in files:
        _, data = _read_csv(path, 2)
        curves.append((t, data))
        amps.append(np.max(np.abs(data[:, 1])))
    t_span = max(f[0] for f in files) - min(f[0] for f in files)
    offset_unit = (t_span / max(len(files) - 1, 1)) if t_span > 0 else 1.0
    gain = spec.style.get("gain", 0.9) * offset_unit / max(max(amps), 1e-300)
    for t, data in curves:
        ax.plot(data[:, 0], t + gain * data[:, 1], lw=0.6, color="C0")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    return fig


def _fig_linf(spec, d):
    header, data = _read_csv(d / "monitors.csv", 6)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(data[:, 0], data[:, 4], lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\|u\|_\infty$")
    return fig


def _fig_spectrum(spec, d):
    t, path = _pick_time(_stamped_files(d, SPECTRUM_RE), spec.time)
    _, data = _read_csv(path, 2)
    k, amp = data[:, 0], data[:, 1]
    fig, ax = plt.subplots(figsize=(7, 4))
    positive = amp > 0
    ax.semilogy(k[positive], amp[positive], lw=0.6, label="|u_hat|")
    rec = _nearest_fit(_load_meta(d), t)
    if rec is not None:
        kk = np.linspace(rec["k_min"], rec["k_max"], 400)
        model = np.exp(
            rec["log_amp"] - (rec["mu"] + 1.0) * np.log(kk) - rec["delta"] * kk
        )
        ax.semilogy(
            kk, model, "r--", lw=1.2,
            label=f"fit: mu={rec['mu']:.3g}, delta={rec['delta']:.3g}",
        )
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("k")
    ax.set_ylabel(r"$|\hat u(k)|$")
    ax.set_title(f"t = {t:g}")
    return fig


def _nearest_fit(meta, t):
    recs = meta.get("results", {}).get("singularity_fits") or []
    if not recs:
        return None
    return min(recs, key=lambda r: abs(r["t"] - t))


def _fig_family(spec, d):
    waves = sorted(d.glob("wave_*.csv")) or [d / "wave.csv"]
    meta = _load_meta(d)
    labels = {
        w["file"]: f"alpha={w['alpha']:g}"
        for w in meta.get("results", {}).get("waves", [])
    }
    fig, ax = plt.subplots(figsize=(7, 4))
    for path in waves:
        _, data = _read_csv(path, 2)
        ax.plot(data[:, 0], data[:, 1], lw=0.9, label=labels.get(path.name))
    if labels:
        ax.legend(fontsize=8)
    ax.set_xlabel("x")
    ax.set_ylabel("Q")
    half_width = spec.style.get("half_width")
    if half_width:
        ax.set_xlim(-half_width, half_width)
    return fig
