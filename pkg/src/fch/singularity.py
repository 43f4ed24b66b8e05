"""Tracking complex singularities through Fourier-coefficient asymptotics.

A branch-point singularity u ~ (z - z0)^mu at z0 = x0 - i*delta in the lower
half plane makes the coefficients decay like

    |u_hat(k)| ~ C k^{-(mu+1)} e^{-delta k},      k -> +infinity,

with phase -k x0 (up to a constant).  Linear least squares on ln|u_hat|
recovers (log C, mu, delta); the slope of the unwrapped phase recovers x0.
The analyticity-strip width delta reaching the grid scale signals a
finite-time loss of regularity (cusp formation for mu near 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import SpectralField

NOISE_FLOOR_REL = 1e-13
MIN_MODES = 20


class WindowTooSmall(Exception):
    """Fewer than MIN_MODES usable coefficients in the fit window."""


class NoiseFloor(Exception):
    """The requested window lies entirely below the noise floor."""


@dataclass(frozen=True)
class SingularityFit:
    mu: float
    delta: float
    x_pos: float
    log_amp: float
    fit_window: tuple
    residual: float
    n_modes: int


@dataclass(frozen=True)
class TrackResult:
    times: tuple
    fits: tuple  # SingularityFit or None per snapshot (errors become gaps)
    verdict: str  # "blowup" | "no_blowup"
    t_star: float | None
    delta_threshold: float

    @property
    def last_fit(self) -> SingularityFit | None:
        for f in reversed(self.fits):
            if f is not None:
                return f
        return None


def fit(f: SpectralField, k_min: float = 100.0, floor_rel: float = NOISE_FLOOR_REL) -> SingularityFit:
    """Least-squares fit of the decay law on k in [k_min, k_cut].

    k_cut is the largest wavenumber still above the noise floor
    (``floor_rel`` relative to the peak coefficient); modes dipping below
    the floor inside the window are excluded from the fit.
    """
    grid = f.grid
    half = slice(1, grid.N // 2 + 1)  # k > 0 including the (positive) Nyquist
    k = grid.k[half]
    c = f.coeffs[half]
    amp = np.abs(c)
    floor = floor_rel * np.max(np.abs(f.coeffs))
    eligible = k >= k_min
    if not np.any(eligible):
        raise WindowTooSmall(f"no modes at k >= {k_min} on this grid")
    usable = eligible & (amp > floor)
    if not np.any(usable):
        raise NoiseFloor(f"window k >= {k_min} is below the noise floor")
    k_cut = np.max(k[usable])
    sel = usable & (k <= k_cut)
    n = int(np.count_nonzero(sel))
    if n < MIN_MODES:
        raise WindowTooSmall(f"{n} usable modes in [{k_min}, {k_cut}], need {MIN_MODES}")

    kw = k[sel]
    y = np.log(amp[sel])
    design = np.column_stack([np.ones_like(kw), -np.log(kw), -kw])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    log_amp, power, delta = coef
    misfit = float(np.sqrt(np.mean((design @ coef - y) ** 2)))

    phase = np.unwrap(np.angle(c[sel]))
    slope = np.polyfit(kw, phase, 1)[0]

    return SingularityFit(
        mu=float(power - 1.0),
        delta=float(max(delta, 0.0)),
        x_pos=float(-slope),
        log_amp=float(log_amp),
        fit_window=(float(k_min), float(k_cut)),
        residual=misfit,
        n_modes=n,
    )


def track(
    snapshots,
    k_min: float = 100.0,
    delta_threshold: float | None = None,
    truncated: bool = False,
) -> TrackResult:
    """Fit a time-ordered snapshot series and judge finite-time blow-up.

    The verdict is ``blowup`` at the time delta first crosses the grid
    threshold (two grid wavelengths, 2/k_max), linearly interpolated in
    delta.  When the evolution was cut short by loss of resolution
    (``truncated``) with delta still above the threshold but collapsing,
    the final trend is extrapolated to the crossing.  Otherwise
    ``no_blowup``.  Per-snapshot fit errors are recorded as gaps.
    """
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("empty snapshot series")
    grid = snapshots[0].field.grid
    threshold = 2.0 / grid.k_max if delta_threshold is None else delta_threshold

    times, fits = [], []
    for snap in snapshots:
        times.append(snap.t)
        try:
            fits.append(fit(snap.field, k_min=k_min))
        except (WindowTooSmall, NoiseFloor):
            fits.append(None)

    ts = [t for t, f in zip(times, fits) if f is not None]
    ds = [f.delta for f in fits if f is not None]

    verdict, t_star = "no_blowup", None
    if len(ds) >= 2:
        # "falls below" means a descent from above: fits pinned at small
        # delta from the start (e.g. the periodization kink of truncated
        # initial data at the domain edge) are not a finite-time blow-up
        crossed = next(
            (i for i in range(1, len(ds)) if ds[i] < threshold <= ds[i - 1]), None
        )
        if crossed is not None:
            t_star = _cross_time(ts[crossed - 1], ds[crossed - 1], ts[crossed], ds[crossed], threshold)
            verdict = "blowup"
        elif truncated:
            # resolution died mid-collapse: extrapolate a clear, sustained
            # shrinking of the strip width to the crossing
            tail = max(2, len(ds) // 3)
            final_d = ds[-tail:]
            if ds[-1] < 0.7 * final_d[0] and ds[-1] < ds[-2]:
                t_star = _cross_time(ts[-2], ds[-2], ts[-1], ds[-1], threshold)
                verdict = "blowup"

    return TrackResult(
        times=tuple(times),
        fits=tuple(fits),
        verdict=verdict,
        t_star=t_star,
        delta_threshold=threshold,
    )


def _cross_time(t0, d0, t1, d1, threshold):
    if d0 == d1:
        return t1
    return float(t0 + (d0 - threshold) * (t1 - t0) / (d0 - d1))
