"""Implicit smooth soliton of the integrable CH case (alpha = 2).

The wave of speed c > 2*omega is given parametrically by theta:

    Q(theta)  = (c - 2w) sech^2(theta) / (sech^2(theta) + 2(w/c) tanh^2(theta))
    xi(theta) = sqrt(4c/(c-2w)) * theta
                + ln( cosh(theta - theta0) / cosh(theta + theta0) )

with theta0 = arctanh(sqrt(1 - 2w/c)).  xi(theta) is odd and strictly
increasing, Q is even with peak c - 2w, so sampling on a grid reduces to a
monotone scalar inversion per node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import TorusGrid


@dataclass(frozen=True)
class ChSolitonParams:
    c: float
    omega: float
    theta0: float = field(init=False)

    def __post_init__(self):
        if not (self.omega > 0 and self.c > 2 * self.omega):
            raise ValueError(
                f"smooth-soliton regime needs omega > 0 and c > 2*omega, "
                f"got c={self.c}, omega={self.omega}"
            )
        object.__setattr__(
            self, "theta0", np.arctanh(np.sqrt(1.0 - 2.0 * self.omega / self.c))
        )

    @property
    def slope(self) -> float:
        """Leading linear coefficient sqrt(4c/(c-2w)) of xi(theta)."""
        return np.sqrt(4.0 * self.c / (self.c - 2.0 * self.omega))

    @property
    def peak(self) -> float:
        return self.c - 2.0 * self.omega


def _log_cosh(t):
    # |t| + log1p(e^{-2|t|}) - ln 2, overflow-free for any t
    a = np.abs(t)
    return a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0)


def xi_of_theta(theta, params: ChSolitonParams):
    """Traveling coordinate xi as a function of the parameter theta."""
    t = np.asarray(theta, dtype=float)
    return params.slope * t + _log_cosh(t - params.theta0) - _log_cosh(t + params.theta0)


def q_of_theta(theta, params: ChSolitonParams):
    """Wave height at parameter theta (even, peak c - 2w at theta = 0)."""
    t = np.asarray(theta, dtype=float)
    # sech^2/(sech^2 + 2(w/c)tanh^2) = 1/(1 + 2(w/c)sinh^2)
    with np.errstate(over="ignore"):
        denom = 1.0 + 2.0 * (params.omega / params.c) * np.sinh(t) ** 2
    return params.peak / denom


def _invert_xi(xi_abs: np.ndarray, params: ChSolitonParams) -> np.ndarray:
    """Solve xi_of_theta(theta) = xi for theta >= 0 by vectorized bisection."""
    # slope of xi(theta) lies in [slope - 2, slope]; slope > 2 whenever w > 0
    lo = np.zeros_like(xi_abs)
    hi = xi_abs / (params.slope - 2.0) + 1.0
    bad = xi_of_theta(hi, params) < xi_abs
    while np.any(bad):  # geometric growth; only hit if the slope bound is tight
        hi[bad] *= 2.0
        bad = xi_of_theta(hi, params) < xi_abs
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        above = xi_of_theta(mid, params) >= xi_abs
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if np.max(hi - lo) <= 1e-14 * max(1.0, np.max(hi)):
            break
    return 0.5 * (lo + hi)


def sample_on_grid(params: ChSolitonParams, grid: TorusGrid) -> np.ndarray:
    """Sample the soliton profile Q(xi) at the grid nodes (crest at xi = 0)."""
    theta = _invert_xi(np.abs(grid.x), params)
    q = q_of_theta(theta, params)
    boundary = q[0]  # node at -pi*L is the farthest from the crest
    if boundary > 1e-14 * params.peak:
        raise ValueError(
            f"profile has not decayed at the domain boundary "
            f"(Q = {boundary:.3e}); enlarge L"
        )
    return q
