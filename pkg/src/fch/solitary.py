"""Solitary waves of the fractional CH equation by Newton-Krylov iteration.

The integrated traveling-wave equation is solved in the Fourier domain,

    (-c(1+|k|^a) + k1) Qh + (3/2) F(Q^2)
        + k2 ( |k|^a F(Q^2) + (1/(ik)) F(Q D^a Q') ) = 0,

with the k = 0 division regularized by the antiderivative limit rule.  Each
Newton update solves the linearized system with restarted GMRES using only
Jacobian-vector products; convergence of the family in (alpha, c, omega) is
obtained by tracing from the closed-form CH soliton at alpha = 2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from . import ch_soliton
from .grid import (
    SpectralField,
    TorusGrid,
    forward,
    forward_raw,
    hermitian_symmetrize,
    inverse_raw,
)

log = logging.getLogger(__name__)


class NoConvergence(Exception):
    """Newton stagnation or GMRES breakdown.

    May indicate a bad initial iterate or that no smooth wave exists at the
    requested parameters.  ``last_good`` carries the most recent converged
    solution when raised from a continuation run.
    """

    def __init__(self, message, last_good=None, frontier=None):
        super().__init__(message)
        self.last_good = last_good
        self.frontier = frontier


class NonSmoothLimit(Exception):
    """The residual converged but the coefficients decay algebraically,
    i.e. the iteration approaches a peakon/cuspon-type limit."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class SolitaryWaveProblem:
    alpha: float
    c: float
    kappa1: float
    kappa2: float
    grid: TorusGrid

    def __post_init__(self):
        if self.c == 0:
            raise ValueError("wave speed c must be nonzero")
        if not 0 < self.alpha <= 2:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")

    @property
    def omega(self) -> float:
        return 0.5 * self.kappa1


@dataclass(frozen=True)
class SolitarySolution:
    profile: np.ndarray
    coeffs: SpectralField
    residual_norm: float
    spectral_decay: str  # exponential | algebraic | unresolved
    decay_rate: float
    problem: SolitaryWaveProblem
    newton_steps: int
    jacobian_checks: tuple = ()

    @property
    def peak(self) -> float:
        return float(np.max(self.profile))


@dataclass(frozen=True)
class ContinuationPlan:
    """Ordered (alpha, c, omega) targets plus per-step solver settings."""

    schedule: tuple
    kappa2: float
    grid: TorusGrid
    tol: float = 1e-10
    max_newton: int = 25
    bisect_depth: int = 3
    max_alpha_step: float = 0.05
    verify_jacobian: bool = False


class _Operators:
    """Per-problem spectral multipliers shared by residual and Jacobian."""

    def __init__(self, prob: SolitaryWaveProblem):
        g = prob.grid
        self.grid = g
        self.absk_a = g.abs_k**prob.alpha
        self.linear = -prob.c * (1.0 + self.absk_a) + prob.kappa1
        # preconditioner diagonal: the linear symbol can vanish near k = 0
        # (kappa1 -> c), so floor its magnitude
        floor = 1e-6 * np.max(np.abs(self.linear))
        self.precond_diag = np.where(
            np.abs(self.linear) < floor, floor, self.linear
        )
        self.ik = g._ik
        self.dfrac = self.absk_a * self.ik  # D^alpha d/dxi
        nz = self.ik != 0
        self.inv_ik = np.zeros(g.N, dtype=complex)
        self.inv_ik[nz] = 1.0 / self.ik[nz]
        self.kappa2 = prob.kappa2

    def antider(self, mh: np.ndarray, m: np.ndarray) -> np.ndarray:
        out = mh * self.inv_ik
        out[0] = -self.grid.h * np.dot(self.grid.x, m)
        return out

    def residual(self, qh: np.ndarray) -> np.ndarray:
        u = inverse_raw(self.grid, qh)
        u2h = forward_raw(self.grid, u * u)
        m = u * inverse_raw(self.grid, self.dfrac * qh)
        out = self.linear * qh + 1.5 * u2h
        out += self.kappa2 * (self.absk_a * u2h + self.antider(forward_raw(self.grid, m), m))
        return out

    def jacobian_action(self, qh: np.ndarray, vh: np.ndarray) -> np.ndarray:
        u = inverse_raw(self.grid, qh)
        w = inverse_raw(self.grid, self.dfrac * qh)
        v = inverse_raw(self.grid, vh)
        uvh = forward_raw(self.grid, u * v)
        m = v * w + u * inverse_raw(self.grid, self.dfrac * vh)
        out = self.linear * vh + 3.0 * uvh
        out += self.kappa2 * (2.0 * self.absk_a * uvh + self.antider(forward_raw(self.grid, m), m))
        return out


def residual(qh: SpectralField, prob: SolitaryWaveProblem) -> SpectralField:
    """Fourier-domain residual of the integrated traveling-wave equation."""
    return SpectralField(
        coeffs=hermitian_symmetrize(_Operators(prob).residual(qh.coeffs)),
        grid=prob.grid,
    )


def jacobian_action(
    qh: SpectralField, vh: SpectralField, prob: SolitaryWaveProblem
) -> SpectralField:
    """Directional derivative of the residual at qh along vh."""
    return SpectralField(
        coeffs=hermitian_symmetrize(_Operators(prob).jacobian_action(qh.coeffs, vh.coeffs)),
        grid=prob.grid,
    )


def residual_max_norm(qh: np.ndarray, ops: _Operators) -> float:
    return float(np.max(np.abs(inverse_raw(ops.grid, ops.residual(qh)))))


def _recenter(grid: TorusGrid, qh: np.ndarray) -> np.ndarray:
    """Shift the iterate so its maximum sits at xi = 0 (node N/2).

    The crest is located to sub-grid precision by a parabola through the
    discrete maximum and its neighbors, then moved by a spectral phase
    shift; this pins the Jacobian's near-null translation mode.
    """
    u = inverse_raw(grid, qh)
    n0 = int(np.argmax(u))
    um, u0, up = u[n0 - 1], u[n0], u[(n0 + 1) % grid.N]
    curv = um - 2.0 * u0 + up
    frac = 0.5 * (um - up) / curv if curv < 0 else 0.0
    s = grid.x[n0] + frac * grid.h
    if s == 0.0:
        return qh
    return hermitian_symmetrize(qh * np.exp(1j * grid.k * s))


def classify_decay(coeffs: np.ndarray, grid: TorusGrid, floor_rel: float = 1e-13):
    """Tag the coefficient decay over the top usable decade of wavenumbers.

    Fits ln|u_hat| against a - delta*k (exponential/smooth) and against
    a - p*ln k (algebraic/nonsmooth) and keeps the smaller-misfit model;
    both have two parameters so the AIC comparison reduces to the residual
    sums.  Returns (tag, rate): rate is delta for an exponential tag and
    the power p for an algebraic one.
    """
    half = slice(1, grid.N // 2)
    k = grid.k[half]
    amp = np.abs(coeffs[half])
    floor = floor_rel * np.max(np.abs(coeffs))
    usable = np.flatnonzero(amp > floor)
    if usable.size == 0:
        return "unresolved", 0.0
    k_cut = k[usable[-1]]
    window = usable[(k[usable] >= k_cut / 10.0) & (k[usable] <= k_cut)]
    if window.size < 20:
        return "unresolved", 0.0
    kw, yw = k[window], np.log(amp[window])
    ones = np.ones_like(kw)
    (a_e, d_e), rss_e = _linfit(np.column_stack([ones, -kw]), yw)
    (a_a, p_a), rss_a = _linfit(np.column_stack([ones, -np.log(kw)]), yw)
    if rss_e < rss_a:
        if d_e > 5.0 / grid.k_max:
            return "exponential", float(d_e)
        return "unresolved", float(d_e)
    return "algebraic", float(p_a)


def _linfit(A, y):
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rss = float(np.sum((A @ coef - y) ** 2))
    return coef, rss


def newton_krylov_solve(
    prob: SolitaryWaveProblem,
    initial: np.ndarray,
    tol: float = 1e-10,
    max_newton: int = 25,
    gmres_rtol: float = 1e-3,
    gmres_restart: int = 30,
    gmres_maxiter: int = 200,
    verify_jacobian: bool = False,
    trivial_guard: float = 0.1,
) -> SolitarySolution:
    """Solve the traveling-wave system, starting from a real profile.

    Stops when the physical-space max norm of the residual drops below
    ``tol``.  Raises NoConvergence on stagnation, GMRES breakdown, or a
    collapse onto the trivial zero branch (converged peak below
    ``trivial_guard`` times the seed peak), and NonSmoothLimit when the
    converged coefficients decay algebraically.
    """
    grid = prob.grid
    ops = _Operators(prob)
    qh = _recenter(grid, forward_raw(grid, np.asarray(initial, dtype=float)))
    res = ops.residual(qh)
    rnorm = float(np.max(np.abs(inverse_raw(grid, res))))
    checks = []
    steps = 0
    while rnorm > tol:
        if steps >= max_newton:
            raise NoConvergence(
                f"no convergence in {max_newton} Newton steps "
                f"(residual {rnorm:.3e} at alpha={prob.alpha}, c={prob.c})"
            )
        op = LinearOperator(
            (grid.N, grid.N),
            matvec=lambda v: ops.jacobian_action(qh, v.astype(complex)),
            dtype=complex,
        )
        # the Fourier-diagonal linear part spans orders of magnitude in k;
        # dividing by it is the natural preconditioner
        precond = LinearOperator(
            (grid.N, grid.N), matvec=lambda v: v / ops.precond_diag, dtype=complex
        )
        delta, info = gmres(
            op,
            -res,
            rtol=gmres_rtol,
            atol=0.0,
            restart=gmres_restart,
            maxiter=max(1, gmres_maxiter // gmres_restart),
            M=precond,
        )
        if info < 0:
            raise NoConvergence(f"GMRES breakdown (info={info}) at alpha={prob.alpha}")
        if verify_jacobian:
            checks.append(_fd_check(ops, qh, delta))
        accepted = False
        for halving in range(6):
            trial = hermitian_symmetrize(qh + delta * 0.5**halving)
            trial_res = ops.residual(trial)
            trial_norm = float(np.max(np.abs(inverse_raw(grid, trial_res))))
            if trial_norm < rnorm:
                centered = _recenter(grid, trial)
                if centered is trial:
                    qh, res, rnorm = trial, trial_res, trial_norm
                else:
                    qh = centered
                    res = ops.residual(qh)
                    rnorm = float(np.max(np.abs(inverse_raw(grid, res))))
                accepted = True
                break
        if not accepted:
            raise NoConvergence(
                f"Newton stagnation at residual {rnorm:.3e} "
                f"(alpha={prob.alpha}, c={prob.c}, omega={prob.omega})"
            )
        steps += 1
        log.debug(
            "newton step %d: residual %.3e%s",
            steps,
            rnorm,
            f", fd-check {checks[-1]:.2e}" if checks else "",
        )
    qh = hermitian_symmetrize(qh)
    peak = float(np.max(inverse_raw(grid, qh)))
    seed_peak = float(np.max(initial))
    if trivial_guard and peak < trivial_guard * seed_peak:
        raise NoConvergence(
            f"iteration collapsed toward the trivial branch "
            f"(peak {peak:.3e} from seed peak {seed_peak:.3e})"
        )
    tag, rate = classify_decay(qh, grid)
    sol = SolitarySolution(
        profile=inverse_raw(grid, qh),
        coeffs=SpectralField(coeffs=qh, grid=grid),
        residual_norm=rnorm,
        spectral_decay=tag,
        decay_rate=rate,
        problem=prob,
        newton_steps=steps,
        jacobian_checks=tuple(checks),
    )
    if tag == "algebraic":
        raise NonSmoothLimit(
            f"iteration converged to an algebraically-decaying profile "
            f"(power {rate:.3f}) at alpha={prob.alpha}, c={prob.c}",
            solution=sol,
        )
    return sol


def _fd_check(ops: _Operators, qh, v, eps_scale: float = 1e-7) -> float:
    """Relative mismatch of the Jacobian action vs central differences.

    Both sides are compared in physical space, where the solver measures
    its residuals.
    """
    scale = np.max(np.abs(qh)) / max(np.max(np.abs(v)), 1e-300)
    eps = eps_scale * scale
    fd = (ops.residual(qh + eps * v) - ops.residual(qh - eps * v)) / (2 * eps)
    jv = ops.jacobian_action(qh, v)
    diff = np.max(np.abs(inverse_raw(ops.grid, jv - fd)))
    base = np.max(np.abs(inverse_raw(ops.grid, jv)))
    return float(diff / max(base, 1e-300))


def trace_continuation(plan: ContinuationPlan) -> list:
    """Solve the schedule in order, seeding each step with the previous wave.

    Tracing starts from the closed-form CH soliton at alpha = 2 and the first
    step's (c, omega).  Alpha increments larger than ``plan.max_alpha_step``
    are subdivided internally; a failed step is retried through recursive
    bisection of the parameter increment up to ``plan.bisect_depth``.  An
    unrecoverable failure raises NoConvergence carrying the last good
    solution and the empirical frontier (last solved params, first failed
    params).
    """
    if not plan.schedule:
        return []
    first = plan.schedule[0]
    current = (2.0, first[1], first[2])
    seed = ch_soliton.sample_on_grid(
        ch_soliton.ChSolitonParams(c=current[1], omega=current[2]), plan.grid
    )
    solutions = []
    for target in plan.schedule:
        try:
            sol = _solve_segment(plan, current, seed, target)
        except (NoConvergence, NonSmoothLimit) as err:
            last = solutions[-1] if solutions else None
            raise NoConvergence(
                f"continuation failed while stepping to {target}: {err}",
                last_good=last,
                frontier=(current, target),
            ) from err
        solutions.append(sol)
        seed = sol.profile
        current = target
    return solutions


def _solve_segment(plan, from_params, seed, target):
    """Walk from from_params to target in alpha increments <= max_alpha_step."""
    n_sub = max(1, int(np.ceil(abs(target[0] - from_params[0]) / plan.max_alpha_step - 1e-12)))
    sol = None
    prev = from_params
    for i in range(1, n_sub + 1):
        point = tuple(a + (b - a) * i / n_sub for a, b in zip(from_params, target))
        sol = _solve_one(plan, prev, seed, point, plan.bisect_depth)
        seed = sol.profile
        prev = point
    if sol is None:  # zero-length segment (target equals the start)
        sol = _solve_one(plan, prev, seed, target, plan.bisect_depth)
    return sol


def _solve_one(plan, from_params, seed, target, depth):
    prob = SolitaryWaveProblem(
        alpha=target[0], c=target[1], kappa1=2.0 * target[2], kappa2=plan.kappa2,
        grid=plan.grid,
    )
    try:
        return newton_krylov_solve(
            prob, seed, tol=plan.tol, max_newton=plan.max_newton,
            verify_jacobian=plan.verify_jacobian,
        )
    except (NoConvergence, NonSmoothLimit):
        mid = tuple(0.5 * (a + b) for a, b in zip(from_params, target))
        if depth <= 0 or mid == from_params or mid == target:
            raise
        log.info("bisecting continuation step %s -> %s at %s", from_params, target, mid)
        mid_sol = _solve_one(plan, from_params, seed, mid, depth - 1)
        return _solve_one(plan, mid, mid_sol.profile, target, depth - 1)


def solve_family_member(
    grid: TorusGrid,
    alpha: float,
    c: float,
    omega: float,
    kappa2: float = 1.0 / 3.0,
    **kwargs,
) -> SolitarySolution:
    """Convenience wrapper: trace from alpha = 2 down to the requested alpha."""
    plan = ContinuationPlan(
        schedule=((alpha, c, omega),), kappa2=kappa2, grid=grid, **kwargs
    )
    return trace_continuation(plan)[-1]
