"""Periodic grid and Fourier-space operators.

The domain is the torus x in L*[-pi, pi) sampled at N equidistant nodes
x_n = -pi*L + n*h, h = 2*pi*L/N.  Transforms use the continuum-calibrated
convention

    u_hat(k) = h * sum_n u(x_n) exp(-i k x_n),
    u(x_n)   = 1/(2*pi*L) * sum_k u_hat(k) exp(i k x_n),

i.e. coefficients approximate the Fourier transform integral over one
period.  The wavenumber lattice is k = j/L with integers
j in {-N/2+1, ..., N/2}; the Nyquist mode carries the positive sign.
Plancherel reads  sum_n u_n^2 * h = sum_k |u_hat_k|^2 / (2*pi*L).

Odd symbols (i*k of the derivative, 1/(i*k) of the antiderivative) zero the
Nyquist mode so that real fields stay real; the even symbol |k|^alpha keeps
it.  The antiderivative regularizes k = 0 through the limit
u_hat(k)/(ik) -> u_hat'(0)/i with u_hat'(0) = -i*h*sum_n x_n u(x_n).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as _fft

HERMITIAN_RTOL = 1e-12


def _fft_workers() -> int:
    env = os.environ.get("FCH_THREADS")
    if env:
        return max(1, int(env))
    return 1


@dataclass(frozen=True)
class TorusGrid:
    """Collocation nodes and matched wavenumber lattice for one period."""

    L: float
    N: int
    h: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False)
    k: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h = 2.0 * np.pi * self.L / self.N
        x = -np.pi * self.L + h * np.arange(self.N)
        # signed mode integers in FFT-native order, Nyquist with + sign
        j = np.fft.fftfreq(self.N, d=1.0 / self.N)
        j[self.N // 2] = self.N // 2
        k = j / self.L
        # phase (-1)^j maps FFT sums (origin at node 0) to the x_n origin
        phase = np.where(np.arange(self.N) % 2 == 0, 1.0, -1.0)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "_phase", phase)
        object.__setattr__(self, "_ik", _make_ik(k, self.N))
        object.__setattr__(self, "abs_k", np.abs(k))

    @property
    def k_max(self) -> float:
        """Largest resolved wavenumber N/(2L)."""
        return self.N / (2.0 * self.L)

    def dealias_mask(self, fraction: float = 2.0 / 3.0) -> np.ndarray:
        """Boolean 2/3-rule mask (provided for opt-in use; off by default)."""
        return self.abs_k <= fraction * self.k_max


def _make_ik(k: np.ndarray, N: int) -> np.ndarray:
    ik = 1j * k
    ik[N // 2] = 0.0  # odd symbol: drop the Nyquist mode
    return ik


def make_grid(L: float, N: int) -> TorusGrid:
    """Build a TorusGrid, rejecting non-power-of-two N or non-positive L."""
    if L <= 0:
        raise ValueError(f"half-period scale L must be positive, got {L}")
    if N < 16 or (N & (N - 1)) != 0:
        raise ValueError(f"N must be a power of two >= 16, got {N}")
    return TorusGrid(L=float(L), N=int(N))


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a real field on a TorusGrid.

    Hermitian symmetry u_hat(-k) = conj(u_hat(k)) is asserted on
    construction (relative tolerance 1e-12); it is what keeps the
    physical-space field real.
    """

    coeffs: np.ndarray
    grid: TorusGrid

    def __post_init__(self):
        if self.coeffs.shape != (self.grid.N,):
            raise ValueError(
                f"coefficient vector has length {self.coeffs.shape}, grid has N={self.grid.N}"
            )
        assert hermitian_defect(self.coeffs) <= HERMITIAN_RTOL, (
            "coefficients are not Hermitian-symmetric"
        )


def hermitian_defect(coeffs: np.ndarray) -> float:
    """Max deviation from u_hat(-k) = conj(u_hat(k)), relative to max |u_hat|."""
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        return 0.0
    mirrored = np.conj(coeffs[_mirror_index(coeffs.size)])
    return float(np.max(np.abs(coeffs - mirrored)) / scale)


def _mirror_index(N: int) -> np.ndarray:
    return (-np.arange(N)) % N


def hermitian_symmetrize(coeffs: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian-symmetric subspace (kills rounding drift)."""
    return 0.5 * (coeffs + np.conj(coeffs[_mirror_index(coeffs.size)]))


def forward(grid: TorusGrid, u: np.ndarray) -> SpectralField:
    """DFT of a real field sampled on the grid nodes."""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.N,):
        raise ValueError(f"field has length {u.shape}, grid has N={grid.N}")
    coeffs = grid.h * grid._phase * _fft.fft(u, workers=_fft_workers())
    return SpectralField(coeffs=hermitian_symmetrize(coeffs), grid=grid)


def inverse(f: SpectralField) -> np.ndarray:
    """Real field reconstructed from its coefficients."""
    return inverse_raw(f.grid, f.coeffs)


def inverse_raw(grid: TorusGrid, coeffs: np.ndarray) -> np.ndarray:
    u = _fft.ifft(coeffs * grid._phase, workers=_fft_workers()) / grid.h
    return u.real


def forward_raw(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    """Transform without the SpectralField wrapper (hot loops)."""
    return grid.h * grid._phase * _fft.fft(u, workers=_fft_workers())


def fractional_laplacian(f: SpectralField, alpha: float) -> SpectralField:
    """Apply the multiplier |k|^alpha (equals -d^2/dx^2 at alpha = 2)."""
    if alpha <= 0:
        raise ValueError(f"fractional order alpha must be positive, got {alpha}")
    return SpectralField(coeffs=f.coeffs * f.grid.abs_k**alpha, grid=f.grid)


def spectral_derivative(f: SpectralField) -> SpectralField:
    """Apply i*k (Nyquist zeroed)."""
    return SpectralField(coeffs=f.coeffs * f.grid._ik, grid=f.grid)


def antiderivative(f: SpectralField) -> SpectralField:
    """Apply 1/(i*k), with the k = 0 mode set by the limit rule.

    The zero mode is lim_{k->0} u_hat(k)/(ik) = u_hat'(0)/i, evaluated by
    the quadrature u_hat'(0) = -i*h*sum_n x_n u(x_n); it equals the mean of
    the two-sided primitive of a zero-mean decaying field.  The Nyquist
    mode is zeroed as in spectral_derivative.
    """
    grid = f.grid
    out = np.zeros_like(f.coeffs)
    nz = grid._ik != 0.0
    out[nz] = f.coeffs[nz] / grid._ik[nz]
    u = inverse_raw(grid, f.coeffs)
    out[0] = -grid.h * np.dot(grid.x, u)
    return SpectralField(coeffs=out, grid=grid)
