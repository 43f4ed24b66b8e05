"""Pseudospectral solvers for the fractional Camassa-Holm equation.

Subpackages cover the periodic spectral discretization (``grid``), the
closed-form CH soliton used as a continuation seed (``ch_soliton``),
Newton-Krylov construction of solitary waves (``solitary``), RK4 time
evolution with conservation monitors (``evolution``), Fourier-asymptotics
singularity tracking (``singularity``) and the experiment runner (``cli``).
"""

__version__ = "0.1.0"
