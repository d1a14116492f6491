"""Certified Fourier series approximation of the inverse function.

Builds the double-quadrature (Gauss-Legendre in y, trapezoid in z) series
F(x) = sum_{jk} alpha_{jk} exp(-i x t_{jk}) that approximates 1/x on the
domain [-1, -1/kt] U [1/kt, 1] to within eps_T + eps_D, together with the
normalization constants used by the importance sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT_2PI = math.sqrt(2.0 * math.pi)

GL_MAX_DEGREE = 10**6
SERIES_TERM_GUARD = 2**31


class SeriesSizeError(ValueError):
    """Raised when the requested accuracy needs more terms than the guard."""

    def __init__(self, j: int, k: int):
        self.required_terms = j * k
        super().__init__(
            f"series would need J*K = {j}*{k} = {j * k} terms "
            f"(guard {SERIES_TERM_GUARD}); relax eps_T/eps_D"
        )


def _legendre_pair(deg: int, x: np.ndarray):
    """Value and derivative of the degree-`deg` Legendre polynomial at x."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for n in range(2, deg + 1):
        p_prev, p = p, ((2 * n - 1) * x * p - (n - 1) * p_prev) / n
    dp = deg * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def gauss_legendre(deg: int):
    """Nodes (ascending) and weights of the degree-`deg` Gauss-Legendre rule.

    Newton iteration on the Legendre recurrence from Tricomi-style initial
    guesses, vectorized over nodes and exploiting the +-x symmetry.  Node
    and weight accuracy is at the 1e-14 level through deg ~ 1e5.
    """
    if not 1 <= deg <= GL_MAX_DEGREE:
        raise ValueError(f"degree must be in [1, {GL_MAX_DEGREE}], got {deg}")
    if deg == 1:
        return np.array([0.0]), np.array([2.0])

    m = deg // 2
    k = np.arange(1, m + 1, dtype=float)
    phi = math.pi * (4 * k - 1) / (4 * deg + 2)
    x = (
        1.0
        - (deg - 1) / (8.0 * deg**3)
        - (39.0 - 28.0 / np.sin(phi) ** 2) / (384.0 * deg**4)
    ) * np.cos(phi)
    for _ in range(10):
        p, dp = _legendre_pair(deg, x)
        step = p / dp
        x -= step
        if np.abs(step).max() < 1e-15:
            break
    p, dp = _legendre_pair(deg, x)
    w_half = 2.0 / ((1.0 - x * x) * dp * dp)

    # x holds the positive roots in descending order
    if deg % 2 == 0:
        nodes = np.concatenate([-x, x[::-1]])
        weights = np.concatenate([w_half, w_half[::-1]])
    else:
        _, dp0 = _legendre_pair(deg, np.array([0.0]))
        w0 = 2.0 / (dp0 * dp0)
        nodes = np.concatenate([-x, [0.0], x[::-1]])
        weights = np.concatenate([w_half, w0, w_half[::-1]])
    return nodes, weights


def rescale(kappa_star: float, lam: float) -> float:
    """Rescaled condition-number bound for A/lam."""
    if kappa_star < 1 or lam < 1:
        raise ValueError("kappa_star and lam must both be >= 1")
    return lam * kappa_star


@dataclass(frozen=True)
class TruncationParams:
    y_max: float
    z_max: float
    t_max: float
    kappa_tilde: float
    eps_T: float


def truncation_params(kappa_tilde: float, eps_T: float) -> TruncationParams:
    """Integration bounds (y_max, z_max) for truncation error <= eps_T."""
    if kappa_tilde < 1:
        raise ValueError("kappa_tilde must be >= 1")
    if not 0 < eps_T < 3 * kappa_tilde:
        raise ValueError("need 0 < eps_T < 3*kappa_tilde")
    log_term = math.log(3 * kappa_tilde / eps_T)
    z_max = math.sqrt(2 * log_term)
    y_max = kappa_tilde * z_max
    t_max = 2 * kappa_tilde * log_term
    return TruncationParams(y_max, z_max, t_max, kappa_tilde, eps_T)


def fourier_params(
    kappa_tilde: float, eps_T: float, eps_D: float, trunc: TruncationParams
):
    """Grid sizes (J, K) for discretization error <= eps_D (ceil convention)."""
    if eps_D <= 0:
        raise ValueError("eps_D must be positive")
    log_term = math.log(3 * kappa_tilde / eps_T)
    z = trunc.z_max
    k_real = 1 + (
        math.log(2)
        + z * z / 2
        + 2 * kappa_tilde * log_term
        + math.log(2 / eps_D)
        + math.log(1 + 2 / (z * SQRT_2PI))
    ) / math.pi
    big_k = max(2, math.ceil(k_real))
    j_real = (
        math.log(big_k / (big_k - 1))
        + math.log(32 * trunc.y_max * z * z / (eps_D * SQRT_2PI))
        + 3 * kappa_tilde * log_term / (2 * math.sqrt(2))
    ) / math.log(2)
    big_j = max(2, math.ceil(j_real))
    return big_j, big_k


@dataclass(frozen=True)
class QuadratureGrid:
    J: int
    K: int
    gl_nodes: np.ndarray
    gl_weights: np.ndarray
    y_nodes: np.ndarray
    wy_weights: np.ndarray
    z_nodes: np.ndarray
    delta_z: float


@dataclass(frozen=True)
class FourierSeries:
    """The built series: grid, error budget, and normalization constants.

    Coefficients are implicit: alpha_{jk} = (i/sqrt(2*pi)) * wy_j * dz *
    z_k * exp(-z_k^2/2) and t_{jk} = y_j * z_k.  The z = 0 node (odd K)
    carries an exactly-zero coefficient and is excluded from sampling but
    still counts toward the J*K term total.
    """

    grid: QuadratureGrid
    trunc: TruncationParams
    eps_D: float
    lam: float
    N_y: float
    N_z: float
    t_min_abs: float

    @property
    def kappa_tilde(self) -> float:
        return self.trunc.kappa_tilde

    @property
    def t_max(self) -> float:
        return self.trunc.t_max

    @property
    def n_terms(self) -> int:
        return self.grid.J * self.grid.K

    def z_amplitudes(self) -> np.ndarray:
        """Signed per-k amplitude dz * z_k * exp(-z_k^2 / 2)."""
        z = self.grid.z_nodes
        return self.grid.delta_z * z * np.exp(-z * z / 2)

    def sum_abs_alpha(self) -> float:
        return float(
            np.abs(self.grid.wy_weights).sum() / SQRT_2PI * np.abs(self.z_amplitudes()).sum()
        )

    def evaluate(self, x, max_chunk: int = 4_000_000) -> np.ndarray:
        """Scalar series value F(x) = sum alpha exp(-i x t) (vectorized in x)."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        y = self.grid.y_nodes
        z = self.grid.z_nodes
        amp_z = self.z_amplitudes()
        wy = self.grid.wy_weights
        out = np.zeros(xs.shape, dtype=complex)
        rows_per_chunk = max(1, max_chunk // max(1, len(z)))
        for start in range(0, len(y), rows_per_chunk):
            sl = slice(start, start + rows_per_chunk)
            t_block = np.multiply.outer(y[sl], z)  # (Jc, K)
            for i, xi in enumerate(xs):
                out[i] += wy[sl] @ (np.exp(-1j * xi * t_block) @ amp_z)
        out *= 1j / SQRT_2PI
        return out if np.ndim(x) else out[0]

    def inverse_error(self, x) -> np.ndarray:
        """|1/x - F(x)| on the scalar domain."""
        xs = np.asarray(x, dtype=float)
        return np.abs(1.0 / xs - self.evaluate(xs))


def build_series(
    kappa_star: float, lam: float, eps_T: float, eps_D: float
) -> FourierSeries:
    """Construct the certified series for (A/lam)^{-1} on its spectral domain."""
    kt = rescale(kappa_star, lam)
    trunc = truncation_params(kt, eps_T)
    big_j, big_k = fourier_params(kt, eps_T, eps_D, trunc)
    if big_j * big_k > SERIES_TERM_GUARD:
        raise SeriesSizeError(big_j, big_k)

    nodes, weights = gauss_legendre(big_j)
    y_nodes = trunc.y_max * (1 + nodes) / 2
    wy = (trunc.y_max / 2) * weights
    dz = 2 * trunc.z_max / (big_k - 1)
    z_nodes = dz * (np.arange(big_k) - (big_k - 1) / 2)
    grid = QuadratureGrid(big_j, big_k, nodes, weights, y_nodes, wy, z_nodes, dz)

    amp_z = dz * z_nodes * np.exp(-z_nodes * z_nodes / 2)
    n_y = float(np.abs(wy).sum() / SQRT_2PI)
    n_z = float(np.abs(amp_z).sum())
    nz_mask = z_nodes != 0
    t_min_abs = float(y_nodes.min() * np.abs(z_nodes[nz_mask]).min())
    return FourierSeries(grid, trunc, eps_D, lam, n_y, n_z, t_min_abs)


def normalization(series: FourierSeries):
    """(N_y, N_z) by direct summation; N_y is checked against y_max/sqrt(2*pi)."""
    n_y = float(np.abs(series.grid.wy_weights).sum() / SQRT_2PI)
    n_z = float(np.abs(series.z_amplitudes()).sum())
    expected = series.trunc.y_max / SQRT_2PI
    if abs(n_y / expected - 1) > 1e-10:
        raise AssertionError(
            f"N_y = {n_y} deviates from y_max/sqrt(2*pi) = {expected}"
        )
    return n_y, n_z
