"""Importance sampling of Fourier times from the series coefficients.

The (j, k) indices are drawn independently: j proportional to the scaled
Gauss-Legendre weight, k proportional to |dz * z_k * exp(-z_k^2/2)|.  The
zero-amplitude z = 0 node is never drawn.  Each sample carries the exact
phase of its coefficient, omega = i * sign(z_k), and the constant estimator
weight N_y * N_z / lambda.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import FourierSeries


def sample_rng(master_seed: int, sample_index: int) -> np.random.Generator:
    """Deterministic per-sample stream keyed by (master_seed, sample_index)."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, sample_index)))


class AliasTable:
    """Walker alias table for O(1) draws from a fixed discrete distribution."""

    def __init__(self, probabilities):
        p = np.asarray(probabilities, dtype=float)
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("probabilities must be a nonempty 1-d array")
        if (p < 0).any():
            raise ValueError("negative probability")
        total = p.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")
        self.probabilities = p
        n = len(p)
        scaled = p * n
        alias = np.zeros(n, dtype=np.int64)
        accept = np.ones(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            l = large.pop()
            accept[s] = scaled[s]
            alias[s] = l
            scaled[l] -= 1.0 - scaled[s]
            (small if scaled[l] < 1.0 else large).append(l)
        for i in large + small:
            # leftovers are numerically 1 up to roundoff -- unless they had
            # exactly zero probability, which must never be drawn
            accept[i] = 0.0 if p[i] == 0.0 else 1.0
        self._alias = alias
        self._accept = accept

    def draw(self, rng: np.random.Generator) -> int:
        i = rng.integers(len(self._accept))
        return int(i if rng.random() < self._accept[i] else self._alias[i])

    def draw_batch(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.integers(len(self._accept), size=size)
        take_alias = rng.random(size) >= self._accept[idx]
        return np.where(take_alias, self._alias[idx], idx)


@dataclass(frozen=True)
class DiscreteDistribution:
    probabilities: np.ndarray
    table: AliasTable

    @classmethod
    def from_weights(cls, weights) -> "DiscreteDistribution":
        w = np.abs(np.asarray(weights, dtype=float))
        total = w.sum()
        if total == 0:
            raise ValueError("all weights are zero")
        p = w / total
        return cls(p, AliasTable(p))


@dataclass(frozen=True)
class FourierSample:
    j: int
    k: int
    tau: float
    omega: complex
    weight: float


def build_distributions(series: FourierSeries):
    """(p_y over [J], p_z over [K]) from the series amplitudes."""
    p_y = DiscreteDistribution.from_weights(series.grid.wy_weights)
    p_z = DiscreteDistribution.from_weights(series.z_amplitudes())
    return p_y, p_z


class TimeSampler:
    """Draws Fourier samples (j, k, tau, omega, weight) from a built series."""

    def __init__(self, series: FourierSeries):
        self.series = series
        self.p_y, self.p_z = build_distributions(series)
        self.weight = series.N_y * series.N_z / series.lam

    def sample(self, rng: np.random.Generator) -> FourierSample:
        j = self.p_y.table.draw(rng)
        k = self.p_z.table.draw(rng)
        return self._make(j, k)

    def sample_batch(self, rng: np.random.Generator, size: int):
        """Vectorized draw; returns (j, k, tau, omega) arrays."""
        j = self.p_y.table.draw_batch(rng, size)
        k = self.p_z.table.draw_batch(rng, size)
        z = self.series.grid.z_nodes[k]
        tau = self.series.grid.y_nodes[j] * z
        omega = 1j * np.sign(z)
        return j, k, tau, omega

    def _make(self, j: int, k: int) -> FourierSample:
        z = self.series.grid.z_nodes[k]
        tau = float(self.series.grid.y_nodes[j] * z)
        omega = 1j * float(np.sign(z))
        return FourierSample(j, k, tau, omega, self.weight)


def sample_time(
    series: FourierSeries, master_seed: int, sample_index: int
) -> FourierSample:
    """One Fourier sample from the per-(seed, index) deterministic stream."""
    return TimeSampler(series).sample(sample_rng(master_seed, sample_index))
