"""Second-order (Strang) product-formula kernel with certified step counts.

One step over dt = tau/r is the symmetric sweep: half-angle rotations for
terms 0..L-2, a full-angle rotation for term L-1, then the mirrored half
sweep.  The two adjacent half-angles of the last term are merged, so a step
stores 2L-1 rotations; the reported non-Clifford count stays 2L per step
(2rL per sample), matching the unmerged circuit accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pauli import PauliDecomposition, PauliString

PF_DENSE_QUBIT_GUARD = 10


def trotter_number(f: float, tau: float, eps_pf: float) -> int:
    """Smallest certified Trotter number: max(1, ceil(sqrt(f |tau|^3 / eps)))."""
    if f < 0:
        raise ValueError("f must be nonnegative")
    if eps_pf <= 0:
        raise ValueError("eps_pf must be positive")
    if f == 0:
        return 1
    return max(1, math.ceil(math.sqrt(f * abs(tau) ** 3 / eps_pf)))


@dataclass(frozen=True)
class PFPlan:
    r: int
    rotation_sequence: tuple  # ((PauliString, angle), ...) for one step
    n_cp_per_sample: int
    dense_unitary: np.ndarray


def _rotation_matrix(p: PauliString, angle: float) -> np.ndarray:
    """exp(-i * angle * P) = cos(angle) I - i sin(angle) P."""
    dim = 1 << p.n_qubits
    return math.cos(angle) * np.eye(dim) - 1j * math.sin(angle) * p.to_matrix()


def step_rotations(d: PauliDecomposition, dt: float):
    """Merged Strang rotation list for one step of length dt (unit weight d)."""
    seq = []
    for c, p in d.terms[:-1]:
        seq.append((p, c * dt / 2))
    c_last, p_last = d.terms[-1]
    seq.append((p_last, c_last * dt))
    for c, p in reversed(d.terms[:-1]):
        seq.append((p, c * dt / 2))
    return tuple(seq)


def build_pf(d: PauliDecomposition, tau: float, r: int) -> PFPlan:
    """Dense S(tau/r)^r for a unit-weight decomposition.

    Spectral error versus the exact exponential is bounded by
    f * tau^3 / r^2 with f the decomposition's commutator constant.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if d.n_qubits > PF_DENSE_QUBIT_GUARD:
        raise ValueError(f"n_qubits={d.n_qubits} exceeds dense guard")
    seq = step_rotations(d, tau / r)
    dim = 1 << d.n_qubits
    step = np.eye(dim, dtype=complex)
    for p, angle in seq:
        step = step @ _rotation_matrix(p, angle)
    dense = np.linalg.matrix_power(step, r)
    return PFPlan(r, seq, 2 * r * d.L, dense)
