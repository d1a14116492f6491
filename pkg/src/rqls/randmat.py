"""Random Hermitian test instances with exactly prescribed condition number.

The spectrum is drawn directly: eigenvalues of magnitude 1/kappa and 1 are
forced present (random signs), the rest are uniform on
[-1, -1/kappa] U [1/kappa, 1], and the eigenbasis is Haar-random.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliDecomposition, pauli_decompose


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    # fix the phase ambiguity of QR so the distribution is exactly Haar
    d = np.diag(r)
    return q * (d / np.abs(d))


def conditioned_spectrum(
    dim: int, kappa: float, rng: np.random.Generator
) -> np.ndarray:
    """Eigenvalues with max |x| = 1 and min |x| = 1/kappa exactly."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    vals = np.empty(dim)
    vals[0] = 1.0 / kappa
    vals[1 % dim] = 1.0
    if dim > 2:
        u = rng.uniform(1.0 / kappa, 1.0, size=dim - 2)
        vals[2:] = u
    signs = np.where(rng.random(dim) < 0.5, -1.0, 1.0)
    vals = vals * signs
    return rng.permutation(vals)


@dataclass(frozen=True)
class MatrixArtifact:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    kappa: float
    decomposition: PauliDecomposition

    @property
    def lam(self) -> float:
        return self.decomposition.lam

    def to_json(self) -> dict:
        return {
            "matrix": [
                [[v.real, v.imag] for v in row] for row in self.matrix
            ],
            "eigenvalues": list(self.eigenvalues),
            "kappa": self.kappa,
            "lam": self.lam,
            "decomposition": self.decomposition.to_json(),
        }


def gen_matrix(
    n_qubits: int, kappa: float, rng: np.random.Generator
) -> MatrixArtifact:
    """A = U D U* with Haar U and condition number exactly kappa."""
    dim = 1 << n_qubits
    vals = conditioned_spectrum(dim, kappa, rng)
    u = haar_unitary(dim, rng)
    a = (u * vals) @ u.conj().T
    a = (a + a.conj().T) / 2
    return MatrixArtifact(a, vals, kappa, pauli_decompose(a))
