"""Dense Hermitian linear algebra and product-structure kernels.

All operators and states are plain numpy arrays in a fixed global basis.
Composite systems of n letters with per-letter dimension d use one index
convention everywhere: letter 1 occupies the most significant digit of the
base-d composite index, which is exactly the ordering np.kron produces.

Entropies are in bits (base-2 logs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .budgets import DEFAULT_BUDGETS, Budgets
from .errors import ResourceBudgetError, ValidationError

TOL_HERM = 1e-10
TOL_EIG = 1e-10
TOL_TRACE = 1e-9


def as_complex_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermiticity_defect(a: np.ndarray) -> float:
    """Max absolute entry of A - A^dagger."""
    return float(np.abs(a - a.conj().T).max())


def check_hermitian(a, tol: float = TOL_HERM, name: str = "matrix") -> np.ndarray:
    m = as_complex_matrix(a)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise ValidationError(f"{name} is not Hermitian: defect {defect:.3e} > {tol:.1e}")
    return m


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (real, descending) and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def spectral_decompose(a, tol: float = TOL_HERM) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues are sorted descending.  Roundoff negatives in [-TOL_EIG, 0]
    are clamped to zero so downstream logs never see spurious negative
    weights; genuinely negative eigenvalues are kept as they are.
    """
    m = check_hermitian(a, tol=tol)
    vals, vecs = np.linalg.eigh(m)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    tiny = (vals < 0) & (vals >= -TOL_EIG)
    vals[tiny] = 0.0
    return SpectralDecomposition(eigenvalues=vals, eigenvectors=vecs)


def entropy_of_spectrum(eigenvalues) -> float:
    """Shannon entropy in bits of a nonnegative weight vector, 0*log(0) := 0."""
    lam = np.asarray(eigenvalues, dtype=float)
    pos = lam[lam > 0]
    if pos.size == 0:
        return 0.0
    return float(-(pos * np.log2(pos)).sum())


def von_neumann_entropy(a) -> float:
    """S(rho) = -Tr[rho log2 rho] for a density matrix (PSD, unit trace)."""
    m = as_complex_matrix(a)
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > TOL_TRACE:
        raise ValidationError(f"density matrix must have unit trace, got {tr}")
    dec = spectral_decompose(m)
    if dec.eigenvalues.min() < -TOL_EIG:
        raise ValidationError(
            f"density matrix has negative eigenvalue {dec.eigenvalues.min():.3e}"
        )
    return max(0.0, entropy_of_spectrum(dec.eigenvalues))


def shannon_entropy(p) -> float:
    """Entropy in bits of a probability vector."""
    v = np.asarray(p, dtype=float)
    if v.ndim != 1:
        raise ValidationError("probability vector must be one-dimensional")
    if v.min() < -TOL_EIG:
        raise ValidationError(f"negative probability {v.min():.3e}")
    if abs(v.sum() - 1.0) > TOL_TRACE:
        raise ValidationError(f"probabilities must sum to 1, got {v.sum()!r}")
    return entropy_of_spectrum(np.clip(v, 0.0, None))


@dataclass(frozen=True)
class ProductVector:
    """Tensor product state stored as its per-letter factors.

    Factors are unit vectors of a common dimension d; the expanded vector is
    factor 1 kron factor 2 kron ... (letter 1 most significant).
    """

    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValidationError("ProductVector needs at least one factor")
        d = self.factors[0].shape[0]
        for i, f in enumerate(self.factors):
            if f.ndim != 1 or f.shape[0] != d:
                raise ValidationError(f"factor {i} has shape {f.shape}, expected ({d},)")
            norm = float(np.linalg.norm(f))
            if abs(norm - 1.0) > 1e-8:
                raise ValidationError(f"factor {i} is not normalized: |v| = {norm!r}")

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def letter_dim(self) -> int:
        return self.factors[0].shape[0]

    @property
    def dim(self) -> int:
        return self.letter_dim**self.n


def product_vector(factors) -> ProductVector:
    return ProductVector(tuple(np.asarray(f, dtype=complex) for f in factors))


def expand(x: ProductVector, budgets: Budgets = DEFAULT_BUDGETS) -> np.ndarray:
    """Dense expansion of a product vector (kron of the factors)."""
    if x.dim > budgets.dim_limit:
        raise ResourceBudgetError(
            f"expansion dimension {x.dim} exceeds dim budget {budgets.dim_limit}",
            reason="dim",
        )
    out = x.factors[0]
    for f in x.factors[1:]:
        out = np.kron(out, f)
    return out


def product_inner(x: ProductVector, y: np.ndarray) -> complex:
    """<expand(x)|y> by sequential per-factor contraction.

    Contracting one factor at a time costs O(d^n) per factor and never
    materializes expand(x), so it stays cheap for states y that are not
    themselves products (e.g. post-measurement states).
    """
    y = np.asarray(y, dtype=complex)
    if y.ndim != 1 or y.shape[0] != x.dim:
        raise ValidationError(f"dimension mismatch: product dim {x.dim}, vector {y.shape}")
    z = y.reshape((x.letter_dim,) * x.n)
    for f in x.factors:
        z = np.tensordot(f.conj(), z, axes=(0, 0))
    return complex(z)
