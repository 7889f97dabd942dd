"""Indexed 2D DFT dictionary over the extrapolation window.

Basis function ``k = (k_row, k_col)`` is
``phi_k[m, n] = exp(+2j*pi*(k_row*m/M + k_col*n/N))``, flattened as
``k_row*N + k_col``. Projections use the conjugate. Every function has a
conjugate partner with negated frequencies; the few that are their own
partner are real valued.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .grid import DataArea, WeightMatrix

__all__ = [
    "BasisIndex",
    "FourierDictionary",
    "dft_matrix",
    "evaluate_basis",
    "basis_function",
    "build_dictionary",
    "project_all",
]


class BasisIndex(NamedTuple):
    k_row: int
    k_col: int

    def flat(self, n_cols: int) -> int:
        return self.k_row * n_cols + self.k_col

    @classmethod
    def from_flat(cls, k: int, n_cols: int) -> "BasisIndex":
        return cls(*divmod(int(k), n_cols))


def dft_matrix(size: int) -> np.ndarray:
    """``E[m, k] = exp(2j*pi*k*m/size)`` with the phase reduced modulo ``size``."""
    idx = np.arange(size)
    phase = 2 * np.pi * (np.outer(idx, idx) % size) / size
    E = np.exp(1j * phase)
    # exact zeros/ones where the phase is a multiple of pi/2
    E.real[np.isclose(E.real, 0, atol=1e-15)] = 0.0
    E.imag[np.isclose(E.imag, 0, atol=1e-15)] = 0.0
    return E


def evaluate_basis(dims: tuple[int, int], k: BasisIndex | tuple[int, int],
                   position: tuple[int, int]) -> complex:
    M, N = dims
    k_row, k_col = k
    m, n = position
    if not (0 <= k_row < M and 0 <= k_col < N):
        raise IndexError(f"basis index {tuple(k)} out of range for {dims}")
    if not (0 <= m < M and 0 <= n < N):
        raise IndexError(f"position {tuple(position)} out of range for {dims}")
    phase = (k_row * m % M) / M + (k_col * n % N) / N
    return complex(np.exp(2j * np.pi * phase))


@dataclass(frozen=True, eq=False)
class FourierDictionary:
    shape: tuple[int, int]
    weighted_norms: np.ndarray
    pair_of: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    _spectra: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return self.shape[0] * self.shape[1]

    @property
    def self_paired(self) -> np.ndarray:
        return self.pair_of == np.arange(len(self))

    @property
    def multiplicity(self) -> np.ndarray:
        """1 for self-paired functions, 2 for members of a conjugate pair."""
        return np.where(self.self_paired, 1.0, 2.0)

    @property
    def representative(self) -> np.ndarray:
        """True for the lower-indexed member of each pair (and self-paired functions)."""
        return np.arange(len(self)) <= self.pair_of

    def index(self, k: int) -> BasisIndex:
        return BasisIndex.from_flat(k, self.shape[1])

    def weight_spectrum(self, weights: WeightMatrix) -> np.ndarray:
        """``S[d] = sum(w * phi_d)`` for every frequency ``d``, cached per weights."""
        cached = self._spectra.get(id(weights))
        if cached is None or cached[0] is not weights:
            S = self.rows.T @ weights.values @ self.cols
            S.setflags(write=False)
            cached = (weights, S)
            self._spectra[id(weights)] = cached
        return cached[1]

    def function(self, k: int) -> np.ndarray:
        """Materialize ``phi_k`` over the window (real dtype when self-paired)."""
        k_row, k_col = divmod(int(k), self.shape[1])
        phi = np.outer(self.rows[:, k_row], self.cols[:, k_col])
        if self.pair_of[k] == k:
            return phi.real.copy()
        return phi


def basis_function(dims: tuple[int, int], k: int) -> np.ndarray:
    M, N = dims
    k_row, k_col = divmod(int(k), N)
    return np.outer(dft_matrix(M)[:, k_row], dft_matrix(N)[:, k_col])


def _pairs(M: int, N: int) -> np.ndarray:
    k_row, k_col = np.divmod(np.arange(M * N), N)
    return ((-k_row) % M) * N + (-k_col) % N


def build_dictionary(area: DataArea, weights: WeightMatrix) -> FourierDictionary:
    """Precompute per-function weighted norms and the conjugate pairing."""
    if weights.shape != area.shape:
        raise ValueError(f"weights shape {weights.shape} != area shape {area.shape}")
    M, N = area.shape
    # |phi_k| == 1, so every weighted norm is the total weight
    norms = np.full(M * N, weights.total)
    arrays = (norms, _pairs(M, N), dft_matrix(M), dft_matrix(N))
    for a in arrays:
        a.setflags(write=False)
    return FourierDictionary((M, N), *arrays)


def project_all(residual: np.ndarray, weights: WeightMatrix,
                dictionary: FourierDictionary) -> np.ndarray:
    """Weighted projection coefficients of ``residual`` onto every basis function.

    Direct separable summation:
    ``p[k] = sum(r * w * conj(phi_k)) / weighted_norms[k]``, returned flat.
    """
    residual = np.asarray(residual, dtype=np.float64)
    if residual.shape != dictionary.shape or weights.shape != dictionary.shape:
        raise ValueError("residual, weights and dictionary dimensions differ")
    x = residual * weights.values
    p = (dictionary.rows.conj().T @ x @ dictionary.cols.conj()).ravel()
    # enforce exact conjugate symmetry for a real residual
    p = 0.5 * (p + p[dictionary.pair_of].conj())
    return p / dictionary.weighted_norms
