"""Multiple Selection Extrapolation.

Each iteration selects up to ``n_bf`` conjugate pairs whose individual energy
decrement exceeds ``tau`` times the best one, fits the residual jointly on
the span of their representatives, and updates the model with ``gamma``
times the joint coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import FourierDictionary, project_all
from .fse import ExtrapolationState, IterationRecord, IterationTrace, SparseModel
from .fse import fse_init, pair_objective
from .grid import DataArea, ExtrapolationConfig, WeightMatrix

__all__ = [
    "CandidateSet",
    "NormalSystem",
    "hypothetical_decrements",
    "select_candidates",
    "normal_system",
    "solve_subspace",
    "muse_step",
    "muse_run",
]

# above this condition number the joint fit falls back to independent projections
MAX_CONDITION = 1e10


@dataclass(frozen=True)
class CandidateSet:
    indices: tuple[int, ...]
    decrements: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True, eq=False)
class NormalSystem:
    """Hermitian normal equations ``gram @ p = rhs`` over the selected functions.

    ``gram[i, j] = sum(w * conj(phi_i) * phi_j)``, ``rhs[i] = sum(w * conj(phi_i) * r)``.
    """

    gram: np.ndarray
    rhs: np.ndarray
    real_valued: np.ndarray

    def folded(self) -> tuple[np.ndarray, np.ndarray]:
        """Real symmetric form with unknowns ``[Re p; Im p]``.

        The imaginary unknown of a real-valued (self-paired) function is
        dropped, which keeps its coefficient real.
        """
        A, B = self.gram.real, self.gram.imag
        K = np.block([[A, -B], [B, A]])
        b = np.concatenate([self.rhs.real, self.rhs.imag])
        keep = np.concatenate([np.ones(len(self.rhs), bool), ~self.real_valued])
        return K[np.ix_(keep, keep)], b[keep]


def hypothetical_decrements(projections: np.ndarray, dictionary: FourierDictionary,
                            gamma: float) -> np.ndarray:
    """``gamma**2 * |p_k|^2 * norm_k`` per pair, indexed by its lower member.

    The higher-indexed member of every conjugate pair gets 0 so that each pair
    is counted once.
    """
    dE = gamma**2 * pair_objective(projections, dictionary)
    return np.where(dictionary.representative, dE, 0.0)


def select_candidates(decrements: np.ndarray, tau: float, n_bf: int) -> CandidateSet:
    """Entries above ``tau * max`` among the ``n_bf`` largest; ties go to lower indices."""
    decrements = np.asarray(decrements, dtype=np.float64)
    above = np.flatnonzero(decrements > tau * decrements.max())
    # stable sort keeps ascending index among equal decrements
    order = above[np.argsort(-decrements[above], kind="stable")]
    chosen = [int(k) for k in order[:n_bf]]
    return CandidateSet(tuple(chosen), tuple(float(decrements[k]) for k in chosen))


def normal_system(residual: np.ndarray, weights: WeightMatrix,
                  dictionary: FourierDictionary, indices,
                  projections: np.ndarray | None = None) -> NormalSystem:
    """Assemble the joint normal equations for ``indices``.

    ``conj(phi_i) * phi_j`` is the basis function at the frequency difference,
    so off-diagonal entries are read from the weight spectrum. The diagonal
    is the weighted norm. With ``projections`` given the right hand side
    reuses ``p_k * norm_k`` instead of re-summing.
    """
    M, N = dictionary.shape
    spectrum = dictionary.weight_spectrum(weights)
    kr, kc = np.divmod(np.asarray(indices, dtype=int), N)
    n = len(indices)
    gram = np.zeros((n, n), dtype=complex)
    for i in range(n):
        gram[i, i] = dictionary.weighted_norms[indices[i]]
        for j in range(i + 1, n):
            g = spectrum[(kr[j] - kr[i]) % M, (kc[j] - kc[i]) % N]
            gram[i, j] = g
            gram[j, i] = np.conj(g)
    if projections is not None:
        rhs = np.array([projections[k] * dictionary.weighted_norms[k] for k in indices],
                       dtype=complex)
    else:
        w = weights.values
        rhs = np.array([np.sum(w * np.conj(dictionary.function(k)) * residual)
                        for k in indices], dtype=complex)
    real_valued = np.array([dictionary.pair_of[k] == k for k in indices], dtype=bool)
    return NormalSystem(gram, rhs, real_valued)


def solve_subspace(residual: np.ndarray, weights: WeightMatrix,
                   dictionary: FourierDictionary, candidates: CandidateSet,
                   projections: np.ndarray | None = None) -> tuple[np.ndarray, bool]:
    """Joint weighted least-squares coefficients for the selected functions.

    Returns ``(coefficients, fallback)``. ``fallback`` is True when the system
    was too ill-conditioned and the independent projections were used instead.
    """
    indices = list(candidates.indices)
    if not indices:
        raise ValueError("empty candidate set")
    if projections is None:
        projections = project_all(residual, weights, dictionary)
    single = projections[indices].astype(complex)
    if len(indices) == 1:
        return single, False
    system = normal_system(residual, weights, dictionary, indices, projections)
    K, b = system.folded()
    if np.linalg.cond(K) > MAX_CONDITION:
        return single, True
    x = scipy.linalg.solve(K, b, assume_a="sym")
    n = len(indices)
    coef = x[:n].astype(complex)
    coef[~system.real_valued] += 1j * x[n:]
    return coef, False


def muse_step(state: ExtrapolationState, config: ExtrapolationConfig) -> IterationRecord:
    dictionary = state.dictionary
    p = project_all(state.residual, state.weights, dictionary)
    dE = hypothetical_decrements(p, dictionary, config.gamma)
    if not dE.max() > 0:
        state.iteration += 1
        return state.record((), ())
    candidates = select_candidates(dE, config.tau, config.n_bf)
    coef, fallback = solve_subspace(state.residual, state.weights, dictionary,
                                    candidates, p)
    updates = config.gamma * coef
    state.apply(candidates.indices, updates)
    return state.record(candidates.indices, updates, fallback)


def muse_run(area: DataArea, weights: WeightMatrix, dictionary: FourierDictionary | None,
             config: ExtrapolationConfig, reference: np.ndarray | None = None,
             score_mask: np.ndarray | None = None) -> tuple[SparseModel, IterationTrace]:
    if config.iterations < 1:
        raise ValueError("at least one iteration is required")
    state = fse_init(area, weights, dictionary, reference, score_mask)
    trace = IterationTrace(state.energy)
    for _ in range(config.iterations):
        trace.records.append(muse_step(state, config))
    return state.model, trace
