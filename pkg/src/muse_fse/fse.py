"""Frequency Selective Extrapolation: one conjugate pair per iteration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import FourierDictionary, build_dictionary, project_all
from .grid import DataArea, ExtrapolationConfig, WeightMatrix, weighted_energy
from .metrics import psnr_from_sse, quantize

__all__ = [
    "SparseModel",
    "IterationRecord",
    "IterationTrace",
    "ExtrapolationState",
    "fse_init",
    "fse_select",
    "fse_step",
    "fse_run",
    "pair_objective",
]


@dataclass
class SparseModel:
    """Accumulated expansion coefficients and the synthesized model ``g``.

    Coefficients are stored for both members of a conjugate pair, so the
    synthesis is real.
    """

    shape: tuple[int, int]
    coefficients: dict[int, complex] = field(default_factory=dict)
    values: np.ndarray = None

    def __post_init__(self):
        if self.values is None:
            self.values = np.zeros(self.shape)

    def add(self, k: int, c: complex, dictionary: FourierDictionary) -> np.ndarray:
        """Add ``c * phi_k`` and its conjugate partner; return the real increment."""
        partner = int(dictionary.pair_of[k])
        phi = dictionary.function(k)
        if partner == k:
            c = complex(c.real)
            delta = c.real * phi
        else:
            delta = 2.0 * (c * phi).real
            self.coefficients[partner] = self.coefficients.get(partner, 0j) + c.conjugate()
        self.coefficients[k] = self.coefficients.get(k, 0j) + c
        self.values += delta
        return delta

    def synthesize(self, dictionary: FourierDictionary) -> np.ndarray:
        """Rebuild ``Re(sum c_k phi_k)`` from the coefficient map."""
        M, N = self.shape
        C = np.zeros(M * N, dtype=complex)
        for k, c in self.coefficients.items():
            C[k] = c
        g = dictionary.rows @ C.reshape(M, N) @ dictionary.cols.T
        return g.real


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    selected: tuple[int, ...]
    updates: tuple[complex, ...]
    residual_energy: float
    psnr_db: float | None = None
    lost_sse: float | None = None
    fallback: bool = False

    @property
    def selected_count(self) -> int:
        return len(self.selected)


@dataclass
class IterationTrace:
    initial_energy: float
    records: list[IterationRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.residual_energy for r in self.records])

    @property
    def psnr_curve(self) -> np.ndarray:
        return np.array([np.nan if r.psnr_db is None else r.psnr_db for r in self.records])

    @property
    def sse_curve(self) -> np.ndarray:
        return np.array([np.nan if r.lost_sse is None else r.lost_sse for r in self.records])


@dataclass
class ExtrapolationState:
    """Mutable per-run state shared by both engines."""

    area: DataArea
    weights: WeightMatrix
    dictionary: FourierDictionary
    model: SparseModel
    residual: np.ndarray
    reference: np.ndarray | None = None
    score_mask: np.ndarray | None = None
    iteration: int = 0

    @property
    def energy(self) -> float:
        return weighted_energy(self.residual, self.weights)

    def apply(self, indices, updates) -> None:
        support = self.area.support
        for k, c in zip(indices, updates):
            delta = self.model.add(int(k), c, self.dictionary)
            self.residual -= np.where(support, delta, 0.0)
        self.iteration += 1

    def record(self, indices, updates, fallback: bool = False) -> IterationRecord:
        psnr = sse = None
        if self.reference is not None:
            lost = self.area.lost if self.score_mask is None else self.score_mask
            diff = quantize(self.model.values[lost]).astype(np.float64) - self.reference[lost]
            sse = float(np.dot(diff, diff))
            psnr = psnr_from_sse(sse, diff.size)
        return IterationRecord(
            iteration=self.iteration,
            selected=tuple(int(k) for k in indices),
            updates=tuple(complex(c) for c in updates),
            residual_energy=self.energy,
            psnr_db=psnr,
            lost_sse=sse,
            fallback=fallback,
        )


def fse_init(area: DataArea, weights: WeightMatrix | None = None,
             dictionary: FourierDictionary | None = None,
             reference: np.ndarray | None = None,
             score_mask: np.ndarray | None = None) -> ExtrapolationState:
    """Empty model, residual equal to the support samples and zero on the loss area.

    ``weights`` is required; ``dictionary`` is built when omitted. ``reference``
    (the true window) enables per-iteration PSNR over the loss area, or over
    ``score_mask`` when given.
    """
    if weights is None:
        raise ValueError("weights are required")
    if dictionary is None:
        dictionary = build_dictionary(area, weights)
    if reference is not None:
        reference = np.asarray(reference, dtype=np.float64)
        if reference.shape != area.shape:
            raise ValueError("reference window has the wrong shape")
    if score_mask is not None:
        score_mask = np.asarray(score_mask, dtype=bool)
        if score_mask.shape != area.shape or (score_mask & ~area.lost).any():
            raise ValueError("score_mask must select loss-area samples of the window")
    residual = np.where(area.lost, 0.0, area.samples)
    return ExtrapolationState(area, weights, dictionary, SparseModel(area.shape),
                              residual, reference, score_mask)


def pair_objective(projections: np.ndarray, dictionary: FourierDictionary) -> np.ndarray:
    """``|p_k|^2 * norm_k``, doubled for members of a conjugate pair."""
    power = projections.real**2 + projections.imag**2
    return power * dictionary.weighted_norms * dictionary.multiplicity


def fse_select(projections: np.ndarray, dictionary: FourierDictionary) -> int:
    """Index of the pair with the largest energy decrement; lowest index on ties."""
    return int(np.argmax(pair_objective(projections, dictionary)))


def fse_step(state: ExtrapolationState, config: ExtrapolationConfig) -> IterationRecord:
    p = project_all(state.residual, state.weights, state.dictionary)
    u = fse_select(p, state.dictionary)
    if p[u] == 0:
        state.iteration += 1
        return state.record((), ())
    c = config.gamma * p[u]
    if state.dictionary.pair_of[u] == u:
        c = complex(c.real)
    state.apply((u,), (c,))
    return state.record((u,), (c,))


def fse_run(area: DataArea, weights: WeightMatrix, dictionary: FourierDictionary | None,
            config: ExtrapolationConfig, reference: np.ndarray | None = None,
            score_mask: np.ndarray | None = None) -> tuple[SparseModel, IterationTrace]:
    if config.iterations < 1:
        raise ValueError("at least one iteration is required")
    state = fse_init(area, weights, dictionary, reference, score_mask)
    trace = IterationTrace(state.energy)
    for _ in range(config.iterations):
        trace.records.append(fse_step(state, config))
    return state.model, trace
