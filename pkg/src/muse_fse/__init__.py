"""Frequency Selective Extrapolation (FSE) and Multiple Selection Extrapolation (MuSE)
for concealing block losses in grayscale images."""

from .basis import BasisIndex, FourierDictionary, build_dictionary, evaluate_basis, project_all
from .conceal import (
    ConcealmentReport,
    LossPattern,
    conceal_image,
    conceal_sequential,
    extract_window,
)
from .fse import IterationTrace, SparseModel, fse_init, fse_run, fse_select, fse_step
from .grid import (
    DataArea,
    ExtrapolationConfig,
    WeightMatrix,
    build_isotropic_weights,
    weighted_energy,
)
from .metrics import psnr, quantize, saturation_iterations
from .muse import (
    CandidateSet,
    NormalSystem,
    hypothetical_decrements,
    muse_run,
    muse_step,
    select_candidates,
    solve_subspace,
)

__version__ = "0.1.0"
