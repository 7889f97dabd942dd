import copy

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from muse_fse.basis import build_dictionary, project_all
from muse_fse.fse import fse_init, fse_step
from muse_fse.grid import DataArea, ExtrapolationConfig, WeightMatrix
from muse_fse.muse import (CandidateSet, hypothetical_decrements, muse_run, muse_step,
                           normal_system, select_candidates, solve_subspace)

from conftest import random_area, setup


def dense_least_squares(residual, w, d, indices):
    """Fit ``sum p_u phi_u`` to the support samples by a weighted pseudo-inverse.

    Unknowns are real and imaginary parts; real-valued functions get a real
    coefficient only.
    """
    support = w > 0
    sw = np.sqrt(w[support])
    cols, owner = [], []
    for i, k in enumerate(indices):
        phi = d.function(k).astype(complex)[support]
        cols.append(phi)
        owner.append((i, 1))
        if d.pair_of[k] != k:
            cols.append(1j * phi)
            owner.append((i, 1j))
    A = np.stack(cols, axis=1) * sw[:, None]
    A_real = np.vstack([A.real, A.imag])
    b_real = np.concatenate([residual[support] * sw, np.zeros(support.sum())])
    x = np.linalg.pinv(A_real) @ b_real
    coef = np.zeros(len(indices), complex)
    for (i, unit), v in zip(owner, x):
        coef[i] += unit * v
    return coef


def representatives(rng, d, count):
    reps = np.flatnonzero(d.representative)
    return [int(k) for k in rng.choice(reps, size=count, replace=False)]


def test_decrement_examples():
    area = DataArea(np.zeros((4, 4)), np.zeros((4, 4), bool))
    d = build_dictionary(area, WeightMatrix(np.ones((4, 4))))
    assert np.all(hypothetical_decrements(np.zeros(16, complex), d, 0.2) == 0)
    p = np.zeros(16, complex)
    p[0] = 2.5  # |p|^2 * norm = 6.25 * 16 = 100
    assert hypothetical_decrements(p, d, 0.2)[0] == pytest.approx(4.0, rel=1e-14)
    p = np.zeros(16, complex)
    p[1], p[3] = 1 + 1j, 1 - 1j
    dE = hypothetical_decrements(p, d, 0.5)
    assert dE[1] == pytest.approx(0.25 * 2 * 2 * 16) and dE[3] == 0


def test_decrement_ranking_independent_of_gamma(rng):
    area = random_area(rng, 6, 6)
    w, d = setup(area)
    p = project_all(np.where(area.lost, 0, area.samples), w, d)
    ranks = [np.argsort(-hypothetical_decrements(p, d, g), kind="stable")[:20]
             for g in (0.05, 0.2, 1.0)]
    assert all(np.array_equal(ranks[0], r) for r in ranks)


def test_select_candidates_examples():
    s = select_candidates(np.array([10, 9.5, 8, 0.5]), 0.9, 5)
    assert s.indices == (0, 1) and s.decrements == (10, 9.5)
    s = select_candidates(np.full(6, 3.0), 0.9, 3)
    assert s.indices == (0, 1, 2)
    dec = np.array([1.0, 7, 7, 2, 7])
    for tau in (0.0, 0.5, 0.99):
        assert select_candidates(dec, tau, 1).indices == (1,)
    # strict threshold: exactly tau * max is excluded
    assert select_candidates(np.array([10.0, 5.0]), 0.5, 5).indices == (0,)
    # ordering by decreasing decrement, then index
    assert select_candidates(np.array([5.0, 9, 5, 10]), 0.1, 5).indices == (3, 1, 0, 2)


def test_single_function_solution_is_projection(rng):
    area = random_area(rng, 8, 8)
    w, d = setup(area)
    r = np.where(area.lost, 0, area.samples)
    p = project_all(r, w, d)
    for k in representatives(rng, d, 5):
        coef, fallback = solve_subspace(r, w, d, CandidateSet((k,), (1.0,)), p)
        assert coef[0] == p[k] and not fallback


def test_uniform_full_window_is_diagonal(rng):
    area = DataArea(rng.uniform(0, 255, (6, 6)), np.zeros((6, 6), bool))
    w = WeightMatrix(np.ones((6, 6)))
    d = build_dictionary(area, w)
    r = area.samples.copy()
    p = project_all(r, w, d)
    ks = representatives(rng, d, 5)
    system = normal_system(r, w, d, ks)
    np.testing.assert_allclose(system.gram, 36 * np.eye(5), atol=1e-12)
    coef, _ = solve_subspace(r, w, d, CandidateSet(tuple(ks), (1.0,) * 5))
    np.testing.assert_allclose(coef, np.where(d.self_paired[ks], p[ks].real, p[ks]),
                               atol=1e-10)


def test_matches_dense_least_squares_6x6(rng):
    area = random_area(rng, 6, 6, loss=(2, 2, 2, 2))
    w, d = setup(area)
    r = np.where(area.lost, 0, area.samples)
    ks = representatives(rng, d, 3)
    coef, fallback = solve_subspace(r, w, d, CandidateSet(tuple(ks), (1.0,) * 3))
    assert not fallback
    np.testing.assert_allclose(coef, dense_least_squares(r, w.values, d, ks), rtol=1e-8)


def test_rhs_shortcut_matches_direct_sum(rng):
    area = random_area(rng, 7, 6)
    w, d = setup(area)
    r = np.where(area.lost, 0, area.samples)
    ks = representatives(rng, d, 4)
    direct = normal_system(r, w, d, ks)
    fast = normal_system(r, w, d, ks, project_all(r, w, d))
    np.testing.assert_allclose(fast.rhs, direct.rhs, rtol=1e-12)
    for i, a in enumerate(ks):
        for j, b in enumerate(ks):
            g = np.sum(w.values * np.conj(d.function(a)) * d.function(b))
            assert direct.gram[i, j] == pytest.approx(g, abs=1e-10)


def test_folded_gram_is_exactly_symmetric(rng):
    area = random_area(rng, 9, 9)
    w, d = setup(area)
    ks = representatives(rng, d, 5) + [0]
    K, _ = normal_system(np.zeros((9, 9)), w, d, ks).folded()
    assert np.array_equal(K, K.T)
    assert np.linalg.eigvalsh(K).min() > -1e-9 * np.abs(K).max()


def test_singular_system_falls_back():
    lost = np.ones((4, 4), bool)
    lost[0] = False  # only row 0 known: phi_(1,0) equals phi_(0,0) there
    area = DataArea(np.full((4, 4), 3.0), lost)
    w, d = setup(area)
    r = np.where(lost, 0, area.samples)
    p = project_all(r, w, d)
    coef, fallback = solve_subspace(r, w, d, CandidateSet((0, 4), (1.0, 1.0)), p)
    assert fallback
    np.testing.assert_array_equal(coef, p[[0, 4]])


def test_constant_residual_step_equals_fse():
    lost = np.zeros((16, 16), bool)
    lost[5:9, 6:10] = True
    area = DataArea(np.full((16, 16), 50.0), lost)
    w, d = setup(area)
    a, b = fse_init(area, w, d), fse_init(area, w, d)
    ra = muse_step(a, ExtrapolationConfig(tau=0.1, n_bf=7))
    rb = fse_step(b, ExtrapolationConfig())
    assert ra.selected == rb.selected == (0,)
    np.testing.assert_array_equal(a.model.values, b.model.values)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.99))
def test_n_bf_one_reduces_to_fse(seed, tau):
    rng = np.random.default_rng(seed)
    area = random_area(rng, 10, 10)
    w, d = setup(area)
    a, b = fse_init(area, w, d), fse_init(area, w, d)
    for _ in range(25):
        ra = muse_step(a, ExtrapolationConfig(tau=tau, n_bf=1))
        rb = fse_step(b, ExtrapolationConfig())
        assert ra.selected == rb.selected
        assert ra.updates == rb.updates
        assert ra.residual_energy == rb.residual_energy


def test_candidate_set_sound_and_gamma_invariant(rng):
    area = random_area(rng, 12, 12)
    w, d = setup(area)
    r = np.where(area.lost, 0, area.samples)
    p = project_all(r, w, d)
    sets = []
    for g in (0.1, 0.2, 0.7):
        dE = hypothetical_decrements(p, d, g)
        s = select_candidates(dE, 0.5, 5)
        assert int(np.argmax(dE)) in s.indices
        assert all(x > 0.5 * dE.max() for x in s.decrements)
        assert 1 <= len(s) <= 5
        sets.append(s.indices)
    assert sets[0] == sets[1] == sets[2]


def test_energy_strictly_decreases_and_model_consistent(rng):
    area = random_area(rng, 16, 16, loss=(5, 5, 6, 6))
    w, d = setup(area)
    model, trace = muse_run(area, w, d, ExtrapolationConfig(iterations=60, tau=0.5, n_bf=5))
    energies = np.r_[trace.initial_energy, trace.energies]
    assert np.all(np.diff(energies) < 0)
    assert max(len(r.selected) for r in trace) > 1
    np.testing.assert_allclose(model.synthesize(d), model.values, atol=1e-9)
    for k, c in model.coefficients.items():
        assert model.coefficients[int(d.pair_of[k])] == pytest.approx(np.conj(c))


def test_muse_step_removes_at_least_fse_decrement():
    skimage_data = pytest.importorskip("skimage.data")
    image = skimage_data.camera().astype(float)
    config = ExtrapolationConfig()
    compared = 0
    for r0, c0 in [(24, 24), (88, 216), (280, 344), (408, 152)]:
        win = image[r0 - 16:r0 + 32, c0 - 16:c0 + 32]
        lost = np.zeros((48, 48), bool)
        lost[16:32, 16:32] = True
        area = DataArea(win, lost)
        w, d = setup(area)
        state = fse_init(area, w, d)
        for _ in range(40):
            before = state.energy
            other = copy.deepcopy(state)
            muse_step(other, config)
            fse_step(state, config)
            assert before - other.energy >= (before - state.energy) * (1 - 1e-12)
            compared += 1
    assert compared == 160
