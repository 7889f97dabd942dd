import cmath
import math

import numpy as np
import pytest

from muse_fse.basis import project_all
from muse_fse.fse import fse_init, fse_run, fse_select, fse_step, pair_objective
from muse_fse.grid import DataArea, ExtrapolationConfig, WeightMatrix
from muse_fse.basis import build_dictionary

from conftest import random_area, setup


def straight_line_fse(samples, lost, gamma, rho_hat, iterations):
    """Loop-only FSE: returns (selected lower pair index, residual energy) per step."""
    M, N = len(samples), len(samples[0])
    cm, cn = (M - 1) / 2, (N - 1) / 2
    w = [[0.0 if lost[m][n] else rho_hat ** math.hypot(m - cm, n - cn) for n in range(N)]
         for m in range(M)]
    r = [[0.0 if lost[m][n] else float(samples[m][n]) for n in range(N)] for m in range(M)]
    W = sum(map(sum, w))

    def phi(kr, kc, m, n):
        return cmath.exp(2j * math.pi * (kr * m / M + kc * n / N))

    out = []
    for _ in range(iterations):
        best, best_val, best_p = None, -1.0, 0
        for kr in range(M):
            for kc in range(N):
                p = sum(r[m][n] * phi(kr, kc, m, n).conjugate() * w[m][n]
                        for m in range(M) for n in range(N)) / W
                self_paired = (2 * kr) % M == 0 and (2 * kc) % N == 0
                val = abs(p) ** 2 * W * (1 if self_paired else 2)
                if val > best_val * (1 + 1e-12):
                    best, best_val, best_p, best_self = (kr, kc), val, p, self_paired
        kr, kc = best
        c = gamma * best_p
        for m in range(M):
            for n in range(N):
                if lost[m][n]:
                    continue
                term = c * phi(kr, kc, m, n)
                r[m][n] -= term.real if best_self else 2 * term.real
        energy = sum(r[m][n] ** 2 * w[m][n] for m in range(M) for n in range(N))
        out.append((kr * N + kc, energy))
    return out


def test_init_is_empty_model_and_masked_residual():
    lost = np.zeros((3, 3), bool)
    lost[1, 1] = True
    area = DataArea(np.full((3, 3), 5.0), lost)
    state = fse_init(area, WeightMatrix(np.where(lost, 0, 1.0)))
    assert np.all(state.model.values == 0) and not state.model.coefficients
    np.testing.assert_array_equal(state.residual, np.where(lost, 0, 5.0))


def test_select_examples(rng):
    area = DataArea(np.zeros((4, 4)), np.zeros((4, 4), bool))
    d = build_dictionary(area, WeightMatrix(np.ones((4, 4))))
    p = np.zeros(16, complex)
    p[7] = 1 + 1j
    assert fse_select(p, d) == 7
    p = np.zeros(16, complex)
    p[3], p[5] = 2, 2j
    assert fse_select(p, d) == 3
    for _ in range(20):
        p = rng.normal(size=16) + 1j * rng.normal(size=16)
        objective = [abs(p[k]) ** 2 * d.weighted_norms[k] * (1 if d.pair_of[k] == k else 2)
                     for k in range(16)]
        assert fse_select(p, d) == max(range(16), key=lambda k: (objective[k], -k))


def test_dc_contraction_on_constant():
    area = DataArea(np.full((4, 4), 10.0), np.zeros((4, 4), bool))
    w, d = setup(area)
    state = fse_init(area, w, d)
    rec = fse_step(state, ExtrapolationConfig(gamma=0.2))
    assert rec.selected == (0,)
    np.testing.assert_allclose(state.model.values, 2.0, rtol=1e-14)
    np.testing.assert_allclose(state.residual, 8.0, rtol=1e-14)


def test_zero_residual_is_noop():
    area = DataArea(np.zeros((4, 4)), np.zeros((4, 4), bool))
    w, d = setup(area)
    state = fse_init(area, w, d)
    rec = fse_step(state, ExtrapolationConfig())
    assert rec.selected == () and rec.residual_energy == 0
    assert np.all(state.model.values == 0)


def test_matches_straight_line_reimplementation(rng):
    area = random_area(rng, 8, 8, loss=(3, 4, 2, 2))
    w, d = setup(area)
    _, trace = fse_run(area, w, d, ExtrapolationConfig(iterations=10))
    expected = straight_line_fse(area.samples.tolist(), area.lost.tolist(), 0.2, 0.8, 10)
    assert [r.selected[0] for r in trace] == [k for k, _ in expected]
    np.testing.assert_allclose(trace.energies, [e for _, e in expected], rtol=1e-10)


def test_run_loop_contract(rng):
    area = random_area(rng, 6, 6)
    w, d = setup(area)
    with pytest.raises(ValueError):
        fse_run(area, w, d, ExtrapolationConfig(iterations=0))
    _, trace = fse_run(area, w, d, ExtrapolationConfig(iterations=1))
    assert len(trace) == 1 and trace.records[0].iteration == 1


def test_constant_image_geometric_decay():
    lost = np.zeros((48, 48), bool)
    lost[16:32, 16:32] = True
    area = DataArea(np.full((48, 48), 137.0), lost)
    w, d = setup(area)
    _, trace = fse_run(area, w, d, ExtrapolationConfig(iterations=30))
    nu = np.arange(1, 31)
    np.testing.assert_allclose(trace.energies, trace.initial_energy * 0.8 ** (2 * nu),
                               rtol=1e-9)


def test_exact_energy_decrement(rng):
    """Decrement of a pair update is 2g(2-g)|p|^2 W - 2g^2 Re(p^2 sum(w phi^2))."""
    area = random_area(rng, 10, 10, loss=(3, 3, 4, 4))
    w, d = setup(area)
    state = fse_init(area, w, d)
    config = ExtrapolationConfig(gamma=0.2)
    g = config.gamma
    saw_self = saw_pair = False
    for _ in range(40):
        p = project_all(state.residual, w, d)
        u = fse_select(p, d)
        before = state.energy
        fse_step(state, config)
        drop = before - state.energy
        W = d.weighted_norms[u]
        if d.pair_of[u] == u:
            saw_self = True
            expected = g * (2 - g) * abs(p[u]) ** 2 * W
        else:
            saw_pair = True
            S = np.sum(w.values * d.function(u) ** 2)
            expected = 2 * g * (2 - g) * abs(p[u]) ** 2 * W - 2 * g**2 * (p[u] ** 2 * S).real
        assert drop == pytest.approx(expected, rel=1e-9)
        assert drop >= 0
    assert saw_self and saw_pair


def test_invariants_over_run(rng):
    area = random_area(rng, 12, 10)
    w, d = setup(area)
    model, trace = fse_run(area, w, d, ExtrapolationConfig(iterations=80))
    assert np.all(np.diff(np.r_[trace.initial_energy, trace.energies]) <= 1e-12)
    np.testing.assert_allclose(model.synthesize(d), model.values, atol=1e-9)
    for k, c in model.coefficients.items():
        assert model.coefficients[int(d.pair_of[k])] == pytest.approx(np.conj(c))
    selected = [r.selected[0] for r in trace]
    assert len(set(selected)) < len(selected)  # reselection happens


def test_residual_stays_zero_on_loss(rng):
    area = random_area(rng, 8, 8)
    w, d = setup(area)
    state = fse_init(area, w, d)
    for _ in range(15):
        fse_step(state, ExtrapolationConfig())
        assert np.all(state.residual[area.lost] == 0)
        assert np.isrealobj(state.model.values)


def test_pair_objective_doubles_pairs():
    area = DataArea(np.zeros((4, 4)), np.zeros((4, 4), bool))
    d = build_dictionary(area, WeightMatrix(np.ones((4, 4))))
    obj = pair_objective(np.ones(16, complex), d)
    assert obj[0] == 16 and obj[1] == 32
