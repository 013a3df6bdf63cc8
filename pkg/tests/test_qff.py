import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import chebyshev as npcheb
from scipy.special import comb

from qffsample import _fallback, kernels
from qffsample.chain import interpolate, transition
from qffsample.errors import ValidationError
from qffsample.qff import (
    apply_coeff_prep,
    apply_wctrl,
    apply_wtau,
    chebyshev_T,
    chebyshev_weights,
    counter_zero_block,
    dt_apply,
    make_plan,
    qff_residual,
    wtau_adjoint_from_zero,
)
from qffsample.chain import discriminant
from qffsample.walkspace import (
    RegisterLayout,
    StateVector,
    apply_walk,
    coin_vectors,
    dense_unitary,
    init_state,
    interpolation_eigenvector,
)

from conftest import CORPUS, k4, lazy_chains, star3, tri, unit


def test_weights_small_t():
    assert np.allclose(chebyshev_weights(0), [1.0])
    assert np.allclose(chebyshev_weights(1), [0, 1])
    assert np.allclose(chebyshev_weights(2), [0.5, 0, 0.5])
    assert np.allclose(chebyshev_weights(3), [0, 0.75, 0, 0.25])
    with pytest.raises(ValidationError):
        chebyshev_weights(-1)


@pytest.mark.parametrize("t", [1, 2, 5, 12, 25, 40])
def test_weights_match_numpy_power_basis_conversion(t):
    mono = np.zeros(t + 1)
    mono[t] = 1
    assert np.allclose(chebyshev_weights(t), npcheb.poly2cheb(mono), atol=1e-12)


@pytest.mark.parametrize("t", [7, 100, 1001, 10**6])
def test_weights_exact_binomials(t):
    p = chebyshev_weights(t)
    assert math.fsum(p) == pytest.approx(1.0, abs=1e-12)
    assert not p[(np.arange(t + 1) - t) % 2 == 1].any()
    if t <= 1001:
        k = np.arange(t // 2 + 1)
        ref = comb(t, k, exact=False) / 2.0**t * np.where(t - 2 * k > 0, 2, 1)
        assert np.allclose(p[t - 2 * k], ref, rtol=1e-10, atol=1e-300)


def test_chebyshev_T_against_cosine():
    theta = np.linspace(0, math.pi, 17)
    for l in range(10):
        assert np.allclose(chebyshev_T(l, np.cos(theta)), np.cos(l * theta), atol=1e-13)


@pytest.mark.parametrize(
    "t, eps1, gamma, tau",
    [(1, 0.3, 1, 1), (1, 0.01, 1, 1), (2, 0.5, 2, 2), (100, 0.1, 30, 5), (1000, 0.01, 134, 8)],
)
def test_plan_shapes(t, eps1, gamma, tau):
    plan = make_plan(t, eps1)
    assert (plan.gamma, plan.tau) == (gamma, tau)
    assert plan.walk_calls == 2**tau - 1


@given(st.integers(1, 3000), st.sampled_from([0.3, 0.1, 0.03, 0.01, 1e-4]))
def test_plan_invariants(t, eps1):
    plan = make_plan(t, eps1)
    p = chebyshev_weights(t)
    p = p / p.sum()
    assert p[plan.gamma + 1:].sum() <= eps1**2 / 4 + 1e-15
    assert plan.gamma == 0 or p[plan.gamma:].sum() > eps1**2 / 4
    assert plan.tau == max(0, math.ceil(math.log2(plan.gamma + 1)))
    assert 1 - plan.renorm <= eps1**2 / 4 + 1e-15
    assert 0 < plan.renorm <= 1
    assert plan.weights.size == 2**plan.tau
    # Hoeffding cross-check on the truncation order
    assert plan.gamma <= math.ceil(math.sqrt(2 * t * math.log(4 / eps1**2))) + 1


@pytest.mark.parametrize("t, eps1", [(0, 0.1), (5, 0.0), (5, 1.0)])
def test_plan_rejects(t, eps1):
    with pytest.raises(ValidationError):
        make_plan(t, eps1)


def test_coeff_prep_examples():
    lay = RegisterLayout(2, 1)
    out = apply_coeff_prep(init_state(0, lay), make_plan(1, 0.3))
    assert abs(out.amps[0, 0, 1]) == pytest.approx(1.0)
    lay = RegisterLayout(2, 2)
    out = apply_coeff_prep(init_state(0, lay), make_plan(2, 0.5))
    assert np.allclose(out.amps[0, 0], [math.sqrt(0.5), 0, math.sqrt(0.5), 0], atol=1e-15)


def test_coeff_prep_involution_and_layout_check():
    plan = make_plan(9, 0.1)
    rng = np.random.default_rng(0)
    lay = RegisterLayout(3, plan.tau + 1, ("r4",))
    a = rng.normal(size=lay.shape) + 0j
    psi = StateVector(lay, a / np.linalg.norm(a))
    back = apply_coeff_prep(apply_coeff_prep(psi, plan), plan, adjoint=True)
    assert np.abs(back.amps - psi.amps).max() < 1e-12
    with pytest.raises(ValidationError):
        apply_coeff_prep(init_state(0, RegisterLayout(3, plan.tau - 1)), plan)


def dense_walk(ic, n):
    return dense_unitary(lambda p: apply_walk(p, ic), RegisterLayout(n))


def test_wctrl_and_wtau_dense_n3():
    c = tri()
    ic = interpolate(c, [0], 0.3)
    plan = make_plan(3, 0.3)
    assert plan.tau == 2
    lay = RegisterLayout(3, plan.tau)
    W = dense_walk(ic, 3)
    T = lay.counter_dim
    ctrl = np.zeros((lay.dim, lay.dim), complex)
    for l in range(T):
        proj = np.zeros((T, T))
        proj[l, l] = 1
        ctrl += np.kron(np.linalg.matrix_power(W, l), proj)
    assert np.abs(dense_unitary(lambda p: apply_wctrl(p, ic, plan), lay) - ctrl).max() < 1e-12
    amps = plan.amplitudes
    h = np.eye(T)[0] - amps
    Vq = np.eye(T) - 2 * np.outer(h, h) / (h @ h)
    assert np.allclose(Vq[:, 0], amps)
    Vq_full = np.kron(np.eye(9), Vq)
    wtau = Vq_full @ ctrl @ Vq_full
    got = dense_unitary(lambda p: apply_wtau(p, ic, plan), lay)
    assert np.abs(got - wtau).max() < 1e-12
    got_adj = dense_unitary(lambda p: apply_wtau(p, ic, plan, adjoint=True), lay)
    assert np.abs(got_adj - wtau.conj().T).max() < 1e-12


@pytest.mark.parametrize("name, c", CORPUS[:5])
def test_projected_blocks_match_literal(name, c):
    plan = make_plan(23, 0.1)
    ic = interpolate(c, [0], 0.4)
    lay = RegisterLayout(c.n, plan.tau + 1)
    rng = np.random.default_rng(3)
    a = rng.normal(size=lay.shape) + 1j * rng.normal(size=lay.shape)
    psi = StateVector(lay, a)
    u = coin_vectors(ic)
    lit = apply_wtau(psi, ic, plan).amps[:, :, 0]
    z = psi.amps.reshape(c.n, c.n, lay.counter_dim, 1)
    assert np.abs(counter_zero_block(z, u, plan)[..., 0] - lit).max() < 1e-12
    phi = np.zeros(lay.shape, complex)
    phi[:, :, 0] = a[:, :, 0]
    lit_adj = apply_wtau(StateVector(lay, phi), ic, plan, adjoint=True).amps
    proj = wtau_adjoint_from_zero(a[:, :, 0].reshape(c.n, c.n, 1), u, plan, lay.counter_dim)[..., 0]
    assert np.abs(proj - lit_adj).max() < 1e-12


def test_wctrl_fixed_point():
    c = star3(lazy=True)
    ic = interpolate(c, [1], 0.5)
    v0, _, _ = interpolation_eigenvector(c, 1, 0.5)
    plan = make_plan(40, 0.1)
    lay = RegisterLayout(4, plan.tau)
    amps = np.zeros(lay.shape, complex)
    amps[:, 0, :] = v0[:, None] / math.sqrt(lay.counter_dim)
    psi = StateVector(lay, amps)
    out = apply_wctrl(psi, ic, plan)
    assert np.abs(out.amps - amps).max() < 1e-9


def test_wctrl_leaves_branch_zero():
    rng = np.random.default_rng(5)
    plan = make_plan(12, 0.1)
    lay = RegisterLayout(3, plan.tau)
    psi = StateVector(lay, rng.normal(size=lay.shape) + 0j)
    out = apply_wctrl(psi, interpolate(tri(), [0], 0.2), plan)
    assert np.array_equal(out.amps[:, :, 0], psi.amps[:, :, 0])


def test_walk_step_counts(monkeypatch):
    calls = {"n": 0}
    real = _fallback._step

    def counting(z, u, adjoint):
        calls["n"] += 1
        return real(z, u, adjoint)

    monkeypatch.setattr(_fallback, "_step", counting)
    for name in ("walk_apply", "wctrl_apply", "walk_horner", "walk_powers"):
        monkeypatch.setattr(kernels, name, getattr(_fallback, name))
    c = k4()
    plan = make_plan(60, 0.1)
    lay = RegisterLayout(4, plan.tau)
    psi = init_state(0, lay)
    apply_wctrl(psi, c, plan)
    assert calls["n"] == plan.walk_calls
    calls["n"] = 0
    z = psi.amps.reshape(4, 4, lay.counter_dim, 1)
    u = coin_vectors(c)
    phi = counter_zero_block(z, u, plan)
    assert calls["n"] == plan.walk_calls
    calls["n"] = 0
    wtau_adjoint_from_zero(phi, u, plan, lay.counter_dim)
    assert calls["n"] == plan.walk_calls


def test_residual_examples():
    c = tri()
    for plan in (make_plan(4, 0.1), make_plan(33, 0.3), make_plan(200, 0.01)):
        assert qff_residual(c, plan, np.sqrt(c.pi)) <= 1e-9
    assert qff_residual(c, make_plan(4, 0.1), np.array([1.0, 0, 0])) <= 0.1
    with pytest.raises(ValidationError):
        qff_residual(c, make_plan(4, 0.1), np.array([1.0, 1.0, 0]))


@given(lazy_chains(max_n=9), st.integers(1, 64), st.sampled_from([0.3, 0.1, 0.03]), st.integers(0, 2**31))
def test_residual_within_budget(c, t, eps1, seed):
    plan = make_plan(t, eps1)
    psi = unit(np.random.default_rng(seed), c.n)
    r = qff_residual(c, plan, psi)
    assert r <= eps1
    assert abs(r - qff_residual(c, plan, psi, route="literal")) < 1e-10


def test_dt_apply_matches_matrix_power():
    c = CORPUS[4][1]
    psi = unit(np.random.default_rng(4), c.n)
    ref = np.linalg.matrix_power(discriminant(c), 9) @ psi
    assert np.allclose(dt_apply(c, 9, psi), ref, atol=1e-13)


def test_counter_zero_block_skips_empty_input():
    plan = make_plan(10, 0.1)
    z = np.zeros((3, 3, 2**plan.tau, 2), complex)
    assert not counter_zero_block(z, coin_vectors(transition(tri())), plan).any()
