import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qffsample.errors import ValidationError
from qffsample.reflect import (
    ancilla_mass,
    apply_reflection,
    check_is_pi,
    flags_back,
    flags_front,
    hadamard,
    horizon,
    reflection_errors,
    reflection_norms,
    reflection_params,
)
from qffsample.spectral import chain_spectrum
from qffsample.walkspace import RegisterLayout, StateVector, dense_unitary, init_state, product_state

from conftest import CORPUS, k4, lazy_chains, star3, tri


def test_horizon():
    assert horizon(0.5, 0.1) == math.ceil(4 * math.log(40))
    with pytest.raises(ValidationError):
        horizon(0.0, 0.1)


def test_params_consistent():
    p = reflection_params(k4(), 0.1)
    assert p.t == horizon(p.delta, 0.1)
    assert p.plan.t == p.t and p.plan.eps1 == pytest.approx(0.025)
    assert p.walk_calls == 2 * (2**p.plan.tau - 1)
    with pytest.raises(ValidationError):
        reflection_params(k4(), 1.5)


@pytest.mark.parametrize("name, c", CORPUS)
@pytest.mark.parametrize("eps2", [0.3, 0.1, 0.01])
def test_suppression_arithmetic(name, c, eps2):
    p = reflection_params(c, eps2)
    assert (1 - p.delta) ** p.t <= eps2 / 4


@pytest.mark.parametrize("name, c", [("triangle", tri()), ("K4", k4()), ("star", star3(lazy=True))])
def test_routes_agree_dense(name, c):
    p = reflection_params(c, 0.3)
    lay = RegisterLayout(c.n, p.plan.tau, ("r4",))
    lit = dense_unitary(lambda s: apply_reflection(s, c, p, "literal"), lay)
    proj = dense_unitary(lambda s: apply_reflection(s, c, p, "projected"), lay)
    assert np.abs(lit - proj).max() < 1e-12
    assert np.abs(lit.conj().T @ lit - np.eye(lay.dim)).max() < 1e-10


@given(lazy_chains(max_n=7), st.integers(0, 2**31))
def test_unitary_on_random_states(c, seed):
    p = reflection_params(c, 0.2)
    lay = RegisterLayout(c.n, p.plan.tau + 1, ("r4", "r5"))
    rng = np.random.default_rng(seed)
    a = rng.normal(size=lay.shape) + 1j * rng.normal(size=lay.shape)
    psi = StateVector(lay, a / np.linalg.norm(a))
    out = apply_reflection(psi, c, p)
    assert out.norm() == pytest.approx(1.0, abs=1e-10)
    assert np.abs(out.amps - apply_reflection(psi, c, p, "literal").amps).max() < 1e-11


@pytest.mark.parametrize("name, c", CORPUS)
def test_ancilla_restoration(name, c):
    p = reflection_params(c, 0.1)
    spec = chain_spectrum(c)
    lay = RegisterLayout(c.n, p.plan.tau, ("r4",))
    out0 = apply_reflection(product_state(spec.eigenvectors[:, 0], lay), c, p)
    assert ancilla_mass(out0) < 1e-14
    for j in range(1, c.n):
        out = apply_reflection(product_state(spec.eigenvectors[:, j], lay), c, p)
        assert ancilla_mass(out) <= p.eps2


@pytest.mark.parametrize("c", [tri(), k4(), star3(lazy=True)])
def test_no_phase_when_coin_not_zero(c):
    # with R2 off the fixed coin state the stationary component is left alone
    p = reflection_params(c, 0.1)
    lay = RegisterLayout(c.n, p.plan.tau, ("r4",))
    for y in range(1, c.n):
        amps = np.zeros(lay.shape, complex)
        amps[:, y, 0, 0] = np.sqrt(c.pi)
        psi = StateVector(lay, amps)
        out = apply_reflection(psi, c, p, "literal")
        assert np.abs(out.amps - amps).max() < 1e-12


def test_layout_requirements():
    p = reflection_params(k4(), 0.1)
    with pytest.raises(ValidationError):
        apply_reflection(init_state(0, RegisterLayout(4, p.plan.tau)), k4(), p)
    with pytest.raises(ValidationError):
        apply_reflection(init_state(0, RegisterLayout(4, p.plan.tau - 1, ("r4",))), k4(), p)


def test_reflection_norm_rows():
    rows = reflection_norms(k4(), reflection_params(k4(), 0.1))
    assert [r["j"] for r in rows] == [0, 1, 2, 3]
    assert rows[0]["lambda"] == pytest.approx(1.0)
    assert reflection_errors(k4(), reflection_params(k4(), 0.1))[1] == max(r["norm"] for r in rows[1:])


def test_flag_moves_round_trip():
    rng = np.random.default_rng(0)
    lay = RegisterLayout(3, 1, ("r4", "chk", "r5"))
    psi = StateVector(lay, rng.normal(size=lay.shape) + 0j)
    for names in (("r4",), ("r5", "r4"), ("chk", "r5", "r4")):
        z = flags_front(psi, names)
        assert z.shape[:3 + len(names)] == (3, 3, 2) + (2,) * len(names)
        assert np.array_equal(flags_back(z, psi, names).amps, psi.amps)
    z = flags_front(psi, ("r5",))
    z[:] = 0
    assert psi.amps.any()


def test_hadamard_involution():
    psi = init_state(1, RegisterLayout(2, 0, ("chk",)))
    h = hadamard(psi, "chk")
    assert np.allclose(h.amps[1, 0, 0], [1 / math.sqrt(2)] * 2)
    assert np.allclose(hadamard(h, "chk").amps, psi.amps)


# --- Hadamard check ---------------------------------------------------------------


def _product(c, vec, p):
    return product_state(vec, RegisterLayout(c.n, p.plan.tau, ("r4",)))


CHECK_CASES = [(n, c, "projected") for n, c in CORPUS] + [(n, c, "literal") for n, c in CORPUS if c.n <= 9]


@pytest.mark.parametrize("name, c, route", CHECK_CASES)
def test_check_examples(name, c, route):
    p = reflection_params(c, 0.01)
    spec = chain_spectrum(c)
    sq = np.sqrt(c.pi)
    r = check_is_pi(_product(c, sq, p), c, p, route=route)
    assert r.verdict and r.prob >= 0.99
    r = check_is_pi(_product(c, spec.eigenvectors[:, 1], p), c, p, route=route)
    assert not r.verdict and r.prob <= 0.01
    mix = (sq + spec.eigenvectors[:, 1]) / math.sqrt(2)
    r = check_is_pi(_product(c, mix, p), c, p, route=route)
    assert 0.48 <= r.prob <= 0.52


@given(lazy_chains(max_n=7), st.integers(0, 2**31))
def test_check_prob_tracks_overlap(c, seed):
    p = reflection_params(c, 0.05)
    v = np.random.default_rng(seed).normal(size=c.n)
    v /= np.linalg.norm(v)
    r = check_is_pi(_product(c, v, p), c, p)
    assert abs(r.prob - float(np.sqrt(c.pi) @ v) ** 2) <= 2 * p.eps2
    assert r.state.norm() == pytest.approx(1.0)


def test_check_post_state_is_stationary():
    c = k4()
    p = reflection_params(c, 0.01)
    v = np.array([1.0, 0, 0, 0])
    r = check_is_pi(_product(c, v, p), c, p, mode="sampled", rng=1)
    lay_state = r.state.amps[:, 0, 0, 0]
    fid = abs(np.vdot(np.sqrt(c.pi), lay_state)) ** 2
    assert (fid > 0.99) == r.verdict


def test_check_sampled_deterministic():
    c = tri()
    p = reflection_params(c, 0.1)
    psi = _product(c, np.array([1.0, 0, 0]), p)
    a = [check_is_pi(psi, c, p, mode="sampled", rng=s).verdict for s in range(20)]
    b = [check_is_pi(psi, c, p, mode="sampled", rng=s).verdict for s in range(20)]
    assert a == b and any(a) and not all(a)


def test_check_rejects_dirty_ancillas():
    c = tri()
    p = reflection_params(c, 0.1)
    lay = RegisterLayout(3, p.plan.tau, ("r4",))
    amps = np.zeros(lay.shape, complex)
    amps[0, 0, 0, 1] = 1
    with pytest.raises(ValidationError, match="ancillas"):
        check_is_pi(StateVector(lay, amps), c, p)
    with pytest.raises(ValidationError):
        check_is_pi(_product(c, np.sqrt(c.pi), p), c, p, mode="bogus")
