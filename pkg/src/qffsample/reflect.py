"""Approximate reflection about the stationary state and the Hadamard test built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .qff import QffPlan, apply_wtau, counter_zero_block, make_plan, wtau_adjoint_from_zero
from .spectral import chain_spectrum
from .walkspace import (
    Projector,
    RegisterLayout,
    StateVector,
    apply_ctrl_flip,
    coin_vectors,
    outcome_prob,
    product_state,
)


@dataclass(frozen=True)
class ReflectionParams:
    eps2: float
    t: int
    plan: QffPlan
    delta: float

    @property
    def walk_calls(self) -> int:
        return 2 * self.plan.walk_calls


def horizon(delta: float, eps: float) -> int:
    """``ceil((2 / delta) ln(4 / eps))``."""
    if not delta > 0:
        raise ValidationError("spectral gap must be positive")
    return max(1, math.ceil((2.0 / delta) * math.log(4.0 / eps)))


def reflection_params(c, eps2: float, delta: float | None = None) -> ReflectionParams:
    """Horizon and fast-forwarding plan for reflection error ``eps2``.

    ``delta`` defaults to the absolute gap ``1 - max_{j>=1} |lambda_j|`` of the
    discriminant, so that negative eigenvalues are suppressed as well.
    """
    if not (0.0 < eps2 < 1.0):
        raise ValidationError("eps2 must lie in (0, 1)")
    if delta is None:
        delta = chain_spectrum(c).abs_gap
    t = horizon(delta, eps2)
    return ReflectionParams(float(eps2), t, make_plan(t, eps2 / 4.0), float(delta))


# ---------------------------------------------------------------------------
# layout helpers


def flags_front(psi: StateVector, names) -> np.ndarray:
    """Copy of the amplitudes as (n, n, T, 2, ..., 2, B) with flags ``names`` right after the counter."""
    lay = psi.layout
    axes = [lay.axis(nm) for nm in names]
    dest = list(range(3, 3 + len(axes)))
    z = np.array(np.moveaxis(psi.amps, axes, dest), order="C")
    return z.reshape((lay.n, lay.n, lay.counter_dim) + (2,) * len(axes) + (-1,))


def flags_back(z: np.ndarray, psi: StateVector, names) -> StateVector:
    lay = psi.layout
    axes = [lay.axis(nm) for nm in names]
    rest = [a for a in range(3, len(lay.shape)) if a not in axes]
    moved = list(lay.shape[:3]) + [2] * len(axes) + [lay.shape[a] for a in rest]
    dest = list(range(3, 3 + len(axes)))
    amps = np.moveaxis(z.reshape(moved), dest, axes)
    return psi.replace(np.ascontiguousarray(amps))


def flag_front(psi: StateVector, name: str) -> np.ndarray:
    """Copy of the amplitudes reshaped to (n, n, T, 2, B) with flag ``name`` on axis 3."""
    return flags_front(psi, (name,))


def flag_back(z: np.ndarray, psi: StateVector, name: str) -> StateVector:
    return flags_back(z, psi, (name,))


def hadamard(psi: StateVector, name: str) -> StateVector:
    z = flag_front(psi, name)
    h = np.stack([z[:, :, :, 0] + z[:, :, :, 1], z[:, :, :, 0] - z[:, :, :, 1]], axis=3) / math.sqrt(2.0)
    return flag_back(h, psi, name)


def toggle_on_coin_zero(z: np.ndarray) -> None:
    """``ccX`` from the coin register onto axis 3, in place on (n, n, T, 2, B)."""
    z[:, 0, :, [0, 1]] = z[:, 0, :, [1, 0]]


def _prepare(psi: StateVector, plan: QffPlan) -> StateVector:
    if "r4" not in psi.layout.flags:
        raise ValidationError("reflection needs the r4 flag register")
    if psi.layout.tau < plan.tau:
        raise ValidationError(f"counter register needs at least {plan.tau} qubits")
    return psi


# ---------------------------------------------------------------------------
# reflection


def apply_reflection(psi: StateVector, c, params: ReflectionParams, route: str = "projected") -> StateVector:
    """``ccX_{2,4} W_tau^dag ccZ_{23,4} W_tau ccX_{2,4}`` on the layout of ``psi``.

    The projected route uses the identity
    ``R = A (I - 2 W_tau^dag (Pi_{00} (x) |1><1|_4) W_tau) A`` with ``A = ccX_{2,4}``.
    """
    _prepare(psi, params.plan)
    plan = params.plan
    if route == "literal":
        out = apply_ctrl_flip(psi, ("r2",), "r4", "X")
        out = apply_wtau(out, c, plan)
        out = apply_ctrl_flip(out, ("r2", "r3"), "r4", "Z")
        out = apply_wtau(out, c, plan, adjoint=True)
        return apply_ctrl_flip(out, ("r2",), "r4", "X")
    if route != "projected":
        raise ValidationError(f"unknown route {route!r}")
    u = coin_vectors(c)
    z = flag_front(psi, "r4")
    toggle_on_coin_zero(z)
    one = z[:, :, :, 1, :]
    phi = counter_zero_block(one, u, plan)
    phi[:, 1:] = 0.0
    one -= 2.0 * wtau_adjoint_from_zero(phi, u, plan, psi.layout.counter_dim)
    toggle_on_coin_zero(z)
    return flag_back(z, psi, "r4")


# ---------------------------------------------------------------------------
# Hadamard check


@dataclass(frozen=True)
class CheckResult:
    verdict: bool
    state: StateVector
    prob: float


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def ancilla_mass(psi: StateVector) -> float:
    """Probability outside ``r3 = 0`` and ``r4 = 0``."""
    keep = {"r3": 0}
    if "r4" in psi.layout.flags:
        keep["r4"] = 0
    return 1.0 - outcome_prob(psi, Projector(keep)) / max(psi.norm() ** 2, 1e-300)


def check_branches(psi: StateVector, c, params: ReflectionParams, route: str = "projected"):
    """Unnormalised post-measurement states ``(is_pi, other)`` of the check qubit.

    The is-pi branch carries ``(R - I) psi / 2``; with ``R ~ I - 2 |pi><pi|`` its
    weight is ``|<pi|psi>|**2``.
    """
    if route == "literal":
        st = hadamard(psi.add_flag("chk"), "chk")
        ax = st.layout.axis("chk")
        zero = apply_reflection(st.drop_flag("chk", 0), c, params, route="literal")
        amps = np.array(st.amps)
        idx = [slice(None)] * amps.ndim
        idx[ax] = 0
        amps[tuple(idx)] = zero.amps
        st = hadamard(st.replace(amps), "chk")
        return st.drop_flag("chk", 1), st.drop_flag("chk", 0)
    r = apply_reflection(psi, c, params, route=route)
    return psi.replace((r.amps - psi.amps) / 2.0), psi.replace((r.amps + psi.amps) / 2.0)


def check_is_pi(psi: StateVector, c, params: ReflectionParams, mode: str = "exact", rng=None,
                tol: float | None = None, route: str = "projected") -> CheckResult:
    """Hadamard test with the reflection controlled on the check qubit being 0.

    ``mode="exact"`` reports the more likely outcome; ``mode="sampled"`` draws it
    from ``rng``.  The returned state is the renormalised post-measurement state
    with the check qubit removed.
    """
    psi = _prepare(psi, params.plan)
    tol = 2.0 * params.eps2 if tol is None else tol
    leak = ancilla_mass(psi)
    if leak > tol:
        raise ValidationError(f"reflection ancillas not in their zero state (mass {leak:.3e})")
    hit, miss = check_branches(psi, c, params, route)
    p_hit = min(1.0, max(0.0, hit.norm() ** 2))
    if mode == "exact":
        verdict = p_hit >= 0.5
    elif mode == "sampled":
        verdict = bool(_rng(rng).random() < p_hit)
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    branch = hit if verdict else miss
    nrm = branch.norm()
    post = branch.replace(branch.amps / nrm) if nrm > 0 else branch
    return CheckResult(verdict, post, p_hit)


def reflection_norms(c, params: ReflectionParams, route: str = "projected") -> list[dict]:
    """Per discriminant eigenvector ``j``: ``||(R + I) psi_0||`` for ``j = 0``, else ``||(R - I) psi_j||``."""
    spec = chain_spectrum(c)
    lay = RegisterLayout(spec.n, params.plan.tau, ("r4",))
    rows = []
    for j in range(spec.n):
        psi = product_state(spec.eigenvectors[:, j], lay)
        out = apply_reflection(psi, c, params, route)
        sign = 1.0 if j == 0 else -1.0
        rows.append({"j": j, "lambda": float(spec.eigenvalues[j]),
                     "norm": float(np.linalg.norm(out.amps + sign * psi.amps))})
    return rows


def reflection_errors(c, params: ReflectionParams, route: str = "projected") -> tuple[float, float]:
    """Stationary error and worst orthogonal error from :func:`reflection_norms`."""
    rows = reflection_norms(c, params, route)
    return rows[0]["norm"], max((r["norm"] for r in rows[1:]), default=0.0)
