"""Quantum fast-forwarding: truncated Chebyshev simulation of ``D**t`` by walk powers.

Two evaluation routes are provided.  The literal route applies the counter
preparation ``V_q``, the counter-controlled walk powers and ``V_q`` again as
separate primitives.  The projected route evaluates only the counter-zero
block ``<0|W_tau`` (Horner's rule) and ``W_tau^dag`` on counter-zero inputs
(successive powers), each with exactly ``2**tau - 1`` walk steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from . import kernels
from .chain import discriminant
from .errors import ValidationError
from .walkspace import RegisterLayout, StateVector, coin_vectors, product_state


def chebyshev_weights(t: int) -> np.ndarray:
    """``p_l`` with ``x**t = sum_l p_l T_l(x)``, length ``t + 1``."""
    if t < 0:
        raise ValidationError("t must be non-negative")
    p = np.zeros(t + 1)
    k = np.arange(t // 2 + 1)
    # saddle-point binomial pmf keeps the total within 1e-14 up to t = 1e6
    vals = binom.pmf(k, t, 0.5)
    idx = t - 2 * k
    vals = np.where(idx > 0, 2.0 * vals, vals)
    p[idx] = vals
    return p


@dataclass(frozen=True)
class QffPlan:
    t: int
    eps1: float
    gamma: int
    tau: int
    weights: np.ndarray = field(repr=False)
    renorm: float = 1.0

    @property
    def period(self) -> int:
        return 1 << self.tau

    @property
    def walk_calls(self) -> int:
        """Walk applications per ``W_tau`` (sweep cost of the controlled powers)."""
        return self.period - 1

    @property
    def amplitudes(self) -> np.ndarray:
        """``sqrt(p_l / renorm)`` for ``l < 2**tau``, i.e. the column ``V_q |0>``."""
        a = np.sqrt(self.weights)
        return a / np.linalg.norm(a)


def make_plan(t: int, eps1: float) -> QffPlan:
    """Smallest truncation whose discarded Chebyshev mass is at most ``eps1**2 / 4``."""
    t = int(t)
    if t < 1:
        raise ValidationError("t must be at least 1")
    if not (0.0 < eps1 < 1.0):
        raise ValidationError("eps1 must lie in (0, 1)")
    p = chebyshev_weights(t)
    p = p / p.sum()
    # tail[k] = sum_{l > k} p_l
    tail = np.concatenate([np.cumsum(p[::-1])[::-1][1:], [0.0]])
    gamma = int(np.argmax(tail <= eps1 * eps1 / 4.0))
    tau = max(0, math.ceil(math.log2(gamma + 1)))
    period = 1 << tau
    w = np.zeros(period)
    m = min(period, t + 1)
    w[:m] = p[:m]
    renorm = min(1.0, float(w.sum()))
    w.setflags(write=False)
    return QffPlan(t, float(eps1), gamma, tau, w, renorm)


# ---------------------------------------------------------------------------
# counter preparation


def _householder_to(w: np.ndarray) -> np.ndarray | None:
    d = -np.asarray(w, dtype=np.float64).copy()
    d[0] += 1.0
    nrm = np.linalg.norm(d)
    if nrm < 1e-15:
        return None
    return d / nrm


def _check_layout(layout: RegisterLayout, plan: QffPlan):
    if layout.tau < plan.tau:
        raise ValidationError(f"counter register has {layout.tau} qubits, plan needs {plan.tau}")


def apply_coeff_prep(psi: StateVector, plan: QffPlan, adjoint: bool = False) -> StateVector:
    """Reflection on the low ``plan.tau`` counter qubits sending ``|0>`` to the weight column.

    Being a reflection it is its own inverse, so ``adjoint`` changes nothing.
    """
    lay = psi.layout
    _check_layout(lay, plan)
    h = _householder_to(plan.amplitudes)
    if h is None:
        return psi
    hi = lay.counter_dim // plan.period
    z = np.array(psi.amps).reshape(lay.n, lay.n, hi, plan.period, -1)
    dots = np.einsum("l,abhlk->abhk", h, z)
    z -= 2.0 * h[None, None, None, :, None] * dots[:, :, :, None, :]
    return psi.replace(z.reshape(lay.shape))


def apply_wctrl(psi: StateVector, ic, plan: QffPlan, adjoint: bool = False) -> StateVector:
    """Counter value ``l`` receives ``W**(l mod 2**plan.tau)`` (or its adjoint)."""
    lay = psi.layout
    _check_layout(lay, plan)
    z = np.array(psi.amps, order="C").reshape(lay.n, lay.n, lay.counter_dim, -1)
    kernels.wctrl_apply(z, coin_vectors(ic), plan.period, bool(adjoint))
    return psi.replace(z.reshape(lay.shape))


def apply_wtau(psi: StateVector, ic, plan: QffPlan, adjoint: bool = False) -> StateVector:
    """``V_q W_ctrl V_q`` (literal route)."""
    out = apply_coeff_prep(psi, plan)
    out = apply_wctrl(out, ic, plan, adjoint)
    return apply_coeff_prep(out, plan)


# ---------------------------------------------------------------------------
# projected route


def _nonzero_columns(z: np.ndarray) -> np.ndarray:
    return np.flatnonzero(np.any(z != 0, axis=tuple(range(z.ndim - 1))))


def counter_zero_block(z: np.ndarray, u: np.ndarray, plan: QffPlan) -> np.ndarray:
    """``<0|_counter W_tau`` on ``z`` of shape (n, n, T, B); returns (n, n, B).

    Only the counter columns with zero high bits contribute.
    """
    n, _, _, b = z.shape
    h = _householder_to(plan.amplitudes)
    low = z[:, :, : plan.period, :]
    if h is not None:
        dots = np.einsum("l,ablk->abk", h, low)
        low = low - 2.0 * h[None, None, :, None] * dots[:, :, None, :]
    out = np.zeros((n, n, b), dtype=np.complex128)
    cols = _nonzero_columns(low.reshape(-1, b))
    if cols.size == 0:
        return out
    x = np.ascontiguousarray(np.moveaxis(low[..., cols], 2, 0))
    out[..., cols] = kernels.walk_horner(x, u, np.asarray(plan.amplitudes), False)
    return out


def wtau_adjoint_from_zero(phi: np.ndarray, u: np.ndarray, plan: QffPlan, counter_dim: int) -> np.ndarray:
    """``W_tau^dag (phi (x) |0>_counter)`` for ``phi`` of shape (n, n, B); returns (n, n, counter_dim, B)."""
    n, _, b = phi.shape
    out = np.zeros((n, n, counter_dim, b), dtype=np.complex128)
    cols = _nonzero_columns(phi.reshape(-1, b))
    if cols.size == 0:
        return out
    pw = kernels.walk_powers(np.ascontiguousarray(phi[..., cols]), u, np.asarray(plan.amplitudes), True)
    low = np.moveaxis(pw, 0, 2)
    h = _householder_to(plan.amplitudes)
    if h is not None:
        dots = np.einsum("l,ablk->abk", h, low)
        low = low - 2.0 * h[None, None, :, None] * dots[:, :, None, :]
    out[:, :, : plan.period][..., cols] = low
    return out


# ---------------------------------------------------------------------------
# contract check


def dt_apply(c, t: int, psi) -> np.ndarray:
    """``D**t psi`` by repeated multiplication."""
    D = discriminant(c)
    out = np.asarray(psi, dtype=np.complex128)
    for _ in range(int(t)):
        out = D @ out
    return out


def qff_residual(c, plan: QffPlan, psi_in, route: str = "projected") -> float:
    """``|| Pi_{0,0} W_tau |psi,0,0> - (D**t psi)|0,0> ||``."""
    psi_in = np.asarray(psi_in, dtype=np.complex128)
    n = psi_in.size
    if abs(np.linalg.norm(psi_in) - 1.0) > 1e-9:
        raise ValidationError("input vector must have unit norm")
    target = dt_apply(c, plan.t, psi_in)
    lay = RegisterLayout(n, plan.tau)
    st = product_state(psi_in, lay)
    if route == "literal":
        block = apply_wtau(st, c, plan).amps[:, 0, 0]
    elif route == "projected":
        z = st.amps.reshape(n, n, lay.counter_dim, 1)
        block = counter_zero_block(z, coin_vectors(c), plan)[:, 0, 0]
    else:
        raise ValidationError(f"unknown route {route!r}")
    return float(np.linalg.norm(block - target))


def chebyshev_T(l: int, x):
    """``T_l(x)`` by the three-term recurrence."""
    x = np.asarray(x, dtype=np.float64)
    if l == 0:
        return np.ones_like(x)
    a, b = np.ones_like(x), x
    for _ in range(l - 1):
        a, b = b, 2.0 * x * b - a
    return b
