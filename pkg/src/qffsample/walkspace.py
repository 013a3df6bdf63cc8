"""Register model and primitive unitaries of the Szegedy walk.

Amplitudes are stored row-major over ``(r1, r2, r3, *flags)`` where ``r1`` is
the vertex register, ``r2`` the coin register (coin index 0 is the fixed
initial coin state), ``r3`` the ``2**tau``-dimensional counter register and
each flag is a qubit.
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .chain import MarkovChain, transition
from .errors import ValidationError

NORM_TOL = 1e-10
FLAG_NAMES = ("r4", "r5", "chk")


@dataclass(frozen=True)
class RegisterLayout:
    n: int
    tau: int = 0
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be positive")
        if self.tau < 0:
            raise ValidationError("tau must be non-negative")
        if len(set(self.flags)) != len(self.flags):
            raise ValidationError("duplicate flag register")
        for f in self.flags:
            if f in ("r1", "r2", "r3"):
                raise ValidationError(f"flag name {f!r} collides with a data register")

    @property
    def counter_dim(self) -> int:
        return 1 << self.tau

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n, self.n, self.counter_dim) + (2,) * len(self.flags)

    @property
    def dim(self) -> int:
        return self.n * self.n * self.counter_dim * (1 << len(self.flags))

    @property
    def registers(self) -> tuple[str, ...]:
        return ("r1", "r2", "r3") + self.flags

    def axis(self, name: str) -> int:
        try:
            return self.registers.index(name)
        except ValueError:
            raise ValidationError(f"layout has no register {name!r}") from None

    def register_dim(self, name: str) -> int:
        return self.shape[self.axis(name)]

    def with_flags(self, *names: str) -> "RegisterLayout":
        return RegisterLayout(self.n, self.tau, self.flags + tuple(names))

    def with_tau(self, tau: int) -> "RegisterLayout":
        return RegisterLayout(self.n, tau, self.flags)


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over a :class:`RegisterLayout`.  Treated as immutable."""

    layout: RegisterLayout
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.amps.shape != self.layout.shape:
            raise ValidationError(f"amplitude shape {self.amps.shape} does not match layout {self.layout.shape}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps.ravel()))

    def vector(self) -> np.ndarray:
        return self.amps.ravel()

    def replace(self, amps: np.ndarray, layout: RegisterLayout | None = None) -> "StateVector":
        return StateVector(layout or self.layout, amps)

    def add_flag(self, name: str) -> "StateVector":
        """Append a qubit register initialised to 0."""
        lay = self.layout.with_flags(name)
        out = np.zeros(lay.shape, dtype=np.complex128)
        out[..., 0] = self.amps
        return StateVector(lay, out)

    def drop_flag(self, name: str, value: int = 0) -> "StateVector":
        """Remove a qubit register, keeping the slice where it equals ``value``."""
        ax = self.layout.axis(name)
        if ax < 3:
            raise ValidationError("only flag registers can be dropped")
        flags = tuple(f for f in self.layout.flags if f != name)
        amps = np.take(self.amps, value, axis=ax)
        return StateVector(RegisterLayout(self.layout.n, self.layout.tau, flags), np.ascontiguousarray(amps))

    def widen(self, tau: int) -> "StateVector":
        """Embed into a wider counter register; new high bits start at 0."""
        if tau < self.layout.tau:
            raise ValidationError("cannot narrow the counter register")
        if tau == self.layout.tau:
            return self
        lay = self.layout.with_tau(tau)
        out = np.zeros(lay.shape, dtype=np.complex128)
        out[:, :, : self.layout.counter_dim] = self.amps
        return StateVector(lay, out)

    def r1_marginal(self) -> np.ndarray:
        """Reduced density matrix of the vertex register."""
        m = self.amps.reshape(self.layout.n, -1)
        return m @ m.conj().T


def init_state(g: int, layout: RegisterLayout) -> StateVector:
    """Basis state ``|g>|0>|0>|0...>``."""
    if not (0 <= g < layout.n):
        raise ValidationError(f"vertex {g} out of range for n={layout.n}")
    amps = np.zeros(layout.shape, dtype=np.complex128)
    amps[(g, 0, 0) + (0,) * len(layout.flags)] = 1.0
    return StateVector(layout, amps)


def product_state(psi_r1, layout: RegisterLayout) -> StateVector:
    """``psi_r1`` on the vertex register with every other register at 0."""
    psi_r1 = np.asarray(psi_r1, dtype=np.complex128)
    if psi_r1.shape != (layout.n,):
        raise ValidationError("vertex vector has wrong length")
    amps = np.zeros(layout.shape, dtype=np.complex128)
    amps[(slice(None), 0, 0) + (0,) * len(layout.flags)] = psi_r1
    return StateVector(layout, amps)


# ---------------------------------------------------------------------------
# coin preparation


def coin_vectors(P) -> np.ndarray:
    """Householder vectors ``u_x`` with ``(I - 2 u_x u_x^T) e_0 = sqrt(P[x])``.

    Row ``x`` is zero when ``sqrt(P[x])`` already equals ``e_0``.
    """
    P = transition(P)
    r = np.sqrt(P)
    d = -r.copy()
    # 1 - sqrt(p) without cancellation
    d[:, 0] = (1.0 - P[:, 0]) / (1.0 + r[:, 0])
    norms = np.linalg.norm(d, axis=1)
    u = np.zeros_like(d)
    ok = norms > 1e-15
    u[ok] = d[ok] / norms[ok, None]
    return np.ascontiguousarray(u)


def coin_blocks(P) -> np.ndarray:
    """Dense ``U_x`` matrices, shape (n, n, n); for tests and small dumps."""
    u = coin_vectors(P)
    n = u.shape[0]
    return np.eye(n)[None, :, :] - 2.0 * u[:, :, None] * u[:, None, :]


def _as_block(psi: StateVector) -> np.ndarray:
    n = psi.layout.n
    return np.array(psi.amps, dtype=np.complex128, order="C").reshape(n, n, -1)


def apply_coin_prep(psi: StateVector, ic, adjoint: bool = False) -> StateVector:
    """``V = sum_x |x><x| (x) U_x``.  Each block is a reflection so the adjoint coincides."""
    u = coin_vectors(ic)
    z = _as_block(psi)
    dots = np.einsum("xy,xyb->xb", u, z)
    z -= 2.0 * u[:, :, None] * dots[:, None, :]
    return psi.replace(z.reshape(psi.layout.shape))


def apply_swap(psi: StateVector) -> StateVector:
    return psi.replace(np.ascontiguousarray(np.swapaxes(psi.amps, 0, 1)))


def apply_ref0(psi: StateVector) -> StateVector:
    amps = np.array(psi.amps)
    amps[:, 1:] *= -1.0
    return psi.replace(amps)


def apply_walk(psi: StateVector, ic, count: int = 1, adjoint: bool = False) -> StateVector:
    """``W**count`` with ``W = V^dag S V R0``; ``adjoint`` applies ``(W^dag)**count``."""
    if count < 0:
        raise ValidationError("count must be non-negative")
    z = _as_block(psi)
    if count:
        kernels.walk_apply(z, coin_vectors(ic), int(count), bool(adjoint))
    return psi.replace(z.reshape(psi.layout.shape))


# ---------------------------------------------------------------------------
# controlled flips


def zero_mask(layout: RegisterLayout, controls) -> np.ndarray | bool:
    """Boolean mask (broadcastable to ``layout.shape``) where every control register is 0."""
    mask = True
    for name in controls:
        ax = layout.axis(name)
        shape = [1] * len(layout.shape)
        shape[ax] = layout.shape[ax]
        sel = np.zeros(layout.shape[ax], dtype=bool)
        sel[0] = True
        mask = mask & sel.reshape(shape)
    return mask


def apply_ctrl_flip(psi: StateVector, controls, target: str, pauli: str = "X") -> StateVector:
    """Pauli ``X`` or ``Z`` on qubit ``target`` where all ``controls`` are in state 0.

    An empty control set applies the gate unconditionally.
    """
    lay = psi.layout
    ax = lay.axis(target)
    if lay.shape[ax] != 2 or ax < 3:
        raise ValidationError(f"target {target!r} is not a single-qubit register")
    if target in controls:
        raise ValidationError("target cannot also be a control")
    pauli = pauli.upper()
    mask = np.broadcast_to(zero_mask(lay, controls), lay.shape)
    amps = np.array(psi.amps)
    if pauli == "X":
        flipped = np.flip(amps, axis=ax)
        amps = np.where(mask, flipped, amps)
    elif pauli == "Z":
        one = np.zeros(2, dtype=bool)
        one[1] = True
        shape = [1] * len(lay.shape)
        shape[ax] = 2
        amps = np.where(mask & one.reshape(shape), -amps, amps)
    else:
        raise ValidationError(f"unsupported pauli {pauli!r}")
    return psi.replace(np.ascontiguousarray(amps))


# ---------------------------------------------------------------------------
# interpolation eigenvector


def interpolation_eigenvector(c: MarkovChain, g: int, s: float) -> tuple[np.ndarray, float, float]:
    """Unit 1-eigenvector ``v0(s)`` of ``D(s)`` for ``M = {g}``, with ``<v0|g>`` and ``<pi|v0>``."""
    if not (0.0 <= s <= 1.0):
        raise ValidationError("s must lie in [0, 1]")
    if not (0 <= g < c.n):
        raise ValidationError("vertex out of range")
    pg = float(c.pi[g])
    if pg >= 1.0:
        raise ValidationError("pi_g must be below 1")
    den = 1.0 - s * (1.0 - pg)
    if den <= 1e-15:
        raise ValidationError("s (1 - pi_g) = 1: eigenvector undefined")
    a_bar = math.sqrt(max(0.0, (1.0 - s) * (1.0 - pg) / den))
    beta0 = math.sqrt(pg / den)
    sq = np.sqrt(np.asarray(c.pi))
    pibar = sq.copy()
    pibar[g] = 0.0
    pibar /= math.sqrt(1.0 - pg)
    v0 = a_bar * pibar
    v0[g] += beta0
    overlap = a_bar * math.sqrt(1.0 - pg) + beta0 * math.sqrt(pg)
    return v0, beta0, overlap


# ---------------------------------------------------------------------------
# projectors and measurement


@dataclass(frozen=True)
class Projector:
    """Product projector: basis values on named registers and optionally a unit vector on ``r1``."""

    values: Mapping[str, int] = field(default_factory=dict)
    r1_vector: np.ndarray | None = None

    def apply(self, psi: StateVector) -> np.ndarray:
        """Projected, unnormalised amplitudes."""
        lay = psi.layout
        amps = np.array(psi.amps)
        for name, val in self.values.items():
            ax = lay.axis(name)
            if not (0 <= val < lay.shape[ax]):
                raise ValidationError(f"value {val} out of range for register {name}")
            keep = np.zeros(lay.shape[ax], dtype=bool)
            keep[val] = True
            shape = [1] * len(lay.shape)
            shape[ax] = lay.shape[ax]
            amps = np.where(keep.reshape(shape), amps, 0.0)
        if self.r1_vector is not None:
            v = np.asarray(self.r1_vector, dtype=np.complex128)
            if v.shape != (lay.n,):
                raise ValidationError("r1 vector has wrong length")
            v = v / np.linalg.norm(v)
            coeff = np.tensordot(v.conj(), amps, axes=(0, 0))
            amps = np.multiply.outer(v, coeff)
        return amps


def outcome_prob(psi: StateVector, proj: Projector) -> float:
    p = float(np.vdot(proj.apply(psi).ravel(), proj.apply(psi).ravel()).real)
    return min(1.0, max(0.0, p))


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def measure_collapse(psi: StateVector, proj: Projector, rng) -> tuple[bool, StateVector]:
    """Two-outcome measurement ``{proj, I - proj}``; ``rng`` is a seed or Generator."""
    hit = proj.apply(psi)
    p = min(1.0, max(0.0, float(np.vdot(hit.ravel(), hit.ravel()).real)))
    gen = _generator(rng)
    outcome = bool(gen.random() < p)
    post = hit if outcome else psi.amps - hit
    nrm = np.linalg.norm(post.ravel())
    if nrm == 0.0:
        raise ValidationError("drew a zero-probability outcome")
    return outcome, psi.replace(post / nrm)


# ---------------------------------------------------------------------------
# state dump

_MAGIC = "QSV1"


def dump_state(psi: StateVector, fh) -> None:
    """Header line ``QSV1 n tau flags`` then little-endian float64 ``(re, im)`` pairs."""
    lay = psi.layout
    flags = ",".join(lay.flags) if lay.flags else "-"
    fh.write(f"{_MAGIC} {lay.n} {lay.tau} {flags}\n".encode("ascii"))
    data = np.empty(lay.dim * 2, dtype="<f8")
    flat = psi.amps.ravel()
    data[0::2] = flat.real
    data[1::2] = flat.imag
    fh.write(data.tobytes())


def load_state(fh) -> StateVector:
    header = fh.readline().decode("ascii").split()
    if len(header) != 4 or header[0] != _MAGIC:
        raise ValidationError("not a QSV1 state dump")
    n, tau = int(header[1]), int(header[2])
    flags = () if header[3] == "-" else tuple(header[3].split(","))
    lay = RegisterLayout(n, tau, flags)
    raw = fh.read()
    if len(raw) != lay.dim * 16:
        raise ValidationError("state dump payload has wrong length")
    data = np.frombuffer(raw, dtype="<f8")
    amps = (data[0::2] + 1j * data[1::2]).reshape(lay.shape)
    return StateVector(lay, np.ascontiguousarray(amps))


def dumps_state(psi: StateVector) -> bytes:
    buf = io.BytesIO()
    dump_state(psi, buf)
    return buf.getvalue()


def loads_state(data: bytes) -> StateVector:
    return load_state(io.BytesIO(data))


def dense_unitary(op, layout: RegisterLayout) -> np.ndarray:
    """Materialise a linear map on ``layout`` column by column (small layouts only)."""
    dim = layout.dim
    if dim > 4096:
        raise ValidationError("layout too large to materialise")
    out = np.empty((dim, dim), dtype=np.complex128)
    for k in range(dim):
        e = np.zeros(dim, dtype=np.complex128)
        e[k] = 1.0
        out[:, k] = op(StateVector(layout, e.reshape(layout.shape))).amps.ravel()
    return out


__all__ = [
    "RegisterLayout", "StateVector", "Projector", "init_state", "product_state", "coin_vectors",
    "coin_blocks", "apply_coin_prep", "apply_swap", "apply_ref0", "apply_walk", "apply_ctrl_flip",
    "zero_mask", "interpolation_eigenvector", "outcome_prob", "measure_collapse", "dump_state",
    "load_state", "dumps_state", "loads_state", "dense_unitary",
]
