"""Dense symmetric spectra and the classical scalars derived from them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .chain import MarkovChain, absorbing_mod, discriminant, pi_bar, _marked
from .errors import AlgorithmFailure, ValidationError

SYMMETRY_TOL = 1e-12
UNIT_EIG_TOL = 1e-12
SIGN_TOL = 1e-10
MIXING_CAP = 10**7


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted non-increasing with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def gap(self) -> float:
        """``1 - lambda_1``; one for a single vertex."""
        if self.n < 2:
            return 1.0
        return float(1.0 - self.eigenvalues[1])

    @property
    def abs_gap(self) -> float:
        """``1 - max_{j>=1} |lambda_j|``; governs decay of ``lambda**t`` for negative eigenvalues too."""
        if self.n < 2:
            return 1.0
        return float(1.0 - np.abs(self.eigenvalues[1:]).max())

    @property
    def pi_min(self) -> float:
        """Smallest squared entry of the principal eigenvector."""
        return float((self.eigenvectors[:, 0] ** 2).min())

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def sym_eig(D) -> Spectrum:
    """Full eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Eigenvector signs are fixed so that the first entry above ``1e-10`` in
    magnitude is positive.
    """
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValidationError("matrix must be square")
    asym = np.abs(D - D.T).max() if D.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValidationError(f"matrix not symmetric (max asymmetry {asym:.3e})")
    w, v = kernels.jacobi_eigh(0.5 * (D + D.T))
    order = np.argsort(-w, kind="stable")
    w = np.ascontiguousarray(w[order])
    v = np.ascontiguousarray(v[:, order])
    for k in range(v.shape[1]):
        col = v[:, k]
        idx = np.flatnonzero(np.abs(col) > SIGN_TOL)
        if idx.size and col[idx[0]] < 0:
            v[:, k] = -col
    w.setflags(write=False)
    v.setflags(write=False)
    return Spectrum(w, v)


def chain_spectrum(c) -> Spectrum:
    return sym_eig(discriminant(c))


def _check_hitting_inputs(c: MarkovChain, M) -> tuple[int, ...]:
    marked = _marked(M, c.n)
    if float(c.pi[list(marked)].sum()) >= 1.0 - 1e-12:
        raise ValidationError("marked set carries all stationary mass")
    return marked


def hitting_time_spectral(c: MarkovChain, M) -> float:
    """Hitting time of ``M`` from the restricted stationary law, by eigen-expansion.

    Sums ``|<v'_k|pi_bar>|^2 / (1 - lambda'_k)`` over eigenpairs of the
    absorbing discriminant whose eigenvalue is below ``1 - 1e-12``.
    """
    marked = _check_hitting_inputs(c, M)
    spec = chain_spectrum(absorbing_mod(c, marked))
    unit = spec.eigenvalues >= 1.0 - UNIT_EIG_TOL
    if int(unit.sum()) != len(marked):
        raise ValidationError("unmarked block has a unit eigenvalue; marked set unreachable")
    amps = pi_bar(c.pi, marked)
    overlaps = spec.eigenvectors[:, ~unit].T @ amps
    lam = spec.eigenvalues[~unit]
    return float(np.sum(overlaps**2 / (1.0 - lam)))


def hitting_time_oracle(c: MarkovChain, M) -> float:
    """Same quantity from the linear system ``(I - Q) h = 1`` on unmarked states."""
    marked = _check_hitting_inputs(c, M)
    keep = np.ones(c.n, dtype=bool)
    keep[list(marked)] = False
    Q = c.P[np.ix_(keep, keep)]
    A = np.eye(Q.shape[0]) - Q
    if np.linalg.cond(A) > 1e14:
        raise ValidationError("I - Q is singular; marked set unreachable")
    h = np.linalg.solve(A, np.ones(Q.shape[0]))
    pis = c.pi[keep]
    return float(pis @ h / pis.sum())


def hitting_times_all(c: MarkovChain) -> np.ndarray:
    """``HT({x})`` for every vertex at once via the fundamental matrix.

    With ``Z = (I - P + 1 pi)^-1 - 1 pi`` one has ``E_pi[T_x] = Z_xx / pi_x``;
    restricting the start law to ``V - {x}`` divides by ``1 - pi_x``.
    """
    n = c.n
    Z = np.linalg.inv(np.eye(n) - c.P + np.outer(np.ones(n), c.pi))
    return (np.diag(Z) - c.pi) / (c.pi * (1.0 - c.pi))


@dataclass(frozen=True)
class MixingResult:
    t: int
    bound: float


def _tv(Pt: np.ndarray, pi: np.ndarray) -> float:
    return float(0.5 * np.abs(Pt - pi[None, :]).sum(axis=1).max())


def classical_mixing_time(c: MarkovChain, eps: float, cap: int = MIXING_CAP) -> MixingResult:
    """Smallest ``t`` with worst-case total variation to ``pi`` at most ``eps``.

    Powers ``P**(2**k)`` are squared until the distance drops below ``eps``; the
    exact ``t`` is then recovered by binary lifting, relying on monotonicity of
    the worst-case distance.  Also returns ``(ln(1/pi_min) + ln(1/eps)) / gap``
    with the absolute spectral gap.
    """
    if not (0.0 < eps < 1.0):
        raise ValidationError("eps must lie in (0, 1)")
    P, pi = np.asarray(c.P), np.asarray(c.pi)
    spec = chain_spectrum(c)
    gap = spec.abs_gap
    bound = math.inf if gap <= 0 else (math.log(1.0 / c.pi_min) + math.log(1.0 / eps)) / gap
    if _tv(np.eye(c.n), pi) <= eps:
        return MixingResult(0, bound)
    powers = [P]
    while _tv(powers[-1], pi) > eps:
        if 2 ** len(powers) > 2 * cap:
            raise AlgorithmFailure(f"mixing time exceeds cap {cap}")
        powers.append(powers[-1] @ powers[-1])
    # largest t with TV > eps, built bit by bit from high to low
    t, cur = 0, np.eye(c.n)
    for k in range(len(powers) - 1, -1, -1):
        nxt = cur @ powers[k]
        if _tv(nxt, pi) > eps:
            cur, t = nxt, t + 2**k
    if t + 1 > cap:
        raise AlgorithmFailure(f"mixing time exceeds cap {cap}")
    return MixingResult(t + 1, bound)
