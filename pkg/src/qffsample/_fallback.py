"""Pure NumPy implementations of the numerical kernels.

Same contracts as the compiled ``_kernels`` extension; :mod:`qffsample.kernels`
picks one of the two at import time.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def jacobi_eigh(a, tol=1e-13, max_sweeps=100):
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Returns ``(w, v)`` with unsorted eigenvalues ``w`` and eigenvectors in the
    columns of ``v``.  Iterates until the off-diagonal Frobenius mass falls below
    ``tol * max(1, ||a||_F)``.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), v
    scale = max(1.0, float(np.linalg.norm(a)))
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        off = float(np.sqrt(2.0 * np.sum(a[iu] ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v


def _coin(z, u):
    # z: (m, n, n, k); block-diagonal Householder reflections on the coin axis
    dots = np.einsum("xy,mxyk->mxk", u, z)
    z -= 2.0 * u[None, :, :, None] * dots[:, :, None, :]


def _step(z, u, adjoint):
    if not adjoint:
        z[:, :, 1:, :] *= -1.0
        _coin(z, u)
        z = np.ascontiguousarray(z.swapaxes(1, 2))
        _coin(z, u)
    else:
        _coin(z, u)
        z = np.ascontiguousarray(z.swapaxes(1, 2))
        _coin(z, u)
        z[:, :, 1:, :] *= -1.0
    return z


def walk_apply(a, u, count, adjoint=False):
    """Apply the Szegedy walk ``count`` times in place on ``a`` of shape (n, n, B)."""
    n = a.shape[0]
    z = a.reshape(1, n, n, -1)
    for _ in range(count):
        z = _step(z, u, adjoint)
    a[...] = z.reshape(a.shape)


def wctrl_apply(a, u, period, adjoint=False):
    """Branch-controlled walk powers on ``a`` of shape (n, n, T, B), in place.

    Branch ``l`` of the third axis receives ``W**(l % period)``.  Realized as the
    cumulative sweep: one walk step on every branch whose power is at least ``j``,
    for ``j = 1 .. period - 1``.
    """
    n, _, t, b = a.shape
    high = t // period
    y = np.moveaxis(a.reshape(n, n, high, period, b), 3, 0)
    y = np.ascontiguousarray(y).reshape(period, n, n, high * b)
    for j in range(1, period):
        y[j:] = _step(y[j:].copy(), u, adjoint)
    y = y.reshape(period, n, n, high, b)
    a[...] = np.moveaxis(y, 0, 3).reshape(a.shape)



def walk_horner(x, u, w, adjoint=False):
    """Return ``sum_l w[l] * W**l x[l]`` for ``x`` of shape (P, n, n, B).

    Horner evaluation; exactly ``P - 1`` walk steps.
    """
    p, n = x.shape[0], x.shape[1]
    acc = (w[p - 1] * x[p - 1]).reshape(1, n, n, -1)
    for l in range(p - 2, -1, -1):
        acc = _step(acc, u, adjoint)
        acc += w[l] * x[l].reshape(1, n, n, -1)
    return acc.reshape(x.shape[1:])


def walk_powers(y, u, w, adjoint=False):
    """Return ``out`` of shape (P, n, n, B) with ``out[l] = w[l] * W**l y``."""
    p = len(w)
    n = y.shape[0]
    out = np.empty((p,) + y.shape, dtype=np.complex128)
    cur = np.array(y, dtype=np.complex128).reshape(1, n, n, -1)
    out[0] = w[0] * cur.reshape(y.shape)
    for l in range(1, p):
        cur = _step(cur, u, adjoint)
        out[l] = w[l] * cur.reshape(y.shape)
    return out
