"""Reversible Markov chains on explicit graphs.

Graphs parse from edge lists, chains are dense row-stochastic matrices, and the
transforms used by the interpolated walk (lazy, absorbing, interpolation,
discriminant, restricted stationary vector) live here.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ParseError, ValidationError

ROW_TOL = 1e-12
REVERSIBLE_TOL = 1e-12
STATIONARY_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Graph:
    """Undirected graph on vertices ``0 .. n-1`` with optional positive weights."""

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("graph needs at least one vertex")
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
        if self.weights is not None:
            if len(self.weights) != len(self.edges):
                raise ValidationError("one weight per edge required")
            if any(not (w > 0 and math.isfinite(w)) for w in self.weights):
                raise ValidationError("edge weights must be strictly positive")
        if not self.is_connected():
            raise ValidationError("graph is disconnected")

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        ws = self.weights or (1.0,) * len(self.edges)
        for (u, v), w in zip(self.edges, ws):
            a[u, v] = a[v, u] = w
        return a

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def is_connected(self) -> bool:
        return _connected(self.n, [(u, v) for u, v in self.edges])


def _connected(n: int, pairs: Iterable[tuple[int, int]]) -> bool:
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in pairs:
        nbrs[u].append(v)
        nbrs[v].append(u)
    seen = {0}
    todo = deque([0])
    while todo:
        x = todo.popleft()
        for y in nbrs[x]:
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return len(seen) == n


def from_edge_list(text: str) -> Graph:
    """Parse an edge-list document.

    Each non-blank, non-``#`` line is ``u v`` or ``u v w``.  The vertex count is
    one more than the largest endpoint.

    >>> from_edge_list("0 1\\n1 2\\n2 0").n
    3
    """
    edges: list[tuple[int, int]] = []
    weights: list[float] = []
    weighted: bool | None = None
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 'u v' or 'u v w', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer vertex in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise ParseError("vertices are 0-indexed non-negative integers", lineno)
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", lineno)
        has_w = len(parts) == 3
        if weighted is None:
            weighted = has_w
        elif weighted != has_w:
            raise ParseError("mixed weighted and unweighted lines", lineno)
        if has_w:
            try:
                w = float(parts[2])
            except ValueError:
                raise ParseError(f"bad weight {parts[2]!r}", lineno) from None
            if not (w > 0 and math.isfinite(w)):
                raise ParseError(f"weight must be positive, got {parts[2]}", lineno)
            weights.append(w)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(f"duplicate edge {key} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        edges.append((u, v))
    if not edges:
        raise ParseError("no edges")
    n = 1 + max(max(e) for e in edges)
    return Graph(n, tuple(edges), tuple(weights) if weighted else None)


def to_edge_list(g: Graph) -> str:
    lines = [f"# n={g.n}"]
    ws = g.weights
    for i, (u, v) in enumerate(g.edges):
        lines.append(f"{u} {v}" if ws is None else f"{u} {v} {ws[i]!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class MarkovChain:
    """Dense row-stochastic transition matrix with its stationary distribution."""

    P: np.ndarray
    pi: np.ndarray
    reversible: bool
    ergodic: bool

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def pi_min(self) -> float:
        return float(self.pi.min())

    @property
    def sqrt_pi(self) -> np.ndarray:
        return np.sqrt(self.pi)

    @classmethod
    def from_matrix(cls, P, pi=None) -> "MarkovChain":
        """Validate ``P`` and derive the stationary distribution and flags.

        ``pi`` may be passed when known in closed form; it is still checked.
        """
        P = np.array(P, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 1:
            raise ValidationError("transition matrix must be square")
        if np.any(P < 0) or np.any(P > 1 + ROW_TOL):
            raise ValidationError("transition probabilities must lie in [0, 1]")
        dev = np.abs(P.sum(axis=1) - 1.0).max()
        if dev > ROW_TOL:
            raise ValidationError(f"rows must sum to 1 (max deviation {dev:.3e})")
        if pi is None:
            pi = _stationary(P)
        pi = np.asarray(pi, dtype=np.float64)
        pi = pi / pi.sum()
        if np.abs(pi @ P - pi).max() > STATIONARY_TOL:
            pi = _stationary_power(P, pi)
            if np.abs(pi @ P - pi).max() > STATIONARY_TOL:
                raise ValidationError("could not determine a stationary distribution")
        flux = pi[:, None] * P
        reversible = bool(np.abs(flux - flux.T).max() <= REVERSIBLE_TOL)
        return cls(_frozen(P), _frozen(pi), reversible, is_ergodic(P))

    def stationary_state(self) -> np.ndarray:
        """The unit vector of square-root stationary amplitudes."""
        return np.sqrt(self.pi)


def _stationary(P: np.ndarray) -> np.ndarray:
    # principal eigenvector of the discriminant, squared componentwise
    from .spectral import sym_eig

    D = discriminant(P)
    try:
        spec = sym_eig(D)
    except ValidationError:
        return _stationary_power(P, np.full(P.shape[0], 1.0 / P.shape[0]))
    v = spec.eigenvectors[:, 0]
    pi = v * v
    return pi / pi.sum()


def _stationary_power(P: np.ndarray, start: np.ndarray, tol: float = 1e-12, max_iter: int = 100000) -> np.ndarray:
    L = 0.5 * (np.eye(P.shape[0]) + P)
    pi = start / start.sum()
    for _ in range(max_iter):
        nxt = pi @ L
        if np.abs(nxt - pi).max() < tol:
            return nxt / nxt.sum()
        pi = nxt
    return pi / pi.sum()


def is_ergodic(P: np.ndarray) -> bool:
    """Strong connectivity of the support plus aperiodicity.

    The period is the gcd of ``level[u] + 1 - level[v]`` over support edges
    ``u -> v``, where ``level`` is the breadth-first distance from vertex 0.
    """
    n = P.shape[0]
    support = P > 0
    level = [-1] * n
    level[0] = 0
    todo = deque([0])
    while todo:
        x = todo.popleft()
        for y in np.flatnonzero(support[x]):
            if level[y] < 0:
                level[y] = level[x] + 1
                todo.append(int(y))
    if min(level) < 0:
        return False
    # reverse reachability
    seen = {0}
    todo = deque([0])
    while todo:
        x = todo.popleft()
        for y in np.flatnonzero(support[:, x]):
            if int(y) not in seen:
                seen.add(int(y))
                todo.append(int(y))
    if len(seen) < n:
        return False
    g = 0
    for u, v in zip(*np.nonzero(support)):
        g = math.gcd(g, abs(level[u] + 1 - level[v]))
        if g == 1:
            return True
    return g == 1


def lazy(c: MarkovChain) -> MarkovChain:
    """The lazy chain ``(I + P) / 2``; same stationary distribution."""
    P = 0.5 * (np.eye(c.n) + c.P)
    return MarkovChain.from_matrix(P, pi=c.pi)


def random_walk_chain(g: Graph, lazy: bool = False) -> MarkovChain:
    """Simple (weighted) random walk: ``P_xy = w_xy / sum_y w_xy``."""
    A = g.adjacency()
    deg = A.sum(axis=1)
    if np.any(deg == 0):
        raise ValidationError("isolated vertex")
    P = A / deg[:, None]
    if lazy:
        P = 0.5 * (np.eye(g.n) + P)
    return MarkovChain.from_matrix(P, pi=deg / deg.sum())


def metropolis_chain(target, lazy: bool = True) -> MarkovChain:
    """Metropolis chain on the complete graph with a prescribed stationary law."""
    target = np.asarray(target, dtype=np.float64)
    target = target / target.sum()
    n = target.size
    if n < 2 or np.any(target <= 0):
        raise ValidationError("target must be a positive vector of length >= 2")
    P = np.minimum(1.0, target[None, :] / target[:, None]) / (n - 1)
    np.fill_diagonal(P, 0.0)
    P[np.diag_indices(n)] = 1.0 - P.sum(axis=1)
    if lazy:
        P = 0.5 * (np.eye(n) + P)
    return MarkovChain.from_matrix(P, pi=target)


def _marked(M, n: int) -> tuple[int, ...]:
    marked = tuple(sorted({int(m) for m in M}))
    if not marked:
        raise ValidationError("marked set must be nonempty")
    if len(marked) >= n:
        raise ValidationError("marked set must be a proper subset of V")
    if marked[0] < 0 or marked[-1] >= n:
        raise ValidationError("marked vertex out of range")
    return marked


def absorbing_mod(c: MarkovChain, M) -> MarkovChain:
    """Replace the rows of marked vertices by identity rows."""
    marked = _marked(M, c.n)
    P = np.array(c.P)
    for m in marked:
        P[m, :] = 0.0
        P[m, m] = 1.0
    pi = np.zeros(c.n)
    pi[list(marked)] = 1.0 / len(marked)
    return MarkovChain.from_matrix(P, pi=pi)


@dataclass(frozen=True)
class InterpolatedChain:
    """``P(s) = (1 - s) P + s P'`` where ``P'`` makes ``marked`` absorbing."""

    base: MarkovChain
    marked: tuple[int, ...]
    s: float
    Ps: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def P(self) -> np.ndarray:
        return self.Ps

    def stationary(self) -> np.ndarray:
        """Stationary law of ``P(s)`` for ``s < 1``: unmarked mass scaled by ``1 - s``."""
        w = np.array(self.base.pi)
        mask = np.ones(self.n, dtype=bool)
        mask[list(self.marked)] = False
        w[mask] *= 1.0 - self.s
        return w / w.sum()


def interpolate(c: MarkovChain, M, s: float) -> InterpolatedChain:
    if not (0.0 <= s <= 1.0):
        raise ValidationError(f"s must lie in [0, 1], got {s}")
    marked = _marked(M, c.n)
    if s == 0.0:
        Ps = np.array(c.P)
    else:
        Pp = np.array(c.P)
        for m in marked:
            Pp[m, :] = 0.0
            Pp[m, m] = 1.0
        Ps = Pp if s == 1.0 else (1.0 - s) * c.P + s * Pp
    return InterpolatedChain(c, marked, float(s), _frozen(Ps))


def transition(c) -> np.ndarray:
    """Transition matrix of a chain, an interpolated chain, or a raw array."""
    if isinstance(c, (MarkovChain, InterpolatedChain)):
        return c.P
    return np.asarray(c, dtype=np.float64)


def discriminant(c) -> np.ndarray:
    """``D_xy = sqrt(P_xy P_yx)``; symmetric by construction."""
    P = transition(c)
    return np.sqrt(P * P.T)


def pi_bar(pi, M) -> np.ndarray:
    """Stationary amplitudes restricted to unmarked vertices, renormalized."""
    pi = np.asarray(pi, dtype=np.float64)
    marked = list({int(m) for m in M})
    pi_m = float(pi[marked].sum()) if marked else 0.0
    if pi_m >= 1.0 - 1e-12:
        raise ValidationError("marked set carries all stationary mass")
    out = np.sqrt(pi)
    out[marked] = 0.0
    return out / math.sqrt(1.0 - pi_m)
