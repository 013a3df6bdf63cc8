"""Deterministic graph families for scaling runs, plus the fixed test corpus."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .chain import Graph, MarkovChain, random_walk_chain
from .errors import ValidationError

FAMILIES = ("cycle", "complete", "balanced-r-tree", "barbell", "necklace", "glued-cliques", "gnp")
NECKLACE_CLIQUE = 4


@dataclass(frozen=True)
class FamilySpec:
    name: str
    n: int
    r: int = 2
    p: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ValidationError(f"unknown family {self.name!r}; choose from {', '.join(FAMILIES)}")
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError("n must be a positive integer")
        if self.r < 1:
            raise ValidationError("r must be at least 1")
        if self.p is not None and not (0.0 < self.p <= 1.0):
            raise ValidationError("p must lie in (0, 1]")

    @property
    def lazy_default(self) -> bool:
        """Families whose simple walk may be periodic default to the lazy walk."""
        return self.name in ("gnp", "balanced-r-tree", "cycle", "barbell", "necklace")


def parse_family(text: str) -> FamilySpec:
    """``name:n[,key=value...]``, for example ``gnp:64,seed=7`` or ``balanced-r-tree:15,r=3``."""
    name, sep, rest = text.partition(":")
    if not sep or not rest:
        raise ValidationError(f"family spec {text!r} must look like name:n[,key=value]")
    parts = rest.split(",")
    try:
        kw: dict = {"n": int(parts[0])}
        for item in parts[1:]:
            key, eq, val = item.partition("=")
            if not eq:
                raise ValidationError(f"bad family option {item!r}")
            if key == "r":
                kw["r"] = int(val)
            elif key == "p":
                kw["p"] = float(val)
            elif key == "seed":
                kw["seed"] = int(val)
            else:
                raise ValidationError(f"unknown family option {key!r}")
    except ValueError as exc:
        raise ValidationError(f"bad family spec {text!r}: {exc}") from None
    return FamilySpec(name.strip(), **kw)


def _clique(vs) -> list[tuple[int, int]]:
    return list(combinations(vs, 2))


def _need(cond: bool, msg: str):
    if not cond:
        raise ValidationError(msg)


def _gnp_edges(n: int, p: float, seed: int) -> tuple[int, list[tuple[int, int]]]:
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, list[int]] = {}
    for v in range(n):
        comps.setdefault(find(v), []).append(v)
    # largest component, ties broken by smallest vertex
    best = max(comps.values(), key=lambda vs: (len(vs), -vs[0]))
    label = {v: i for i, v in enumerate(best)}
    sub = [(label[a], label[b]) for a, b in edges if a in label and b in label]
    return len(best), sub


def gen_family(spec: FamilySpec) -> Graph:
    n, name = spec.n, spec.name
    if name == "cycle":
        _need(n >= 3, "cycle needs n >= 3")
        return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))
    if name == "complete":
        _need(n >= 2, "complete graph needs n >= 2")
        return Graph(n, tuple(_clique(range(n))))
    if name == "balanced-r-tree":
        _need(n >= 2, "tree needs n >= 2")
        return Graph(n, tuple(((i - 1) // spec.r, i) for i in range(1, n)))
    if name == "barbell":
        _need(n >= 6 and n % 3 == 0, "barbell needs n divisible by 3 and n >= 6")
        k = n // 3
        edges = _clique(range(k)) + _clique(range(2 * k, 3 * k))
        edges += [(i, i + 1) for i in range(k - 1, 2 * k)]
        return Graph(n, tuple(edges))
    if name == "necklace":
        m = NECKLACE_CLIQUE
        _need(n >= 2 * m and n % m == 0, f"necklace needs n divisible by {m} and n >= {2 * m}")
        edges = []
        for b in range(0, n, m):
            edges += _clique(range(b, b + m))
            if b + m < n:
                edges.append((b + m - 1, b + m))
        return Graph(n, tuple(edges))
    if name == "glued-cliques":
        _need(n >= 3 and n % 2 == 1, "glued-cliques needs odd n >= 3")
        k = (n + 1) // 2
        left = [0] + list(range(1, k))
        right = [0] + list(range(k, n))
        return Graph(n, tuple(_clique(left) + _clique(right)))
    # gnp
    _need(n >= 2, "gnp needs n >= 2")
    p = spec.p if spec.p is not None else 1.0 / n
    size, edges = _gnp_edges(n, p, spec.seed)
    if size < 2:
        raise ValidationError(f"gnp({n}, {p}) with seed {spec.seed} has no edges")
    return Graph(size, tuple(edges))


def family_chain(spec: FamilySpec, lazy: bool | None = None) -> MarkovChain:
    return random_walk_chain(gen_family(spec), lazy=spec.lazy_default if lazy is None else lazy)


# corpus used by the acceptance checks: (label, spec, lazy)
CORPUS = (
    ("triangle", FamilySpec("complete", 3), False),
    ("K4", FamilySpec("complete", 4), False),
    ("star", None, True),
    ("cycle5", FamilySpec("cycle", 5), False),
    ("cycle8", FamilySpec("cycle", 8), True),
    ("cycle16", FamilySpec("cycle", 16), True),
    ("glued9", FamilySpec("glued-cliques", 9), False),
    ("gnp24", FamilySpec("gnp", 24, p=0.15, seed=0), True),
)


def star(leaves: int) -> Graph:
    _need(leaves >= 1, "star needs at least one leaf")
    return Graph(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


def corpus() -> list[tuple[str, MarkovChain]]:
    out = []
    for label, spec, lazy in CORPUS:
        g = star(3) if spec is None else gen_family(spec)
        out.append((label, random_walk_chain(g, lazy=lazy)))
    return out
