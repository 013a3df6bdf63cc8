"""Stationary-state preparation pipelines.

``apply_u_main`` prepares a state with constant overlap on ``|pi>`` from a
single vertex; ``amplitude_amplify`` boosts it; ``compare_with_pig``,
``binary_search_pig`` and ``prepare_unknown`` handle an unknown ``pi_g``.

Measurements on identical copies are independent draws with the same
probability, so every distinct circuit is simulated once per
:class:`Pipeline` and its outcome probabilities reused across copies.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .chain import MarkovChain, interpolate
from .errors import AlgorithmFailure, ValidationError
from .qff import QffPlan, apply_wtau, counter_zero_block, make_plan, wtau_adjoint_from_zero
from .reflect import (
    ReflectionParams,
    ancilla_mass,
    apply_reflection,
    check_is_pi,
    flags_back,
    flags_front,
    horizon,
    reflection_params,
    toggle_on_coin_zero,
)
from .spectral import chain_spectrum
from .walkspace import (
    Projector,
    RegisterLayout,
    StateVector,
    apply_ctrl_flip,
    coin_vectors,
    init_state,
    interpolation_eigenvector,
    outcome_prob,
)

MAX_PI_STAR = 0.499
FLAGS = ("r4", "r5")


# ---------------------------------------------------------------------------
# configuration and reports


@dataclass(frozen=True)
class SamplerConfig:
    eps: float = 0.05
    c: int = 100
    C: float = 100.0
    L: int | None = None
    pi_lb: Any = None
    seed: int = 0
    mode: str = "exact"
    fast_path_threshold: float = 0.25
    route: str = "projected"

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise ValidationError("eps must lie in (0, 1)")
        if self.c < 1:
            raise ValidationError("c must be at least 1")
        if self.C < 2:
            raise ValidationError("C must be at least 2")
        if self.L is not None and self.L < 0:
            raise ValidationError("L must be non-negative")
        if self.mode not in ("exact", "sampled"):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.route not in ("projected", "literal"):
            raise ValidationError(f"unknown route {self.route!r}")
        if self.pi_lb not in (None, "oracle"):
            v = float(self.pi_lb)
            if not (0.0 < v <= 1.0):
                raise ValidationError("pi_lb must lie in (0, 1]")


@dataclass
class TrialReport:
    verdict: bool
    fidelity: float
    pi_star: float | None
    walk_calls: int
    ancilla_qubits: int
    transcript: list = field(default_factory=list)
    seed: int | None = None
    g: int | None = None
    pi_g: float | None = None
    amplified_fidelity: float | None = None
    rounds: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# U_main


@dataclass(frozen=True)
class UMainSetup:
    g: int
    x: float
    s: float
    delta: float
    t: int
    plan: QffPlan
    beta0: float
    overlap_pi: float

    @property
    def bound(self) -> float:
        """``|beta0 <pi|v0>|``, the leading amplitude on ``|pi>`` with the flag raised."""
        return abs(self.beta0 * self.overlap_pi)

    @property
    def walk_calls(self) -> int:
        return 2 * self.plan.walk_calls


def s_of(x: float) -> float:
    """Interpolation parameter ``1 - x / (1 - x)``."""
    return 1.0 - x / (1.0 - x)


def u_main_setup(g: int, pi_star: float, eps: float, c: MarkovChain) -> UMainSetup:
    if not (0 <= g < c.n):
        raise ValidationError(f"vertex {g} out of range")
    if not (0.0 < pi_star < 0.5):
        raise ValidationError("pi_star must lie in (0, 1/2)")
    if not (0.0 < eps < 1.0):
        raise ValidationError("eps must lie in (0, 1)")
    s = s_of(pi_star)
    ic = interpolate(c, [g], s)
    delta = chain_spectrum(ic).abs_gap
    if delta <= 1e-14:
        raise ValidationError("interpolated chain has zero spectral gap")
    t = horizon(delta, eps)
    plan = make_plan(t, eps / 2.0)
    _, beta0, ov = interpolation_eigenvector(c, g, s)
    return UMainSetup(g, float(pi_star), s, delta, t, plan, beta0, ov)


def _u_main_literal(psi: StateVector, ic, plan: QffPlan) -> StateVector:
    out = apply_ctrl_flip(psi, ("r2",), "r4", "X")
    out = apply_ctrl_flip(out, (), "r4", "X")
    out = apply_wtau(out, ic, plan)
    out = apply_ctrl_flip(out, ("r2", "r3", "r4"), "r5", "X")
    out = apply_wtau(out, ic, plan, adjoint=True)
    out = apply_ctrl_flip(out, (), "r4", "X")
    return apply_ctrl_flip(out, ("r2",), "r4", "X")


def _u_main_projected(psi: StateVector, ic, plan: QffPlan) -> StateVector:
    # U = A X4 (I + W^dag (X5 - I) Pi' W) X4 A with Pi' = Pi_{00} (x) |0><0|_4
    lay = psi.layout
    n, T = lay.n, lay.counter_dim
    u = coin_vectors(ic)
    z = flags_front(psi, FLAGS)  # (n, n, T, 2, 2, B)
    b = z.shape[-1]
    toggle_on_coin_zero(z)
    z = np.ascontiguousarray(z[:, :, :, ::-1])
    zero4 = z[:, :, :, 0].reshape(n, n, T, 2 * b)
    phi = counter_zero_block(zero4, u, plan).reshape(n, n, 2, b)
    phi[:, 1:] = 0.0
    kick = np.empty_like(phi)
    kick[:, :, 0] = phi[:, :, 1] - phi[:, :, 0]
    kick[:, :, 1] = phi[:, :, 0] - phi[:, :, 1]
    corr = wtau_adjoint_from_zero(kick.reshape(n, n, 2 * b), u, plan, T)
    z[:, :, :, 0] += corr.reshape(n, n, T, 2, b)
    z = np.ascontiguousarray(z[:, :, :, ::-1])
    toggle_on_coin_zero(z)
    return flags_back(z, psi, FLAGS)


def u_main_apply(psi: StateVector, c: MarkovChain, setup: UMainSetup, route: str = "projected") -> StateVector:
    """Apply ``U_main`` (Hermitian, hence also its adjoint) to an arbitrary state."""
    if psi.layout.tau < setup.plan.tau:
        raise ValidationError("counter register too narrow for this plan")
    ic = interpolate(c, [setup.g], setup.s)
    if route == "literal":
        return _u_main_literal(psi, ic, setup.plan)
    if route == "projected":
        return _u_main_projected(psi, ic, setup.plan)
    raise ValidationError(f"unknown route {route!r}")


@dataclass(frozen=True)
class UMainResult:
    state: StateVector
    plan: QffPlan
    diagnostics: UMainSetup


def apply_u_main(g: int, pi_star: float, eps: float, c: MarkovChain, tau: int | None = None,
                 route: str = "projected") -> UMainResult:
    """``U_main |g, 0, 0, 0, 0>`` with ``M = {g}`` and ``s = 1 - pi_star / (1 - pi_star)``."""
    setup = u_main_setup(g, pi_star, eps, c)
    width = max(setup.plan.tau, tau or 0)
    psi = init_state(g, RegisterLayout(c.n, width, FLAGS))
    return UMainResult(u_main_apply(psi, c, setup, route), setup.plan, setup)


SUCCESS_KINDS = ("pi_flag", "g_flag", "g_only")


def success_projector(c: MarkovChain, g: int, which: str) -> Projector:
    if which == "pi_flag":
        return Projector({"r5": 1}, np.sqrt(np.asarray(c.pi)))
    if which == "g_flag":
        return Projector({"r1": g, "r5": 1})
    if which == "g_only":
        return Projector({"r1": g})
    raise ValidationError(f"unknown projection {which!r}; expected one of {SUCCESS_KINDS}")


def success_projection(state: StateVector, c: MarkovChain, g: int, which: str = "pi_flag") -> float:
    """Exact probability of ``|pi>`` with the flag raised, ``|g>`` with the flag raised, or ``|g>`` alone."""
    return outcome_prob(state, success_projector(c, g, which))


def beta0_fourth(pi_g: float, x: float) -> float:
    """``beta0(s_x)**4 = (pi_g (1 - x) / (pi_g + x - 2 pi_g x))**2``."""
    return (pi_g * (1.0 - x) / (pi_g + x - 2.0 * pi_g * x)) ** 2


# ---------------------------------------------------------------------------
# pipeline with memoised circuit statistics


@dataclass(frozen=True)
class CircuitStats:
    """Outcome probabilities of one ``U_main`` run followed by the stationary check."""

    setup: UMainSetup
    tau: int
    p_check: float
    p_pi_flag: float
    p_g_flag: float
    p_g_only: float
    post_check_fidelity: float
    leak: float


class Pipeline:
    """Chain, error budget and reflection circuit shared by all trials on one chain."""

    def __init__(self, c: MarkovChain, eps: float, route: str = "projected", reflect_eps: float | None = None):
        if not (0.0 < eps < 1.0):
            raise ValidationError("eps must lie in (0, 1)")
        self.c = c
        self.eps = float(eps)
        self.route = route
        self.reflection: ReflectionParams = reflection_params(c, reflect_eps or eps / 2.0)
        self._stats: dict[tuple[int, float], CircuitStats] = {}

    @property
    def sqrt_pi(self) -> np.ndarray:
        return np.sqrt(np.asarray(self.c.pi))

    def tau_for(self, setup: UMainSetup) -> int:
        return max(setup.plan.tau, self.reflection.plan.tau)

    def ancilla_qubits(self, setup: UMainSetup | None) -> int:
        tau = self.reflection.plan.tau if setup is None else self.tau_for(setup)
        return tau + len(FLAGS) + 1

    def fidelity(self, psi: StateVector) -> float:
        f = outcome_prob(psi, Projector({}, self.sqrt_pi)) / max(psi.norm() ** 2, 1e-300)
        return min(1.0, max(0.0, f))

    def u_main_state(self, g: int, x: float) -> tuple[UMainSetup, StateVector]:
        setup = u_main_setup(g, x, self.eps, self.c)
        psi = init_state(g, RegisterLayout(self.c.n, self.tau_for(setup), FLAGS))
        return setup, u_main_apply(psi, self.c, setup, self.route)

    def check(self, psi: StateVector, mode: str = "exact", rng=None):
        return check_is_pi(psi, self.c, self.reflection, mode=mode, rng=rng, tol=2.0 * self.eps,
                           route=self.route)

    def stats(self, g: int, x: float) -> CircuitStats:
        key = (int(g), float(x))
        hit = self._stats.get(key)
        if hit is not None:
            return hit
        setup, psi = self.u_main_state(g, x)
        res = self.check(psi)
        post = res.state if res.verdict else self.check_post_state(psi)
        st = CircuitStats(
            setup=setup,
            tau=psi.layout.tau,
            p_check=res.prob,
            p_pi_flag=success_projection(psi, self.c, g, "pi_flag"),
            p_g_flag=success_projection(psi, self.c, g, "g_flag"),
            p_g_only=success_projection(psi, self.c, g, "g_only"),
            post_check_fidelity=self.fidelity(post),
            leak=ancilla_mass(psi),
        )
        self._stats[key] = st
        return st

    def check_post_state(self, psi: StateVector) -> StateVector:
        """State after the check reports ``|pi>``."""
        from .reflect import check_branches

        hit, _ = check_branches(psi, self.c, self.reflection, self.route)
        nrm = hit.norm()
        if nrm == 0.0:
            raise AlgorithmFailure("check outcome has zero probability")
        return hit.replace(hit.amps / nrm)

    def close_state(self, g: int, x: float) -> StateVector:
        _, psi = self.u_main_state(g, x)
        return self.check_post_state(psi)


# ---------------------------------------------------------------------------
# amplitude amplification


def _reflect_init(psi: StateVector, g: int) -> StateVector:
    amps = np.array(psi.amps)
    amps[(g, 0, 0) + (0,) * len(psi.layout.flags)] *= -1.0
    return psi.replace(amps)


def _rounds(a: float) -> int:
    if a <= 0.0:
        raise AlgorithmFailure("initial overlap with |pi> is zero")
    if a >= 1.0:
        return 0
    return max(0, int(round(math.pi / (4.0 * math.asin(a)) - 0.5)))


def _amplify_once(pipe: Pipeline, g: int, setup: UMainSetup | None, psi: StateVector) -> tuple[StateVector, int, int]:
    """``k`` rounds of ``-R_m R_pi`` (``R_m = U R_g U``, or ``R_g`` alone without ``U``)."""
    a = math.sqrt(pipe.fidelity(psi))
    k = _rounds(a)
    calls = 0
    tol = 2.0 * pipe.eps
    for _ in range(k):
        psi = apply_reflection(psi, pipe.c, pipe.reflection, pipe.route)
        calls += pipe.reflection.walk_calls
        if setup is not None:
            psi = u_main_apply(psi, pipe.c, setup, pipe.route)
        psi = _reflect_init(psi, g)
        if setup is not None:
            psi = u_main_apply(psi, pipe.c, setup, pipe.route)
            calls += 2 * setup.walk_calls
        psi = psi.replace(-psi.amps)
        leak = ancilla_mass(psi)
        if leak > tol:
            raise AlgorithmFailure(f"ancilla leak {leak:.3e} after amplification round")
    return psi, k, calls


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def exact_attempts(p: float, budget: int) -> int | None:
    """Median number of independent tries until the first success, or None past ``budget``.

    Exact mode resolves a retry loop by the smallest ``m`` with ``1 - (1 - p)**m >= 1/2``.
    """
    for m in range(1, budget + 1):
        if 1.0 - (1.0 - p) ** m >= 0.5:
            return m
    return None


def amplify_from(pipe: Pipeline, g: int, setup: UMainSetup | None, mode: str, rng, transcript: list,
                 pi_star: float | None) -> TrialReport:
    """Prepare, amplify and check; retry up to ``ceil(ln(1/eps))`` times on a failed check.

    Every attempt runs the same circuit, so the amplified state is simulated once.
    """
    retries = max(1, math.ceil(math.log(1.0 / pipe.eps)))
    tau = pipe.tau_for(setup) if setup is not None else pipe.reflection.plan.tau
    psi = init_state(g, RegisterLayout(pipe.c.n, tau, FLAGS))
    per_attempt = pipe.reflection.walk_calls
    if setup is not None:
        psi = u_main_apply(psi, pipe.c, setup, pipe.route)
        per_attempt += setup.walk_calls
    psi, k, used = _amplify_once(pipe, g, setup, psi)
    per_attempt += used
    amplified = pipe.fidelity(psi)
    pi_g = float(pipe.c.pi[g])
    anc = pipe.ancilla_qubits(setup)
    hit = pipe.check(psi)
    if mode == "exact":
        m = exact_attempts(hit.prob, retries)
        ok = m is not None
        attempts = m if ok else retries
        transcript.append({"op": "amplify", "rounds": k, "p_check": hit.prob, "attempts": attempts, "verdict": ok})
    else:
        attempts, ok = retries, False
        for attempt in range(retries):
            ok = bool(_rng(rng).random() < hit.prob)
            transcript.append({"op": "amplify", "attempt": attempt, "rounds": k, "verdict": ok})
            if ok:
                attempts = attempt + 1
                break
    calls = attempts * per_attempt
    if ok:
        post = hit.state if hit.verdict else pipe.check_post_state(psi)
        return TrialReport(True, pipe.fidelity(post), pi_star, calls, anc, transcript, g=g, pi_g=pi_g,
                           amplified_fidelity=amplified, rounds=k)
    return TrialReport(False, amplified, pi_star, calls, anc, transcript, g=g, pi_g=pi_g,
                       amplified_fidelity=amplified, rounds=k)


def amplitude_amplify(g: int, pi_star: float, eps: float, c: MarkovChain,
                      config: SamplerConfig | None = None, pipeline: Pipeline | None = None) -> TrialReport:
    """Known-``pi_g`` preparation: ``U_main`` followed by amplitude amplification and a final check."""
    config = config or SamplerConfig(eps=eps)
    pipe = pipeline or Pipeline(c, eps, config.route)
    setup = u_main_setup(g, pi_star, pipe.eps, c)
    rng = np.random.default_rng(config.seed)
    rep = amplify_from(pipe, g, setup, config.mode, rng, [], pi_star)
    rep.seed = config.seed
    return rep


# ---------------------------------------------------------------------------
# comparison and search

CLOSE, BELOW, ABOVE = "close", "below", "above"


@dataclass
class CompareResult:
    verdict: str
    x: float
    walk_calls: int
    p_check: float | None = None
    p_g: float | None = None


def compare_with_pig(g: int, x: float, pipe: Pipeline, mode: str, c_copies: int, rng=None,
                     transcript: list | None = None, measure: str = "g_flag") -> CompareResult:
    """Report ``close`` (a check saw ``|pi>``), ``below`` (``x < 2 pi_g / 3``) or ``above`` (``x > 4 pi_g / 3``).

    Phase one runs ``c_copies`` preparations each followed by the stationary check;
    phase two counts ``|g>`` outcomes over fresh copies and answers ``below`` when
    at least a quarter of them hit.  In exact mode each phase compares its exact
    probability with the threshold at which the sampled rule succeeds half the time.
    """
    transcript = transcript if transcript is not None else []
    if x <= 0.0:
        transcript.append({"op": "compare", "x": x, "verdict": BELOW, "trivial": True})
        return CompareResult(BELOW, x, 0)
    if x >= 0.5:
        raise ValidationError("x must lie in (0, 1/2)")
    st = pipe.stats(g, x)
    per_check = st.setup.walk_calls + pipe.reflection.walk_calls
    p_g = {"g_flag": st.p_g_flag, "g_only": st.p_g_only}[measure]
    calls = 0
    if mode == "exact":
        calls += c_copies * per_check
        if 1.0 - (1.0 - st.p_check) ** c_copies >= 0.5:
            transcript.append({"op": "compare", "x": x, "phase": 1, "p": st.p_check, "verdict": CLOSE})
            return CompareResult(CLOSE, x, calls, st.p_check, None)
        calls += c_copies * st.setup.walk_calls
        verdict = BELOW if p_g >= 0.25 else ABOVE
        transcript.append({"op": "compare", "x": x, "phase": 2, "p": p_g, "verdict": verdict})
        return CompareResult(verdict, x, calls, st.p_check, p_g)
    gen = _rng(rng)
    draws = gen.random(c_copies) < st.p_check
    if draws.any():
        used = int(np.argmax(draws)) + 1
        calls += used * per_check
        transcript.append({"op": "compare", "x": x, "phase": 1, "copies": used, "verdict": CLOSE})
        return CompareResult(CLOSE, x, calls, st.p_check, None)
    calls += c_copies * per_check
    a = int(np.count_nonzero(gen.random(c_copies) < p_g))
    calls += c_copies * st.setup.walk_calls
    verdict = BELOW if a >= c_copies / 4.0 else ABOVE
    transcript.append({"op": "compare", "x": x, "phase": 2, "a": a, "copies": c_copies, "verdict": verdict})
    return CompareResult(verdict, x, calls, st.p_check, p_g)


@dataclass
class SearchResult:
    pi_star: float | None
    walk_calls: int
    levels: int
    transcript: list


def binary_search_pig(g: int, l: float, u: float, L: int, pipe: Pipeline | None, mode: str, c_copies: int,
                      rng=None, transcript: list | None = None, compare=None) -> SearchResult:
    """Backtracking bisection on ``[l, u]``; each loop pass costs one unit of ``L``.

    ``compare(x) -> CompareResult`` replaces the simulated comparison when given.
    """
    if not (0.0 <= l < u):
        raise ValidationError("need 0 <= l < u")
    transcript = transcript if transcript is not None else []
    gen = _rng(rng)
    if compare is None:
        if pipe is None:
            raise ValidationError("binary search needs a pipeline or a comparator")

        def compare(x):
            return compare_with_pig(g, x, pipe, mode, c_copies, gen, transcript)
    stack = [(float(l), float(u))]
    calls = 0
    for level in range(int(L)):
        lo, hi = stack[-1]
        transcript.append({"op": "level", "depth": len(stack) - 1, "l": lo, "u": hi})
        rl = compare(lo)
        calls += rl.walk_calls
        if rl.verdict == CLOSE:
            return SearchResult(lo, calls, level + 1, transcript)
        ru = compare(hi)
        calls += ru.walk_calls
        if ru.verdict == CLOSE:
            return SearchResult(hi, calls, level + 1, transcript)
        if rl.verdict == ABOVE or ru.verdict == BELOW:
            if len(stack) > 1:
                stack.pop()
                transcript.append({"op": "backtrack"})
            else:
                transcript.append({"op": "restart"})
            continue
        m = 0.5 * (lo + hi)
        rm = compare(m)
        calls += rm.walk_calls
        if rm.verdict == CLOSE:
            return SearchResult(m, calls, level + 1, transcript)
        stack.append((m, hi) if rm.verdict == BELOW else (lo, m))
    transcript.append({"op": "fail", "levels": int(L)})
    return SearchResult(None, calls, int(L), transcript)


# ---------------------------------------------------------------------------
# unknown pi_g driver


def resolve_pi_lb(c: MarkovChain, config: SamplerConfig) -> float:
    if config.pi_lb == "oracle":
        return c.pi_min
    if config.pi_lb is None:
        return 1.0 / (config.C * c.n * c.n)
    return float(config.pi_lb)


def search_depth(c: MarkovChain, config: SamplerConfig, pi_lb: float) -> int:
    if config.L is not None:
        return int(config.L)
    return max(0, math.ceil(math.log2((config.C / c.n) / pi_lb))) + 10


def prepare_unknown(c: MarkovChain, config: SamplerConfig, g: int | None = None,
                    pipeline: Pipeline | None = None) -> TrialReport:
    """Prepare ``|pi>`` from a (random) vertex whose stationary weight is not supplied."""
    pipe = pipeline or Pipeline(c, config.eps, config.route)
    rng = np.random.default_rng(config.seed)
    if g is None:
        g = int(rng.integers(c.n))
    if not (0 <= g < c.n):
        raise ValidationError(f"vertex {g} out of range")
    transcript: list = [{"op": "start", "g": g}]
    pi_lb = resolve_pi_lb(c, config)
    pi_g = float(c.pi[g])

    if pi_lb >= config.fast_path_threshold:
        transcript.append({"op": "fast_path", "pi_lb": pi_lb})
        rep = amplify_from(pipe, g, None, config.mode, rng, transcript, None)
        rep.seed = config.seed
        return rep

    pi_e = min(1.0 / c.n, MAX_PI_STAR)
    st = pipe.stats(g, pi_e)
    per_check = st.setup.walk_calls + pipe.reflection.walk_calls
    calls = 0
    found: float | None = None
    if config.mode == "exact":
        calls += config.c * per_check
        if 1.0 - (1.0 - st.p_check) ** config.c >= 0.5:
            found = pi_e
        transcript.append({"op": "initial", "x": pi_e, "p": st.p_check, "hit": found is not None})
    else:
        draws = rng.random(config.c) < st.p_check
        used = int(np.argmax(draws)) + 1 if draws.any() else config.c
        calls += used * per_check
        if draws.any():
            found = pi_e
        transcript.append({"op": "initial", "x": pi_e, "copies": used, "hit": found is not None})

    tau_used = st.tau
    if found is None:
        upper = min(config.C / c.n, MAX_PI_STAR)
        L = search_depth(c, config, pi_lb)
        res = binary_search_pig(g, 0.0, upper, L, pipe, config.mode, config.c, rng, transcript)
        calls += res.walk_calls
        found = res.pi_star
    if found is None:
        return TrialReport(False, 0.0, None, calls, pipe.ancilla_qubits(None), transcript, config.seed, g, pi_g)
    fin = pipe.stats(g, found)
    tau_used = max(tau_used, fin.tau)
    return TrialReport(True, fin.post_check_fidelity, found, calls, tau_used + len(FLAGS) + 1, transcript,
                       config.seed, g, pi_g)
