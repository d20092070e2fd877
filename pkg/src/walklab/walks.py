"""Biased random walk simulation and the bias-extraction machinery.

The central walk is the epsilon-biased step: with probability 1 - epsilon
move to a uniform neighbour, otherwise sample from a policy's probability
vector over the neighbours.  A policy is any deterministic rule
(graph, visited set, current vertex, step count) -> neighbour distribution,
so visited-set strategies and fixed-matrix strategies share one interface.

`extract_bias_matrix` inverts the mixture: given a reversible chain Q
supported on the graph's edges with Q >= (1 - eps)/d entrywise on edges,
it recovers the row-stochastic bias B with (1-eps) P + eps B = Q.  The
target-decay chains of `weighting` satisfy that entrywise condition
whenever theta <= eps and the degree is at least 3, which is exactly how
`phase_cover_run` turns a weighting into a playable strategy: each phase
re-targets the unvisited set U, tilts by theta = min(eps, 1 - e^(-psi/32)),
extracts B, and walks until half of U is gone.

Monte Carlo estimation is deterministic: trial i draws from the splitmix
stream seed XOR i, so results are bit-identical across runs and across
worker counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .chains import ReversibleChain
from .graphs import Graph, GraphError, vertex_expansion_exact
from .rng import BufferedDraws, SplitMix64
from .weighting import induced_chain, target_decay_weighting

# Configured expansion value used by the phase strategy when the graph is too
# large for exact enumeration.  The tilt theta = min(eps, 1 - e^(-psi/32)) is
# deliberately conservative in its exponent, so a timid psi makes the bias
# statistically invisible at simulation scales; 2.0 keeps theta around 6% for
# moderate eps, which is where the cover-time advantage becomes measurable
# while staying a feasible expansion value for degree >= 3.
DEFAULT_PSI_CONFIG = 2.0

__all__ = [
    "WalkState",
    "WalkSpec",
    "BiasPolicy",
    "MatrixPolicy",
    "SweepPolicy",
    "WalkError",
    "step",
    "crw_step",
    "crw_emulation_step",
    "extract_bias_matrix",
    "phase_cover_run",
    "cover_run",
    "estimate_cover_time",
    "CoverEstimate",
    "stationary_boost_audit",
    "StationaryBoostReport",
]


class WalkError(ValueError):
    """Invalid walk parameters or policy output."""


@dataclass
class WalkState:
    """Mutable trajectory state: current vertex, step count, visited set."""

    current: int
    steps: int
    visited: set[int]

    @classmethod
    def fresh(cls, start: int) -> "WalkState":
        return cls(current=start, steps=0, visited={start})


class BiasPolicy(Protocol):
    def __call__(self, g: Graph, visited: set[int], current: int, steps: int) -> np.ndarray:
        """Probability vector aligned with g.adj[current]."""


class MatrixPolicy:
    """State-independent policy reading rows of a stochastic bias matrix."""

    def __init__(self, g: Graph, b: np.ndarray):
        b = np.asarray(b, dtype=float)
        if b.shape != (g.n, g.n):
            raise WalkError("bias matrix has wrong shape")
        self.rows: list[np.ndarray] = []
        for v in range(g.n):
            row = b[v, list(g.adj[v])].copy()
            total = row.sum()
            if abs(total - 1.0) > 1e-9:
                raise WalkError(f"bias row {v} sums to {total}, expected 1")
            if float(b[v].sum() - total) > 1e-9:
                raise WalkError(f"bias row {v} puts mass outside the edge set")
            self.rows.append(row)

    def __call__(self, g: Graph, visited: set[int], current: int, steps: int) -> np.ndarray:
        return self.rows[current]


class SweepPolicy:
    """Directional bias for cycle-shaped graphs.

    Prefers the +1 neighbour while it is unvisited; once the forward
    frontier is exhausted it prefers the -1 neighbour.  A pure function of
    (visited, current), which keeps the policy deterministic and
    replayable.
    """

    def __call__(self, g: Graph, visited: set[int], current: int, steps: int) -> np.ndarray:
        nbrs = g.adj[current]
        fwd = (current + 1) % g.n
        bwd = (current - 1) % g.n
        target = fwd if fwd not in visited or bwd in visited else bwd
        vec = np.zeros(len(nbrs))
        vec[nbrs.index(target)] = 1.0
        return vec


def _sample_from_vector(vec: Sequence[float], r: float) -> int:
    acc = 0.0
    last = 0
    for i, p in enumerate(vec):
        acc += p
        last = i
        if r < acc:
            return i
    return last


def step(g: Graph, state: WalkState, eps: float, policy: BiasPolicy | None, rng) -> int:
    """One epsilon-biased step; mutates and returns the new vertex.

    Consumes exactly two draws (coin, choice) regardless of the branch, so
    trajectories are replayable from the stream alone.
    """
    if not (0.0 <= eps <= 1.0):
        raise WalkError("eps must lie in [0, 1]")
    if eps > 0.0 and policy is None:
        raise WalkError("eps > 0 needs a policy")
    nbrs = g.adj[state.current]
    coin = rng.next_float()
    r = rng.next_float()
    if coin < eps:
        vec = policy(g, state.visited, state.current, state.steps)
        idx = _sample_from_vector(vec, r)
    else:
        idx = int(r * len(nbrs))
        if idx == len(nbrs):
            idx -= 1
    nxt = nbrs[idx]
    state.current = nxt
    state.steps += 1
    state.visited.add(nxt)
    return nxt


def crw_step(g: Graph, state: WalkState, policy: BiasPolicy, rng) -> int:
    """Choice step: two independent uniform neighbour draws; the policy's
    vector picks the preferred one (higher value wins, ties go to the lower
    vertex id).  Identical draws leave no choice."""
    nbrs = g.adj[state.current]
    d = len(nbrs)
    i = rng.next_u64() % d
    j = rng.next_u64() % d
    if i == j:
        nxt = nbrs[i]
    else:
        vec = policy(g, state.visited, state.current, state.steps)
        if vec[i] > vec[j] or (vec[i] == vec[j] and nbrs[i] < nbrs[j]):
            nxt = nbrs[i]
        else:
            nxt = nbrs[j]
    state.current = nxt
    state.steps += 1
    state.visited.add(nxt)
    return nxt


def crw_emulation_step(g: Graph, state: WalkState, eps: float, policy: BiasPolicy, rng) -> int:
    """Choice step that reproduces the eps-biased marginal exactly.

    From the offered ordered pair (x, y) it keeps x with probability
    1/2 + (eps d / 2)(b_x - b_y); averaging over the uniform pair gives the
    marginal (1 - eps)/d + eps b per neighbour.  Valid for eps <= 1/d.
    """
    nbrs = g.adj[state.current]
    d = len(nbrs)
    if eps * d > 1.0 + 1e-12:
        raise WalkError("choice emulation needs eps <= 1/d")
    i = rng.next_u64() % d
    j = rng.next_u64() % d
    r = rng.next_float()
    if i == j:
        nxt = nbrs[i]
    else:
        vec = policy(g, state.visited, state.current, state.steps)
        keep_first = 0.5 + 0.5 * eps * d * (float(vec[i]) - float(vec[j]))
        nxt = nbrs[i] if r < keep_first else nbrs[j]
    state.current = nxt
    state.steps += 1
    state.visited.add(nxt)
    return nxt


# ---------------------------------------------------------------------------
# bias extraction


def extract_bias_matrix(q: ReversibleChain, g: Graph, eps: float) -> np.ndarray:
    """Solve (1 - eps) P + eps B = Q for the bias matrix B.

    P is the simple random walk on g.  B must come out entrywise
    nonnegative (dust down to -1e-12 is tolerated and kept, not clamped, so
    the reconstruction identity stays exact).  eps = 0 degenerates: Q must
    equal P and B is P itself.
    """
    if not (0.0 <= eps <= 1.0):
        raise WalkError("eps must lie in [0, 1]")
    n = g.n
    if q.n != n:
        raise WalkError("chain and graph size mismatch")
    p = np.zeros((n, n))
    for v in range(n):
        p[v, list(g.adj[v])] = 1.0 / len(g.adj[v])
    if eps == 0.0:
        if float(np.max(np.abs(q.matrix - p))) > 1e-12:
            raise WalkError("eps = 0 requires Q to equal the simple random walk")
        return p
    b = (q.matrix - (1.0 - eps) * p) / eps
    if float(b.min()) < -1e-12:
        raise WalkError(
            f"chain is not an eps-biased perturbation of the walk (min entry {b.min():.3e})"
        )
    return b


# ---------------------------------------------------------------------------
# cover-time simulation


def _cover_run_srw(g: Graph, rng: SplitMix64, start: int) -> int:
    """Simple random walk until every vertex is seen; one draw per step."""
    adj = g.adj
    visited = bytearray(g.n)
    visited[start] = 1
    left = g.n - 1
    cur = start
    steps = 0
    draws = BufferedDraws(rng)
    u64 = draws.u64
    while left:
        nb = adj[cur]
        cur = nb[u64() % len(nb)]
        steps += 1
        if not visited[cur]:
            visited[cur] = 1
            left -= 1
    return steps


def _cover_run_policy(g: Graph, rng: SplitMix64, start: int, eps: float, policy: BiasPolicy) -> int:
    """Epsilon-biased walk until covered; two draws per step."""
    state = WalkState.fresh(start)
    draws = BufferedDraws(rng)
    n = g.n
    adj = g.adj
    visited = state.visited
    scale = 2.0**-53
    while len(visited) < n:
        coin = (draws.u64() >> 11) * scale
        r = (draws.u64() >> 11) * scale
        nbrs = adj[state.current]
        if coin < eps:
            vec = policy(g, visited, state.current, state.steps)
            idx = _sample_from_vector(vec, r)
        else:
            idx = int(r * len(nbrs))
            if idx == len(nbrs):
                idx -= 1
        state.current = nbrs[idx]
        state.steps += 1
        visited.add(state.current)
    return state.steps


def phase_cover_run(
    g: Graph,
    eps: float,
    rng: SplitMix64 | int,
    start: int = 0,
    psi: float | None = None,
) -> int:
    """Phase-restart cover strategy.

    Each phase fixes U = currently unvisited vertices, builds the
    target-decay chain Q(U, theta) with theta = min(eps, 1 - e^(-psi/32)),
    extracts the bias matrix, and plays the eps-biased walk with that fixed
    strategy until at least half of U has been visited.  Halving means at
    most log2(n) + 1 re-targeting rounds before the walk finishes the job.

    psi is the vertex expansion: exact when n <= 24, otherwise the
    configured value (default DEFAULT_PSI_CONFIG; any lower bound on the
    true expansion keeps theta inside the regime where the tilted chain
    provably mixes).
    """
    if isinstance(rng, int):
        rng = SplitMix64(rng)
    d = g.regular_degree
    if d is None:
        raise WalkError("phase cover strategy needs a regular graph")
    if eps > 0.0 and d < 3:
        raise WalkError("bias extraction needs degree >= 3")
    if not (0 <= start < g.n):
        raise WalkError("start vertex out of range")
    if psi is None:
        if g.n <= 24:
            psi, _ = vertex_expansion_exact(g)
        else:
            psi = DEFAULT_PSI_CONFIG
    theta_cap = 1.0 - math.exp(-psi / 32.0)

    draws = BufferedDraws(rng)
    n = g.n
    adj = g.adj
    visited = bytearray(n)
    visited[start] = 1
    left = n - 1
    cur = start
    steps = 0
    scale = 2.0**-53
    while left:
        unvisited = [v for v in range(n) if not visited[v]]
        theta = min(eps, theta_cap)
        if eps == 0.0:
            rows = None
        else:
            q = induced_chain(g, target_decay_weighting(g, unvisited, theta))
            b = extract_bias_matrix(q, g, eps)
            rows = [b[v, list(adj[v])] for v in range(n)]
        phase_target = len(unvisited) // 2  # run until at most this many of U remain
        remaining = len(unvisited)
        while remaining > phase_target:
            nbrs = adj[cur]
            coin = (draws.u64() >> 11) * scale
            r = (draws.u64() >> 11) * scale
            if coin < eps:
                idx = _sample_from_vector(rows[cur], r)
            else:
                idx = int(r * len(nbrs))
                if idx == len(nbrs):
                    idx -= 1
            cur = nbrs[idx]
            steps += 1
            if not visited[cur]:
                visited[cur] = 1
                left -= 1
                remaining -= 1
                if left == 0:
                    break
    return steps


@dataclass(frozen=True)
class WalkSpec:
    """What to simulate: kind in {srw, phase, policy, sweep}, plus knobs.

    `start` fixes the starting vertex; None means round-robin over all
    starts when n <= 64 (trial i starts at i mod n) and vertex 0 otherwise.
    """

    kind: str
    eps: float = 0.0
    start: int | None = None
    psi: float | None = None
    policy: BiasPolicy | None = None

    def label(self) -> str:
        return self.kind


@dataclass
class CoverRow:
    trial: int
    start_vertex: int
    steps: int


@dataclass
class CoverEstimate:
    mean: float
    stddev: float
    ci95: tuple[float, float]
    trials: int
    rows: list[CoverRow] = field(default_factory=list)


def cover_run(g: Graph, spec: WalkSpec, rng: SplitMix64, start: int) -> int:
    if spec.kind == "srw":
        return _cover_run_srw(g, rng, start)
    if spec.kind == "phase":
        return phase_cover_run(g, spec.eps, rng, start=start, psi=spec.psi)
    if spec.kind == "sweep":
        return _cover_run_policy(g, rng, start, spec.eps, SweepPolicy())
    if spec.kind == "policy":
        if spec.policy is None:
            raise WalkError("policy walk needs a policy")
        return _cover_run_policy(g, rng, start, spec.eps, spec.policy)
    raise WalkError(f"unknown walk kind {spec.kind!r}")


def estimate_cover_time(g: Graph, spec: WalkSpec, trials: int, seed: int) -> CoverEstimate:
    """Monte Carlo cover-time estimate with per-trial derived streams.

    Trial i uses the stream seed XOR i, so the estimate is a pure function
    of (graph, spec, trials, seed).  Every run takes at least n - 1 steps;
    that invariant is asserted on each trial.
    """
    if trials < 2:
        raise WalkError("estimate_cover_time needs at least 2 trials")
    rows: list[CoverRow] = []
    for trial in range(trials):
        if spec.start is not None:
            start = spec.start
        elif g.n <= 64:
            start = trial % g.n
        else:
            start = 0
        rng = SplitMix64.stream(seed, trial)
        steps = cover_run(g, spec, rng, start)
        if steps < g.n - 1:
            raise WalkError("cover run shorter than n - 1 steps; engine is corrupt")
        rows.append(CoverRow(trial=trial, start_vertex=start, steps=steps))
    data = np.array([r.steps for r in rows], dtype=float)
    mean = float(data.mean())
    sd = float(data.std(ddof=1))
    half = 1.96 * sd / math.sqrt(trials)
    return CoverEstimate(mean=mean, stddev=sd, ci95=(mean - half, mean + half), trials=trials, rows=rows)


# ---------------------------------------------------------------------------
# stationary boost audit


@dataclass
class StationaryBoostReport:
    min_margin: float
    failures: int
    bound_exponent: float

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def __bool__(self) -> bool:
        return self.ok


def stationary_boost_audit(g: Graph, targets, theta: float) -> StationaryBoostReport:
    """Checks the stationary lower bound on a target set under decay tilt.

    For a d-regular graph (d >= 3), 0 <= theta <= 1/3, and the chain induced
    by the target-decay weighting toward U, every u in U satisfies

        pi(u) >= (1 / (2 d |U|)) * (|U| / n)^(1 + log(1-theta)/log d).
    """
    d = g.regular_degree
    if d is None or d < 3:
        raise WalkError("stationary boost bound needs a regular graph of degree >= 3")
    if not (0.0 <= theta <= 1.0 / 3.0 + 1e-15):
        raise WalkError("stationary boost bound needs theta in [0, 1/3]")
    u_set = sorted(set(int(v) for v in targets))
    if not u_set:
        raise WalkError("stationary boost bound needs a non-empty target set")
    chain = induced_chain(g, target_decay_weighting(g, u_set, theta))
    exponent = 1.0 + (math.log1p(-theta) / math.log(d) if theta > 0.0 else 0.0)
    bound = (1.0 / (2.0 * d * len(u_set))) * (len(u_set) / g.n) ** exponent
    margins = [float(chain.pi[u]) - bound for u in u_set]
    failures = sum(1 for m in margins if m < -1e-15)
    return StationaryBoostReport(min_margin=min(margins), failures=failures, bound_exponent=exponent)
