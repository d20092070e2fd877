"""Reversible finite Markov chains: spectra, ergodic flow, conductance,
powers, and total-variation mixing.

Everything here is dense linear algebra on small state spaces.  The
eigensolver is a cyclic Jacobi iteration on the similarity-symmetrized
transition matrix D^{1/2} P D^{-1/2}; it returns the full spectrum, which the
spectral report and the gap/conductance audits all need.  Exhaustive
conductance enumerates subsets as bitmask arrays and is guarded at n <= 24;
the spectral path is guarded at n <= 512.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graphs import GuardError

SPECTRAL_GUARD = 512
CONDUCTANCE_GUARD = 24

ROW_SUM_TOL = 1e-12
BALANCE_TOL = 1e-12

__all__ = [
    "ReversibleChain",
    "SpectralReport",
    "ChainError",
    "lazy",
    "jacobi_eigh",
    "spectral_gap",
    "ergodic_flow",
    "candidate_conductance",
    "edge_conductance_exact",
    "power_chain",
    "mixing_time_tv",
    "cheeger_audit",
]


class ChainError(ValueError):
    """Transition data that is not a reversible stochastic chain."""


@dataclass(frozen=True)
class ReversibleChain:
    """Row-stochastic matrix P with stationary law pi satisfying detailed
    balance pi(x) P(x,y) = pi(y) P(y,x).

    Validation happens at construction: row sums and detailed balance to
    1e-12, pi positive and summing to 1.  `is_lazy` records whether the chain
    was built as (P + I)/2; mixing runs use it to enforce the monotone-TV
    sanity check.
    """

    matrix: np.ndarray
    pi: np.ndarray
    is_lazy: bool = False

    def __post_init__(self):
        p = np.asarray(self.matrix, dtype=float)
        pi = np.asarray(self.pi, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ChainError("transition matrix must be square")
        n = p.shape[0]
        if pi.shape != (n,):
            raise ChainError("pi has wrong length")
        if np.any(p < -1e-15):
            raise ChainError("negative transition probability")
        if np.max(np.abs(p.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ChainError("rows must sum to 1 within 1e-12")
        if np.any(pi <= 0.0):
            raise ChainError("pi must be strictly positive")
        if abs(pi.sum() - 1.0) > ROW_SUM_TOL:
            raise ChainError("pi must sum to 1 within 1e-12")
        flow = pi[:, None] * p
        if np.max(np.abs(flow - flow.T)) > BALANCE_TOL:
            raise ChainError("detailed balance fails at 1e-12")
        p = p.copy()
        pi = pi.copy()
        p.setflags(write=False)
        pi.setflags(write=False)
        object.__setattr__(self, "matrix", p)
        object.__setattr__(self, "pi", pi)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def flow_matrix(self) -> np.ndarray:
        """Edge measure Q(x, y) = pi(x) P(x, y)."""
        f = self.pi[:, None] * self.matrix
        f.setflags(write=False)
        return f


def lazy(chain: ReversibleChain) -> ReversibleChain:
    """Lazy version (P + I)/2; same stationary law, halved spectral gap."""
    n = chain.n
    return ReversibleChain((chain.matrix + np.eye(n)) / 2.0, chain.pi, is_lazy=True)


# ---------------------------------------------------------------------------
# spectrum


def jacobi_eigh(
    a: np.ndarray,
    tol: float = 1e-11,
    max_sweeps: int = 60,
    vectors: bool = False,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Cyclic Jacobi eigensolver for a symmetric matrix.

    Sweeps rotate away off-diagonal entries until their Frobenius norm drops
    below `tol`.  Returns eigenvalues in descending order and, when
    `vectors` is set, the matching orthonormal eigenvector columns.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ChainError("jacobi_eigh needs a square matrix")
    if np.max(np.abs(a - a.T)) > 1e-10:
        raise ChainError("jacobi_eigh needs a symmetric matrix")
    a = (a + a.T) / 2.0
    v = np.eye(n) if vectors else None
    if n == 1:
        return a.diagonal().copy(), v

    def off_norm() -> float:
        # summed from the off-diagonal entries themselves: the subtraction
        # form total - diag^2 has a sqrt(eps) cancellation floor above tol
        off = a - np.diag(a.diagonal())
        return float(np.sqrt((off * off).sum()))

    skip = 1e-300
    for _ in range(max_sweeps):
        if off_norm() < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
                if v is not None:
                    vp = v[:, p].copy()
                    v[:, p] = c * vp - s * v[:, q]
                    v[:, q] = s * vp + c * v[:, q]
    else:
        raise ChainError("jacobi_eigh did not converge")
    vals = a.diagonal().copy()
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    if v is not None:
        v = v[:, order]
    return vals, v


@dataclass(frozen=True)
class SpectralReport:
    """Full spectrum of a reversible chain plus the derived gap figures."""

    eigenvalues: tuple[float, ...]
    gap: float
    lambda_min: float
    lazy_gap: float

    def to_json_dict(self, phi: float | None = None, phi_argmin=None) -> dict:
        d = {
            "eigenvalues": [round(x, 12) for x in self.eigenvalues],
            "gap": self.gap,
            "lazy_gap": self.lazy_gap,
            "phi": phi,
            "phi_argmin": sorted(phi_argmin) if phi_argmin is not None else None,
        }
        return d


def symmetrized(chain: ReversibleChain) -> np.ndarray:
    """Similarity transform D_pi^{1/2} P D_pi^{-1/2}, forced exactly symmetric."""
    root = np.sqrt(chain.pi)
    m = (root[:, None] / root[None, :]) * chain.matrix
    return (m + m.T) / 2.0


def spectral_gap(chain: ReversibleChain) -> SpectralReport:
    """Eigenvalues (descending), gap = 1 - lambda_2, and the lazy gap.

    The chain is symmetrized by the stationary similarity transform, so the
    spectrum is real; lambda_1 = 1 always.  Guarded at n <= 512.
    """
    if chain.n > SPECTRAL_GUARD:
        raise GuardError(f"spectral_gap is dense; n={chain.n} exceeds guard {SPECTRAL_GUARD}")
    vals, _ = jacobi_eigh(symmetrized(chain))
    vals_t = tuple(float(x) for x in vals)
    if chain.n == 1:
        return SpectralReport(vals_t, 0.0, vals_t[-1], 0.0)
    gap = 1.0 - vals_t[1]
    return SpectralReport(vals_t, gap, vals_t[-1], gap / 2.0)


# ---------------------------------------------------------------------------
# flow and conductance


def _as_index_set(chain: ReversibleChain, subset) -> np.ndarray:
    s = sorted(set(int(v) for v in subset))
    if any(v < 0 or v >= chain.n for v in s):
        raise ChainError("subset vertex out of range")
    return np.array(s, dtype=np.int64)


def ergodic_flow(chain: ReversibleChain, subset) -> float:
    """Q(S, S^c) = sum over x in S, y outside of pi(x) P(x, y)."""
    idx = _as_index_set(chain, subset)
    if idx.size == 0:
        raise ChainError("ergodic_flow needs a non-empty subset")
    if idx.size == chain.n:
        raise ChainError("ergodic_flow needs a proper subset")
    inside = np.zeros(chain.n, dtype=bool)
    inside[idx] = True
    f = chain.flow_matrix
    return float(f[np.ix_(inside, ~inside)].sum())


def candidate_conductance(chain: ReversibleChain, subset) -> float:
    """Flow-to-mass ratio Q(S, S^c) / pi(S) for one subset with pi(S) <= 1/2."""
    idx = _as_index_set(chain, subset)
    mass = float(chain.pi[idx].sum())
    if idx.size == 0 or mass <= 0.0:
        raise ChainError("candidate_conductance needs a set of positive mass")
    if mass > 0.5 + 1e-12:
        raise ChainError("candidate_conductance needs pi(S) <= 1/2")
    return ergodic_flow(chain, subset) / mass


def edge_conductance_exact(chain: ReversibleChain) -> tuple[float, frozenset[int]]:
    """Exhaustive conductance Phi = min over 0 < pi(S) <= 1/2 of Q(S,S^c)/pi(S).

    Enumerates all subsets as bitmask arrays; cost is O(nnz(P) * 2^n),
    guarded at n <= 24.  Ties resolve to the smallest subset bitmask.
    """
    n = chain.n
    if n > CONDUCTANCE_GUARD:
        raise GuardError(f"edge_conductance_exact is exhaustive; n={n} exceeds guard {CONDUCTANCE_GUARD}")
    if n < 2:
        raise ChainError("conductance needs n >= 2")
    size = 1 << n
    masks = np.arange(size, dtype=np.uint32)
    bit = [((masks >> np.uint32(v)) & np.uint32(1)).astype(bool) for v in range(n)]
    mass = np.zeros(size)
    for v in range(n):
        mass[bit[v]] += chain.pi[v]
    flow = np.zeros(size)
    f = chain.flow_matrix
    xs, ys = np.nonzero(chain.matrix > 0.0)
    for x, y in zip(xs.tolist(), ys.tolist()):
        if x == y:
            continue
        flow[bit[x] & ~bit[y]] += f[x, y]
    valid = (mass > 0.0) & (mass <= 0.5 + 1e-12)
    ratio = np.full(size, np.inf)
    ratio[valid] = flow[valid] / mass[valid]
    best = int(np.argmin(ratio))
    members = frozenset(v for v in range(n) if best >> v & 1)
    return float(ratio[best]), members


# ---------------------------------------------------------------------------
# powers and mixing


def power_chain(chain: ReversibleChain, m: int) -> ReversibleChain:
    """m-step chain P^m with the same stationary law.

    Rows are renormalized after the matrix power to absorb float drift
    (a relative 1e-14 effect, never a semantic change).
    """
    if m < 1:
        raise ChainError("power_chain needs m >= 1")
    pm = np.linalg.matrix_power(chain.matrix, m)
    pm = np.maximum(pm, 0.0)
    pm /= pm.sum(axis=1, keepdims=True)
    return ReversibleChain(pm, chain.pi, is_lazy=chain.is_lazy)


def mixing_time_tv(chain: ReversibleChain, start: int, horizon: int | None = None) -> int | None:
    """Smallest t >= 1 with TV(P^t(start, .), pi) <= 1/4, or None if the
    distance never crosses 1/4 within the horizon (default 10 n^2).

    For lazy chains the TV sequence is verified to be non-increasing along
    the run; a violation means the chain data is corrupt.
    """
    n = chain.n
    if not (0 <= start < n):
        raise ChainError("start vertex out of range")
    if horizon is None:
        horizon = 10 * n * n
    dist = np.zeros(n)
    dist[start] = 1.0
    prev_tv = float("inf")
    for t in range(1, horizon + 1):
        dist = dist @ chain.matrix
        tv = 0.5 * float(np.abs(dist - chain.pi).sum())
        if chain.is_lazy and tv > prev_tv + 1e-12:
            raise ChainError("TV distance increased along a lazy-chain run")
        prev_tv = tv
        if tv <= 0.25:
            return t
    return None


def cheeger_audit(chain: ReversibleChain, slack: float = 1e-9) -> bool:
    """Checks Phi^2 / 2 <= gap <= 2 Phi within `slack`."""
    phi, _ = edge_conductance_exact(chain)
    gap = spectral_gap(chain).gap
    return (phi * phi / 2.0 - slack <= gap) and (gap <= 2.0 * phi + slack)
