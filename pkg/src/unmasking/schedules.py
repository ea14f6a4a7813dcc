"""Unmasking schedules and their exact error calculus on an information curve.

A schedule s = (s_1,...,s_k) with positive parts summing to n reveals s_i
fresh coordinates in round i.  Its node vector N_a = 1 + s_1 + ... + s_{a-1}
marks the first curve index each round touches.  The central fact this module
computes with is an exact identity: the expected KL between the source and
the parallel-unmasking output, averaged over uniform ordered partitions with
these block sizes, equals the L1 gap between the information curve Z and its
left-Riemann staircase through the nodes,

    error(s) = sum_a sum_{j=N_a}^{N_{a+1}-1} (Z_j - Z_{N_a}).

Everything downstream is bookkeeping on that quantity: an O(n^2 k) dynamic
program for the best k nodes, geometric step constructions whose error stays
below a target eps whenever a supplied upper estimate ("hat") dominates the
true total correlation (or its dual), a two-phase construction with
O(sqrt(dtc * n / eps)) rounds, a closed-form upper bound in terms of the
largest step, and the power-of-two hat grid the sweep command scans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import CorrelationSummary, InfoCurve
from .errors import DimensionMismatch, InvalidTolerance, NonMonotoneNodes


@dataclass(frozen=True)
class Schedule:
    """Round sizes (s_1,...,s_k), each >= 1; reveals sum(steps) coordinates."""

    steps: tuple[int, ...]

    def __post_init__(self) -> None:
        steps = tuple(int(s) for s in self.steps)
        if not steps:
            raise DimensionMismatch("schedule needs at least one round")
        if any(s < 1 for s in steps):
            raise DimensionMismatch(f"step sizes must be >= 1, got {steps}")
        object.__setattr__(self, "steps", steps)

    @property
    def n(self) -> int:
        return sum(self.steps)

    @property
    def k(self) -> int:
        return len(self.steps)

    @property
    def max_step(self) -> int:
        return max(self.steps)


@dataclass(frozen=True)
class NodeVector:
    """Strictly increasing round-start indices, beginning at 1."""

    nodes: tuple[int, ...]

    def __post_init__(self) -> None:
        nodes = tuple(int(v) for v in self.nodes)
        if not nodes:
            raise NonMonotoneNodes("node vector is empty")
        if nodes[0] != 1:
            raise NonMonotoneNodes(f"first node must be 1, got {nodes[0]}")
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise NonMonotoneNodes(f"nodes must strictly increase, got {nodes}")
        object.__setattr__(self, "nodes", nodes)

    @property
    def k(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class ScheduleReport:
    """A schedule bundled with its provenance and predicted error."""

    schedule: Schedule
    k: int
    predicted_kl: float | None = None
    source: str = "custom"

    def __post_init__(self) -> None:
        if self.source not in ("dp", "tc", "dtc", "austin", "singles", "one_shot", "custom"):
            raise ValueError(f"unknown schedule source {self.source!r}")
        if self.k != self.schedule.k:
            raise DimensionMismatch(f"k = {self.k} but schedule has {self.schedule.k} rounds")


def iter_compositions(n: int):
    """Yield every schedule for n coordinates (all 2^(n-1) compositions)."""
    if n < 1:
        raise DimensionMismatch(f"need n >= 1, got {n}")

    def rec(remaining: int):
        if remaining == 0:
            yield ()
            return
        for first in range(1, remaining + 1):
            for tail in rec(remaining - first):
                yield (first,) + tail

    for steps in rec(n):
        yield Schedule(steps)


def one_shot(n: int) -> Schedule:
    """Reveal everything in a single round."""
    return Schedule((n,))


def all_singles(n: int) -> Schedule:
    """Reveal one coordinate per round."""
    return Schedule((1,) * n)


def schedule_to_nodes(s: Schedule) -> NodeVector:
    """Round-start indices N_a = 1 + s_1 + ... + s_{a-1}."""
    nodes = [1]
    for step in s.steps[:-1]:
        nodes.append(nodes[-1] + step)
    return NodeVector(tuple(nodes))


def nodes_to_schedule(nodes: NodeVector, n: int) -> Schedule:
    """Inverse of :func:`schedule_to_nodes` for a given total length n."""
    vals = nodes.nodes
    if vals[-1] > n:
        raise NonMonotoneNodes(f"node {vals[-1]} exceeds n = {n}")
    steps = [b - a for a, b in zip(vals, vals[1:])]
    steps.append(n - vals[-1] + 1)
    return Schedule(tuple(steps))


def _curve_values(curve) -> np.ndarray:
    if isinstance(curve, InfoCurve):
        return curve.values
    return np.asarray(curve, dtype=float).ravel()


def left_riemann_seq(curve, nodes: NodeVector) -> np.ndarray:
    """The staircase Z^N: Z^N_j = Z_{N_a} for N_a <= j < N_{a+1} (and beyond N_k)."""
    Z = _curve_values(curve)
    arr = np.asarray(nodes.nodes)
    if arr[-1] > Z.size:
        raise NonMonotoneNodes(f"node {arr[-1]} exceeds curve length {Z.size}")
    j = np.arange(1, Z.size + 1)
    idx = np.searchsorted(arr, j, side="right") - 1
    return Z[arr[idx] - 1]


def riemann_error(curve, s: Schedule) -> float:
    """Exact schedule error: the L1 gap between the curve and its staircase."""
    Z = _curve_values(curve)
    if s.n != Z.size:
        raise DimensionMismatch(f"schedule covers {s.n} coordinates, curve has {Z.size}")
    stair = left_riemann_seq(Z, schedule_to_nodes(s))
    return float((Z - stair).sum())


def optimal_nodes_dp(curve, k: int) -> tuple[NodeVector, float]:
    """Error-minimizing k-round node vector, by dynamic programming.

    Minimizes the staircase gap over all strictly increasing node vectors of
    length exactly k starting at 1 (for a nondecreasing curve this also
    minimizes over <= k rounds, since splitting a round never hurts).  Ties
    are broken toward the lexicographically smallest node vector.  O(n^2 k).
    """
    Z = _curve_values(curve)
    n = Z.size
    if not 1 <= k <= n:
        raise DimensionMismatch(f"need 1 <= k <= n, got k={k}, n={n}")
    P = np.concatenate(([0.0], np.cumsum(Z)))

    def seg_costs(j: int, ends: np.ndarray) -> np.ndarray:
        # cost of the run from node j up to (excluding) each candidate end
        return (P[ends - 1] - P[j - 1]) - (ends - j) * Z[j - 1]

    INF = math.inf
    g = np.full((k + 1, n + 2), INF)
    ends_full = np.arange(1, n + 2)
    for j in range(1, n + 1):
        g[1, j] = seg_costs(j, np.array([n + 1]))[0]
    for t in range(2, k + 1):
        for j in range(1, n + 2 - t):
            nxt = ends_full[j : n]  # candidate next nodes j+1 .. n
            cand = seg_costs(j, nxt) + g[t - 1, nxt]
            if cand.size:
                g[t, j] = cand.min()
    total = float(g[k, 1])
    nodes = [1]
    j = 1
    for t in range(k, 1, -1):
        nxt = ends_full[j : n]
        cand = seg_costs(j, nxt) + g[t - 1, nxt]
        best = int(np.flatnonzero(cand == cand.min())[0])
        j = int(nxt[best])
        nodes.append(j)
    return NodeVector(tuple(nodes)), total


def _check_plan_args(hat: float, eps: float, n: int) -> None:
    if not (math.isfinite(eps) and eps > 0):
        raise InvalidTolerance(f"eps must be positive and finite, got {eps!r}")
    if not (math.isfinite(hat) and hat >= 0):
        raise ValueError(f"estimate must be a finite value >= 0, got {hat!r}")
    if n < 1:
        raise DimensionMismatch(f"need n >= 1, got {n}")


def _zeta(hat: float, eps: float) -> int:
    return 1 + math.ceil(hat / eps)


def _geometric_lambda(zeta: int, n: int) -> int:
    shrink = math.log(1.0 / (1.0 - 1.0 / zeta))
    return math.floor(math.log(n - zeta + 1) / shrink) + 2


def geometric_round_bound(hat: float, eps: float, n: int) -> float:
    """Round-count guarantee for the geometric constructions:
    k <= 2 + (1 + ln n)(1 + ceil(hat/eps))."""
    _check_plan_args(hat, eps, n)
    return 2.0 + (1.0 + math.log(n)) * (1.0 + math.ceil(hat / eps))


def tc_schedule(tc_hat: float, eps: float, n: int) -> Schedule:
    """Front-loaded geometric schedule with error <= eps whenever TC <= tc_hat.

    Grows the node sequence by N_i = N_{i-1} + floor((n - N_{i-1}) / zeta)
    with zeta = 1 + ceil(tc_hat/eps) for a logarithmic number of rounds, then
    finishes with unit steps; stalled (zero) steps are dropped.  tc_hat = 0
    yields the one-shot schedule; zeta > n yields all singles.
    """
    _check_plan_args(tc_hat, eps, n)
    zeta = _zeta(tc_hat, eps)
    if zeta <= 1:
        return one_shot(n)
    if zeta >= n + 1:
        return all_singles(n)
    lam = _geometric_lambda(zeta, n)
    N = [0]
    for _ in range(lam):
        N.append(N[-1] + (n - N[-1]) // zeta)
    while N[-1] < n:
        N.append(N[-1] + 1)
    steps = tuple(b - a for a, b in zip(N, N[1:]) if b > a)
    return Schedule(steps)


def dtc_schedule(dtc_hat: float, eps: float, n: int) -> Schedule:
    """Back-loaded geometric schedule with error <= eps whenever DTC <= dtc_hat.

    Runs the shrinking recursion M_i = ceil(M_{i-1} (1 - 1/zeta)) from M_0 = n
    and reads the steps off in reverse; this is exactly the reversal of
    :func:`tc_schedule` with the same parameters.
    """
    _check_plan_args(dtc_hat, eps, n)
    zeta = _zeta(dtc_hat, eps)
    if zeta <= 1:
        return one_shot(n)
    if zeta >= n + 1:
        return all_singles(n)
    lam = _geometric_lambda(zeta, n)
    M = [n]
    for _ in range(lam):
        M.append((M[-1] * (zeta - 1) + zeta - 1) // zeta)
    while M[-1] > 0:
        M.append(M[-1] - 1)
    steps = tuple(a - b for a, b in zip(M, M[1:]) if a > b)
    return Schedule(tuple(reversed(steps)))


def austin_schedule(dtc_hat: float, eps: float, n: int) -> Schedule:
    """Two-phase schedule with error <= eps whenever DTC <= dtc_hat and
    k <= max(1, 3 * sqrt(dtc_hat * n / eps)) rounds.

    Phase one reveals u = floor(sqrt(dtc_hat * n / eps)) coordinates one at a
    time (all singles if u >= n); phase two covers the rest in
    ell = ceil(sqrt(dtc_hat * n / eps)) near-equal blocks, with the trailing
    remainder folded into the last block.  dtc_hat = 0 yields one-shot.
    """
    _check_plan_args(dtc_hat, eps, n)
    if dtc_hat == 0:
        return one_shot(n)
    root = math.sqrt(dtc_hat * n / eps)
    u = math.floor(root)
    if u >= n:
        return all_singles(n)
    m = n - u
    ell = max(1, min(math.ceil(root), m))
    b, r = divmod(m, ell)
    blocks = (b,) * (ell - 1) + (b + r,)
    return Schedule((1,) * u + blocks)


def licai_bound(summary: CorrelationSummary, s_max: int, n: int) -> float:
    """Closed-form error bound (2^ceil(log2 s_max) - 1)/n * (tc + dtc).

    Valid for any schedule whose largest step is s_max; singles (s_max = 1)
    get a bound of zero, matching their exact error.
    """
    if s_max < 1:
        raise DimensionMismatch(f"largest step must be >= 1, got {s_max}")
    if n < 1:
        raise DimensionMismatch(f"need n >= 1, got {n}")
    pow2 = 1 << (s_max - 1).bit_length()
    return (pow2 - 1) / n * (summary.tc + summary.dtc)


def sweep_grid(n: int, q: int, eps: float, mode: str = "value") -> list[tuple[float, float]]:
    """Power-of-two hat grid for the sweep command, as (tc_hat, dtc_hat) pairs.

    In the default "value" mode the grid is {2^i} from the eps scale
    (2^ceil(log2 max(eps, 1))) up to 2^ceil(log2(n log2 q)), so every
    achievable correlation value has a grid point within a factor of two.
    The "exponent" mode instead takes integer exponents i with
    eps <= i <= n log2 q literally.  An empty range collapses to the single
    coarsest value.  The pair list is the full cross product.
    """
    if not (math.isfinite(eps) and eps > 0):
        raise InvalidTolerance(f"eps must be positive and finite, got {eps!r}")
    if n < 1 or q < 2:
        raise DimensionMismatch(f"need n >= 1 and q >= 2, got n={n}, q={q}")
    upper = n * math.log2(q)
    if mode == "value":
        i_lo = math.ceil(math.log2(max(eps, 1.0)))
        i_hi = math.ceil(math.log2(upper)) if upper > 1 else 0
    elif mode == "exponent":
        i_lo = math.ceil(eps)
        i_hi = math.floor(upper)
    else:
        raise ValueError(f"unknown sweep-grid mode {mode!r}")
    if i_lo > i_hi:
        exps = [i_hi]
    else:
        exps = list(range(i_lo, i_hi + 1))
    values = [float(2**i) for i in exps]
    return [(t, d) for t in values for d in values]
