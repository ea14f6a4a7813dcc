"""Best piecewise-constant approximation of nonnegative curves, exactly.

Given f on positions 1..n and a budget of k pieces, the task is the L1-optimal
partition of the axis into at most k intervals, each predicted by a single
level.  Two level rules are supported: "free" (any real; the optimum is a
weighted median of the piece) and "left" (the piece is pinned to its first
value, which on an information curve makes the fit identical to the staircase
of a node vector, tying this module to `schedules.optimal_nodes_dp`).

The dynamic program is exact but runs on the run-length compression of f
rather than raw positions: within a maximal run of equal values the L1 cost
of a breakpoint is linear in its position, so some optimal solution breaks
only at run boundaries.  Curves built from geometric blocks (the adversarial
family below) compress from n = 2^14 positions to ~log(n)^2 runs, which is
what makes the exhaustive experiment cheap.

The adversarial family: positions are tiled by geometric blocks
[floor((1+eps)^i), floor((1+eps)^{i+1}) - 1] holding the value
(1+eps)^{-i} / (4 ln n).  Each block carries roughly equal mass, so no small
number of pieces can hug the curve: the best-k error stays a fixed fraction
of eps even for k of order log(n)/eps, which is the lower-bound experiment
the CLI exposes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidTolerance

LEVEL_MODES = ("free", "left")


@dataclass(frozen=True)
class DiscreteCurve:
    """A nonnegative function on positions 1..n, stored as values[j-1] = f(j)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 1:
            raise DimensionMismatch("curve needs at least one position")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DimensionMismatch("curve values must be finite and nonnegative")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class PiecewiseFit:
    """A piecewise-constant fit: piece p starts at breakpoints[p] (1-based)."""

    breakpoints: tuple[int, ...]
    levels: tuple[float, ...]
    error: float

    def __post_init__(self) -> None:
        bp = tuple(int(b) for b in self.breakpoints)
        if not bp or bp[0] != 1 or any(b <= a for a, b in zip(bp, bp[1:])):
            raise DimensionMismatch(f"breakpoints must strictly increase from 1, got {bp}")
        if len(self.levels) != len(bp):
            raise DimensionMismatch("need exactly one level per piece")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))

    @property
    def k(self) -> int:
        return len(self.breakpoints)

    def predict(self, n: int) -> np.ndarray:
        """The fitted step function on positions 1..n."""
        if self.breakpoints[-1] > n:
            raise DimensionMismatch(f"breakpoint {self.breakpoints[-1]} exceeds n = {n}")
        bp = np.asarray(self.breakpoints)
        idx = np.searchsorted(bp, np.arange(1, n + 1), side="right") - 1
        return np.asarray(self.levels)[idx]

    def evaluate(self, curve: DiscreteCurve) -> float:
        """Recompute the L1 error of this fit against a curve."""
        return float(np.abs(curve.values - self.predict(curve.n)).sum())


def _runs(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run-length compression: (run values, run lengths, run start positions)."""
    change = np.flatnonzero(np.diff(values)) + 1
    starts = np.concatenate(([0], change))
    lengths = np.diff(np.concatenate((starts, [values.size])))
    return values[starts], lengths.astype(float), starts + 1


def _median_cost(v: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    """Weighted-median level and L1 cost for one segment of runs."""
    order = np.argsort(v, kind="stable")
    vs, ws = v[order], w[order]
    half = ws.sum() / 2.0
    med = vs[int(np.searchsorted(np.cumsum(ws), half))]
    return float(med), float((ws * np.abs(vs - med)).sum())


def best_k_piecewise(f: DiscreteCurve, k: int, levels: str = "free") -> PiecewiseFit:
    """L1-optimal piecewise-constant fit with at most k pieces.

    Exact dynamic program over the run-length compression of f; uses exactly
    min(k, #runs) pieces (more can never help) and breaks ties toward the
    lexicographically smallest breakpoint vector.
    """
    if levels not in LEVEL_MODES:
        raise ValueError(f"level mode must be one of {LEVEL_MODES}, got {levels!r}")
    if k < 1:
        raise DimensionMismatch(f"need k >= 1, got {k}")
    v, w, starts = _runs(f.values)
    R = v.size
    kk = min(k, R)
    # cost[a][b]: L1 error of covering runs a..b with one piece
    cost = np.zeros((R, R))
    for a in range(R):
        if levels == "left":
            cost[a, a:] = np.cumsum(w[a:] * np.abs(v[a:] - v[a]))
        else:
            for b in range(a, R):
                cost[a, b] = _median_cost(v[a : b + 1], w[a : b + 1])[1]
    INF = math.inf
    D = np.full((kk + 1, R + 1), INF)
    D[0, R] = 0.0
    for t in range(1, kk + 1):
        for r in range(R - 1, -1, -1):
            ends = np.arange(r + 1, R + 1)
            cand = cost[r, ends - 1] + D[t - 1, ends]
            if cand.size:
                D[t, r] = cand.min()
    error = float(D[kk, 0])
    # reconstruct, preferring the earliest feasible next start at every stage
    pieces: list[int] = [0]
    r = 0
    for t in range(kk, 1, -1):
        ends = np.arange(r + 1, R + 1)
        cand = cost[r, ends - 1] + D[t - 1, ends]
        r = int(ends[np.flatnonzero(cand == cand.min())[0]])
        pieces.append(r)
    breakpoints = tuple(int(starts[p]) for p in pieces)
    fitted = []
    for i, p in enumerate(pieces):
        last = pieces[i + 1] - 1 if i + 1 < len(pieces) else R - 1
        if levels == "left":
            fitted.append(float(v[p]))
        else:
            fitted.append(_median_cost(v[p : last + 1], w[p : last + 1])[0])
    return PiecewiseFit(breakpoints=breakpoints, levels=tuple(fitted), error=error)


def in_hypothesis_range(n: int, eps: float) -> bool:
    """Whether (n, eps) falls in the window where the lower bound is proven:
    (2/n) ln(2/eps) <= eps <= 1/ln(n)."""
    return (2.0 / n) * math.log(2.0 / eps) <= eps <= 1.0 / math.log(n)


def hard_curve(n: int, eps: float) -> DiscreteCurve:
    """The geometric-block adversarial curve on positions 1..n.

    Block i covers [floor((1+eps)^i), floor((1+eps)^{i+1}) - 1] (clipped to n;
    empty when the two floors agree) and holds the value
    (1+eps)^{-i} / (4 ln n).  Total mass is at most 1.  Outside the proven
    hypothesis window the curve is still built, with a warning.
    """
    if not (math.isfinite(eps) and eps > 0):
        raise InvalidTolerance(f"eps must be positive and finite, got {eps!r}")
    if n < 2:
        raise DimensionMismatch(f"need n >= 2, got {n}")
    if not in_hypothesis_range(n, eps):
        warnings.warn(
            f"(n={n}, eps={eps:g}) is outside the proven window "
            f"(2/n) ln(2/eps) <= eps <= 1/ln n; constructing anyway",
            stacklevel=2,
        )
    max_blocks = 5 * 10**6
    if math.log(n + 1) / math.log1p(eps) > max_blocks:
        raise InvalidTolerance(
            f"eps = {eps:g} produces more than {max_blocks} geometric blocks for n = {n}"
        )
    vals = np.zeros(n)
    log_n = math.log(n)
    i = 0
    while True:
        lo = math.floor((1.0 + eps) ** i)
        if lo > n:
            break
        hi = min(math.floor((1.0 + eps) ** (i + 1)) - 1, n)
        if hi >= lo:
            vals[lo - 1 : hi] = 0.25 * (1.0 + eps) ** (-i) / log_n
        i += 1
    return DiscreteCurve(vals)


@dataclass(frozen=True)
class ExperimentRow:
    """One grid point of the lower-bound experiment."""

    n: int
    eps: float
    k: int
    best_error: float
    ratio: float


def lower_bound_experiment(
    n_grid, eps: float | None = None, c: float = 0.05
) -> list[ExperimentRow]:
    """Best-k error of the adversarial curve across a grid of sizes.

    For each n the piece budget is k = max(1, floor(c * ln(n) / eps_n)) with
    eps_n = eps, or 1/ln(n) when eps is None.  Reports the exact best-k error
    and the ratio error/eps_n; a ratio bounded away from zero certifies that
    k pieces cannot track the curve at accuracy eps_n.
    """
    sizes = [int(n) for n in n_grid]
    if not sizes:
        raise DimensionMismatch("empty size grid")
    if eps is not None and not (math.isfinite(eps) and eps > 0):
        raise InvalidTolerance(f"eps must be positive and finite, got {eps!r}")
    rows = []
    for n in sizes:
        eps_n = eps if eps is not None else 1.0 / math.log(n)
        k = max(1, math.floor(c * math.log(n) / eps_n))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            curve = hard_curve(n, eps_n)
        fit = best_k_piecewise(curve, k, levels="free")
        rows.append(
            ExperimentRow(
                n=n, eps=eps_n, k=k, best_error=fit.error, ratio=fit.error / eps_n
            )
        )
    return rows
