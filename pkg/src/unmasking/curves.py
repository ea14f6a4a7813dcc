"""Entropy and information curves of a joint distribution.

For mu on [q]^n define, for 0 <= j <= n,

    H_j = average of H(X_S) over the C(n, j) subsets S of size j,

the subset-averaged entropy curve (H_0 = 0), and for 1 <= j <= n

    Z_j = H_1 + H_{j-1} - H_j,

the information curve: Z_j is the expected mutual information between a fresh
coordinate and a uniformly random pinned set of size j - 1, so Z_1 = 0 and
Z is nondecreasing (a subadditivity fact about entropy averages; concavity of
the H-curve is the same statement).  Everything is in bits.

Two aggregate correlation measures fall out of the curve: the total
correlation sum_i H(X_i) - H(X) equals sum_j Z_j, and the dual total
correlation H(X) - sum_i H(X_i | X_{-i}) equals n*Z_n - sum_j Z_j.  Both are
also computable directly from marginal entropies, which gives the library an
independent cross-check on every curve it produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dist import JointPMF, entropy_bits
from .errors import DimensionMismatch, HanViolation, InfeasibleEnumeration, InvalidTolerance

#: Largest n for which the exact curve (2^n subsets) is attempted.
MAX_EXACT_N = 20

#: Negative-value / monotonicity slack beyond which a curve is rejected.
SHAPE_TOL = 1e-6


@dataclass(frozen=True)
class EntropyCurve:
    """Subset-averaged entropies H_0..H_n, plus optional per-level stderr."""

    values: np.ndarray
    method: str = "exact"
    stderr: np.ndarray | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 2:
            raise DimensionMismatch("entropy curve needs at least levels 0 and 1")
        if not np.all(np.isfinite(v)):
            raise HanViolation("entropy curve contains non-finite values")
        if v[0] != 0.0:
            raise HanViolation(f"H_0 must be 0, got {v[0]!r}")
        if self.method not in ("exact", "monte_carlo"):
            raise ValueError(f"unknown curve method {self.method!r}")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.stderr is not None:
            se = np.asarray(self.stderr, dtype=float).ravel()
            if se.shape != v.shape:
                raise DimensionMismatch("stderr must have one entry per level")
            se = se.copy()
            se.flags.writeable = False
            object.__setattr__(self, "stderr", se)

    @property
    def n(self) -> int:
        return self.values.size - 1

    def shape_violation(self, tol: float = 1e-9) -> str | None:
        """Worst violation of the exact curve's shape laws, or None.

        Checks monotonicity (H_j nondecreasing), concavity of increments, and
        H_1 <= log2 q is left to callers who know q.  Monte-Carlo curves may
        legitimately violate these; exact ones must not.
        """
        v = self.values
        diffs = np.diff(v)
        if diffs.size and diffs.min() < -tol:
            j = int(np.argmin(diffs)) + 1
            return f"H decreases by {-diffs.min():.3g} at level {j}"
        second = np.diff(diffs)
        if second.size and second.max() > tol:
            j = int(np.argmax(second)) + 1
            return f"H increments grow by {second.max():.3g} at level {j}"
        return None


@dataclass(frozen=True)
class InfoCurve:
    """The information curve Z_1..Z_n (bits); values[j-1] holds Z_j."""

    values: np.ndarray
    stderr: np.ndarray | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 1:
            raise DimensionMismatch("information curve needs at least one level")
        if not np.all(np.isfinite(v)):
            raise HanViolation("information curve contains non-finite values")
        if abs(v[0]) > SHAPE_TOL:
            raise HanViolation(f"Z_1 must be 0, got {v[0]:.3g}")
        if v.min() < -SHAPE_TOL:
            raise HanViolation(f"negative curve value {v.min():.3g}")
        diffs = np.diff(v)
        if diffs.size and diffs.min() < -SHAPE_TOL:
            j = int(np.argmin(diffs)) + 1
            raise HanViolation(
                f"Z decreases by {-diffs.min():.3g} between levels {j} and {j + 1}"
            )
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.stderr is not None:
            se = np.asarray(self.stderr, dtype=float).ravel()
            if se.shape != v.shape:
                raise DimensionMismatch("stderr must have one entry per level")
            se = se.copy()
            se.flags.writeable = False
            object.__setattr__(self, "stderr", se)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class CorrelationSummary:
    """Total correlation, dual total correlation, and the curve endpoint (bits)."""

    tc: float
    dtc: float
    z_n: float

    def __post_init__(self) -> None:
        for name, val in (("tc", self.tc), ("dtc", self.dtc)):
            if not math.isfinite(val):
                raise HanViolation(f"{name} is not finite")
            if val < -1e-9:
                raise HanViolation(f"{name} = {val:.3g} is negative beyond tolerance")


def _subset_entropy(table: np.ndarray, subset: tuple[int, ...], n: int) -> float:
    drop = tuple(ax for ax in range(n) if ax not in subset)
    arr = table.sum(axis=drop) if drop else table
    return entropy_bits(np.asarray(arr).ravel())


def entropy_curve_exact(p: JointPMF, memoize: bool = False) -> EntropyCurve:
    """Exact H-curve by enumerating all subsets of each size.

    Each marginal is computed independently from the full table (simple, cache
    free).  ``memoize=True`` instead reuses each level's marginals to build the
    next level down, trading memory (every size-j marginal is held at once)
    for fewer passes over the full table; results are identical.
    """
    if p.n > MAX_EXACT_N:
        raise InfeasibleEnumeration(
            f"exact curve enumerates 2^n subsets; n = {p.n} exceeds {MAX_EXACT_N}"
        )
    n = p.n
    table = p.table()
    values = np.zeros(n + 1)
    if memoize:
        level: dict[tuple[int, ...], np.ndarray] = {tuple(range(n)): table}
        values[n] = entropy_bits(p.probs)
        for j in range(n - 1, 0, -1):
            nxt: dict[tuple[int, ...], np.ndarray] = {}
            acc = 0.0
            for subset in combinations(range(n), j):
                missing = min(set(range(n)) - set(subset))
                parent = tuple(sorted(subset + (missing,)))
                arr = level[parent].sum(axis=parent.index(missing))
                nxt[subset] = arr
                acc += entropy_bits(np.asarray(arr).ravel())
            values[j] = acc / math.comb(n, j)
            level = nxt
    else:
        for j in range(1, n + 1):
            acc = 0.0
            for subset in combinations(range(n), j):
                acc += _subset_entropy(table, subset, n)
            values[j] = acc / math.comb(n, j)
    curve = EntropyCurve(values, method="exact")
    violation = curve.shape_violation(1e-9)
    if violation is not None:
        raise HanViolation(f"exact entropy curve failed shape check: {violation}")
    return curve


def entropy_curve_mc(
    p: JointPMF,
    samples_per_level: int,
    seed: int,
    dedup: bool = False,
) -> EntropyCurve:
    """Monte-Carlo H-curve: average H(X_S) over uniform size-j subsets.

    Levels 0 and n are exact (one subset each).  Each interior level uses an
    independent child stream spawned from ``seed``, so level estimates do not
    share randomness.  With ``dedup=True`` subsets are drawn without
    replacement, and a level whose subset count does not exceed the budget is
    enumerated exhaustively (stderr 0).
    """
    if samples_per_level < 1:
        raise InvalidTolerance(f"samples_per_level must be >= 1, got {samples_per_level}")
    n = p.n
    table = p.table()
    values = np.zeros(n + 1)
    stderr = np.zeros(n + 1)
    values[n] = entropy_bits(p.probs)
    streams = np.random.SeedSequence(seed).spawn(max(n - 1, 1))
    for j in range(1, n):
        total = math.comb(n, j)
        if dedup and samples_per_level >= total:
            ents = [_subset_entropy(table, s, n) for s in combinations(range(n), j)]
            values[j] = float(np.mean(ents))
            continue
        rng = np.random.default_rng(streams[j - 1])
        if dedup:
            seen: set[tuple[int, ...]] = set()
            while len(seen) < samples_per_level:
                seen.add(tuple(sorted(rng.choice(n, size=j, replace=False).tolist())))
            subsets = sorted(seen)
        else:
            subsets = [
                tuple(sorted(rng.choice(n, size=j, replace=False).tolist()))
                for _ in range(samples_per_level)
            ]
        ents = np.array([_subset_entropy(table, s, n) for s in subsets])
        values[j] = float(ents.mean())
        if len(ents) > 1:
            stderr[j] = float(ents.std(ddof=1) / math.sqrt(len(ents)))
    return EntropyCurve(values, method="monte_carlo", stderr=stderr)


def info_curve_from_entropy(curve: EntropyCurve) -> InfoCurve:
    """Z_j = H_1 + H_{j-1} - H_j for j = 1..n, with shape checks.

    A consecutive decrease larger than 1e-6, or a value below -1e-6, raises
    HanViolation (this is how noisy Monte-Carlo curves fail loudly).  Smaller
    negatives are float dust and are clamped to zero.
    """
    H = curve.values
    n = curve.n
    Z = H[1] + H[:n] - H[1 : n + 1]
    if Z.min() < -SHAPE_TOL:
        raise HanViolation(f"information curve value {Z.min():.3g} below -{SHAPE_TOL}")
    diffs = np.diff(Z)
    if diffs.size and diffs.min() < -SHAPE_TOL:
        j = int(np.argmin(diffs)) + 1
        raise HanViolation(
            f"information curve decreases by {-diffs.min():.3g} between levels {j} and {j + 1}"
        )
    Z = np.maximum(Z, 0.0)
    se = None
    if curve.stderr is not None:
        s = curve.stderr
        se = np.sqrt(s[1] ** 2 + s[:n] ** 2 + s[1 : n + 1] ** 2)
        se[0] = 0.0
    return InfoCurve(Z, stderr=se)


def tc_dtc_from_curve(curve: InfoCurve) -> CorrelationSummary:
    """Summary statistics from the curve: tc = sum Z_j, dtc = n*Z_n - tc.

    Like the Z transform itself, this validates on the raw floats and then
    clamps cancellation dust to exactly 0, so e.g. the dtc of a product
    distribution can be fed straight to a planner as an estimate.
    """
    tc = float(curve.values.sum())
    z_n = float(curve.values[-1])
    dtc = curve.n * z_n - tc
    gap = abs(tc + dtc - curve.n * z_n)
    if gap > 1e-9:
        raise HanViolation(f"tc + dtc fails to match n*z_n by {gap:.3g}")
    if min(tc, dtc) < -SHAPE_TOL:
        raise HanViolation(f"negative correlation summary: tc={tc!r}, dtc={dtc!r}")
    return CorrelationSummary(tc=max(tc, 0.0), dtc=max(dtc, 0.0), z_n=z_n)


def tc_direct(p: JointPMF) -> float:
    """Total correlation sum_i H(X_i) - H(X), straight from marginals."""
    table = p.table()
    singles = sum(_subset_entropy(table, (i,), p.n) for i in range(p.n))
    return singles - entropy_bits(p.probs)


def dtc_direct(p: JointPMF) -> float:
    """Dual total correlation sum_i H(X_{-i}) - (n-1) H(X), from leave-one-out marginals."""
    n = p.n
    if n == 1:
        return 0.0
    table = p.table()
    loo = 0.0
    for i in range(n):
        subset = tuple(j for j in range(n) if j != i)
        loo += _subset_entropy(table, subset, n)
    return loo - (n - 1) * entropy_bits(p.probs)


def info_curve_exact(p: JointPMF, memoize: bool = False) -> InfoCurve:
    """Convenience: exact entropy curve piped through the Z transform."""
    return info_curve_from_entropy(entropy_curve_exact(p, memoize=memoize))
