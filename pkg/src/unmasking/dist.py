"""Dense joint distributions over length-n strings and their exact functionals.

A distribution lives on [q]^n = {0,...,q-1}^n and is stored as a flat numpy
vector of q^n probabilities in big-endian coordinate order: the string
(x_0,...,x_{n-1}) sits at index sum_i x_i * q^(n-1-i), so position 0 is the
most significant digit.  ``JointPMF.table()`` exposes the same data reshaped to
an n-dimensional (q,...,q) array, which is the form every marginalization and
conditioning routine works in.

All information quantities are measured in bits (base-2 logs) with the usual
convention 0*log 0 = 0.  Conditioning on an event of probability zero is not
an error here: the conditional rows fall back to uniform, a choice that never
affects any KL against the source distribution because such pinnings carry no
source mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InfeasibleEnumeration,
    NotADistribution,
    PositionOutOfRange,
)

#: Absolute slack allowed on sum(probs) == 1.
PROB_TOL = 1e-12

#: Largest dense table (q**n) the package will materialize.
MAX_TABLE = 2**24


def encode(symbols, q: int) -> int:
    """Flat index of a symbol string under the big-endian convention."""
    idx = 0
    for s in symbols:
        idx = idx * q + int(s)
    return idx


def decode(index: int, n: int, q: int) -> tuple[int, ...]:
    """Inverse of :func:`encode`: the length-n string at a flat index."""
    out = []
    for _ in range(n):
        index, r = divmod(index, q)
        out.append(r)
    return tuple(reversed(out))


@dataclass(frozen=True)
class JointPMF:
    """A full joint distribution over [q]^n as a dense probability vector."""

    n: int
    q: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 1 or self.q < 2:
            raise DimensionMismatch(f"need n >= 1 and q >= 2, got n={self.n}, q={self.q}")
        size = self.q**self.n
        if size > MAX_TABLE:
            raise InfeasibleEnumeration(
                f"table size q**n = {size} exceeds the dense guard {MAX_TABLE}"
            )
        probs = np.asarray(self.probs, dtype=float).ravel()
        if probs.shape != (size,):
            raise DimensionMismatch(
                f"probability vector has length {probs.size}, expected q**n = {size}"
            )
        if not np.all(np.isfinite(probs)):
            raise NotADistribution("probabilities must be finite")
        if np.any(probs < 0):
            raise NotADistribution(f"negative probability (min {probs.min():.3g})")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise NotADistribution(f"probabilities sum to {total!r}, not 1 within {PROB_TOL}")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    def table(self) -> np.ndarray:
        """The probabilities reshaped to an n-dimensional (q,...,q) array."""
        return self.probs.reshape((self.q,) * self.n)

    def prob(self, symbols) -> float:
        """Probability of one string, given as a length-n symbol sequence."""
        symbols = tuple(int(s) for s in symbols)
        if len(symbols) != self.n:
            raise DimensionMismatch(f"string has length {len(symbols)}, expected {self.n}")
        for s in symbols:
            if not 0 <= s < self.q:
                raise PositionOutOfRange(f"symbol {s} outside [0, {self.q})")
        return float(self.probs[encode(symbols, self.q)])


@dataclass(frozen=True)
class PartialAssignment:
    """A pinning of some coordinates: ((position, symbol), ...) with distinct positions."""

    pairs: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self) -> None:
        pairs = tuple((int(p), int(s)) for p, s in self.pairs)
        positions = [p for p, _ in pairs]
        if len(set(positions)) != len(positions):
            raise ValueError(f"duplicate positions in assignment: {sorted(positions)}")
        object.__setattr__(self, "pairs", tuple(sorted(pairs)))

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pairs)

    @property
    def symbols(self) -> tuple[int, ...]:
        return tuple(s for _, s in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class MarginalTable:
    """Conditional next-symbol rows, one length-q distribution per open position."""

    rows: dict[int, np.ndarray]

    def row(self, position: int) -> np.ndarray:
        if position not in self.rows:
            raise PositionOutOfRange(f"no conditional row for position {position}")
        return self.rows[position]


def _check_positions(positions, n: int) -> None:
    for p in positions:
        if not 0 <= p < n:
            raise PositionOutOfRange(f"position {p} outside [0, {n})")


def entropy_bits(p: JointPMF | np.ndarray) -> float:
    """Shannon entropy in bits of a pmf (vector or JointPMF), with 0*log 0 = 0."""
    v = p.probs if isinstance(p, JointPMF) else np.asarray(p, dtype=float).ravel()
    v = v[v > 0]
    return float(-(v * np.log2(v)).sum()) if v.size else 0.0


def marginalize(p: JointPMF, positions) -> JointPMF:
    """Marginal of the coordinates in ``positions``, in the order given.

    The result is a JointPMF on [q]^|S| whose axis t corresponds to source
    position ``positions[t]``.
    """
    S = [int(s) for s in positions]
    if not S:
        raise DimensionMismatch("cannot marginalize onto an empty position set")
    if len(set(S)) != len(S):
        raise ValueError(f"duplicate positions in marginal request: {S}")
    _check_positions(S, p.n)
    drop = tuple(ax for ax in range(p.n) if ax not in set(S))
    arr = p.table().sum(axis=drop) if drop else p.table()
    # after summing, surviving axes sit in ascending position order
    order = sorted(S)
    arr = arr.transpose([order.index(s) for s in S])
    return JointPMF(len(S), p.q, arr.ravel())


def conditional_oracle(p: JointPMF, a: PartialAssignment) -> MarginalTable:
    """Exact single-coordinate conditionals given a pinning of other coordinates.

    Returns one row P(X_j = . | X_T = x_T) for every position j outside the
    pinned set T.  If the pinned event has probability zero the rows are
    uniform rather than an error.
    """
    _check_positions(a.positions, p.n)
    for s in a.symbols:
        if not 0 <= s < p.q:
            raise PositionOutOfRange(f"symbol {s} outside [0, {p.q})")
    pinned = dict(a.pairs)
    indexer = tuple(pinned.get(ax, slice(None)) for ax in range(p.n))
    sub = p.table()[indexer]
    open_positions = [ax for ax in range(p.n) if ax not in pinned]
    total = float(sub.sum())
    rows: dict[int, np.ndarray] = {}
    for t, j in enumerate(open_positions):
        if total > 0.0:
            other = tuple(u for u in range(len(open_positions)) if u != t)
            row = sub.sum(axis=other) / total
        else:
            row = np.full(p.q, 1.0 / p.q)
        row = np.ascontiguousarray(row, dtype=float)
        row.flags.writeable = False
        rows[j] = row
    return MarginalTable(rows)


def _check_same_space(p: JointPMF, r: JointPMF) -> None:
    if (p.n, p.q) != (r.n, r.q):
        raise DimensionMismatch(
            f"distributions live on different spaces: (n={p.n}, q={p.q}) vs (n={r.n}, q={r.q})"
        )


def kl_bits(p: JointPMF, r: JointPMF) -> float:
    """KL divergence D(p || r) in bits; +inf when supp(p) escapes supp(r)."""
    _check_same_space(p, r)
    mask = p.probs > 0
    if np.any(r.probs[mask] <= 0):
        return math.inf
    pv = p.probs[mask]
    rv = r.probs[mask]
    return float((pv * (np.log2(pv) - np.log2(rv))).sum())


def tv(p: JointPMF, r: JointPMF) -> float:
    """Total variation distance, half the L1 distance between the vectors."""
    _check_same_space(p, r)
    return float(0.5 * np.abs(p.probs - r.probs).sum())
