"""Reference distribution families with known information curves.

The families here are the package's measuring instruments: each one has a
closed-form curve or summary, so every numerical routine can be checked
against exact targets.

* uniform products: flat curve, zero correlation both ways.
* affine code distributions: the uniform law on {uG + b : u in F_q^k}.  With
  G of full row rank k the curve is piecewise-linear with slope log2(q) and
  the correlation summary has the closed form
  tc = (n - k - kappa) log2 q and dtc = (k - l) log2 q, where kappa counts
  all-zero generator columns and l counts columns outside the span of the
  others.  Evaluation-point (polynomial) codes with a uniformly random shift
  are balanced: every pinning of at least k coordinates has probability
  exactly q^{-|S|}, which makes their curve a hard step at level k.
* product mixtures: m-component mixtures of independent products, a source
  of small tunable-correlation instances.
* elevations: pair each coordinate of a base distribution with the matching
  coordinate of an independent lift; information curves add, making big
  alphabets with prescribed curves out of small ingredients.

Prime q only: the rank and span arguments used for the closed forms rely on
F_q being a field (and the implementation on Fermat inversion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .curves import CorrelationSummary
from .dist import JointPMF
from .errors import (
    DimensionMismatch,
    DuplicateEvalPoints,
    FieldTooSmall,
    InfeasibleEnumeration,
    NotADistribution,
    NotPrime,
    RankDeficient,
)

#: Largest message-space enumeration (q**k) for building a code table.
MAX_CODEWORDS = 2**20

#: Largest number of column subsets an MDS check will examine.
MAX_MDS_SUBSETS = 10**6


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def _mod_rank(matrix: np.ndarray, q: int) -> int:
    """Row rank over F_q by Gaussian elimination (q prime)."""
    A = np.array(matrix, dtype=np.int64) % q
    if A.size == 0:
        return 0
    rank = 0
    rows, cols = A.shape
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if A[r, c] % q), None)
        if piv is None:
            continue
        A[[rank, piv]] = A[[piv, rank]]
        A[rank] = (A[rank] * pow(int(A[rank, c]), q - 2, q)) % q
        for r in range(rows):
            if r != rank and A[r, c]:
                A[r] = (A[r] - A[r, c] * A[rank]) % q
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass(frozen=True)
class AffineCode:
    """An affine code over F_q: the set {u G + shift : u in F_q^k}."""

    q: int
    generator: np.ndarray
    shift: np.ndarray

    def __post_init__(self) -> None:
        if not _is_prime(self.q):
            raise NotPrime(f"alphabet size {self.q} is not prime")
        G = np.atleast_2d(np.asarray(self.generator, dtype=np.int64)) % self.q
        k, n = G.shape
        if not 1 <= k <= n:
            raise DimensionMismatch(f"generator must be k x n with 1 <= k <= n, got {G.shape}")
        shift = np.asarray(self.shift, dtype=np.int64).ravel() % self.q
        if shift.shape != (n,):
            raise DimensionMismatch(f"shift has length {shift.size}, expected n = {n}")
        if _mod_rank(G, self.q) < k:
            raise RankDeficient(f"generator rank < k = {k} over F_{self.q}")
        G = G.copy()
        G.flags.writeable = False
        shift = shift.copy()
        shift.flags.writeable = False
        object.__setattr__(self, "generator", G)
        object.__setattr__(self, "shift", shift)

    @property
    def k(self) -> int:
        return self.generator.shape[0]

    @property
    def n(self) -> int:
        return self.generator.shape[1]


def uniform_dist(q: int, n: int) -> JointPMF:
    """The uniform distribution on [q]^n."""
    size = q**n
    if size > 2**24:
        raise InfeasibleEnumeration(f"table size q**n = {size} exceeds the dense guard")
    return JointPMF(n, q, np.full(size, 1.0 / size))


def code_dist(code: AffineCode) -> JointPMF:
    """The uniform distribution over the codewords of an affine code."""
    q, k, n = code.q, code.k, code.n
    if q**k > MAX_CODEWORDS:
        raise InfeasibleEnumeration(f"q**k = {q**k} codewords exceed the guard {MAX_CODEWORDS}")
    U = np.indices((q,) * k).reshape(k, -1).T
    words = (U @ code.generator + code.shift) % q
    powers = q ** np.arange(n - 1, -1, -1)
    flat = words @ powers
    probs = np.bincount(flat, minlength=q**n).astype(float)
    return JointPMF(n, q, probs / q**k)


def code_summary(code: AffineCode) -> CorrelationSummary:
    """Closed-form correlation summary of a full-rank affine code distribution.

    tc = (n - k - kappa) log2 q with kappa the number of all-zero generator
    columns; dtc = (k - l) log2 q with l the number of columns outside the
    span of the remaining ones; z_n = (tc + dtc) / n.
    """
    q, k, n = code.q, code.k, code.n
    G = code.generator
    kappa = int(np.sum(~G.any(axis=0)))
    l = 0
    for i in range(n):
        others = np.delete(G, i, axis=1)
        if _mod_rank(others, q) < k:
            l += 1
    log2q = math.log2(q)
    tc = (n - k - kappa) * log2q
    dtc = (k - l) * log2q
    return CorrelationSummary(tc=tc, dtc=dtc, z_n=(tc + dtc) / n)


def rs_code(q: int, k: int, eval_points, shift=None) -> AffineCode:
    """Polynomial-evaluation code: codewords (f(a_0),...,f(a_{n-1})) + shift
    over all polynomials f of degree < k."""
    if not _is_prime(q):
        raise NotPrime(f"alphabet size {q} is not prime")
    points = [int(a) % q for a in eval_points]
    n = len(points)
    if n > q:
        raise FieldTooSmall(f"{n} evaluation points cannot be distinct in F_{q}")
    if len(set(points)) != n:
        raise DuplicateEvalPoints(f"evaluation points collide mod {q}: {points}")
    if not 1 <= k <= n:
        raise DimensionMismatch(f"need 1 <= k <= n, got k={k}, n={n}")
    pts = np.array(points, dtype=np.int64)
    rows = [np.ones(n, dtype=np.int64)]
    for _ in range(1, k):
        rows.append((rows[-1] * pts) % q)
    G = np.vstack(rows[:k])
    if shift is None:
        shift = np.zeros(n, dtype=np.int64)
    return AffineCode(q=q, generator=G, shift=np.asarray(shift))


def mds_check(code: AffineCode) -> bool:
    """True when every k columns of the generator are linearly independent."""
    k, n = code.k, code.n
    if math.comb(n, k) > MAX_MDS_SUBSETS:
        raise InfeasibleEnumeration(
            f"C({n},{k}) = {math.comb(n, k)} column subsets exceed the guard {MAX_MDS_SUBSETS}"
        )
    for cols in combinations(range(n), k):
        if _mod_rank(code.generator[:, cols], code.q) < k:
            return False
    return True


def random_balanced_rs(q: int, k: int, n: int, seed: int) -> AffineCode:
    """Evaluation code on points 0..n-1 with a uniformly random additive shift.

    Pinnings of at most k coordinates are consistent with exactly q^{k-|S|}
    messages whatever the shift.  A pinning of more than k coordinates is hit
    (consistent with exactly one message) with probability q^{k-|S|} over the
    random shift, and misses otherwise; averaging, every pinning carries
    probability q^{-|S|}: the family is balanced, and each member's
    information curve is the step log2(q) * 1[j > k].
    """
    if not _is_prime(q):
        raise NotPrime(f"alphabet size {q} is not prime")
    if n > q:
        raise FieldTooSmall(f"need q >= n for distinct evaluation points, got q={q}, n={n}")
    rng = np.random.default_rng(seed)
    shift = rng.integers(0, q, size=n)
    return rs_code(q, k, tuple(range(n)), shift)


@dataclass(frozen=True)
class ProductMixtureSpec:
    """Mixture weights plus per-component independent-coordinate rows."""

    weights: np.ndarray
    components: np.ndarray  # shape (m, n, q)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float).ravel()
        comp = np.asarray(self.components, dtype=float)
        if comp.ndim != 3:
            raise DimensionMismatch(f"components must be (m, n, q), got shape {comp.shape}")
        m, n, q = comp.shape
        if w.shape != (m,):
            raise DimensionMismatch(f"{w.size} weights for {m} components")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or abs(w.sum() - 1.0) > 1e-12:
            raise NotADistribution("mixture weights must be a probability vector")
        row_sums = comp.sum(axis=2)
        if np.any(comp < 0) or not np.all(np.isfinite(comp)):
            raise NotADistribution("component rows must be nonnegative and finite")
        if np.max(np.abs(row_sums - 1.0)) > 1e-12:
            raise NotADistribution("every component row must sum to 1")
        w = w.copy()
        w.flags.writeable = False
        comp = comp.copy()
        comp.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comp)

    @property
    def m(self) -> int:
        return self.components.shape[0]

    @property
    def n(self) -> int:
        return self.components.shape[1]

    @property
    def q(self) -> int:
        return self.components.shape[2]


def product_mixture(spec: ProductMixtureSpec) -> JointPMF:
    """The mixture of independent products described by the spec."""
    m, n, q = spec.m, spec.n, spec.q
    if q**n > 2**24:
        raise InfeasibleEnumeration(f"table size q**n = {q**n} exceeds the dense guard")
    acc = np.zeros((q,) * n)
    for c in range(m):
        block = spec.components[c, 0]
        for i in range(1, n):
            block = np.multiply.outer(block, spec.components[c, i])
        acc += spec.weights[c] * block
    return JointPMF(n, q, acc.ravel())


def elevated_family(base: JointPMF, lift: JointPMF | AffineCode) -> JointPMF:
    """Pair coordinate i of ``base`` with coordinate i of an independent ``lift``.

    The composite alphabet is [q_base * q_lift] with symbol (a, v) encoded as
    a * q_lift + v.  Because the two layers are independent, information
    curves (and hence tc/dtc) add coordinate-wise.
    """
    if isinstance(lift, AffineCode):
        lift = code_dist(lift)
    if base.n != lift.n:
        raise DimensionMismatch(f"base has n = {base.n} but lift has n = {lift.n}")
    n = base.n
    qb, ql = base.q, lift.q
    if (qb * ql) ** n > 2**24:
        raise InfeasibleEnumeration(
            f"elevated table size ({qb * ql})**{n} exceeds the dense guard"
        )
    outer = np.multiply.outer(base.probs, lift.probs).reshape((qb,) * n + (ql,) * n)
    order = [ax for i in range(n) for ax in (i, n + i)]
    table = outer.transpose(order).reshape((qb * ql,) * n)
    return JointPMF(n, qb * ql, table.ravel())
