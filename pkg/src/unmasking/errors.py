"""Exception taxonomy shared across the package.

Every guard in the library raises one of these so callers (and the CLI, which
maps them onto exit codes) can tell configuration mistakes apart from
feasibility refusals.
"""

from __future__ import annotations


class UnmaskingError(Exception):
    """Base class for all package-specific errors."""


class NotADistribution(UnmaskingError):
    """Probability vector is negative, non-finite, or does not sum to 1."""


class PositionOutOfRange(UnmaskingError):
    """A coordinate index or symbol falls outside [0, n) / [0, q)."""


class DimensionMismatch(UnmaskingError):
    """Two objects that must share a length or shape do not."""


class InfeasibleEnumeration(UnmaskingError):
    """An exact computation would exceed its enumeration guard."""


class NonMonotoneNodes(UnmaskingError):
    """Node vector is not strictly increasing from 1, or exceeds n."""


class InvalidTolerance(UnmaskingError):
    """A tolerance/accuracy parameter is zero, negative, or non-finite."""


class HanViolation(UnmaskingError):
    """An information curve breaks monotonicity beyond numerical tolerance."""


class NotPrime(UnmaskingError):
    """Alphabet size must be prime for code-family constructions."""


class DuplicateEvalPoints(UnmaskingError):
    """Evaluation points of a polynomial code collide modulo q."""


class FieldTooSmall(UnmaskingError):
    """The field cannot host the requested number of evaluation points."""


class RankDeficient(UnmaskingError):
    """A generator matrix does not have full row rank over F_q."""
