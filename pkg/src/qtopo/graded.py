"""Graded Z/2 vector spaces, stored as Betti tables.

A :class:`BettiTable` is a finitely supported map ``degree -> rank``.  Tables
carry a ``reduced`` flag; reduced tables describe reduced homology, so the
zero reduced table is the homology of a point.  The empty space is a separate
sentinel, :data:`EMPTY`, which only :func:`join` knows how to absorb
(``X * EMPTY = X``).

Coefficients are Z/2 throughout, so Kunneth and wedge cancellation hold
without torsion corrections.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from fractions import Fraction

__all__ = [
    "BettiTable",
    "PoincarePolynomial",
    "EMPTY",
    "POINT",
    "FlagError",
    "sphere",
    "direct_sum",
    "tensor",
    "suspend",
    "join",
    "half_smash_suspension",
    "product_homology",
    "quotient_by_contractible_subspace",
    "euler_characteristic",
]


class FlagError(ValueError):
    """Raised when operands disagree on (or violate) the reduced flag."""


class BettiTable:
    """Immutable degree -> rank table over Z/2.

    >>> BettiTable({2: 1, 3: 0})
    BettiTable({2: 1}, reduced=True)
    """

    __slots__ = ("_ranks", "_reduced", "_empty")

    def __init__(
        self,
        ranks: Mapping[int, int] | Iterable[tuple[int, int]] | None = None,
        reduced: bool = True,
        *,
        empty: bool = False,
    ):
        items = ranks.items() if isinstance(ranks, Mapping) else (ranks or ())
        acc: dict[int, int] = {}
        for d, r in items:
            d, r = int(d), int(r)
            if d < 0:
                raise ValueError(f"negative degree {d}")
            if r < 0:
                raise ValueError(f"negative rank {r} in degree {d}")
            acc[d] = acc.get(d, 0) + r
        canon = tuple(sorted((d, r) for d, r in acc.items() if r))
        if empty and canon:
            raise ValueError("the empty-space sentinel carries no ranks")
        object.__setattr__(self, "_ranks", canon)
        object.__setattr__(self, "_reduced", bool(reduced) or empty)
        object.__setattr__(self, "_empty", bool(empty))

    def __setattr__(self, name, value):
        raise AttributeError("BettiTable is immutable")

    @property
    def reduced(self) -> bool:
        return self._reduced

    @property
    def is_empty_space(self) -> bool:
        return self._empty

    @property
    def ranks(self) -> dict[int, int]:
        return dict(self._ranks)

    def rank(self, degree: int) -> int:
        for d, r in self._ranks:
            if d == degree:
                return r
        return 0

    def items(self):
        return iter(self._ranks)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self._ranks)

    @property
    def total_rank(self) -> int:
        return sum(r for _, r in self._ranks)

    @property
    def top_degree(self) -> int | None:
        return self._ranks[-1][0] if self._ranks else None

    @property
    def bottom_degree(self) -> int | None:
        return self._ranks[0][0] if self._ranks else None

    def is_zero(self) -> bool:
        return not self._ranks and not self._empty

    def __eq__(self, other):
        if not isinstance(other, BettiTable):
            return NotImplemented
        return (self._ranks, self._reduced, self._empty) == (
            other._ranks,
            other._reduced,
            other._empty,
        )

    def __hash__(self):
        return hash((self._ranks, self._reduced, self._empty))

    def __repr__(self):
        if self._empty:
            return "EMPTY"
        return f"BettiTable({dict(self._ranks)}, reduced={self._reduced})"

    # reduced <-> unreduced -------------------------------------------------

    def to_unreduced(self) -> BettiTable:
        if not self._reduced:
            return self
        if self._empty:
            return BettiTable({}, reduced=False)
        acc = dict(self._ranks)
        acc[0] = acc.get(0, 0) + 1
        return BettiTable(acc, reduced=False)

    def to_reduced(self) -> BettiTable:
        if self._reduced:
            return self
        if not self._ranks:
            return EMPTY
        acc = dict(self._ranks)
        if acc.get(0, 0) < 1:
            raise ValueError("unreduced table without a degree-0 class")
        acc[0] -= 1
        return BettiTable(acc, reduced=True)

    def poincare(self) -> PoincarePolynomial:
        return PoincarePolynomial(dict(self._ranks))

    # serialization ---------------------------------------------------------

    def to_lines(self) -> str:
        """Line-oriented ``degree rank`` form."""
        return "".join(f"{d} {r}\n" for d, r in self._ranks)

    @classmethod
    def from_lines(cls, text: str, reduced: bool = True) -> BettiTable:
        pairs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 2:
                raise ValueError(f"line {lineno}: expected 'degree rank', got {line!r}")
            pairs.append((int(fields[0]), int(fields[1])))
        return cls(pairs, reduced=reduced)

    def to_document(self) -> dict:
        doc = {"reduced": self._reduced, "ranks": {str(d): r for d, r in self._ranks}}
        if self._empty:
            doc["empty"] = True
        return doc

    @classmethod
    def from_document(cls, doc: Mapping) -> BettiTable:
        if doc.get("empty"):
            return EMPTY
        ranks = {int(d): int(r) for d, r in dict(doc.get("ranks", {})).items()}
        return cls(ranks, reduced=bool(doc.get("reduced", True)))


class PoincarePolynomial:
    """Integer polynomial sum_d c_d t^d, evaluated exactly."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Mapping[int, int]):
        self.coefficients = {int(d): int(c) for d, c in coefficients.items() if c}

    def __call__(self, t):
        if isinstance(t, int | Fraction):
            return sum(c * Fraction(t) ** d for d, c in self.coefficients.items())
        return sum(c * t**d for d, c in self.coefficients.items())

    def __eq__(self, other):
        if not isinstance(other, PoincarePolynomial):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __repr__(self):
        terms = " + ".join(f"{c}t^{d}" for d, c in sorted(self.coefficients.items()))
        return f"PoincarePolynomial({terms or '0'})"


EMPTY = BettiTable(empty=True)
POINT = BettiTable({}, reduced=True)


def sphere(n: int) -> BettiTable:
    """Reduced table of S^n."""
    return BettiTable({n: 1})


def _require_reduced(*tables: BettiTable) -> None:
    for t in tables:
        if not t.reduced:
            raise FlagError("operation is defined on reduced tables only")


def _require_nonempty(*tables: BettiTable) -> None:
    for t in tables:
        if t.is_empty_space:
            raise ValueError("operation is undefined on the empty-space sentinel")


def direct_sum(a: BettiTable, b: BettiTable) -> BettiTable:
    if a.reduced != b.reduced:
        raise FlagError("direct_sum of a reduced and an unreduced table")
    _require_nonempty(a, b)
    acc = a.ranks
    for d, r in b.items():
        acc[d] = acc.get(d, 0) + r
    return BettiTable(acc, reduced=a.reduced)


def tensor(a: BettiTable, b: BettiTable) -> BettiTable:
    _require_reduced(a, b)
    _require_nonempty(a, b)
    acc: dict[int, int] = {}
    for i, ri in a.items():
        for j, rj in b.items():
            acc[i + j] = acc.get(i + j, 0) + ri * rj
    return BettiTable(acc)


def suspend(a: BettiTable, times: int = 1) -> BettiTable:
    if times < 1:
        raise ValueError("times must be >= 1")
    _require_reduced(a)
    _require_nonempty(a)
    return BettiTable({d + times: r for d, r in a.items()})


def join(a: BettiTable, b: BettiTable) -> BettiTable:
    """Reduced homology of X * Y, i.e. sigma(H(X) (x) H(Y)); X * EMPTY = X."""
    _require_reduced(a, b)
    if a.is_empty_space:
        return b
    if b.is_empty_space:
        return a
    return suspend(tensor(a, b))


def half_smash_suspension(x: BettiTable, y: BettiTable) -> BettiTable:
    """Reduced homology of X |x Sigma Y, which splits as H(X*Y) + H(Sigma Y)."""
    _require_reduced(x, y)
    if x.is_empty_space or y.is_empty_space:
        raise ValueError("half smash with the empty space is not defined")
    return direct_sum(join(x, y), suspend(y))


def product_homology(a: BettiTable, b: BettiTable) -> BettiTable:
    _require_reduced(a, b)
    if a.is_empty_space or b.is_empty_space:
        return EMPTY
    return direct_sum(direct_sum(a, b), tensor(a, b))


def quotient_by_contractible_subspace(x: BettiTable, a: BettiTable) -> BettiTable:
    """H(X/A) = H(X) + sigma H(A) when A is contractible inside X.

    Contractibility of ``a`` inside ``x`` cannot be checked from the tables;
    the caller vouches for it.
    """
    _require_reduced(x, a)
    _require_nonempty(x, a)
    return direct_sum(x, suspend(a))


def euler_characteristic(a: BettiTable) -> int:
    if a.is_empty_space:
        return 0
    chi = sum(r if d % 2 == 0 else -r for d, r in a.items())
    return chi + 1 if a.reduced else chi
