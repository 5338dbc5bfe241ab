"""Barycenter spaces B_n(X): Euler characteristics, tables and providers.

Only a few families are known in closed form.  Circles have
B_n(S^1) ~ S^{2n-1}; every other space enters through user-supplied tables,
which are checked against the closed-form Euler characteristic before use.
Disjoint unions of two connected spaces are assembled from their factors.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .graded import (
    EMPTY,
    BettiTable,
    direct_sum,
    euler_characteristic,
    join,
    product_homology,
    sphere,
    suspend,
)

__all__ = [
    "TopologyDataError",
    "SpaceDescriptor",
    "BarycenterProvider",
    "CircleProvider",
    "SphereProvider",
    "TableProvider",
    "DisjointUnionProvider",
    "chi_barycenter",
    "circle_barycenter_table",
    "connectivity_of_barycenter",
    "disjoint_union_barycenter",
    "disjoint_union_order_two",
    "TableFile",
    "builtin_space",
    "load_table_file",
]


class TopologyDataError(ValueError):
    """Missing or inconsistent topological input data."""


def chi_barycenter(chi: int, l: int) -> int:
    """Euler characteristic of B_l(X) for chi(X) = chi.

    chi(B_l) = 1 - (1 - chi)(2 - chi)...(l - chi) / l!, evaluated in exact
    integers (a product of l consecutive integers is divisible by l!).
    """
    if l <= 0:
        raise ValueError(f"order must be >= 1, got {l}")
    num = math.prod(j - chi for j in range(1, l + 1))
    quotient, remainder = divmod(num, math.factorial(l))
    assert remainder == 0
    return 1 - quotient


def circle_barycenter_table(n: int) -> BettiTable:
    if n <= 0:
        raise ValueError(f"order must be >= 1, got {n}")
    return sphere(2 * n - 1)


def connectivity_of_barycenter(r: int, n: int) -> int:
    """B_n(X) is (2n + r - 2)-connected when X is r-connected, r >= 1."""
    if r < 1:
        raise ValueError(f"connectivity bound needs r >= 1, got {r}")
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    return 2 * n + r - 2


@dataclass(frozen=True)
class SpaceDescriptor:
    name: str
    dimension: int
    euler: int
    betti: BettiTable  # unreduced
    connectivity: int = -1

    def __post_init__(self):
        if self.betti.reduced and not self.betti.is_empty_space:
            object.__setattr__(self, "betti", self.betti.to_unreduced())
        if self.dimension < 0:
            raise ValueError("dimension must be >= 0")
        if self.connectivity < -1:
            raise ValueError("connectivity must be >= -1")
        if self.connectivity > self.dimension:
            raise ValueError(
                f"{self.name}: connectivity {self.connectivity} exceeds dimension {self.dimension}"
            )
        if self.euler != euler_characteristic(self.betti):
            raise TopologyDataError(
                f"{self.name}: euler {self.euler} disagrees with its Betti table "
                f"({euler_characteristic(self.betti)})"
            )

    @property
    def reduced_betti(self) -> BettiTable:
        return self.betti.to_reduced()

    @property
    def connected(self) -> bool:
        return self.betti.rank(0) == 1

    def homological_dimension(self) -> int:
        top = self.betti.top_degree
        return 0 if top is None else top


def _sphere_descriptor(d: int) -> SpaceDescriptor:
    return SpaceDescriptor(
        name=f"S{d}",
        dimension=d,
        euler=1 + (-1) ** d,
        betti=sphere(d).to_unreduced(),
        connectivity=d - 1,
    )


_BUILTIN_SPACES = {
    "point": SpaceDescriptor("point", 0, 1, BettiTable({0: 1}, reduced=False), 0),
    "circle": _sphere_descriptor(1),
    "disk": SpaceDescriptor("disk", 2, 1, BettiTable({0: 1}, reduced=False), 2),
}


def builtin_space(name: str) -> SpaceDescriptor:
    """Descriptor for ``point``, ``circle``, ``disk`` or ``S<d>``."""
    key = name.strip().lower()
    if key in _BUILTIN_SPACES:
        return _BUILTIN_SPACES[key]
    if key.startswith("s") and key[1:].isdigit():
        return _sphere_descriptor(int(key[1:]))
    raise TopologyDataError(f"unknown built-in space {name!r}")


class BarycenterProvider:
    """Supplies reduced tables of B_n(base) for n >= 0 (B_0 is the empty space)."""

    base: SpaceDescriptor
    source: str = "abstract"

    def table(self, n: int) -> BettiTable:
        if n < 0:
            raise ValueError(f"negative barycenter order {n}")
        if n == 0:
            return EMPTY
        return self._table(n)

    def _table(self, n: int) -> BettiTable:
        raise NotImplementedError

    def euler(self, n: int) -> int:
        return 0 if n == 0 else chi_barycenter(self.base.euler, n)


class CircleProvider(BarycenterProvider):
    source = "builtin-circle"

    def __init__(self):
        self.base = builtin_space("circle")

    def _table(self, n):
        return circle_barycenter_table(n)

    def __repr__(self):
        return "CircleProvider()"


def _validate_order(base: SpaceDescriptor, n: int, table: BettiTable) -> None:
    if not table.reduced or table.is_empty_space:
        raise TopologyDataError(f"{base.name}: order {n} table must be a reduced, nonempty table")
    expected = chi_barycenter(base.euler, n)
    got = euler_characteristic(table)
    if got != expected:
        raise TopologyDataError(
            f"{base.name}: chi(B_{n}) from table is {got}, closed form gives {expected}"
        )
    if base.connectivity >= 1:
        conn = connectivity_of_barycenter(base.connectivity, n)
        low = table.bottom_degree
        if low is not None and low <= conn:
            raise TopologyDataError(
                f"{base.name}: B_{n} must be {conn}-connected but has homology in degree {low}"
            )
    top = table.top_degree
    bound = n * base.homological_dimension() + n - 1
    if top is not None and top > bound:
        raise TopologyDataError(
            f"{base.name}: B_{n} has homology in degree {top} above the bound {bound}"
        )


class TableProvider(BarycenterProvider):
    """Provider backed by explicit tables, validated on construction.

    B_1(X) = X, so order 1 defaults to the base space's own reduced table.
    """

    source = "user-file"

    def __init__(self, base: SpaceDescriptor, orders: Mapping[int, BettiTable] | None = None):
        self.base = base
        tables = {int(n): t for n, t in (orders or {}).items()}
        if 1 not in tables and base.connected:
            tables[1] = base.reduced_betti
        for n, t in sorted(tables.items()):
            if n < 1:
                raise TopologyDataError(f"{base.name}: orders start at 1, got {n}")
            _validate_order(base, n, t)
        if 1 in tables and base.connected and tables[1] != base.reduced_betti:
            raise TopologyDataError(f"{base.name}: B_1 table must equal the space's own table")
        self._tables = tables

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(sorted(self._tables))

    def _table(self, n):
        try:
            return self._tables[n]
        except KeyError:
            raise TopologyDataError(
                f"no table for B_{n}({self.base.name}); available orders {self.orders}"
            ) from None

    def __repr__(self):
        return f"TableProvider({self.base.name!r}, orders={self.orders})"


class SphereProvider(TableProvider):
    """S^d with only B_1 known (d >= 2); higher orders must come from data."""

    source = "builtin-sphere"

    def __init__(self, d: int, orders: Mapping[int, BettiTable] | None = None):
        if d == 1:
            raise ValueError("use CircleProvider for S^1")
        super().__init__(_sphere_descriptor(d), orders)


def disjoint_union_barycenter(a: BarycenterProvider, b: BarycenterProvider, l: int) -> BettiTable:
    """Reduced homology of B_l(A u B) for disjoint connected A, B and l >= 2.

    Direct sum of B_l(A), sigma B_{l-1}(A), B_l(B), sigma B_{l-1}(B), the joins
    B_{l-i}(A) * B_i(B) for 1 <= i <= l-1 and the suspended joins
    sigma(B_{l-i}(A) * B_{i-1}(B)) for 2 <= i <= l-1.
    """
    if l < 2:
        raise ValueError(f"disjoint-union formula needs l >= 2, got {l}")
    for p in (a, b):
        if not p.base.connected:
            raise TopologyDataError(f"{p.base.name} is not connected")
    out = direct_sum(a.table(l), suspend(a.table(l - 1)))
    out = direct_sum(out, b.table(l))
    out = direct_sum(out, suspend(b.table(l - 1)))
    for i in range(1, l):
        out = direct_sum(out, join(a.table(l - i), b.table(i)))
    for i in range(2, l):
        out = direct_sum(out, suspend(join(a.table(l - i), b.table(i - 1))))
    return out


def disjoint_union_order_two(a: BarycenterProvider, b: BarycenterProvider) -> BettiTable:
    """B_2(A u B) as B_2(A) v Sigma(A x B) v B_2(B), with Kunneth for A x B."""
    ab = product_homology(a.table(1), b.table(1))
    return direct_sum(direct_sum(a.table(2), suspend(ab)), b.table(2))


class DisjointUnionProvider(BarycenterProvider):
    source = "disjoint-union composite"

    def __init__(self, a: BarycenterProvider, b: BarycenterProvider, name: str | None = None):
        for p in (a, b):
            if not p.base.connected:
                raise TopologyDataError(f"{p.base.name} is not connected")
        self.a, self.b = a, b
        self.base = SpaceDescriptor(
            name=name or f"{a.base.name}+{b.base.name}",
            dimension=max(a.base.dimension, b.base.dimension),
            euler=a.base.euler + b.base.euler,
            betti=BettiTable(
                {
                    d: a.base.betti.rank(d) + b.base.betti.rank(d)
                    for d in set(a.base.betti.degrees) | set(b.base.betti.degrees)
                },
                reduced=False,
            ),
            connectivity=-1,
        )

    def _table(self, n):
        if n == 1:
            return self.base.betti.to_reduced()
        return disjoint_union_barycenter(self.a, self.b, n)

    def __repr__(self):
        return f"DisjointUnionProvider({self.a!r}, {self.b!r})"


# -- user table files -----------------------------------------------------


@dataclass
class TableFile:
    providers: dict[str, TableProvider] = field(default_factory=dict)

    def __getitem__(self, name: str) -> TableProvider:
        try:
            return self.providers[name]
        except KeyError:
            raise TopologyDataError(
                f"space {name!r} not in table file (have {sorted(self.providers)})"
            ) from None


def _provider_from_document(doc: Mapping) -> TableProvider:
    name = doc["space"]
    orders = {
        int(n): BettiTable({int(d): int(r) for d, r in ranks.items()})
        for n, ranks in dict(doc.get("orders", {})).items()
    }
    if "betti" in doc or "euler" in doc:
        betti = (
            BettiTable({int(d): int(r) for d, r in doc["betti"].items()}, reduced=False)
            if "betti" in doc
            else orders[1].to_unreduced()
        )
        base = SpaceDescriptor(
            name=name,
            dimension=int(doc.get("dimension", betti.top_degree or 0)),
            euler=int(doc.get("euler", euler_characteristic(betti))),
            betti=betti,
            connectivity=int(doc.get("connectivity", -1)),
        )
    else:
        base = builtin_space(name)
    return TableProvider(base, orders)


def load_table_file(path: str | Path) -> TableFile:
    """Read ``{space, orders: {n: {degree: rank}}}`` documents (one or a list).

    Optional keys ``euler``, ``betti`` (unreduced), ``dimension`` and
    ``connectivity`` describe spaces that are not built in.
    """
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyDataError(f"{path}: not a JSON document ({exc})") from exc
    docs = data if isinstance(data, list) else data.get("spaces", [data])
    out = TableFile()
    for doc in docs:
        prov = _provider_from_document(doc)
        out.providers[prov.base.name] = prov
    return out
