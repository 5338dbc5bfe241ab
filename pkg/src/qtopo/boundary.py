"""Boundary-weighted barycenter spaces B_l^d(M) and their strata closures.

Interior points carry weight 2 and boundary points weight 1, so order l
collects configurations with 2p + q <= l.  Homology is assembled from the
barycenter spaces of the boundary and of M/dM; Euler characteristics of even
dimensional M have a closed form used here as an independent cross-check.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

from .barycenters import BarycenterProvider, TopologyDataError, chi_barycenter
from .graded import BettiTable, direct_sum, euler_characteristic, join, suspend

__all__ = [
    "BoundaryBarycenterInput",
    "UnsupportedError",
    "boundary_betti",
    "t_i_betti",
    "euler_boundary",
    "bqp_euler",
    "bqp_closure_quotient_betti",
    "inclusion_exclusion_euler",
    "boundary_connectivity_bounds",
    "topology_report",
    "builtin_boundary_input",
]


class UnsupportedError(ValueError):
    """The requested formula is not available under the given hypotheses."""


@dataclass(frozen=True)
class BoundaryBarycenterInput:
    boundary_provider: BarycenterProvider
    quotient_provider: BarycenterProvider
    chi_M: int
    dim_M: int

    def __post_init__(self):
        if self.dim_M < 2:
            raise ValueError(f"dim_M must be >= 2, got {self.dim_M}")
        chi_bd = self.boundary_provider.base.euler
        if self.dim_M % 2 == 0 and chi_bd != 0:
            raise TopologyDataError(
                f"boundary of an even-dimensional manifold has chi 0, got {chi_bd}"
            )
        # chi(X/A) = chi(X) - chi(A) + 1 for a nonempty subcomplex A
        expected = self.chi_M - chi_bd + 1
        if self.quotient_provider.base.euler != expected:
            raise TopologyDataError(
                f"chi(M/dM) should be {expected}, quotient descriptor has "
                f"{self.quotient_provider.base.euler}"
            )

    @property
    def dim_even(self) -> bool:
        return self.dim_M % 2 == 0

    def bd(self, n: int) -> BettiTable:
        return self.boundary_provider.table(n)

    def quot(self, n: int) -> BettiTable:
        return self.quotient_provider.table(n)


def boundary_betti(inp: BoundaryBarycenterInput, l: int) -> BettiTable:
    """Reduced Z/2 homology of B_l^d(M).

    Even l = 2m: B_2m(dM) + B_m(M/dM) + sigma sum_{i<m} B_i(M/dM) (x) B_{2m-2i}(dM).
    Odd l = 2m-1: B_{2m-1}(dM) + sigma sum_{i<m} B_i(M/dM) (x) B_{2m-2i-1}(dM).
    """
    if l < 1:
        raise ValueError(f"order must be >= 1, got {l}")
    m, odd = (l + 1) // 2, l % 2
    out = inp.bd(l)
    if not odd:
        out = direct_sum(out, inp.quot(m))
    for i in range(1, m):
        # join == sigma(tensor) for nonempty operands
        out = direct_sum(out, join(inp.quot(i), inp.bd(l - 2 * i)))
    return out


def t_i_betti(inp: BoundaryBarycenterInput, l: int, i: int) -> BettiTable:
    """Homology of the colimit T_i of the bottom i rows of the order-(l + i) diagram."""
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if not 0 <= i <= l:
        raise ValueError(f"i must lie in [0, {l}], got {i}")
    out = inp.bd(l + i)
    for j in range(1, i + 1):
        out = direct_sum(out, join(inp.quot(j), inp.bd(l + i - 2 * j)))
    return out


def euler_boundary(chi_M: int, l: int, dim_even: bool) -> int:
    """chi(B_l^d(M)) for even-dimensional M: chi(B_m(M)) at l = 2m, chi(B_{m-1}(M)) at l = 2m-1."""
    if not dim_even:
        raise UnsupportedError("closed form only holds for even-dimensional M")
    if l < 1:
        raise ValueError(f"order must be >= 1, got {l}")
    n = l // 2
    return 0 if n == 0 else chi_barycenter(chi_M, n)


def bqp_euler(chi_M: int, p: int, q: int) -> int:
    """chi of the stratum closure B_q^p (at least q boundary points, p interior).

    Equals chi(B_p(M)) for even-dimensional M; B_q^0 = B_q(dM) has chi 0.
    ``q = 0`` gives B_p(M) itself.
    """
    if p < 0 or q < 0:
        raise ValueError("p and q must be nonnegative")
    if p == 0:
        return 0
    return chi_barycenter(chi_M, p)


def inclusion_exclusion_euler(chi_M: int, l: int) -> int:
    """chi(B_{2l}^d) assembled stratum by stratum from the top two diagram rows."""
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    plus = sum(bqp_euler(chi_M, i, 2 * l - 2 * i) for i in range(l + 1))
    minus = sum(bqp_euler(chi_M, i, 2 * l - 1 - 2 * i) for i in range(l))
    return plus - minus


def bqp_closure_quotient_betti(p: int, q: int, inp: BoundaryBarycenterInput) -> BettiTable:
    """Homology of the closure quotient, B_p(M/dM) * (B_q(dM) v Sigma B_{q-1}(dM)).

    At q = 1 the suspension of B_0 = empty is dropped.
    """
    if p < 1 or q < 1:
        raise ValueError("p and q must both be >= 1")
    right = inp.bd(q)
    if q > 1:
        right = direct_sum(right, suspend(inp.bd(q - 1)))
    return join(inp.quot(p), right)


@dataclass(frozen=True)
class ConnectivityBounds:
    order: int
    even_formula: int
    odd_formula: int | None
    reported: int
    observed: int  # from the computed table: lowest nonzero degree minus 1
    discrepancy: bool

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "even_formula": self.even_formula,
            "odd_formula": self.odd_formula,
            "reported": self.reported,
            "observed_homological": self.observed,
            "discrepancy": self.discrepancy,
        }


def boundary_connectivity_bounds(
    inp: BoundaryBarycenterInput, l: int, r: int, table: BettiTable | None = None
) -> ConnectivityBounds:
    """Both stated connectivity bounds for r-connected M and dM (r >= 1).

    The two formulas are evaluated regardless of parity; the smaller one is
    reported.  ``discrepancy`` is set when the formulas differ or when the
    computed table has homology at or below the reported bound.
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    even_f = l + r - 2
    odd_f = min(l + 2 * r - 2, 2 * l + r - 2) if l >= 3 else None
    candidates = [even_f] + ([odd_f] if odd_f is not None else [])
    reported = min(candidates)
    table = boundary_betti(inp, l) if table is None else table
    low = table.bottom_degree
    observed = (low - 1) if low is not None else l * inp.dim_M
    discrepancy = len(set(candidates)) > 1 or observed < reported
    return ConnectivityBounds(l, even_f, odd_f, reported, observed, discrepancy)


def topology_report(
    inp: BoundaryBarycenterInput, max_order: int, connectivity: int | None = None
) -> Iterator[dict]:
    """One ``{order, betti, euler, consistency}`` record per order 1..max_order.

    ``consistency`` compares the homology Euler characteristic with the
    closed form (even dim_M only; ``"n/a"`` otherwise) and checks the
    top-degree bound ``H_* = 0`` for ``* >= l * dim_M``.
    """
    for l in range(1, max_order + 1):
        table = boundary_betti(inp, l)
        chi = euler_characteristic(table)
        rec = {"order": l, "betti": table.to_document(), "euler": chi}
        top_ok = table.top_degree is None or table.top_degree < l * inp.dim_M
        if inp.dim_even:
            closed = euler_boundary(inp.chi_M, l, True)
            rec["euler_closed_form"] = closed
            rec["consistency"] = "pass" if closed == chi and top_ok else "fail"
        else:
            rec["consistency"] = "n/a" if top_ok else "fail"
        rec["degree_bound_ok"] = top_ok
        if connectivity is not None and connectivity >= 1:
            rec["connectivity"] = boundary_connectivity_bounds(
                inp, l, connectivity, table
            ).as_dict()
        yield rec


def builtin_boundary_input(name: str) -> BoundaryBarycenterInput:
    """Inputs for ``disk`` (dM = S^1, M/dM = S^2) and ``annulus`` (dM = two circles)."""
    from .barycenters import (
        CircleProvider,
        DisjointUnionProvider,
        SpaceDescriptor,
        SphereProvider,
        TableProvider,
    )

    key = name.strip().lower()
    if key == "disk":
        return BoundaryBarycenterInput(CircleProvider(), SphereProvider(2), chi_M=1, dim_M=2)
    if key == "annulus":
        # collapsing both boundary circles to one point gives S^2 v S^1
        quotient = SpaceDescriptor(
            "annulus/boundary", 2, 1, BettiTable({0: 1, 1: 1, 2: 1}, reduced=False), 0
        )
        return BoundaryBarycenterInput(
            DisjointUnionProvider(CircleProvider(), CircleProvider()),
            TableProvider(quotient),
            chi_M=0,
            dim_M=2,
        )
    raise TopologyDataError(f"no built-in manifold {name!r} (have disk, annulus)")
