"""Morse-inequality feasibility, Poincare-Hopf sums and jump criteria.

Critical points at infinity enter as records ``(p, q, i_inf, lk_sign)``.  Only
records with a negative sign count; the others are critical points of the
reduced functional that do not produce noncompact flow lines.

The feasibility systems are chains: each unknown n_i is forced by the one
before it, so "no nonnegative solution" is decided by one forward pass.
"""

from __future__ import annotations

import warnings
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .barycenters import TopologyDataError
from .boundary import BoundaryBarycenterInput, boundary_betti, euler_boundary
from .graded import BettiTable, euler_characteristic

__all__ = [
    "EXISTENCE_CERTIFIED",
    "INCONCLUSIVE",
    "NDViolationError",
    "CritRecord",
    "CritSummary",
    "MorseCounts",
    "FeasibilityVerdict",
    "assemble_counts",
    "check_system_k1",
    "check_system_k",
    "hopf_sum",
    "hopf_target",
    "hopf_criterion",
    "jump_criterion",
    "index_shift",
    "c_array",
    "certify",
]

EXISTENCE_CERTIFIED = "EXISTENCE_CERTIFIED"
INCONCLUSIVE = "INCONCLUSIVE"


class NDViolationError(ValueError):
    """A record violates the nondegeneracy condition (zero sign)."""


@dataclass(frozen=True)
class CritRecord:
    p: int
    q: int
    i_inf: int
    lk_sign: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("p and q must be nonnegative")
        if self.lk_sign not in (-1, 0, 1):
            raise ValueError(f"lk_sign must be -1, 0 or 1, got {self.lk_sign}")
        lo, hi = self.p + self.q - 1, 5 * self.p + 4 * self.q - 1
        if not lo <= self.i_inf <= hi:
            raise ValueError(f"i_inf {self.i_inf} outside [{lo}, {hi}] for (p,q)=({self.p},{self.q})")

    def as_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "i_inf": self.i_inf, "lk_sign": self.lk_sign}

    @classmethod
    def from_dict(cls, doc: Mapping) -> CritRecord:
        return cls(int(doc["p"]), int(doc["q"]), int(doc["i_inf"]), int(doc["lk_sign"]))


@dataclass(frozen=True)
class CritSummary:
    k: int
    kbar: int = 0
    records: tuple[CritRecord, ...] = ()
    chi_M: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.kbar < 0:
            raise ValueError(f"kbar must be >= 0, got {self.kbar}")
        object.__setattr__(self, "records", tuple(self.records))
        for r in self.records:
            if 2 * r.p + r.q != self.k:
                raise ValueError(f"record {r} does not satisfy 2p + q = {self.k}")

    @property
    def at_infinity(self) -> tuple[CritRecord, ...]:
        """Records with negative sign (the set F_inf)."""
        return tuple(r for r in self.records if r.lk_sign == -1)

    def require_nd(self) -> None:
        bad = [r for r in self.records if r.lk_sign == 0]
        if bad:
            raise NDViolationError(f"{len(bad)} record(s) with zero lk sign, e.g. {bad[0]}")

    def as_dict(self) -> dict:
        doc = {"k": self.k, "kbar": self.kbar, "records": [r.as_dict() for r in self.records]}
        if self.chi_M is not None:
            doc["chi_M"] = self.chi_M
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> CritSummary:
        chi = doc.get("chi_M")
        return cls(
            k=int(doc["k"]),
            kbar=int(doc.get("kbar", 0)),
            records=tuple(CritRecord.from_dict(r) for r in doc.get("records", ())),
            chi_M=None if chi is None else int(chi),
        )


def index_shift(i_inf: int, kbar: int) -> int:
    """Morse index at infinity of the full functional: i_inf + kbar."""
    if kbar < 0:
        raise ValueError(f"kbar must be >= 0, got {kbar}")
    return i_inf + kbar


@dataclass(frozen=True)
class MorseCounts:
    m: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(x) for x in self.m))
        if any(x < 0 for x in self.m):
            raise ValueError("counts must be nonnegative")

    def __len__(self):
        return len(self.m)

    def __getitem__(self, i):
        return self.m[i]

    def polynomial_at(self, t: int) -> int:
        """M(t) = sum_i m_i t^i."""
        return sum(c * t**i for i, c in enumerate(self.m))


def assemble_counts(summary: CritSummary) -> MorseCounts:
    """m_i = number of negative-sign records at shifted index i (length 4k + kbar)."""
    summary.require_nd()
    m = [0] * (4 * summary.k + summary.kbar)
    for r in summary.at_infinity:
        m[index_shift(r.i_inf, summary.kbar)] += 1
    return MorseCounts(tuple(m))


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    n: tuple[int, ...]
    violation: str | None = None
    diagnostics: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "n": list(self.n),
            "violation": self.violation,
            "diagnostics": list(self.diagnostics),
        }


def _run_chain(m: Sequence[int], offsets: Sequence[int]) -> FeasibilityVerdict:
    """Solve m_i = offsets_i + n_i + n_{i-1} (n_{-1} = 0) forward; require n_top = 0.

    The whole sequence is computed even after a failure so the report shows
    where things went negative.
    """
    n: list[int] = []
    violation = None
    prev = 0
    for i, (mi, oi) in enumerate(zip(m, offsets)):
        ni = mi - oi - prev
        n.append(ni)
        if ni < 0 and violation is None:
            violation = f"n_{i} = {ni} < 0"
        prev = ni
    top = len(m) - 1
    if violation is None and n[top] != 0:
        violation = f"terminal constraint n_{top} = 0 fails (n_{top} = {n[top]})"
    return FeasibilityVerdict(violation is None, tuple(n), violation)


def check_system_k1(m: MorseCounts | Sequence[int]) -> FeasibilityVerdict:
    """m_0 = 1 + n_0, m_i = n_i + n_{i-1}, and the chain closes with n_top = 0."""
    m = tuple(m.m if isinstance(m, MorseCounts) else m)
    if len(m) < 4:
        raise ValueError(f"k = 1 system needs at least 4 counts, got {len(m)}")
    offsets = [1] + [0] * (len(m) - 1)
    return _run_chain(m, offsets)


def check_system_k(
    m: MorseCounts | Sequence[int], c: Sequence[int] | Mapping[int, int], k: int
) -> FeasibilityVerdict:
    """Supercritical system: m_i = c_{i-1} + n_i + n_{i-1} for 2 <= i <= top - 3.

    ``top`` is len(m) - 1, which is 4k - 1 when kbar = 0.  ``c`` holds the
    unreduced Betti numbers of B_{k-1}^d(M) and must reach index top - 4.
    """
    if k < 2:
        raise ValueError("use check_system_k1 for k = 1")
    m = tuple(m.m if isinstance(m, MorseCounts) else m)
    top = len(m) - 1
    if top < 4 * k - 1:
        raise ValueError(f"need at least {4 * k} counts, got {len(m)}")
    cvals = _c_lookup(c, top - 4)
    offsets = [0] * len(m)
    for i in range(2, top - 2):
        offsets[i] = cvals[i - 1]
    verdict = _run_chain(m, offsets)

    # The Morse-polynomial side of the argument only carries c up to index
    # top - 5; flag when the last c term alone decides the verdict.
    notes = []
    if cvals[top - 4]:
        trimmed = list(offsets)
        trimmed[top - 3] = 0
        alt = _run_chain(m, trimmed)
        if alt.feasible != verdict.feasible:
            notes.append(
                f"verdict depends on c_{top - 4} = {cvals[top - 4]} "
                f"(feasible={alt.feasible} without it)"
            )
    if len(m) != 4 * k:
        notes.append(f"kbar > 0: indices shifted by {len(m) - 4 * k}; c must be supplied for the shifted sublevel")
    return FeasibilityVerdict(verdict.feasible, verdict.n, verdict.violation, tuple(notes))


def _c_lookup(c: Sequence[int] | Mapping[int, int], needed: int) -> list[int]:
    if isinstance(c, Mapping):
        return [int(c.get(i, 0)) for i in range(needed + 1)]
    c = [int(x) for x in c]
    if len(c) < needed + 1:
        raise TopologyDataError(f"c array has {len(c)} entries, system needs indices 0..{needed}")
    return c[: needed + 1]


def c_array(inp: BoundaryBarycenterInput, k: int) -> list[int]:
    """Unreduced Z/2 Betti numbers of B_{k-1}^d(M) in degrees 0..4k-5."""
    if k < 2:
        raise ValueError("c array is defined for k >= 2")
    table = boundary_betti(inp, k - 1).to_unreduced()
    return [table.rank(i) for i in range(4 * k - 4)]


def hopf_sum(summary: CritSummary) -> int:
    return sum((-1) ** index_shift(r.i_inf, summary.kbar) for r in summary.at_infinity)


def hopf_target(k: int, chi_boundary: int | None = None) -> int:
    """1 for k = 1; 1 - chi(B_{k-1}^d(M)) for k >= 2."""
    if k == 1:
        return 1
    if chi_boundary is None:
        raise TopologyDataError("k >= 2 needs chi(B_{k-1}^d(M))")
    return 1 - chi_boundary


@dataclass(frozen=True)
class CriterionResult:
    certified: bool
    value: int
    target: int
    applicable: bool = True
    l: int | None = None

    def as_dict(self) -> dict:
        doc = {
            "certified": self.certified,
            "sum": self.value,
            "target": self.target,
            "applicable": self.applicable,
        }
        if self.l is not None:
            doc["l"] = self.l
        return doc


def hopf_criterion(summary: CritSummary, chi_target: int) -> CriterionResult:
    s = hopf_sum(summary)
    return CriterionResult(s != chi_target, s, chi_target)


def jump_criterion(summary: CritSummary, l: int, chi_target: int) -> CriterionResult:
    """Truncated index sum below level l differs from the target, with a gap at l."""
    k = summary.k
    hi = 3 if k == 1 else 4 * k - 1
    if not 1 <= l <= hi:
        raise ValueError(f"l must lie in [1, {hi}] for k = {k}")
    idx = [index_shift(r.i_inf, summary.kbar) for r in summary.at_infinity]
    below = [i for i in idx if i <= l - 1]
    s = sum((-1) ** i for i in below)
    # k = 1 asks for some point at infinity; k >= 2 for one strictly below l
    applicable = bool(idx) if k == 1 else bool(below)
    certified = applicable and l not in idx and s != chi_target
    return CriterionResult(certified, s, chi_target, applicable, l)


@dataclass
class CertificationReport:
    k: int
    kbar: int
    counts: list[int]
    c_array: list[int] | None
    system: FeasibilityVerdict
    hopf: CriterionResult
    jumps: list[CriterionResult]
    warnings: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        fired = (not self.system.feasible) or self.hopf.certified or any(j.certified for j in self.jumps)
        return EXISTENCE_CERTIFIED if fired else INCONCLUSIVE

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "kbar": self.kbar,
            "counts": self.counts,
            "c_array": self.c_array,
            "system_verdict": self.system.as_dict(),
            "hopf": self.hopf.as_dict(),
            "jump": [j.as_dict() for j in self.jumps],
            "warnings": self.warnings,
            "verdict": self.verdict,
        }


def certify(
    summary: CritSummary,
    boundary_input: BoundaryBarycenterInput | None = None,
    *,
    c: Sequence[int] | Mapping[int, int] | None = None,
    chi_boundary: int | None = None,
) -> CertificationReport:
    """Run the system, the Hopf sum and every jump level for one summary.

    For k >= 2 the topology comes either from ``boundary_input`` or from an
    explicit ``c`` array plus ``chi_boundary``.
    """
    summary.require_nd()
    k = summary.k
    notes: list[str] = []
    if summary.kbar:
        msg = (
            f"kbar = {summary.kbar}: indices shifted; sublevel topology for kbar >= 1 "
            "is not computed and must be supplied through the c array"
        )
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)

    counts = assemble_counts(summary)
    c_vals = None
    if k == 1:
        system = check_system_k1(counts)
        target = hopf_target(1)
    else:
        if c is None:
            if boundary_input is None:
                raise TopologyDataError("k >= 2 needs a boundary input or an explicit c array")
            c_vals = c_array(boundary_input, k)
        else:
            c_vals = _c_lookup(c, len(counts) - 5)
        if chi_boundary is None:
            if boundary_input is None:
                raise TopologyDataError("k >= 2 needs chi(B_{k-1}^d(M))")
            table: BettiTable = boundary_betti(boundary_input, k - 1)
            chi_boundary = euler_characteristic(table)
            if boundary_input.dim_even:
                closed = euler_boundary(boundary_input.chi_M, k - 1, True)
                if closed != chi_boundary:
                    notes.append(f"Euler mismatch: homology gives {chi_boundary}, closed form {closed}")
        system = check_system_k(counts, c_vals, k)
        target = hopf_target(k, chi_boundary)
    notes.extend(system.diagnostics)

    hopf = hopf_criterion(summary, target)
    hi = 3 if k == 1 else 4 * k - 1
    jumps = [jump_criterion(summary, l, target) for l in range(1, hi + 1)]
    return CertificationReport(
        k, summary.kbar, list(counts.m), c_vals, system, hopf, jumps, notes
    )


def summary_from_records(k: int, records: Iterable[Mapping], kbar: int = 0) -> CritSummary:
    return CritSummary(k, kbar, tuple(CritRecord.from_dict(r) for r in records))
