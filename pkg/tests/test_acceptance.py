"""Acceptance criteria, one check each, printed as PASS/FAIL lines.

Run under pytest (lines appear in the -v output) or directly:
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import sympy as sp

sys.path.insert(0, str(Path(__file__).parent))

from oracles import feasible_by_enumeration, feasible_by_milp, morse_polynomial_at_minus_one  # noqa: E402
from synthetic import synthetic_even_input  # noqa: E402

from qtopo.barycenters import CircleProvider, chi_barycenter, disjoint_union_barycenter  # noqa: E402
from qtopo.boundary import boundary_betti, builtin_boundary_input, euler_boundary  # noqa: E402
from qtopo.bubbles import Bubble, eval_bubble, residual_order  # noqa: E402
from qtopo.certifier import (  # noqa: E402
    CritRecord,
    CritSummary,
    assemble_counts,
    check_system_k,
    check_system_k1,
    hopf_sum,
)
from qtopo.functional.critical import SearchConfig, energy_at_infinity, fd_gradient, find_critical_points  # noqa: E402
from qtopo.functional.models import FlatSlabModel  # noqa: E402
from qtopo.functional.reduced import Configuration, f_pq, grad_f_pq  # noqa: E402
from qtopo.graded import BettiTable, euler_characteristic  # noqa: E402


def disk_golden():
    t0 = time.perf_counter()
    table = boundary_betti(builtin_boundary_input("disk"), 2)
    elapsed = time.perf_counter() - t0
    ok = table == BettiTable({2: 1, 3: 1}) and elapsed < 1.0
    return ok, f"B_2 of the disk boundary = {table.ranks} in {elapsed * 1e3:.2f} ms"


def euler_zero():
    values = [chi_barycenter(0, l) for l in range(1, 21)]
    ok = all(isinstance(v, int) and v == 0 for v in values)
    return ok, f"chi_barycenter(0, l) for l = 1..20: {sorted(set(values))}"


def euler_cross_check():
    rng = np.random.default_rng(2024)
    mismatches, inputs, checks = 0, 0, 0
    for _ in range(30):
        inp = synthetic_even_input(rng)
        inputs += 1
        for l in range(1, 7):
            checks += 1
            mismatches += euler_characteristic(boundary_betti(inp, l)) != euler_boundary(inp.chi_M, l, True)
    return mismatches == 0 and inputs >= 20, f"{inputs} inputs, {checks} (input, l) pairs, {mismatches} mismatches"


def disjoint_circles():
    s = CircleProvider()
    table = disjoint_union_barycenter(s, s, 3)
    return table == BettiTable({5: 4, 4: 3}), f"B_3(S^1 u S^1) = {table.ranks}"


def _instance(rng: random.Random):
    k = rng.randint(1, 4)
    length = 4 * k
    c = [rng.randint(0, 10) for _ in range(length - 4)] if k > 1 else []
    if rng.random() < 0.5:
        # built from a solution (then possibly nudged) so both verdicts occur
        c = [min(x, 4) for x in c]
        n = [rng.randint(0, 3) for _ in range(length - 1)] + [0]
        off = [1] + [0] * (length - 1) if k == 1 else [c[i - 1] if 2 <= i <= length - 4 else 0 for i in range(length)]
        m = [off[i] + n[i] + (n[i - 1] if i else 0) for i in range(length)]
        if rng.random() < 0.5:
            i = rng.randrange(length)
            m[i] = max(0, m[i] + rng.choice([-1, 1]))
        m = [min(x, 10) for x in m]
    else:
        m = [rng.randint(0, 10) for _ in range(length)]
    return m, c, k


def feasibility_oracle():
    rng = random.Random(11)
    t0 = time.perf_counter()
    n_cases, disagreements, feasible = 1200, 0, 0
    for _ in range(n_cases):
        m, c, k = _instance(rng)
        got = check_system_k1(m).feasible if k == 1 else check_system_k(m, c, k).feasible
        feasible += got
        disagreements += got != feasible_by_enumeration(m, c, k)
        disagreements += got != feasible_by_milp(m, c, k)
    elapsed = time.perf_counter() - t0
    ok = disagreements == 0 and elapsed < 30
    return ok, f"{n_cases} instances ({feasible} feasible), {disagreements} disagreements, {elapsed:.1f} s"


def hopf_arithmetic():
    rng = random.Random(5)
    t = sp.Symbol("t")
    mismatches = 0
    n_cases = 1000
    for _ in range(n_cases):
        k, kbar = rng.randint(1, 4), rng.randint(0, 3)
        records = []
        for _ in range(rng.randint(0, 12)):
            p = rng.randint(0, k // 2)
            q = k - 2 * p
            records.append(CritRecord(p, q, rng.randint(p + q - 1, 5 * p + 4 * q - 1), rng.choice([-1, 1])))
        s = CritSummary(k, kbar, records)
        counts = assemble_counts(s).m
        poly = sp.Poly(sum((c * t**i for i, c in enumerate(counts)), sp.Integer(0)), t)
        at_minus_one = int(poly.eval(-1))
        from_records = morse_polynomial_at_minus_one([r.as_dict() for r in records], kbar)
        mismatches += not (hopf_sum(s) == at_minus_one == from_records)
    return mismatches == 0, f"{n_cases} summaries, {mismatches} mismatches"


def gradient_fidelity():
    model = FlatSlabModel(
        K="(1 + 0.3*x4)*(2 + sin(x1) + 0.5*cos(x2*x3))",
        H="0.1*(x1*y1 + x2*y2 + x3*y3) + 0.05*(x4 + y4) - 0.02*(x4*y4)",
    )
    rng = np.random.default_rng(7)
    b = model.box
    worst, counts = 0.0, {}
    for p in range(3):
        for q in range(5 - 2 * p):
            if p + q == 0 or 2 * p + q > 4:
                continue
            done = 0
            while done < 100:
                cfg = Configuration(
                    rng.uniform(list(b.lo) + [model.rho_floor], list(b.hi) + [b.top], size=(p, 4)),
                    rng.uniform(b.lo, b.hi, size=(q, 3)),
                )
                if cfg.min_separation() < model.eta_floor:
                    continue
                g = grad_f_pq(model, cfg)
                f = lambda v: f_pq(model, Configuration.from_vector(v, p, q))  # noqa: E731
                fd = fd_gradient(f, cfg.to_vector(), 1e-6)
                worst = max(worst, np.linalg.norm(g - fd) / max(1.0, np.linalg.norm(g)))
                done += 1
            counts[(p, q)] = done
    return worst <= 1e-6, f"{sum(counts.values())} configurations over {sorted(counts)}, worst relative error {worst:.2e}"


def critical_point_recovery():
    lines, ok = [], True
    t0 = time.perf_counter()
    for sign in (-1, 1):
        model = FlatSlabModel(K=f"(1 + {sign}*0.5*x4)*exp(-((x1 - 0.2)**2 + (x2 + 0.1)**2 + (x3 - 0.3)**2))", H="0")
        pts = find_critical_points(model, 0, 1, SearchConfig(seed=0, n_starts=8))
        dn = np.sign(model.normal_derivative_log_K([0.2, -0.1, 0.3, 0.0]))
        good = (
            len(pts) == 1
            and np.linalg.norm(pts[0].config.boundary[0] - [0.2, -0.1, 0.3]) < 1e-6
            and pts[0].morse_index == 3
            and pts[0].i_inf == 0
            and pts[0].lk_sign == dn
        )
        ok &= good
        if pts:
            err = np.linalg.norm(pts[0].config.boundary[0] - [0.2, -0.1, 0.3])
            lines.append(f"dK/dn sign {int(dn):+d}: error {err:.1e}, morse {pts[0].morse_index}, i_inf {pts[0].i_inf}, lk sign {pts[0].lk_sign:+d}")
        else:
            lines.append(f"dK/dn sign {int(dn):+d}: nothing found")
    elapsed = time.perf_counter() - t0
    return ok and elapsed < 10, "; ".join(lines) + f"; {elapsed:.2f} s"


def bubble_pde():
    t0 = time.perf_counter()
    b = Bubble((0.0, 0.0, 0.0, 0.0), 1.0)
    r1, r2, order = residual_order(b, 0.02)
    rhs0 = 6 * math.exp(4 * eval_bubble(b, np.zeros(4)))
    elapsed = time.perf_counter() - t0
    ok = order >= 1.9 and r1 < 0.5 and abs(rhs0 - 96) < 1e-12 and elapsed < 60
    return ok, f"residual {r1:.4f} (h=0.02), {r2:.4f} (h=0.01), order {order:.3f}, rhs(0) = {rhs0:g}, {elapsed:.2f} s"


def energy_level():
    pi2 = math.pi**2
    expected = -(20 / 3) * pi2 - 4 * pi2 * math.log(pi2 / 6)
    got = energy_at_infinity(0.0, 1)
    rel = abs(got - expected) / abs(expected)
    return rel <= 1e-12, f"{got!r} vs {expected!r}, relative difference {rel:.1e}"


CRITERIA = [
    (1, "disk golden value", disk_golden),
    (2, "Euler closed form at chi = 0", euler_zero),
    (3, "homology vs closed-form Euler characteristic", euler_cross_check),
    (4, "disjoint circles, order 3", disjoint_circles),
    (5, "feasibility vs exhaustive enumeration", feasibility_oracle),
    (6, "Hopf sum vs M(-1)", hopf_arithmetic),
    (7, "gradient vs central differences", gradient_fidelity),
    (8, "one-bump critical point recovery", critical_point_recovery),
    (9, "bubble PDE residual convergence", bubble_pde),
    (10, "energy level at infinity", energy_level),
]


def _line(num, title, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {num:2d} ({title}): {detail}"


@pytest.mark.parametrize("num,title,check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(num, title, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(num, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num, title, check in CRITERIA:
        ok, detail = check()
        failed += not ok
        print(_line(num, title, ok, detail))
    sys.exit(1 if failed else 0)
