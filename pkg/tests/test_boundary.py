import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtopo.barycenters import CircleProvider, SphereProvider, TopologyDataError
from qtopo.boundary import (
    BoundaryBarycenterInput,
    UnsupportedError,
    boundary_betti,
    boundary_connectivity_bounds,
    bqp_closure_quotient_betti,
    bqp_euler,
    builtin_boundary_input,
    euler_boundary,
    inclusion_exclusion_euler,
    t_i_betti,
    topology_report,
)
from qtopo.graded import BettiTable, euler_characteristic
from synthetic import synthetic_even_input


@pytest.fixture
def disk():
    return builtin_boundary_input("disk")


@pytest.fixture
def annulus():
    return builtin_boundary_input("annulus")


def test_disk_values(disk):
    assert boundary_betti(disk, 1) == BettiTable({1: 1})
    assert boundary_betti(disk, 2) == BettiTable({2: 1, 3: 1})
    assert boundary_betti(disk, 3) == BettiTable({4: 1, 5: 1})


def test_disk_higher_order_needs_data(disk):
    with pytest.raises(TopologyDataError):
        boundary_betti(disk, 4)
    with pytest.raises(TopologyDataError):
        t_i_betti(disk, 2, 2)


def test_annulus_values(annulus):
    assert boundary_betti(annulus, 1) == BettiTable({0: 1, 1: 2})
    assert boundary_betti(annulus, 2) == BettiTable({1: 1, 2: 3, 3: 3})
    assert boundary_betti(annulus, 3) == BettiTable({2: 1, 3: 3, 4: 5, 5: 4})
    for l in (1, 2, 3):
        assert euler_characteristic(boundary_betti(annulus, l)) == euler_boundary(0, l, True) == 0


def test_input_validation():
    with pytest.raises(ValueError):
        BoundaryBarycenterInput(CircleProvider(), SphereProvider(2), 1, 1)
    with pytest.raises(TopologyDataError, match="should be"):
        BoundaryBarycenterInput(CircleProvider(), SphereProvider(2), 3, 2)
    with pytest.raises(TopologyDataError, match="chi 0"):
        BoundaryBarycenterInput(SphereProvider(2), SphereProvider(3), 2, 4)
    # odd dimension: chi(dM) need not vanish
    inp = BoundaryBarycenterInput(SphereProvider(2), SphereProvider(3), 1, 3)
    assert not inp.dim_even


def test_euler_boundary():
    assert euler_boundary(5, 1, True) == 0
    assert euler_boundary(1, 2, True) == 1
    assert euler_boundary(3, 5, True) == euler_boundary(3, 4, True)
    assert all(euler_boundary(0, l, True) == 0 for l in range(1, 30))
    with pytest.raises(UnsupportedError):
        euler_boundary(1, 2, False)


@given(st.integers(-6, 6), st.integers(1, 8))
def test_inclusion_exclusion_matches_closed_form(chi, l):
    assert inclusion_exclusion_euler(chi, l) == euler_boundary(chi, 2 * l, True)


def test_bqp_euler():
    assert bqp_euler(2, 0, 3) == 0
    assert bqp_euler(2, 2, 0) == 1
    with pytest.raises(ValueError):
        bqp_euler(1, -1, 0)


def test_closure_quotient(disk):
    assert bqp_closure_quotient_betti(1, 1, disk) == BettiTable({4: 1})
    assert bqp_closure_quotient_betti(1, 2, disk) == BettiTable({5: 1, 6: 1})
    with pytest.raises(ValueError):
        bqp_closure_quotient_betti(0, 1, disk)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_homology_euler_matches_closed_form(seed):
    inp = synthetic_even_input(np.random.default_rng(seed))
    for l in range(1, 7):
        assert euler_characteristic(boundary_betti(inp, l)) == euler_boundary(inp.chi_M, l, True)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_top_colimit_is_the_even_order_space(seed, m):
    inp = synthetic_even_input(np.random.default_rng(seed))
    assert t_i_betti(inp, m, m) == boundary_betti(inp, 2 * m)


def test_t_zero_is_boundary_barycenter(disk):
    assert t_i_betti(disk, 3, 0) == CircleProvider().table(3)
    with pytest.raises(ValueError):
        t_i_betti(disk, 1, 2)


def test_connectivity_bounds(disk):
    b = boundary_connectivity_bounds(disk, 2, 1)
    assert (b.even_formula, b.odd_formula, b.reported) == (1, None, 1)
    assert b.observed == 1 and not b.discrepancy
    b3 = boundary_connectivity_bounds(disk, 3, 1)
    assert (b3.even_formula, b3.odd_formula) == (2, 3)
    assert b3.reported == 2 and b3.discrepancy
    with pytest.raises(ValueError):
        boundary_connectivity_bounds(disk, 2, 0)


def test_topology_report(disk):
    rows = list(topology_report(disk, 3, connectivity=1))
    assert [r["order"] for r in rows] == [1, 2, 3]
    assert all(r["consistency"] == "pass" for r in rows)
    assert rows[1]["betti"] == {"reduced": True, "ranks": {"2": 1, "3": 1}}
    assert rows[1]["euler"] == 1
    assert "connectivity" in rows[2]


def test_topology_report_odd_dimension():
    inp = BoundaryBarycenterInput(SphereProvider(2), SphereProvider(3), 1, 3)
    rows = list(topology_report(inp, 1))
    assert rows[0]["consistency"] == "n/a"
