import math
import warnings

import numpy as np
import pytest

from qtopo.functional import models
from qtopo.functional.critical import (
    DegeneratePointWarning,
    SearchConfig,
    energy_at_infinity,
    fd_gradient,
    find_critical_points,
    nd_check,
    search_critical_points,
    to_summary,
)
from qtopo.functional.models import (
    Box,
    FlatSlabModel,
    GridModel,
    ModelError,
    SingularityError,
    cutoff,
    cutoff_derivative,
    load_model,
    singular_part,
)
from qtopo.functional.reduced import (
    Configuration,
    f_pq,
    f_pq_split,
    grad_f_pq,
    l_k,
    lk,
    partial_f,
)

BUMP = "exp(-((x1 - 0.2)**2 + (x2 + 0.1)**2 + (x3 - 0.3)**2))"
SMOOTH_H = "0.1*(x1*y1 + x2*y2 + x3*y3) + 0.05*(x4 + y4) - 0.02*(x4*y4)"
PQ = [(0, 1), (1, 0), (0, 2), (0, 3), (1, 1), (0, 4), (1, 2), (2, 0)]


@pytest.fixture(scope="module")
def rich_model():
    return FlatSlabModel(K=f"(1 + 0.3*x4)*(2 + sin(x1) + 0.5*cos(x2*x3))", H=SMOOTH_H, R="0.5 + 0.1*x1")


def random_config(model, p, q, rng, sep=0.1):
    b = model.box
    while True:
        a = rng.uniform(list(b.lo) + [model.rho_floor], list(b.hi) + [b.top], size=(p, 4))
        c = rng.uniform(b.lo, b.hi, size=(q, 3))
        cfg = Configuration(a, c)
        if cfg.min_separation() >= sep:
            return cfg


# -- cutoff and singular part ------------------------------------------------


def test_cutoff_pieces():
    rho = 0.1
    t = np.linspace(0, 0.3, 301)
    v = cutoff(t, rho)
    assert np.allclose(v[t <= rho], t[t <= rho])
    assert np.allclose(v[t >= 2 * rho], 2 * rho)
    assert np.all(np.diff(v) >= -1e-15)
    # C^1 at both joins
    for t0 in (rho, 2 * rho):
        h = 1e-7
        assert abs(cutoff(t0 + h, rho) - cutoff(t0 - h, rho)) / (2 * h) == pytest.approx(cutoff_derivative(t0, rho), abs=1e-5)
    mid = np.linspace(0.11, 0.19, 9)
    fd = (cutoff(mid + 1e-7, rho) - cutoff(mid - 1e-7, rho)) / 2e-7
    assert np.allclose(fd, cutoff_derivative(mid, rho), atol=1e-6)


def test_singular_part_mirror_term():
    x = np.array([0.0, 0.0, 0.0, 0.05])
    far = np.array([0.0, 0.0, 0.0, 0.5])
    near = np.array([0.03, 0.0, 0.0, 0.02])
    assert singular_part(x, far, 0.1) == pytest.approx(-2 * math.log(0.2))
    expected = -2 * math.log(np.linalg.norm(x - near)) - 2 * math.log(np.linalg.norm(x - near * [1, 1, 1, -1]))
    assert singular_part(x, near, 0.1) == pytest.approx(expected)


# -- models ------------------------------------------------------------------


def test_green_symmetry_and_normal_derivative(rich_model):
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.uniform([-1, -1, -1, 0.05], [1, 1, 1, 1])
        y = rng.uniform([-1, -1, -1, 0.05], [1, 1, 1, 1])
        assert rich_model.green(x, y) == pytest.approx(rich_model.green(y, x), rel=1e-12)
        # the singular part has zero normal derivative on the boundary
        yb = y * [1, 1, 1, 0]
        g = rich_model.grad_green(x, yb) - rich_model.grad_regular(x, yb)
        assert abs(g[3]) < 1e-12


def test_grad_and_lap_green_against_fd(rich_model):
    rng = np.random.default_rng(1)
    x = np.array([0.1, -0.2, 0.3, 0.4])
    for _ in range(5):
        y = rng.uniform([-1, -1, -1, 0.05], [1, 1, 1, 1])
        f = lambda z: rich_model.green(x, z)  # noqa: E731
        assert np.allclose(rich_model.grad_green(x, y), fd_gradient(f, y, 1e-6), rtol=1e-6, atol=1e-7)
        h = 1e-3
        lap = sum(f(y + h * e) - 2 * f(y) + f(y - h * e) for e in np.eye(4)) / h**2
        assert rich_model.lap_green(x, y) == pytest.approx(lap, rel=1e-4, abs=1e-4)


def test_model_validation():
    with pytest.raises(ModelError, match="symmetric"):
        FlatSlabModel(H="x1")
    with pytest.raises(ModelError, match="positive"):
        FlatSlabModel(K="x1")
    with pytest.raises(ModelError, match="unknown"):
        FlatSlabModel(K="z + 1")
    with pytest.raises(ModelError):
        Box((0, 0, 0), (1, 1, 0), 1)
    with pytest.raises(ModelError):
        FlatSlabModel(rho_floor=0)


def test_model_documents(tmp_path):
    path = tmp_path / "m.json"
    path.write_text('{"model": {"type": "flat-slab", "K": "2 + x1", "rho_floor": 0.1}}')
    m = load_model(path)
    assert m.K([1, 0, 0, 0]) == 3 and m.rho_floor == 0.1
    path.write_text('{"type": "cubic"}')
    with pytest.raises(ModelError):
        load_model(path)
    path.write_text('{"K": "((("}')
    with pytest.raises(ModelError):
        load_model(path)
    path.write_text("nope")
    with pytest.raises(ModelError):
        load_model(path)


def grid_from(expr_model, n=17):
    lo, hi = np.array([-1.2, -1.2, -1.2, -0.2]), np.array([1.2, 1.2, 1.2, 1.2])
    axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, -1).reshape(-1, 4)
    vals = np.array([expr_model.K(p) for p in pts]).reshape((n,) * 4)
    return vals, lo, hi


def test_grid_model_tracks_expression(tmp_path):
    exact = FlatSlabModel(K=f"(1 + 0.3*x4)*{BUMP}")
    vals, lo, hi = grid_from(exact)
    grid = GridModel(vals, lo, hi, box=exact.box)
    cfg = Configuration([[0.1, 0.2, -0.1, 0.4]], [[0.3, -0.2, 0.1]])
    assert f_pq(grid, cfg) == pytest.approx(f_pq(exact, cfg), abs=1e-3)
    g1, g2 = grad_f_pq(grid, cfg), grad_f_pq(exact, cfg)
    assert np.linalg.norm(g1 - g2) <= GridModel.gradient_tolerance * max(1, np.linalg.norm(g2))
    # document route with an npz file
    np.savez(tmp_path / "k.npz", K=vals, lo=lo, hi=hi)
    (tmp_path / "g.json").write_text('{"type": "grid", "K": "k.npz"}')
    loaded = load_model(tmp_path / "g.json")
    assert loaded.K([0.2, -0.1, 0.3, 0.0]) == pytest.approx(grid.K([0.2, -0.1, 0.3, 0.0]))
    with pytest.raises(ModelError):
        GridModel(-vals, lo, hi)


# -- configurations and F ----------------------------------------------------


def test_configuration_round_trip():
    cfg = Configuration([[0.1, 0.2, 0.3, 0.4]], [[0.5, 0.6, 0.7], [0.0, 0.1, 0.2]])
    assert (cfg.p, cfg.q, cfg.k, cfg.dim) == (1, 2, 4, 10)
    back = Configuration.from_vector(cfg.to_vector(), 1, 2)
    assert np.array_equal(back.to_vector(), cfg.to_vector())
    assert np.array_equal(Configuration.from_dict(cfg.as_dict()).to_vector(), cfg.to_vector())
    assert cfg.points()[2, 3] == 0.0
    with pytest.raises(ValueError):
        Configuration.from_vector(np.zeros(5), 1, 1)


def test_configuration_validate(rich_model):
    with pytest.raises(ValueError, match="rho_floor"):
        Configuration([[0, 0, 0, 0.01]]).validate(rich_model)
    with pytest.raises(ValueError, match="eta_floor"):
        Configuration([], [[0, 0, 0], [0.01, 0, 0]]).validate(rich_model)


def test_f_routes_agree_and_permutation_invariance(rich_model):
    rng = np.random.default_rng(2)
    for p, q in PQ:
        cfg = random_config(rich_model, p, q, rng)
        a, b = f_pq_split(rich_model, cfg)
        assert a == pytest.approx(b, rel=1e-12)
        perm = Configuration(cfg.interior[::-1], cfg.boundary[::-1])
        assert f_pq(rich_model, perm) == pytest.approx(f_pq(rich_model, cfg), rel=1e-12)


def test_coincident_points_raise(rich_model):
    with pytest.raises(SingularityError):
        f_pq(rich_model, Configuration([], [[0, 0, 0], [0, 0, 0]]))
    with pytest.raises(SingularityError):
        grad_f_pq(rich_model, Configuration([[0, 0, 0, 0.5], [0, 0, 0, 0.5]]))


@pytest.mark.parametrize("p,q", PQ)
def test_gradient_matches_fd(rich_model, p, q):
    rng = np.random.default_rng(10 * p + q)
    for _ in range(10):
        cfg = random_config(rich_model, p, q, rng)
        v = cfg.to_vector()
        f = lambda w: f_pq(rich_model, Configuration.from_vector(w, p, q))  # noqa: E731
        g = grad_f_pq(rich_model, cfg)
        fd = fd_gradient(f, v, 1e-6)
        assert np.linalg.norm(g - fd) <= 1e-6 * max(1.0, np.linalg.norm(g))


def test_partial_f_at_own_point():
    m = FlatSlabModel(K="2")
    cfg = Configuration([[0, 0, 0, 0.5]])
    assert partial_f(m, cfg, 0) == pytest.approx(2.0)  # exp(4 * ln(2) / 4)
    with pytest.raises(IndexError):
        partial_f(m, cfg, 1)


# -- critical points ---------------------------------------------------------


def one_bump(sign: float):
    return FlatSlabModel(K=f"(1 + {sign}*0.5*x4)*{BUMP}")


@pytest.mark.parametrize("sign", [-1, 1])
def test_one_bump_recovery(sign):
    model = one_bump(sign)
    pts = find_critical_points(model, 0, 1, SearchConfig(n_starts=6))
    assert len(pts) == 1
    c = pts[0]
    assert np.linalg.norm(c.config.boundary[0] - [0.2, -0.1, 0.3]) < 1e-6
    assert c.morse_index == 3 and c.i_inf == 0
    assert c.lk_sign == int(np.sign(model.normal_derivative_log_K([0.2, -0.1, 0.3, 0]))) == sign
    # lk for q > 0 is F^(1/4) d(ln K)/dn, and F = K at a lone boundary point
    assert c.lk_value == pytest.approx(0.5 * sign)


def test_two_bumps_find_maxima_and_saddle():
    k = "(1 - 0.5*x4)*(exp(-8*((x1 - 0.3)**2 + x2**2 + x3**2)) + exp(-8*((x1 + 0.3)**2 + x2**2 + x3**2)))"
    model = FlatSlabModel(K=k)
    pts = find_critical_points(model, 0, 1, SearchConfig(n_starts=24))
    idx = sorted(c.i_inf for c in pts)
    assert idx == [0, 0, 1]
    saddle = next(c for c in pts if c.i_inf == 1)
    assert np.allclose(saddle.config.boundary[0], 0, atol=1e-6)


def test_interior_point_lk_relation():
    model = FlatSlabModel(K="exp(-((x1)**2 + x2**2 + x3**2 + (x4 - 0.5)**2))", R="1")
    pts = find_critical_points(model, 1, 0, SearchConfig(n_starts=6))
    assert len(pts) == 1
    c = pts[0]
    assert np.allclose(c.config.interior[0], [0, 0, 0, 0.5], atol=1e-6)
    assert c.morse_index == 4 and c.i_inf == 0
    assert l_k(model, c.config) == pytest.approx(4 * lk(model, c.config), rel=1e-5)
    assert c.lk_sign == -1


def test_constant_K_is_degenerate():
    model = FlatSlabModel(K="1")
    with pytest.warns(DegeneratePointWarning):
        pts = find_critical_points(model, 0, 1, SearchConfig(n_starts=4))
    assert pts == []
    found, diag = search_critical_points(model, 0, 1, SearchConfig(n_starts=4))
    assert diag["degenerate"] == len(found) > 0
    assert not nd_check(found)


def test_search_is_reproducible_and_thread_safe():
    model = one_bump(-1)
    a = [c.as_dict() for c in find_critical_points(model, 0, 1, SearchConfig(seed=5, n_starts=6))]
    b = [c.as_dict() for c in find_critical_points(model, 0, 1, SearchConfig(seed=5, n_starts=6))]
    t = [c.as_dict() for c in find_critical_points(model, 0, 1, SearchConfig(seed=5, n_starts=6, workers=3))]
    assert a == b == t


def test_to_summary():
    pts = find_critical_points(one_bump(-1), 0, 1, SearchConfig(n_starts=4))
    s = to_summary(pts, 1)
    assert s.as_dict()["records"] == [{"p": 0, "q": 1, "i_inf": 0, "lk_sign": -1}]


def test_search_rejects_empty_problem():
    with pytest.raises(ValueError):
        search_critical_points(one_bump(-1), 0, 0)


# -- energy ------------------------------------------------------------------


def test_energy_closed_form():
    pi2 = math.pi**2
    assert energy_at_infinity(0.0, 1) == pytest.approx(-20 / 3 * pi2 - 4 * pi2 * math.log(pi2 / 6), rel=1e-12)
    e2 = energy_at_infinity(0.0, 2)
    assert e2 == pytest.approx(-40 / 3 * pi2 - 8 * pi2 * math.log(pi2 / 3), rel=1e-12)
    assert e2 != pytest.approx(2 * energy_at_infinity(0.0, 1))
    assert energy_at_infinity(1.0, 1) - energy_at_infinity(0.0, 1) == pytest.approx(-8 * pi2)
