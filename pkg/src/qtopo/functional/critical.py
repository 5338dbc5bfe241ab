"""Multi-start search for critical points of F_{p,q} and their classification.

Each start minimizes 1/2 |grad F|^2 with L-BFGS-B inside the chart box,
then Newton refines on grad F = 0 with a finite-difference Hessian.  Every
start draws from its own generator seeded by ``(seed, start)``, so results
do not depend on thread scheduling.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..certifier import CritRecord, CritSummary
from .models import ManifoldModel, SingularityError
from .reduced import Configuration, f_pq, grad_f_pq, lk

__all__ = [
    "SearchConfig",
    "CritPointAtInfinity",
    "DegeneratePointWarning",
    "fd_hessian",
    "fd_gradient",
    "energy_at_infinity",
    "search_critical_points",
    "find_critical_points",
    "nd_check",
    "to_summary",
]

log = logging.getLogger(__name__)


class DegeneratePointWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    n_starts: int = 16
    lbfgs_maxiter: int = 400
    newton_maxiter: int = 50
    grad_tol: float = 1e-9
    dedup_radius: float = 1e-3
    hessian_step: float = 1e-4
    gradient_step: float = 1e-5
    eig_floor: float = 1e-8
    lk_floor: float = 1e-10
    workers: int = 1

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def fd_gradient(f, v: np.ndarray, h: float = 1e-5) -> np.ndarray:
    v = np.asarray(v, float)
    out = np.empty_like(v)
    for i in range(len(v)):
        e = np.zeros_like(v)
        e[i] = h
        out[i] = (f(v + e) - f(v - e)) / (2 * h)
    return out


def fd_hessian(grad, v: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central differences of a gradient, symmetrized."""
    v = np.asarray(v, float)
    n = len(v)
    hess = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        hess[:, i] = (grad(v + e) - grad(v - e)) / (2 * h)
    return 0.5 * (hess + hess.T)


def energy_at_infinity(f_value: float, k: int) -> float:
    """Energy level -20/3 k pi^2 - 4 k pi^2 ln(k pi^2 / 6) - 8 pi^2 F."""
    pi2 = math.pi**2
    return -20.0 / 3.0 * k * pi2 - 4.0 * k * pi2 * math.log(k * pi2 / 6.0) - 8.0 * pi2 * f_value


@dataclass
class CritPointAtInfinity:
    config: Configuration
    f_value: float
    grad_norm: float
    morse_index: int
    i_inf: int
    lk_value: float
    lk_sign: int
    energy: float
    eigenvalues: np.ndarray = field(repr=False)
    nondegenerate: bool = True
    tolerances: dict = field(default_factory=dict, repr=False)

    @property
    def p(self) -> int:
        return self.config.p

    @property
    def q(self) -> int:
        return self.config.q

    def record(self) -> CritRecord:
        return CritRecord(self.p, self.q, self.i_inf, self.lk_sign)

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "i_inf": self.i_inf,
            "lk_sign": self.lk_sign,
            "config": self.config.as_dict(),
            "f_value": self.f_value,
            "grad_norm": self.grad_norm,
            "morse_index": self.morse_index,
            "lk_value": self.lk_value,
            "energy": self.energy,
            "min_abs_eigenvalue": float(np.abs(self.eigenvalues).min()) if len(self.eigenvalues) else None,
            "nondegenerate": self.nondegenerate,
        }


class _Problem:
    """F_{p,q} on the flat chart vector, with box bounds."""

    def __init__(self, model: ManifoldModel, p: int, q: int):
        self.model, self.p, self.q = model, p, q
        b = model.box
        lo_i = list(b.lo) + [model.rho_floor]
        hi_i = list(b.hi) + [b.top]
        self.lo = np.array(lo_i * p + list(b.lo) * q, float)
        self.hi = np.array(hi_i * p + list(b.hi) * q, float)

    def config(self, v) -> Configuration:
        return Configuration.from_vector(v, self.p, self.q)

    def f(self, v) -> float:
        return f_pq(self.model, self.config(v))

    def grad(self, v) -> np.ndarray:
        return grad_f_pq(self.model, self.config(v))

    def inside(self, v) -> bool:
        return bool(np.all(v >= self.lo - 1e-12) and np.all(v <= self.hi + 1e-12))

    def admissible(self, v) -> bool:
        if not self.inside(v):
            return False
        return self.config(v).min_separation() >= self.model.eta_floor

    def random_start(self, rng: np.random.Generator, tries: int = 1000) -> np.ndarray:
        for _ in range(tries):
            v = rng.uniform(self.lo, self.hi)
            if self.admissible(v):
                return v
        raise ValueError("could not sample a configuration respecting the separation floor")


def _descend(prob: _Problem, v0: np.ndarray, cfg: SearchConfig) -> np.ndarray:
    """Minimize 1/2 |g|^2; its gradient H g comes from one directional difference of g."""

    def obj(v):
        try:
            g = prob.grad(v)
        except SingularityError:
            return 1e30, np.zeros_like(v)
        ng = np.linalg.norm(g)
        if ng == 0.0:
            return 0.0, np.zeros_like(v)
        h = cfg.hessian_step
        d = g / ng
        hg = (prob.grad(v + h * d) - prob.grad(v - h * d)) / (2 * h) * ng
        return 0.5 * ng**2, hg

    res = minimize(
        obj,
        v0,
        jac=True,
        method="L-BFGS-B",
        bounds=list(zip(prob.lo, prob.hi)),
        options={"maxiter": cfg.lbfgs_maxiter, "ftol": 1e-30, "gtol": 1e-14},
    )
    return res.x


def _newton(prob: _Problem, v: np.ndarray, cfg: SearchConfig) -> tuple[np.ndarray, float, bool]:
    g = prob.grad(v)
    for _ in range(cfg.newton_maxiter):
        ng = float(np.linalg.norm(g))
        if ng <= cfg.grad_tol:
            return v, ng, True
        hess = fd_hessian(prob.grad, v, cfg.hessian_step)
        step = np.linalg.lstsq(hess, -g, rcond=None)[0]
        v = v + step
        if not prob.inside(v):
            return v, ng, False
        try:
            g = prob.grad(v)
        except SingularityError:
            return v, math.inf, False
    ng = float(np.linalg.norm(g))
    return v, ng, ng <= cfg.grad_tol


def _classify(prob: _Problem, v: np.ndarray, gnorm: float, cfg: SearchConfig) -> CritPointAtInfinity:
    model, p, q = prob.model, prob.p, prob.q
    config = prob.config(v)
    hess = fd_hessian(prob.grad, v, cfg.hessian_step)
    eig = np.linalg.eigvalsh(hess)
    morse = int((eig < 0).sum())
    fval = prob.f(v)
    lval = lk(model, config)
    nondeg = bool(np.abs(eig).min() > cfg.eig_floor) and abs(lval) > cfg.lk_floor
    sign = 0 if abs(lval) <= cfg.lk_floor else (1 if lval > 0 else -1)
    return CritPointAtInfinity(
        config=config,
        f_value=fval,
        grad_norm=gnorm,
        morse_index=morse,
        i_inf=5 * p + 4 * q - 1 - morse,
        lk_value=lval,
        lk_sign=sign,
        energy=energy_at_infinity(fval, 2 * p + q),
        eigenvalues=eig,
        nondegenerate=nondeg,
        tolerances={
            "grad_tol": cfg.grad_tol,
            "hessian_step": cfg.hessian_step,
            "eig_floor": cfg.eig_floor,
            "lk_floor": cfg.lk_floor,
        },
    )


def _one_start(prob: _Problem, cfg: SearchConfig, start: int):
    rng = np.random.default_rng([cfg.seed, start])
    v0 = prob.random_start(rng)
    v = _descend(prob, v0, cfg)
    try:
        v, gnorm, ok = _newton(prob, v, cfg)
    except SingularityError:
        return None
    if not ok or not prob.admissible(v):
        return None
    return v, gnorm


def search_critical_points(
    model: ManifoldModel, p: int, q: int, cfg: SearchConfig | None = None
) -> tuple[list[CritPointAtInfinity], dict]:
    """All converged, deduplicated critical points, degenerate ones included.

    Returns the points and a diagnostics dict.
    """
    cfg = cfg or SearchConfig()
    if p < 0 or q < 0 or p + q == 0:
        raise ValueError("need p + q >= 1")
    prob = _Problem(model, p, q)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(lambda s: _one_start(prob, cfg, s), range(cfg.n_starts)))
    else:
        results = [_one_start(prob, cfg, s) for s in range(cfg.n_starts)]

    found: list[CritPointAtInfinity] = []
    keys: list[np.ndarray] = []
    converged = 0
    for res in results:
        if res is None:
            continue
        converged += 1
        v, gnorm = res
        key = prob.config(v).canonical().to_vector()
        if any(np.linalg.norm(key - k) < cfg.dedup_radius for k in keys):
            continue
        keys.append(key)
        found.append(_classify(prob, v, gnorm, cfg))
    found.sort(key=lambda c: tuple(c.config.canonical().to_vector()))
    diag = {
        "p": p,
        "q": q,
        "starts": cfg.n_starts,
        "converged": converged,
        "distinct": len(found),
        "degenerate": sum(not c.nondegenerate for c in found),
    }
    if converged == 0:
        diag["message"] = "no start converged"
        log.warning("(p,q)=(%d,%d): no start converged", p, q)
    return found, diag


def find_critical_points(
    model: ManifoldModel, p: int, q: int, cfg: SearchConfig | None = None
) -> list[CritPointAtInfinity]:
    """Nondegenerate critical points only; degenerate ones trigger a warning."""
    found, diag = search_critical_points(model, p, q, cfg)
    if diag["degenerate"]:
        warnings.warn(
            f"(p,q)=({p},{q}): {diag['degenerate']} degenerate critical point(s) excluded",
            DegeneratePointWarning,
            stacklevel=2,
        )
    return [c for c in found if c.nondegenerate]


def nd_check(points, cfg: SearchConfig | None = None) -> bool:
    """True iff every point has a clean spectrum and |lk| above the floor (vacuous when empty)."""
    cfg = cfg or SearchConfig()
    return all(
        c.nondegenerate
        and np.abs(c.eigenvalues).min() > cfg.eig_floor
        and abs(c.lk_value) > cfg.lk_floor
        for c in points
    )


def to_summary(points, k: int, kbar: int = 0) -> CritSummary:
    return CritSummary(k, kbar, tuple(c.record() for c in points))
