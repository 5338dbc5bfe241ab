"""Standard bubbles in R^4, their defining PDE and leading-order expansions.

The standard bubble is ``delta(y) = ln(2 lam / (1 + lam^2 |y - b|^2))``; it
solves ``Lap^2 delta = 6 exp(4 delta)``.  The finite-difference check applies
the 9-point 4-D Laplacian stencil twice; the composed stencil reaches 2h
along the axes and h along the coordinate diagonals, and is second-order
accurate.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .functional.models import ManifoldModel, cutoff
from .functional.reduced import Configuration, f_pq, grad_log_partial_f

__all__ = [
    "Bubble",
    "DomainError",
    "eval_bubble",
    "grad_bubble",
    "lap_bubble",
    "fd_laplacian",
    "fd_bilaplacian",
    "bubble_pde_residual",
    "residual_order",
    "truncated_bubble",
    "expansion_eval",
    "energy_expansion",
    "EXPANSION_KINDS",
]

PI2 = math.pi**2


class DomainError(ValueError):
    """Evaluation outside the region where a formula or stencil applies."""


@dataclass(frozen=True)
class Bubble:
    center: tuple[float, float, float, float]
    scale: float

    def __post_init__(self):
        c = tuple(float(x) for x in self.center)
        if len(c) != 4:
            raise ValueError("bubble center must be a point of R^4")
        object.__setattr__(self, "center", c)
        if not self.scale > 0:
            raise ValueError(f"bubble scale must be positive, got {self.scale}")


def eval_bubble(bubble: Bubble, y) -> np.ndarray | float:
    """ln(2 lam) - ln(1 + lam^2 |y - b|^2); ``y`` may be a stack of points (..., 4)."""
    y = np.asarray(y, float)
    r2 = ((y - np.asarray(bubble.center)) ** 2).sum(-1)
    lam = bubble.scale
    out = math.log(2 * lam) - np.log1p(lam**2 * r2)
    return out if np.ndim(out) else float(out)


def grad_bubble(bubble: Bubble, y) -> np.ndarray:
    y = np.asarray(y, float)
    d = y - np.asarray(bubble.center)
    lam2 = bubble.scale**2
    return -2 * lam2 * d / (1 + lam2 * (d**2).sum(-1, keepdims=True))


def lap_bubble(bubble: Bubble, y) -> np.ndarray | float:
    """Exact Laplacian in R^4: -(8 lam^2 + 4 lam^4 r^2) / (1 + lam^2 r^2)^2."""
    y = np.asarray(y, float)
    r2 = ((y - np.asarray(bubble.center)) ** 2).sum(-1)
    lam2 = bubble.scale**2
    out = -(8 * lam2 + 4 * lam2**2 * r2) / (1 + lam2 * r2) ** 2
    return out if np.ndim(out) else float(out)


_AXES = np.eye(4)


def fd_laplacian(f, y, h: float) -> np.ndarray:
    """9-point central Laplacian in R^4 (centre plus two neighbours per axis)."""
    y = np.asarray(y, float)
    c = f(y)
    total = np.zeros_like(c)
    for e in _AXES:
        total = total + f(y + h * e) + f(y - h * e)
    return (total - 8 * c) / h**2


def fd_bilaplacian(f, y, h: float) -> np.ndarray:
    """Laplacian stencil applied to itself; reaches 2h along axes and h diagonally."""
    return fd_laplacian(lambda z: fd_laplacian(f, z, h), y, h)


def bubble_pde_residual(
    bubble: Bubble,
    h: float,
    sample_points: Sequence | np.ndarray | None = None,
    box: tuple[Sequence[float], Sequence[float]] | None = None,
) -> float:
    """max |FD bilaplacian(delta) - 6 exp(4 delta)| over the sample points.

    Defaults: the bubble centre and its 8 axis neighbours at distance
    0.1 / lam, inside the box ``centre +- 1 / lam``.  A sample whose stencil
    leaves the box raises :class:`DomainError`.
    """
    b = np.asarray(bubble.center)
    lam = bubble.scale
    if sample_points is None:
        offs = np.vstack([np.zeros(4), 0.1 / lam * _AXES, -0.1 / lam * _AXES])
        sample_points = b + offs
    pts = np.atleast_2d(np.asarray(sample_points, float))
    if box is None:
        box = (b - 1.0 / lam, b + 1.0 / lam)
    lo, hi = np.asarray(box[0], float), np.asarray(box[1], float)
    reach = 2 * h
    if np.any(pts - reach < lo - 1e-12) or np.any(pts + reach > hi + 1e-12):
        raise DomainError(f"stencil of half-width {reach} leaves the sample box")
    f = lambda z: eval_bubble(bubble, z)  # noqa: E731
    bil = fd_bilaplacian(f, pts, h)
    rhs = 6 * np.exp(4 * eval_bubble(bubble, pts))
    return float(np.abs(bil - rhs).max())


def residual_order(bubble: Bubble, h: float, **kw) -> tuple[float, float, float]:
    """Residuals at h and h/2 and the observed order log2(r_h / r_{h/2})."""
    r1 = bubble_pde_residual(bubble, h, **kw)
    r2 = bubble_pde_residual(bubble, h / 2, **kw)
    return r1, r2, math.log2(r1 / r2)


def truncated_bubble(model: ManifoldModel, a, lam: float, x) -> float:
    """ln(2 lam / (1 + lam^2 chi_rho(d(x, a))^2))."""
    if not lam > 0:
        raise ValueError("scale must be positive")
    t = cutoff(model.distance(x, a), model.rho)
    return math.log(2 * lam) - math.log1p(lam**2 * t**2)


EXPANSION_KINDS = ("interior_profile", "exterior_profile", "self_interaction", "self_scale")


def _is_boundary(model: ManifoldModel, a) -> bool:
    return model.boundary_distance(a) == 0.0


def expansion_eval(
    kind: str,
    a,
    lam: float,
    model: ManifoldModel,
    x=None,
    *,
    lam_floor: float = 10.0,
    boundary: bool | None = None,
) -> float:
    """Leading terms of the projected-bubble expansions (remainders dropped).

    ``interior_profile`` and ``exterior_profile`` are fields evaluated at
    ``x``; ``self_interaction`` and ``self_scale`` are numbers.  The boundary
    branch is used when ``a`` lies on the boundary (override with
    ``boundary``).
    """
    if kind not in EXPANSION_KINDS:
        raise ValueError(f"unknown expansion {kind!r}; choose from {EXPANSION_KINDS}")
    if lam < lam_floor:
        raise DomainError(f"scale {lam} below the floor {lam_floor}")
    a = np.asarray(a, float)
    bd = _is_boundary(model, a) if boundary is None else boundary
    half = 0.5 if bd else 1.0

    if kind in ("interior_profile", "exterior_profile"):
        if x is None:
            raise ValueError(f"{kind} needs an evaluation point x")
        x = np.asarray(x, float)
        if kind == "interior_profile":
            return (
                truncated_bubble(model, a, lam, x)
                + math.log(lam / 2)
                + half * model.regular(a, x)
                + half / (4 * lam**2) * model.lap_regular(a, x)
            )
        return half * model.green(a, x) + half / (4 * lam**2) * model.lap_green(a, x)

    h_aa = model.regular(a, a)
    lap_h = model.lap_regular(a, a)
    if kind == "self_interaction":
        if bd:
            return 16 * PI2 * math.log(lam) - 20 * PI2 / 3 + 4 * PI2 * h_aa + 2 * PI2 / lam**2 * lap_h
        return 32 * PI2 * math.log(lam) - 40 * PI2 / 3 + 16 * PI2 * h_aa + 8 * PI2 / lam**2 * lap_h
    if bd:
        return 8 * PI2 - 2 * PI2 / lam**2 * lap_h
    return 16 * PI2 - 8 * PI2 / lam**2 * lap_h


def energy_expansion(
    model: ManifoldModel,
    config: Configuration,
    alphas: Sequence[float],
    lams: Sequence[float],
    *,
    betas: Sequence[float] = (),
    mus: Sequence[float] = (),
    sigmas: Sequence[float] | None = None,
) -> float:
    """Closed-form right-hand side of the energy expansion near infinity.

    Masses ``alphas`` and scales ``lams`` follow the configuration's point
    order.  ``betas``/``mus`` are the negative-direction coefficients and
    eigenvalue weights; ``sigmas`` default to zero because the quantities
    defining them are not computable here.
    """
    p, q = config.p, config.q
    n = p + q
    if len(alphas) != n or len(lams) != n:
        raise ValueError(f"need {n} masses and {n} scales")
    if len(betas) != len(mus):
        raise ValueError("betas and mus must have the same length")
    sigmas = [0.0] * n if sigmas is None else list(sigmas)
    if len(sigmas) != n:
        raise ValueError(f"need {n} sigmas")
    k = 2 * p + q
    w = [2.0] * p + [1.0] * q

    total = -20.0 / 3 * k * PI2 - 4 * k * PI2 * math.log(k * PI2 / 6) - 8 * PI2 * f_pq(model, config)
    total += 16 * PI2 * sum(wi * (al - 1) ** 2 * math.log(la) for wi, al, la in zip(w, alphas, lams))
    total += sum(mu * be**2 for mu, be in zip(mus, betas))
    total -= 4 * PI2 * sum(wi * s**2 for wi, s in zip(w, sigmas))
    for i in range(p, n):
        # (1/F_i) dF_i/dn is the normal component of grad ln F_i
        total -= 2 * PI2 / lams[i] * grad_log_partial_f(model, config, i)[3]
    return float(total)
