"""Reduced functionals F_{p,q} on configurations of interior and boundary points.

Point ordering follows the configuration: the p interior points first, then
the q boundary points.  Chart coordinates are 4 per interior point and 3 per
boundary point, concatenated in that order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ManifoldModel, SingularityError

__all__ = [
    "Configuration",
    "f_interior",
    "f_boundary",
    "f_pq",
    "f_pq_split",
    "log_partial_f",
    "partial_f",
    "grad_log_partial_f",
    "grad_f_pq",
    "lk",
    "l_k",
    "laplacian_fd",
    "LAPLACIAN_STEP",
]

LAPLACIAN_STEP = 1e-3


@dataclass(frozen=True)
class Configuration:
    interior: np.ndarray  # (p, 4)
    boundary: np.ndarray  # (q, 3)

    def __init__(self, interior=(), boundary=()):
        a = np.asarray(interior, dtype=float).reshape(-1, 4)
        b = np.asarray(boundary, dtype=float).reshape(-1, 3)
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "interior", a)
        object.__setattr__(self, "boundary", b)

    @property
    def p(self) -> int:
        return len(self.interior)

    @property
    def q(self) -> int:
        return len(self.boundary)

    @property
    def k(self) -> int:
        return 2 * self.p + self.q

    @property
    def dim(self) -> int:
        return 4 * self.p + 3 * self.q

    def points(self) -> np.ndarray:
        """All points lifted to R^4, interior first."""
        lifted = np.hstack([self.boundary, np.zeros((self.q, 1))])
        return np.vstack([self.interior, lifted])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.interior.ravel(), self.boundary.ravel()])

    @classmethod
    def from_vector(cls, v, p: int, q: int) -> Configuration:
        v = np.asarray(v, dtype=float)
        if v.shape != (4 * p + 3 * q,):
            raise ValueError(f"expected {4 * p + 3 * q} coordinates, got {v.shape}")
        return cls(v[: 4 * p].reshape(p, 4), v[4 * p :].reshape(q, 3))

    def canonical(self) -> Configuration:
        """Points sorted lexicographically within each group (F is invariant)."""
        ia = np.lexsort(self.interior.T[::-1]) if self.p else []
        ib = np.lexsort(self.boundary.T[::-1]) if self.q else []
        return Configuration(self.interior[ia], self.boundary[ib])

    def min_separation(self) -> float:
        pts = self.points()
        if len(pts) < 2:
            return np.inf
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt((diff**2).sum(-1))
        return float(d[np.triu_indices(len(pts), 1)].min())

    def validate(self, model: ManifoldModel) -> None:
        """Raise if an interior point is within the rho floor of the boundary or points crowd."""
        if self.p and self.interior[:, 3].min() < model.rho_floor:
            raise ValueError(
                f"interior point closer than rho_floor={model.rho_floor} to the boundary"
            )
        if self.min_separation() < model.eta_floor:
            raise ValueError(f"points closer than eta_floor={model.eta_floor}")

    def as_dict(self) -> dict:
        return {"interior": self.interior.tolist(), "boundary": self.boundary.tolist()}

    @classmethod
    def from_dict(cls, doc) -> Configuration:
        return cls(doc.get("interior", ()), doc.get("boundary", ()))


def _check_distinct(points: np.ndarray) -> None:
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if np.array_equal(points[i], points[j]):
                raise SingularityError(f"points {i} and {j} coincide at {points[i]}")


def _self_sum(model: ManifoldModel, pts: np.ndarray, log_k_weight: float) -> float:
    _check_distinct(pts)
    total = 0.0
    for i, a in enumerate(pts):
        total += model.regular(a, a) + log_k_weight * model.log_K(a)
        for j, b in enumerate(pts):
            if j != i:
                total += model.green(a, b)
    return total


def f_interior(model: ManifoldModel, points) -> float:
    """sum_i H(a_i, a_i) + sum_{j != i} G(a_i, a_j) + 1/2 ln K(a_i)."""
    return _self_sum(model, np.asarray(points, float).reshape(-1, 4), 0.5)


def f_boundary(model: ManifoldModel, points) -> float:
    """Same sum with ln K unhalved; points are 3-D boundary chart coordinates."""
    b = np.asarray(points, float).reshape(-1, 3)
    return _self_sum(model, np.hstack([b, np.zeros((len(b), 1))]), 1.0)


def _cross(model: ManifoldModel, config: Configuration) -> float:
    pts = config.points()
    return sum(
        model.green(pts[i], pts[j])
        for i in range(config.p)
        for j in range(config.p, config.p + config.q)
    )


def f_pq_split(model: ManifoldModel, config: Configuration) -> tuple[float, float]:
    """Evaluate F_{p,q} along both routes: via F^M_{p,q}, F^dM_{p,q} and via F_p, F_q, cross sum."""
    _check_distinct(config.points())
    fp = f_interior(model, config.interior) if config.p else 0.0
    fq = f_boundary(model, config.boundary) if config.q else 0.0
    cross = _cross(model, config)
    f_m = fp + 0.5 * cross
    f_dm = fq + 2.0 * cross
    route_a = 2.0 * f_m + 0.5 * f_dm
    route_b = 2.0 * fp + 0.5 * fq + 2.0 * cross
    return route_a, route_b


def f_pq(model: ManifoldModel, config: Configuration, rtol: float = 1e-12) -> float:
    a, b = f_pq_split(model, config)
    if abs(a - b) > rtol * max(1.0, abs(a), abs(b)):
        raise ArithmeticError(f"F_pq routes disagree: {a!r} vs {b!r}")
    return a


def log_partial_f(model: ManifoldModel, config: Configuration, i: int, x) -> float:
    """Exponent of F_i^A divided by 4, i.e. ln(F_i^A(x)) / 4."""
    p, n = config.p, config.p + config.q
    if not 0 <= i < n:
        raise IndexError(f"point index {i} out of range for {n} points")
    pts = config.points()
    x = np.asarray(x, float)
    a = pts[i]
    if i < p:
        s = model.regular(a, x) + 0.25 * model.log_K(x)
        s += sum(model.green(pts[j], x) for j in range(p) if j != i)
        s += 0.5 * sum(model.green(pts[j], x) for j in range(p, n))
    else:
        s = 0.5 * model.regular(a, x) + 0.25 * model.log_K(x)
        s += 0.5 * sum(model.green(pts[j], x) for j in range(p, n) if j != i)
        s += sum(model.green(pts[j], x) for j in range(p))
    return s


def partial_f(model: ManifoldModel, config: Configuration, i: int, x=None) -> float:
    """F_i^A(x); defaults to x = a_i."""
    if x is None:
        x = config.points()[i]
    return float(np.exp(4.0 * log_partial_f(model, config, i, x)))


def grad_log_partial_f(model: ManifoldModel, config: Configuration, i: int) -> np.ndarray:
    """Gradient of ln F_i^A at x = a_i, in R^4."""
    p, n = config.p, config.p + config.q
    pts = config.points()
    a = pts[i]
    w_self, w_int, w_bd = (1.0, 1.0, 0.5) if i < p else (0.5, 1.0, 0.5)
    g = w_self * model.grad_regular(a, a) + 0.25 * model.grad_log_K(a)
    for j in range(n):
        if j != i:
            g = g + (w_int if j < p else w_bd) * model.grad_green(pts[j], a)
    return 4.0 * g


def grad_f_pq(model: ManifoldModel, config: Configuration) -> np.ndarray:
    """Chart gradient of F_{p,q} built from grad ln F_i^A.

    Interior blocks are the full 4-D gradient; boundary blocks keep the three
    tangential components, halved.
    """
    _check_distinct(config.points())
    out = []
    for i in range(config.p + config.q):
        g = grad_log_partial_f(model, config, i)
        out.append(g if i < config.p else 0.5 * g[:3])
    return np.concatenate(out) if out else np.zeros(0)


def laplacian_fd(f, x, h: float = LAPLACIAN_STEP) -> float:
    """Second-order central-difference Laplacian in R^4."""
    x = np.asarray(x, float)
    c = f(x)
    total = 0.0
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        total += f(x + e) - 2.0 * c + f(x - e)
    return total / h**2


def l_k(model: ManifoldModel, config: Configuration, h: float = LAPLACIAN_STEP) -> float:
    """The index function built from Laplacians of F_i^A (q = 0) or normal derivatives (q > 0)."""
    p, q = config.p, config.q
    pts = config.points()
    total = 0.0
    if q == 0:
        for i in range(p):
            fi = partial_f(model, config, i)
            lap = laplacian_fd(lambda x: partial_f(model, config, i, x), pts[i], h)
            total += lap / np.sqrt(fi) - (2.0 / 3.0) * model.scalar_curv(pts[i]) * np.sqrt(fi)
    else:
        for i in range(p, p + q):
            fi = partial_f(model, config, i)
            dn = fi * grad_log_partial_f(model, config, i)[3]
            total += dn / (4.0 * fi**0.75)
    return float(total)


def lk(model: ManifoldModel, config: Configuration, h: float = LAPLACIAN_STEP) -> float:
    """Sign-carrying index of a critical point.

    q > 0: sum over boundary points of (F_i^A)^(1/4) d(ln K)/dn.
    q = 0: sum over interior points of phi L(phi) with phi = (F_i^A)^(1/4)
    and L = Laplacian - R/6; at critical points this is l_k / 4.
    """
    p, q = config.p, config.q
    pts = config.points()
    total = 0.0
    if q:
        for i in range(p, p + q):
            total += partial_f(model, config, i) ** 0.25 * model.normal_derivative_log_K(pts[i])
    else:
        for i in range(p):
            phi = lambda x: np.exp(log_partial_f(model, config, i, x))  # noqa: E731
            lap = laplacian_fd(phi, pts[i], h)
            v = phi(pts[i])
            total += v * (lap - model.scalar_curv(pts[i]) * v / 6.0)
    return float(total)
