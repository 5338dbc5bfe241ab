"""Manifold models feeding the reduced functionals.

Points live in the closed upper half of R^4 (``x4 >= 0``); the boundary is
``x4 = 0`` and the inward normal is ``+e4``.  Boundary points are addressed
by three chart coordinates and lifted with ``x4 = 0``.

The built-in flat-slab model uses the method of images,
``G(x, y) = -2 ln|x - y| - 2 ln|x - y*| + H(x, y)`` with ``y*`` the mirror
image of ``y``, so G is symmetric and its normal derivative vanishes on the
boundary.  H, K and the scalar curvature are sympy expressions in
``x1..x4`` (and ``y1..y4`` for H), differentiated symbolically once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import sympy as sp

__all__ = [
    "ModelError",
    "SingularityError",
    "ManifoldModel",
    "FlatSlabModel",
    "GridModel",
    "cutoff",
    "cutoff_derivative",
    "singular_part",
    "load_model",
    "model_from_document",
]

X = sp.symbols("x1:5", real=True)
Y = sp.symbols("y1:5", real=True)


class ModelError(ValueError):
    """Invalid model specification or data."""


class SingularityError(ValueError):
    """Two points of a configuration coincide (or sit on a mirror image)."""


def cutoff(t, rho: float):
    """C^1 cutoff: t on [0, rho], 2 rho beyond 2 rho, cubic Hermite in between.

    With s = (t - rho) / rho the middle piece is rho (1 + s + s^2 - s^3); its
    derivative (1 - s)(1 + 3s) is nonnegative on [0, 1], so it is monotone.
    """
    t = np.asarray(t, dtype=float)
    s = np.clip((t - rho) / rho, 0.0, 1.0)
    mid = rho * (1 + s + s**2 - s**3)
    out = np.where(t <= rho, t, np.where(t >= 2 * rho, 2 * rho, mid))
    return out if out.ndim else float(out)


def cutoff_derivative(t, rho: float):
    t = np.asarray(t, dtype=float)
    s = np.clip((t - rho) / rho, 0.0, 1.0)
    out = np.where(t <= rho, 1.0, np.where(t >= 2 * rho, 0.0, (1 - s) * (1 + 3 * s)))
    return out if out.ndim else float(out)


def reflect(x: np.ndarray) -> np.ndarray:
    y = np.array(x, dtype=float)
    y[..., 3] = -y[..., 3]
    return y


def singular_part(x, y, rho: float) -> float:
    """ln(1/chi_rho(|x-y|)^2), plus the mirrored term when the rho-ball around y meets the boundary."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    d = np.linalg.norm(x - y)
    s = -2.0 * np.log(cutoff(d, rho))
    if y[3] < rho:
        s -= 2.0 * np.log(cutoff(np.linalg.norm(x - reflect(y)), rho))
    return s


def _lambdify(expr, args):
    f = sp.lambdify(args, expr, modules="numpy")
    if not expr.free_symbols:
        value = float(expr)
        return lambda *a: value
    return f


@dataclass(frozen=True)
class Box:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    top: float

    def __post_init__(self):
        if len(self.lo) != 3 or len(self.hi) != 3:
            raise ModelError("box lo/hi must have three tangential coordinates")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ModelError("box lo must be below hi in every coordinate")
        if self.top <= 0:
            raise ModelError("box top must be positive")


class ManifoldModel:
    """Common interface: Green data, K, curvature, distances and floors.

    Subclasses supply ``green``, ``grad_green`` (in the second argument),
    ``lap_green``, ``regular``, ``grad_regular``, ``lap_regular``,
    ``K``, ``grad_log_K``, ``lap_log_K`` and ``scalar_curv``.
    """

    box: Box
    rho_floor: float
    eta_floor: float
    rho: float  # cutoff radius for truncated bubbles and the singular part

    def distance(self, x, y) -> float:
        return float(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float)))

    def boundary_distance(self, x) -> float:
        return float(np.asarray(x, float)[3])

    def log_K(self, x) -> float:
        return float(np.log(self.K(x)))

    def normal_derivative_log_K(self, x) -> float:
        return float(self.grad_log_K(x)[3])

    def check(self, n_samples: int = 64, seed: int = 0) -> None:
        """Sampled invariants: H and G symmetric to 1e-10, K positive."""
        rng = np.random.default_rng(seed)
        lo = np.array(self.box.lo + (self.rho_floor,))
        hi = np.array(self.box.hi + (self.box.top,))
        for _ in range(n_samples):
            x, y = rng.uniform(lo, hi), rng.uniform(lo, hi)
            for name, f in (("H", self.regular), ("G", self.green)):
                a, b = f(x, y), f(y, x)
                if abs(a - b) > 1e-10 * max(1.0, abs(a)):
                    raise ModelError(f"{name} is not symmetric: {a} vs {b} at {x}, {y}")
            if not self.K(x) > 0:
                raise ModelError(f"K must be positive, K({x}) = {self.K(x)}")


class _SymbolicPieces:
    """Lambdified H, K and R together with their derivatives."""

    def __init__(self, H: str | sp.Expr, K: str | sp.Expr | None, R: str | sp.Expr):
        ns = {str(s): s for s in X + Y}
        self.H_expr = sp.sympify(H, locals=ns)
        self.R_expr = sp.sympify(R, locals=ns)
        bad = self.H_expr.free_symbols - set(X + Y)
        if bad:
            raise ModelError(f"H uses unknown symbols {sorted(map(str, bad))}")
        args = X + Y
        self.H = _lambdify(self.H_expr, args)
        self.dH = [_lambdify(sp.diff(self.H_expr, y), args) for y in Y]
        self.lapH = _lambdify(sum(sp.diff(self.H_expr, y, 2) for y in Y), args)
        self.R = _lambdify(self.R_expr, X)
        if K is not None:
            self.K_expr = sp.sympify(K, locals=ns)
            bad = self.K_expr.free_symbols - set(X)
            if bad:
                raise ModelError(f"K uses unknown symbols {sorted(map(str, bad))}")
            logK = sp.log(self.K_expr)
            self.K = _lambdify(self.K_expr, X)
            self.dlogK = [_lambdify(sp.diff(logK, x), X) for x in X]
            self.laplogK = _lambdify(sum(sp.diff(logK, x, 2) for x in X), X)


class FlatSlabModel(ManifoldModel):
    """Half-space model with image-charge Green function.

    ``images=False`` drops the mirror term (free-space logarithm), which is
    handy for checking interior expansions away from the boundary.
    """

    kind = "flat-slab"

    def __init__(
        self,
        K: str | sp.Expr = "1",
        H: str | sp.Expr = "0",
        R: str | sp.Expr = "0",
        *,
        box: Box | None = None,
        rho_floor: float = 0.05,
        eta_floor: float = 0.05,
        rho: float = 0.1,
        images: bool = True,
        check: bool = True,
    ):
        self.box = box or Box((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0), 1.0)
        if rho_floor <= 0 or eta_floor <= 0 or rho <= 0:
            raise ModelError("floors and rho must be positive")
        self.rho_floor, self.eta_floor, self.rho = rho_floor, eta_floor, rho
        self.images = images
        self._sym = _SymbolicPieces(H, K, R)
        self.spec = {"K": str(K), "H": str(H), "R": str(R), "images": images}
        if check:
            self.check()

    # Green data ---------------------------------------------------------

    def regular(self, x, y) -> float:
        return float(self._sym.H(*x, *y))

    def grad_regular(self, x, y) -> np.ndarray:
        return np.array([float(f(*x, *y)) for f in self._sym.dH])

    def lap_regular(self, x, y) -> float:
        return float(self._sym.lapH(*x, *y))

    def _sing(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        d = x - y
        r2 = d @ d
        if r2 == 0.0:
            raise SingularityError(f"coincident points {x}")
        # derivatives are taken in y
        val, grad, lap = -np.log(r2), 2.0 * d / r2, -4.0 / r2
        if self.images:
            e = x - reflect(y)
            s2 = e @ e
            if s2 == 0.0:
                raise SingularityError(f"boundary point coincides with a mirror image at {x}")
            # d/dy (-ln|x - y*|^2) with y* = (y1, y2, y3, -y4)
            ge = 2.0 * e / s2
            ge[3] = -ge[3]
            val, grad, lap = val - np.log(s2), grad + ge, lap - 4.0 / s2
        return val, grad, lap

    def green(self, x, y) -> float:
        return float(self._sing(x, y)[0] + self.regular(x, y))

    def grad_green(self, x, y) -> np.ndarray:
        """Gradient of G(x, .) at y."""
        return self._sing(x, y)[1] + self.grad_regular(x, y)

    def lap_green(self, x, y) -> float:
        return float(self._sing(x, y)[2] + self.lap_regular(x, y))

    # K and curvature ----------------------------------------------------

    def K(self, x) -> float:
        return float(self._sym.K(*x))

    def grad_log_K(self, x) -> np.ndarray:
        return np.array([float(f(*x)) for f in self._sym.dlogK])

    def lap_log_K(self, x) -> float:
        return float(self._sym.laplogK(*x))

    def scalar_curv(self, x) -> float:
        return float(self._sym.R(*x))

    def __repr__(self):
        return f"FlatSlabModel(K={self.spec['K']!r}, H={self.spec['H']!r}, images={self.images})"


class GridModel(FlatSlabModel):
    """Flat-slab Green data with K sampled on a regular 4-D grid.

    K is interpolated by a cubic B-spline (prefiltered once); its
    derivatives are central differences of the interpolant, so gradient
    checks against such models use a looser tolerance.
    """

    kind = "grid"
    gradient_tolerance = 1e-3

    def __init__(self, values: np.ndarray, lo, hi, H="0", R="0", **kw):
        from scipy import ndimage

        values = np.asarray(values, dtype=float)
        if values.ndim != 4 or min(values.shape) < 4:
            raise ModelError("K grid must be 4-D with at least 4 samples per axis")
        if not np.all(values > 0):
            raise ModelError("K grid must be positive")
        self._lo = np.asarray(lo, float)
        self._hi = np.asarray(hi, float)
        if self._lo.shape != (4,) or self._hi.shape != (4,) or np.any(self._hi <= self._lo):
            raise ModelError("grid lo/hi must be 4-vectors with lo < hi")
        self._step = (self._hi - self._lo) / (np.array(values.shape) - 1)
        self._coeffs = ndimage.spline_filter(values, order=3, mode="nearest")
        self._fd = 1e-3 * float(self._step.min())
        box = kw.pop("box", None) or Box(
            tuple(self._lo[:3]), tuple(self._hi[:3]), float(self._hi[3])
        )
        super().__init__(K=None, H=H, R=R, box=box, check=False, **kw)
        self.spec = {"K": "grid", "H": str(H), "R": str(R), "images": self.images}
        self.check()

    def K(self, x) -> float:
        from scipy import ndimage

        idx = (np.asarray(x, float) - self._lo) / self._step
        val = ndimage.map_coordinates(
            self._coeffs, idx.reshape(4, 1), order=3, mode="nearest", prefilter=False
        )
        return float(val[0])

    def grad_log_K(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        h = self._fd
        out = np.empty(4)
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            out[i] = (np.log(self.K(x + e)) - np.log(self.K(x - e))) / (2 * h)
        return out

    def lap_log_K(self, x) -> float:
        x = np.asarray(x, float)
        h = 10 * self._fd
        c = np.log(self.K(x))
        total = 0.0
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            total += np.log(self.K(x + e)) - 2 * c + np.log(self.K(x - e))
        return float(total / h**2)

    def __repr__(self):
        return f"GridModel(shape={self._coeffs.shape}, H={self.spec['H']!r})"


def model_from_document(doc: dict, base_dir: Path | None = None) -> ManifoldModel:
    """Build a model from ``{type, box, rho_floor, eta_floor, K, H, ...}``."""
    kind = doc.get("type", "flat-slab")
    box = None
    if "box" in doc:
        b = doc["box"]
        box = Box(tuple(b["lo"]), tuple(b["hi"]), float(b["top"]))
    kw = {
        "box": box,
        "rho_floor": float(doc.get("rho_floor", 0.05)),
        "eta_floor": float(doc.get("eta_floor", 0.05)),
        "rho": float(doc.get("rho", 0.1)),
        "images": bool(doc.get("images", True)),
    }
    H, R = doc.get("H", "0"), doc.get("R", "0")
    try:
        if kind == "flat-slab":
            return FlatSlabModel(K=doc.get("K", "1"), H=H, R=R, **kw)
        if kind == "grid":
            path = Path(doc["K"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            with np.load(path) as data:
                return GridModel(data["K"], data["lo"], data["hi"], H=H, R=R, **kw)
    except (sp.SympifyError, TypeError, KeyError) as exc:
        raise ModelError(f"bad model specification: {exc}") from exc
    raise ModelError(f"unknown model type {kind!r}")


def load_model(path: str | Path) -> ManifoldModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not a JSON document ({exc})") from exc
    return model_from_document(doc.get("model", doc), path.parent)
