"""Multiscale ball covering with boundary-adapted scales.

The covering assigns every center u a scale

    l(u) = q / (2 (q + 1)),      q = sqrt(d(u)^2 + l0^2),

where d(u) is the distance to the complement of the domain, so the balls
shrink toward the boundary and saturate at radius 1/2 deep inside.  The
weights

    phi_u(x) = profile((x - u)/l(u)) * sqrt(1 + grad l(u) . (x - u)/l(u))

carry the Jacobian of the map u -> (x - u)/l(u); by the change of
variables that Jacobian makes exact, they form a continuous partition of
unity: the integral of phi_u(x)^2 l(u)^-dim over centers equals one at
every point.  The quadrature version of that identity is the module's
main verification surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadcore import QuadratureSpec, integrate

__all__ = [
    "DomainGeometry",
    "interval_geometry",
    "rectangle_geometry",
    "disk_geometry",
    "LocalizationFamily",
    "partition_check",
    "neighborhood_integrals",
]


@dataclass(frozen=True)
class DomainGeometry:
    """Shape with distance functions; d(u) vanishes outside the domain and
    is 1-Lipschitz."""

    shape: str
    parameters: tuple
    dim: int

    def distance(self, u) -> float:
        """Distance from u to the complement of the domain."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if self.shape == "interval":
            (a,) = self.parameters
            return max(0.0, min(u[0], a - u[0]))
        if self.shape == "rectangle":
            a, b = self.parameters
            return max(0.0, min(u[0], a - u[0], u[1], b - u[1]))
        r = self.parameters[0]
        return max(0.0, r - math.hypot(u[0], u[1]))

    def boundary_distance(self, u) -> float:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if self.shape == "interval":
            (a,) = self.parameters
            return min(abs(u[0]), abs(a - u[0]))
        if self.shape == "rectangle":
            a, b = self.parameters
            inside = 0 <= u[0] <= a and 0 <= u[1] <= b
            if inside:
                return min(u[0], a - u[0], u[1], b - u[1])
            cx = min(max(u[0], 0.0), a)
            cy = min(max(u[1], 0.0), b)
            return math.hypot(u[0] - cx, u[1] - cy)
        r = self.parameters[0]
        return abs(r - math.hypot(u[0], u[1]))

    def grad_distance(self, u) -> np.ndarray:
        """Gradient of d at interior non-ridge points; zero outside."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if self.distance(u) == 0.0:
            return np.zeros(self.dim)
        if self.shape == "interval":
            (a,) = self.parameters
            return np.array([1.0 if u[0] < a - u[0] else -1.0])
        if self.shape == "rectangle":
            a, b = self.parameters
            vals = [u[0], a - u[0], u[1], b - u[1]]
            grads = [np.array([1.0, 0.0]), np.array([-1.0, 0.0]),
                     np.array([0.0, 1.0]), np.array([0.0, -1.0])]
            return grads[int(np.argmin(vals))]
        rho = math.hypot(u[0], u[1])
        if rho == 0.0:
            return np.zeros(2)
        return -u / rho

    def grad_distance_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        inside = self.distance_many(pts) > 0.0
        if self.shape == "interval":
            (a,) = self.parameters
            g = np.where(pts[:, [0]] < a - pts[:, [0]], 1.0, -1.0)
        elif self.shape == "rectangle":
            a, b = self.parameters
            faces = np.stack([pts[:, 0], a - pts[:, 0], pts[:, 1], b - pts[:, 1]], axis=1)
            grads = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
            g = grads[np.argmin(faces, axis=1)]
        else:
            rho = np.hypot(pts[:, 0], pts[:, 1])
            with np.errstate(invalid="ignore", divide="ignore"):
                g = -pts / rho[:, None]
            g[rho == 0.0] = 0.0
        return np.where(inside[:, None], g, 0.0)

    def interior_box(self):
        if self.shape == "interval":
            return (np.array([0.0]), np.array([self.parameters[0]]))
        if self.shape == "rectangle":
            a, b = self.parameters
            return (np.array([0.0, 0.0]), np.array([a, b]))
        r = self.parameters[0]
        return (np.array([-r, -r]), np.array([r, r]))

    def distance_many(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized distance to the complement over an (N, dim) array."""
        pts = np.asarray(pts, dtype=float)
        if self.shape == "interval":
            (a,) = self.parameters
            return np.clip(np.minimum(pts[:, 0], a - pts[:, 0]), 0.0, None)
        if self.shape == "rectangle":
            a, b = self.parameters
            faces = np.minimum(np.minimum(pts[:, 0], a - pts[:, 0]),
                               np.minimum(pts[:, 1], b - pts[:, 1]))
            return np.clip(faces, 0.0, None)
        r = self.parameters[0]
        return np.clip(r - np.hypot(pts[:, 0], pts[:, 1]), 0.0, None)

    def boundary_distance_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.shape == "interval":
            (a,) = self.parameters
            return np.minimum(np.abs(pts[:, 0]), np.abs(a - pts[:, 0]))
        if self.shape == "rectangle":
            a, b = self.parameters
            cx = np.clip(pts[:, 0], 0.0, a)
            cy = np.clip(pts[:, 1], 0.0, b)
            outside = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)
            inside = np.minimum(np.minimum(pts[:, 0], a - pts[:, 0]),
                                np.minimum(pts[:, 1], b - pts[:, 1]))
            return np.where(outside > 0.0, outside, np.abs(inside))
        r = self.parameters[0]
        return np.abs(r - np.hypot(pts[:, 0], pts[:, 1]))


def interval_geometry(length: float = 4.0) -> DomainGeometry:
    return DomainGeometry("interval", (float(length),), 1)


def rectangle_geometry(a: float, b: float) -> DomainGeometry:
    return DomainGeometry("rectangle", (float(a), float(b)), 2)


def disk_geometry(radius: float = 2.0) -> DomainGeometry:
    return DomainGeometry("disk", (float(radius),), 2)


@lru_cache(maxsize=8)
def _profile_norm(dim: int) -> float:
    """Normalization making the bump profile unit in L2."""
    if dim == 1:
        val = integrate(lambda y: np.exp(-2.0 / (1.0 - y * y)), -1.0, 1.0,
                        QuadratureSpec(rel_tol=1e-12)).value
    else:
        val = 2.0 * math.pi * integrate(
            lambda r: r * np.exp(-2.0 / (1.0 - r * r)), 0.0, 1.0,
            QuadratureSpec(rel_tol=1e-12)).value
    return 1.0 / math.sqrt(val)


@dataclass(frozen=True)
class LocalizationFamily:
    """Covering family over one geometry with base scale l0 in (0, 1/2]."""

    geometry: DomainGeometry
    l0: float

    def __post_init__(self):
        if not 0.0 < self.l0 <= 0.5:
            raise ValueError(f"l0 must lie in (0, 1/2], got {self.l0}")

    # -- scale function ------------------------------------------------

    def scale(self, u) -> float:
        q = math.hypot(self.geometry.distance(u), self.l0)
        return q / (2.0 * (q + 1.0))

    def scale_many(self, pts: np.ndarray) -> np.ndarray:
        q = np.hypot(self.geometry.distance_many(pts), self.l0)
        return q / (2.0 * (q + 1.0))

    def scale_gradient(self, u) -> np.ndarray:
        d = self.geometry.distance(u)
        q = math.hypot(d, self.l0)
        return self.geometry.grad_distance(u) * (d / (2.0 * q * (q + 1.0) ** 2))

    # -- weights ---------------------------------------------------------

    def profile_r2(self, r2) -> np.ndarray:
        """Smooth radial bump (unit L2 norm) as a function of |y|^2."""
        r2 = np.atleast_1d(np.asarray(r2, dtype=float))
        out = np.zeros_like(r2)
        inside = r2 < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
        return _profile_norm(self.geometry.dim) * out

    def weight(self, x, u) -> float:
        """phi_u(x): profile at the rescaled offset times the Jacobian root."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        u = np.atleast_1d(np.asarray(u, dtype=float))
        l = self.scale(u)
        y = (x - u) / l
        r2 = float(np.sum(y * y))
        if r2 >= 1.0:
            return 0.0
        jac = 1.0 + float(np.dot(self.scale_gradient(u), y))
        return float(self.profile_r2(r2)[0]) * math.sqrt(jac)

    def weight_values(self, xs: np.ndarray, u) -> np.ndarray:
        """Vectorized weights at many 1-D points (lattice support)."""
        if self.geometry.dim != 1:
            raise ValueError("weight_values is a 1-D convenience")
        u = float(np.atleast_1d(u)[0])
        l = self.scale([u])
        y = (np.asarray(xs, dtype=float) - u) / l
        jac = 1.0 + self.scale_gradient([u])[0] * y
        vals = self.profile_r2(y * y) * np.sqrt(np.clip(jac, 0.0, None))
        return np.where(np.abs(y) < 1.0, vals, 0.0)

    def weight_many(self, x, us: np.ndarray) -> np.ndarray:
        """Weights phi_u(x) over an (N, dim) array of centers at fixed x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        us = np.asarray(us, dtype=float)
        ls = self.scale_many(us)
        y = (x[None, :] - us) / ls[:, None]
        r2 = np.sum(y * y, axis=1)
        d = self.geometry.distance_many(us)
        q = np.hypot(d, self.l0)
        grad = self.geometry.grad_distance_many(us) * (
            d / (2.0 * q * (q + 1.0) ** 2))[:, None]
        jac = 1.0 + np.sum(grad * y, axis=1)
        vals = self.profile_r2(r2) * np.sqrt(np.clip(jac, 0.0, None))
        return np.where(r2 < 1.0, vals, 0.0)

    # -- center grids ----------------------------------------------------

    def scale_grid(self, resolution: int, pad: float = 0.6,
                   lo: float | None = None, hi: float | None = None):
        """1-D quadrature over centers: panels marched at the local scale
        (width 4 l(u)/resolution) with Gauss-Legendre nodes inside.

        Returns (centers, weights, scales).
        """
        if self.geometry.dim != 1:
            raise ValueError("scale_grid is 1-D; use cell_grid in 2-D")
        box_lo, box_hi = self.geometry.interior_box()
        u = float(box_lo[0]) - pad if lo is None else lo
        end = float(box_hi[0]) + pad if hi is None else hi
        gx, gw = np.polynomial.legendre.leggauss(6)
        us, ws = [], []
        while u < end:
            step = 4.0 * self.scale([u]) / resolution
            mid, half = u + 0.5 * step, 0.5 * step
            us.extend(mid + half * gx)
            ws.extend(half * gw)
            u += step
        us = np.array(us)
        ls = np.array([self.scale([v]) for v in us])
        return us, np.array(ws), ls

    def cell_grid(self, center: np.ndarray, halfwidth: float, resolution: int,
                  prune=None):
        """Adaptive 2-D cells: split until size <= l(cell)/resolution.

        Level-synchronous refinement over arrays, so the cost is a few
        vector operations per depth level.  ``prune(centers, halves)``
        may mark whole cells as irrelevant; they are dropped unrefined.
        """
        centers = np.asarray(center, dtype=float)[None, :]
        halves = np.array([halfwidth])
        out_c, out_a = [], []
        quarters = np.array([[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]])
        while centers.size:
            if prune is not None:
                keep = ~prune(centers, halves)
                centers, halves = centers[keep], halves[keep]
                if not centers.size:
                    break
            done = 2.0 * halves <= self.scale_many(centers) / resolution
            if done.any():
                out_c.append(centers[done])
                out_a.append((2.0 * halves[done]) ** 2)
            centers = centers[~done]
            halves = halves[~done]
            if centers.size:
                q = 0.5 * halves
                centers = (centers[:, None, :]
                           + quarters[None, :, :] * q[:, None, None]).reshape(-1, 2)
                halves = np.repeat(q, 4)
        if not out_c:
            return np.empty((0, 2)), np.empty(0)
        return np.concatenate(out_c), np.concatenate(out_a)


def partition_check(x, family: LocalizationFamily, resolution: int = 8) -> float:
    """Quadrature value of the partition integral at one point; tends to 1
    as the center grid refines."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if family.geometry.dim == 1:
        # centers can only reach x from within max scale 1/2
        us, ws, ls = family.scale_grid(resolution, lo=x[0] - 0.75, hi=x[0] + 0.75)
        total = 0.0
        for u, w, l in zip(us, ws, ls):
            val = family.weight(x, [u])
            if val:
                total += val * val / l * w
        return total
    centers, areas = family.cell_grid(x, 0.75, resolution)
    w = family.weight_many(x, centers)
    return float(np.sum(w * w / family.scale_many(centers) ** 2 * areas))


def neighborhood_integrals(geometry: DomainGeometry,
                           l0_values=(0.04, 0.02, 0.01),
                           a_exponent: float = 0.0,
                           resolution: int = 10) -> dict:
    """Empirical scaling in l0 of the bulk and collar integrals.

    Bulk: integral of l(u)^-2 over domain points whose ball misses the
    boundary (expected ~ l0^-1).  Collar: integral of l(u)^a over centers
    whose ball meets the boundary (expected ~ l0^(a+1)).
    """
    bulk_vals, collar_vals = [], []
    for l0 in l0_values:
        fam = LocalizationFamily(geometry, l0)
        bulk = 0.0
        collar = 0.0
        if geometry.dim == 1:
            us, ws, ls = fam.scale_grid(resolution, pad=0.6)
            for u, w, l in zip(us, ws, ls):
                meets = geometry.boundary_distance([u]) < l
                if meets:
                    collar += l ** a_exponent * w
                elif geometry.distance([u]) > 0.0:
                    bulk += l ** -2.0 * w
        else:
            lo, hi = geometry.interior_box()
            center = 0.5 * (lo + hi)
            half = 0.5 * float(np.max(hi - lo)) + 0.6

            def far_exterior(cs, hs, fam=fam, geometry=geometry):
                # cells with no domain points and no collar reach: the
                # scale is 1/2-Lipschitz, so l inside the cell stays below
                # l(center) + diag/2
                diag = hs * math.sqrt(2.0)
                exterior = geometry.distance_many(cs) == 0.0
                no_collar = (geometry.boundary_distance_many(cs)
                             > fam.scale_many(cs) + 1.5 * diag)
                return exterior & no_collar

            centers, areas = fam.cell_grid(center, half, resolution // 2,
                                           prune=far_exterior)
            ls = fam.scale_many(centers)
            meets = geometry.boundary_distance_many(centers) < ls
            interior = geometry.distance_many(centers) > 0.0
            collar = float(np.sum(ls[meets] ** a_exponent * areas[meets]))
            keep = interior & ~meets
            bulk = float(np.sum(ls[keep] ** -2.0 * areas[keep]))
        bulk_vals.append(bulk)
        collar_vals.append(collar)
    logl0 = np.log(np.asarray(l0_values))
    bulk_exp = float(np.polyfit(logl0, np.log(bulk_vals), 1)[0])
    collar_exp = float(np.polyfit(logl0, np.log(collar_vals), 1)[0])
    return {
        "l0_values": tuple(l0_values),
        "bulk_values": tuple(bulk_vals),
        "collar_values": tuple(collar_vals),
        "bulk_exponent": bulk_exp,
        "collar_exponent": collar_exp,
        "expected_bulk_exponent": -1.0,
        "expected_collar_exponent": a_exponent + 1.0,
    }
