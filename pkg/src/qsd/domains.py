"""Bounded Euclidean domains with exact signed boundary distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """A point violates a domain precondition."""


def _as_points(x, dim: int) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1, 1)
    elif p.ndim == 1:
        p = p.reshape(1, dim) if p.size == dim else p.reshape(-1, 1)
    if p.shape[1] != dim:
        raise DomainError(f"points of dimension {p.shape[1]} in a {dim}-d domain")
    return p


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")

    dim = 1

    @property
    def inradius(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def diameter(self) -> float:
        return self.hi - self.lo

    def contains(self, x) -> np.ndarray:
        p = _as_points(x, 1)[:, 0]
        return (p > self.lo) & (p < self.hi)

    def rho_boundary(self, x) -> np.ndarray:
        p = _as_points(x, 1)[:, 0]
        return np.minimum(p - self.lo, self.hi - p)

    def normal_sigma2(self, x, diffusion) -> np.ndarray:
        # 1-d: the normal direction is the axis itself
        return diffusion.normal_sigma2(_as_points(x, 1), None)

    def boundary_points(self) -> np.ndarray:
        return np.array([[self.lo], [self.hi]])

    def uniform(self, g: np.random.Generator, n: int, margin: float = 0.0) -> np.ndarray:
        return g.uniform(self.lo + margin, self.hi - margin, size=(n, 1))

    def extreme_points(self) -> np.ndarray:
        return self.boundary_points()

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([self.lo]), np.array([self.hi])


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("need lo < hi per axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def inradius(self) -> float:
        return 0.5 * min(b - a for a, b in zip(self.lo, self.hi))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.subtract(self.hi, self.lo)))

    def contains(self, x) -> np.ndarray:
        p = _as_points(x, self.dim)
        return ((p > np.asarray(self.lo)) & (p < np.asarray(self.hi))).all(axis=1)

    def rho_boundary(self, x) -> np.ndarray:
        p = _as_points(x, self.dim)
        d = np.minimum(p - np.asarray(self.lo), np.asarray(self.hi) - p)
        return d.min(axis=1)

    def nearest_axis(self, x) -> np.ndarray:
        p = _as_points(x, self.dim)
        d = np.minimum(p - np.asarray(self.lo), np.asarray(self.hi) - p)
        return d.argmin(axis=1)

    def normal_sigma2(self, x, diffusion) -> np.ndarray:
        p = _as_points(x, self.dim)
        axes = self.nearest_axis(p)
        return diffusion.normal_sigma2(p, axes=axes)

    def boundary_points(self) -> np.ndarray:
        # face centers
        mid = 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))
        pts = []
        for k in range(self.dim):
            for v in (self.lo[k], self.hi[k]):
                q = mid.copy()
                q[k] = v
                pts.append(q)
        return np.array(pts)

    def uniform(self, g: np.random.Generator, n: int, margin: float = 0.0) -> np.ndarray:
        lo = np.asarray(self.lo) + margin
        hi = np.asarray(self.hi) - margin
        return g.uniform(lo, hi, size=(n, self.dim))

    def extreme_points(self) -> np.ndarray:
        corners = np.stack(
            np.meshgrid(*[(a, b) for a, b in zip(self.lo, self.hi)], indexing="ij"),
            axis=-1,
        ).reshape(-1, self.dim)
        return corners

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lo), np.asarray(self.hi)


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", c)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def inradius(self) -> float:
        return self.radius

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x) -> np.ndarray:
        p = _as_points(x, self.dim)
        return np.linalg.norm(p - np.asarray(self.center), axis=1) < self.radius

    def rho_boundary(self, x) -> np.ndarray:
        p = _as_points(x, self.dim)
        return self.radius - np.linalg.norm(p - np.asarray(self.center), axis=1)

    def normal_dirs(self, x) -> np.ndarray:
        p = _as_points(x, self.dim)
        v = p - np.asarray(self.center)
        r = np.linalg.norm(v, axis=1, keepdims=True)
        out = np.where(r > 1e-300, v / np.maximum(r, 1e-300), 0.0)
        out[(r[:, 0] <= 1e-300)] = np.eye(self.dim)[0]
        return out

    def normal_sigma2(self, x, diffusion) -> np.ndarray:
        p = _as_points(x, self.dim)
        return diffusion.normal_sigma2(p, dirs=self.normal_dirs(p))

    def boundary_points(self) -> np.ndarray:
        c = np.asarray(self.center)
        pts = []
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = self.radius
            pts.extend([c + e, c - e])
        return np.array(pts)

    def extreme_points(self) -> np.ndarray:
        return self.boundary_points()

    def uniform(self, g: np.random.Generator, n: int, margin: float = 0.0) -> np.ndarray:
        r = self.radius - margin
        out = np.empty((n, self.dim))
        filled = 0
        while filled < n:
            cand = g.uniform(-r, r, size=(2 * (n - filled) + 8, self.dim))
            keep = cand[np.linalg.norm(cand, axis=1) < r]
            take = min(keep.shape[0], n - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out + np.asarray(self.center)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius


Domain = Interval | Box | Ball


@dataclass(frozen=True)
class InnerCompact:
    """The inner compact M_eps = {rho_boundary >= eps} of a domain."""

    domain: Domain
    eps: float

    def __post_init__(self):
        if not 0 < self.eps < self.domain.inradius:
            raise ValueError("eps must lie in (0, inradius)")

    def contains(self, x) -> np.ndarray:
        return self.domain.rho_boundary(x) >= self.eps


@dataclass(frozen=True)
class BallTarget:
    """A closed ball target set for hitting probes."""

    center: tuple[float, ...]
    radius: float

    def contains(self, x) -> np.ndarray:
        p = np.asarray(x, dtype=float)
        if p.ndim == 1:
            p = p.reshape(1, -1)
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        return np.linalg.norm(p - c, axis=1) <= self.radius
