"""Measures, total-variation distance and Lipschitz utilities.

The total-variation convention used throughout is the unhalved one,
``tv(a, b) = sum_i |a_i - b_i|``, so two mutually singular probability
measures are at distance 2.  Much other software halves this; every bound
in this package (``2 (1 - c1 c2)^floor(t/t0)`` and friends) carries the
factor 2 that belongs to the unhalved convention, so do not rescale.

Histogram measures compare only on identical bin grids; there is no
automatic re-binning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

MASS_RTOL = 1e-12

#: Cemetery point. Distinct from every state; metrics treat rho(x, CEMETERY)
#: as the boundary distance of x.
CEMETERY = type("Cemetery", (), {"__repr__": lambda self: "∂"})()


class SupportMismatchError(ValueError):
    """Two measures live on different supports."""


class InsufficientPointsError(ValueError):
    """A Lipschitz constant needs at least two points."""


@dataclass(frozen=True)
class FiniteSupport:
    """Support descriptor for measures on {0, ..., size-1}."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"support size must be >= 1, got {self.size}")


@dataclass(frozen=True)
class BinGrid:
    """Rectangular bin grid over a box, one edge array per axis."""

    edges: tuple[tuple[float, ...], ...]

    @classmethod
    def regular(cls, lo, hi, bins) -> "BinGrid":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if np.isscalar(bins) or np.ndim(bins) == 0:
            bins = [int(bins)] * lo.size
        edges = tuple(
            tuple(np.linspace(lo[k], hi[k], int(bins[k]) + 1).tolist())
            for k in range(lo.size)
        )
        return cls(edges)

    @property
    def dim(self) -> int:
        return len(self.edges)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(e) - 1 for e in self.edges)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def edge_arrays(self) -> list[np.ndarray]:
        return [np.asarray(e) for e in self.edges]

    def centers(self) -> np.ndarray:
        """Bin centers, shape (size, dim), flattened in C order."""
        mids = [0.5 * (e[1:] + e[:-1]) for e in self.edge_arrays()]
        grids = np.meshgrid(*mids, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-bin (lo, hi) corners, each of shape (size, dim)."""
        los = [np.asarray(e[:-1]) for e in self.edges]
        his = [np.asarray(e[1:]) for e in self.edges]
        glo = np.meshgrid(*los, indexing="ij")
        ghi = np.meshgrid(*his, indexing="ij")
        return (
            np.stack([g.ravel() for g in glo], axis=1),
            np.stack([g.ravel() for g in ghi], axis=1),
        )

    def coarsen(self, factor: int) -> "BinGrid":
        """Merge `factor` consecutive bins along each axis (must divide)."""
        out = []
        for e in self.edge_arrays():
            nb = len(e) - 1
            if nb % factor:
                raise ValueError(f"{nb} bins not divisible by {factor}")
            out.append(tuple(e[::factor].tolist()))
        return BinGrid(tuple(out))


@dataclass(frozen=True)
class Measure:
    """Nonnegative weights over a finite support descriptor."""

    support: FiniteSupport | BinGrid
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            w = w.ravel()
        if w.size != self.support.size:
            raise ValueError(
                f"weight vector of length {w.size} on support of size {self.support.size}"
            )
        if (w < 0).any():
            raise ValueError("negative weight in measure")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def is_distribution(self) -> bool:
        return abs(self.mass - 1.0) <= MASS_RTOL * max(1.0, self.mass)

    def normalized(self) -> "Measure":
        m = self.mass
        if m <= 0:
            raise ValueError("cannot normalize a zero measure")
        return Measure(self.support, self.weights / m)

    def expect(self, values: np.ndarray) -> float:
        return float(self.weights @ np.asarray(values, dtype=float))


def distribution(support, weights) -> Measure:
    """Construct a Measure and require total mass 1 within 1e-12."""
    m = Measure(support, weights)
    if not m.is_distribution:
        raise ValueError(f"mass {m.mass} is not 1 within {MASS_RTOL}")
    return m


def tv_distance(a, b) -> float:
    """Unhalved total-variation distance, sum_i |a_i - b_i|.

    Accepts two Measures on identical supports, or two equal-length weight
    vectors.
    """
    if isinstance(a, Measure) or isinstance(b, Measure):
        if not (isinstance(a, Measure) and isinstance(b, Measure)):
            raise SupportMismatchError("cannot compare a Measure with a bare vector")
        if a.support != b.support:
            raise SupportMismatchError(f"supports differ: {a.support} vs {b.support}")
        return float(np.abs(a.weights - b.weights).sum())
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise SupportMismatchError(f"weight shapes differ: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum())


def lipschitz_constant(
    points: Sequence, values: Sequence[float], metric: Callable
) -> float:
    """Largest |v(x) - v(y)| / rho(x, y) over distinct pairs of points.

    Discretizes the sup-gradient of a function over a supplied point set.
    `metric` must be positive for distinct points.
    """
    pts = list(points)
    vals = np.asarray(values, dtype=float)
    if len(pts) < 2:
        raise InsufficientPointsError(f"need >= 2 points, got {len(pts)}")
    if vals.size != len(pts):
        raise ValueError("points and values length mismatch")
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = float(metric(pts[i], pts[j]))
            if d <= 0:
                raise ValueError(f"metric is not positive for pair ({i}, {j})")
            q = abs(vals[i] - vals[j]) / d
            if q > best:
                best = q
    return best


@dataclass(frozen=True)
class FiniteStateSpace:
    """Finite state space {0..n-1} with an optional metric embedding.

    Defaults to the discrete metric (1 for distinct states) and boundary
    distance 1 for every state; an embedding of the states into R^d
    overrides the metric, and an explicit boundary-distance vector
    overrides rho(x, CEMETERY).
    """

    n: int
    embedding: np.ndarray | None = None
    boundary_distance: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one state")
        if self.embedding is not None:
            e = np.asarray(self.embedding, dtype=float)
            if e.ndim == 1:
                e = e[:, None]
            if e.shape[0] != self.n:
                raise ValueError("embedding must provide one point per state")
            object.__setattr__(self, "embedding", e)
        if self.boundary_distance is not None:
            b = np.asarray(self.boundary_distance, dtype=float)
            if b.shape != (self.n,) or (b < 0).any():
                raise ValueError("boundary_distance must be n nonnegative reals")
            object.__setattr__(self, "boundary_distance", b)

    def rho_boundary(self, i) -> float:
        if i is CEMETERY:
            return 0.0
        if self.boundary_distance is not None:
            return float(self.boundary_distance[i])
        return 1.0

    def metric(self, i, j) -> float:
        if i is CEMETERY and j is CEMETERY:
            return 0.0
        if i is CEMETERY:
            return self.rho_boundary(j)
        if j is CEMETERY:
            return self.rho_boundary(i)
        if i == j:
            return 0.0
        if self.embedding is not None:
            return float(np.linalg.norm(self.embedding[i] - self.embedding[j]))
        return 1.0


def histogram_from_samples(grid: BinGrid, samples: np.ndarray) -> Measure:
    """Bin samples (m, dim) onto `grid` and normalize to a distribution."""
    pts = np.asarray(samples, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise ValueError("no samples to bin")
    counts, _ = np.histogramdd(pts, bins=grid.edge_arrays())
    total = counts.sum()
    if total == 0:
        raise ValueError("all samples fell outside the bin grid")
    return Measure(grid, counts.ravel() / total)


def coarsen_histogram(hist: Measure, factor: int) -> Measure:
    """Re-express a histogram measure on a `factor`-times coarser nested grid."""
    grid = hist.support
    if not isinstance(grid, BinGrid):
        raise TypeError("coarsen_histogram needs a histogram measure")
    w = hist.weights.reshape(grid.shape)
    for ax in range(w.ndim):
        nb = w.shape[ax]
        if nb % factor:
            raise ValueError(f"axis {ax}: {nb} bins not divisible by {factor}")
        shape = list(w.shape)
        shape[ax] = nb // factor
        shape.insert(ax + 1, factor)
        w = w.reshape(shape).sum(axis=ax + 1)
    return Measure(grid.coarsen(factor), w.ravel())


def write_histogram_csv(path, hist: Measure) -> None:
    """Histogram CSV: bin_lo per axis, bin_hi per axis, weight."""
    grid = hist.support
    if not isinstance(grid, BinGrid):
        raise TypeError("need a histogram measure")
    lo, hi = grid.bounds()
    d = grid.dim
    cols = [f"bin_lo{k}" for k in range(d)] + [f"bin_hi{k}" for k in range(d)] + ["weight"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for b in range(grid.size):
            row = [format(v, ".17g") for v in lo[b]] + [
                format(v, ".17g") for v in hi[b]
            ] + [format(hist.weights[b], ".17g")]
            fh.write(",".join(row) + "\n")
