"""3-parameter sampling boxes and the finite-difference stencils used everywhere.

Stencils (spacing h, index i along one axis):

  first derivative, interior:   (f[i+1] - f[i-1]) / (2 h)
  first derivative, faces:      (-3 f[0] + 4 f[1] - f[2]) / (2 h)   (mirrored at the top)
  second derivative, interior:  (f[i+1] - 2 f[i] + f[i-1]) / h^2
  second derivative, faces:     (2 f[0] - 5 f[1] + 4 f[2] - f[3]) / h^2

All are second order; every residual built on them scales with h^2.  Mixed
second derivatives compose two first-derivative passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarse, InvalidParams


@dataclass(frozen=True)
class ParameterGrid:
    """Axis-aligned box [lo, hi] sampled with n nodes per axis.

    ``base`` is the index of the anchor node used as the starting point of
    sweep integrations and as the reference node of first-integral checks.
    """

    lo: tuple
    hi: tuple
    n: tuple
    base: tuple = None

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lo)
        hi = tuple(float(x) for x in self.hi)
        n = tuple(int(k) for k in self.n)
        if len(lo) != 3 or len(hi) != 3 or len(n) != 3:
            raise InvalidParams("grid needs 3 components per field")
        if any(k < 2 for k in n):
            raise InvalidParams("need at least 2 samples per axis")
        if any(a >= b for a, b in zip(lo, hi)):
            raise InvalidParams("lo must be strictly below hi componentwise")
        base = self.base if self.base is not None else (0, 0, 0)
        base = tuple(int(i) for i in base)
        if any(not 0 <= i < k for i, k in zip(base, n)):
            raise InvalidParams("base index out of range")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "base", base)

    @classmethod
    def centered(cls, half, n, center=(0.0, 0.0, 0.0)):
        """Box center +- half per axis, with the base at the central node."""
        if np.isscalar(half):
            half = (half,) * 3
        if np.isscalar(n):
            n = (n,) * 3
        lo = tuple(c - h for c, h in zip(center, half))
        hi = tuple(c + h for c, h in zip(center, half))
        base = tuple((int(k) - 1) // 2 for k in n)
        return cls(lo, hi, n, base)

    @property
    def spacing(self) -> tuple:
        return tuple((b - a) / (k - 1) for a, b, k in zip(self.lo, self.hi, self.n))

    def axis(self, a) -> np.ndarray:
        return np.linspace(self.lo[a], self.hi[a], self.n[a])

    @property
    def shape(self) -> tuple:
        return self.n

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.subtract(self.hi, self.lo)))

    def meshes(self):
        """Coordinate arrays (U1, U2, U3), each of shape n."""
        return np.meshgrid(self.axis(0), self.axis(1), self.axis(2), indexing="ij")

    def points(self) -> np.ndarray:
        """All node coordinates, shape n + (3,)."""
        return np.stack(self.meshes(), axis=-1)

    def point(self, idx) -> np.ndarray:
        return np.array([self.axis(a)[idx[a]] for a in range(3)])

    @property
    def base_point(self) -> np.ndarray:
        return self.point(self.base)

    @property
    def far_corner(self) -> tuple:
        return tuple(k - 1 for k in self.n)

    def require_resolution(self, minimum=5):
        if any(k < minimum for k in self.n):
            raise GridTooCoarse(f"need at least {minimum} nodes per axis, have {self.n}")

    def same_as(self, other, tol=0.0) -> bool:
        return (
            self.n == other.n
            and all(abs(a - b) <= tol for a, b in zip(self.lo, other.lo))
            and all(abs(a - b) <= tol for a, b in zip(self.hi, other.hi))
        )


def partial_derivative(values, axis, spacing):
    """Second-order first derivative along one of the first three axes."""
    return np.gradient(values, spacing, axis=axis, edge_order=2)


def second_derivative(values, axis, spacing):
    """Second-order pure second derivative along one axis."""
    values = np.asarray(values, dtype=float)
    if values.shape[axis] < 4:
        raise GridTooCoarse("second derivative stencil needs 4 nodes per axis")
    out = np.empty_like(values)
    h2 = spacing * spacing

    def take(i):
        index = [slice(None)] * values.ndim
        index[axis] = i
        return values[tuple(index)]

    interior = [slice(None)] * values.ndim
    interior[axis] = slice(1, -1)
    plus = [slice(None)] * values.ndim
    plus[axis] = slice(2, None)
    minus = [slice(None)] * values.ndim
    minus[axis] = slice(0, -2)
    out[tuple(interior)] = (
        values[tuple(plus)] - 2.0 * values[tuple(interior)] + values[tuple(minus)]
    ) / h2

    first = [slice(None)] * values.ndim
    first[axis] = 0
    out[tuple(first)] = (2 * take(0) - 5 * take(1) + 4 * take(2) - take(3)) / h2
    last = [slice(None)] * values.ndim
    last[axis] = -1
    out[tuple(last)] = (2 * take(-1) - 5 * take(-2) + 4 * take(-3) - take(-4)) / h2
    return out


def grid_partials(field, grid: ParameterGrid):
    """First derivatives of a sampled field along all three grid axes.

    ``field`` has shape grid.n + trailing; returns a list of three arrays.
    """
    return [partial_derivative(field, a, grid.spacing[a]) for a in range(3)]
