"""Holonomic data (v, h, V): integrability residuals, first integrals,
classification, principal curvatures, and the companion second fundamental form.

Index convention throughout: h[i, j] = h_ij = (1/v_i) dv_j/du_i, so the first
index is the differentiation direction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .ambient import SpaceFormSpec
from .errors import (
    BranchViolation,
    DegenerateTriple,
    InvalidParams,
    NotAFirstIntegralSolution,
    PreconditionFailed,
    UmbilicSetError,
)
from .grid import ParameterGrid, partial_derivative
from .report import ResidualReport

CANONICAL_DELTA = (1, -1, 1)
ALL_MINUS_DELTA = (-1, -1, -1)
DEFAULT_CLASSIFY_TOL = 1e-6


def _check_delta(delta):
    delta = tuple(int(d) for d in delta)
    if any(d not in (-1, 1) for d in delta):
        raise InvalidParams(f"delta entries must be +-1, got {delta}")
    return delta


def delta_inner(delta, x, y, axis=0):
    """Sum_i delta_i x_i y_i with the component axis given explicitly."""
    d = np.asarray(delta, dtype=float)
    shape = [1] * np.ndim(x)
    shape[axis] = 3
    return np.sum(d.reshape(shape) * np.asarray(x) * np.asarray(y), axis=axis)


class _CubicInterp:
    """Componentwise cubic interpolation of sampled fields (spline order 3)."""

    def __init__(self, samples, grid):
        flat = samples.reshape((-1,) + tuple(grid.n))
        self._coeffs = [ndimage.spline_filter(c, order=3, mode="nearest") for c in flat]
        self._lead = samples.shape[: samples.ndim - 3]
        self._grid = grid

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        idx = np.stack(
            [
                (points[..., a] - self._grid.lo[a]) / self._grid.spacing[a]
                for a in range(3)
            ]
        )
        flat_idx = idx.reshape(3, -1)
        out = np.stack(
            [
                ndimage.map_coordinates(c, flat_idx, order=3, prefilter=False, mode="nearest")
                for c in self._coeffs
            ]
        )
        return out.reshape(self._lead + points.shape[:-1])


@dataclass
class TripleField:
    """The holonomic data (v, h, V) on a 3-parameter box.

    Closed-form fields carry callables taking broadcastable coordinate arrays
    (u1, u2, u3) and returning component-first stacks; sampled fields carry
    the arrays directly.  ``masked`` (optional, True = excluded) marks nodes
    invalidated by singularities upstream.
    """

    grid: ParameterGrid
    delta: tuple
    spec: SpaceFormSpec
    v_fn: callable = None
    h_fn: callable = None
    V_fn: callable = None
    _v: np.ndarray = field(default=None, repr=False)
    _h: np.ndarray = field(default=None, repr=False)
    _V: np.ndarray = field(default=None, repr=False)
    masked: np.ndarray = None

    def __post_init__(self):
        self.delta = _check_delta(self.delta)
        self._interp = None

    # --- constructors ---------------------------------------------------

    @classmethod
    def from_functions(cls, grid, delta, spec, v_fn, V_fn, h_fn):
        return cls(grid, delta, spec, v_fn=v_fn, h_fn=h_fn, V_fn=V_fn)

    @classmethod
    def from_samples(cls, grid, delta, spec, v, h, V, masked=None):
        v = np.asarray(v, dtype=float)
        h = np.asarray(h, dtype=float)
        V = np.asarray(V, dtype=float)
        expect = (3,) + tuple(grid.n)
        if v.shape != expect or V.shape != expect or h.shape != (3, 3) + tuple(grid.n):
            raise InvalidParams("sample arrays have wrong shapes")
        return cls(grid, delta, spec, _v=v, _h=h, _V=V, masked=masked)

    @classmethod
    def constant(cls, grid, delta, spec, v, V):
        """Constant closed-form triple with h = 0."""
        v = np.asarray(v, dtype=float)
        V = np.asarray(V, dtype=float)

        def v_fn(u1, u2, u3):
            shape = np.broadcast(u1, u2, u3).shape
            return np.broadcast_to(v.reshape((3,) + (1,) * len(shape)), (3,) + shape).copy()

        def V_fn(u1, u2, u3):
            shape = np.broadcast(u1, u2, u3).shape
            return np.broadcast_to(V.reshape((3,) + (1,) * len(shape)), (3,) + shape).copy()

        def h_fn(u1, u2, u3):
            shape = np.broadcast(u1, u2, u3).shape
            return np.zeros((3, 3) + shape)

        return cls.from_functions(grid, delta, spec, v_fn, V_fn, h_fn)

    # --- sampled views ----------------------------------------------------

    @property
    def closed_form(self) -> bool:
        return self.v_fn is not None

    def _sample(self):
        if self._v is None:
            U = self.grid.meshes()
            self._v = np.asarray(self.v_fn(*U), dtype=float)
            self._h = np.asarray(self.h_fn(*U), dtype=float)
            self._V = np.asarray(self.V_fn(*U), dtype=float)

    @property
    def v(self) -> np.ndarray:
        self._sample()
        return self._v

    @property
    def h(self) -> np.ndarray:
        self._sample()
        return self._h

    @property
    def V(self) -> np.ndarray:
        self._sample()
        return self._V

    def at(self, idx):
        """(v, h, V) at one grid node."""
        i, j, k = idx
        return self.v[:, i, j, k], self.h[:, :, i, j, k], self.V[:, i, j, k]

    def eval_at(self, points):
        """(v, h, V) at arbitrary points, shape (..., 3) -> components last.

        Uses the closed forms when available, else componentwise cubic
        interpolation of the samples.
        """
        points = np.asarray(points, dtype=float)
        if self.closed_form:
            u1, u2, u3 = points[..., 0], points[..., 1], points[..., 2]
            v = np.moveaxis(np.asarray(self.v_fn(u1, u2, u3), dtype=float), 0, -1)
            V = np.moveaxis(np.asarray(self.V_fn(u1, u2, u3), dtype=float), 0, -1)
            h = np.moveaxis(
                np.moveaxis(np.asarray(self.h_fn(u1, u2, u3), dtype=float), 0, -1), 0, -1
            )
            return v, h, V
        if self._interp is None:
            self._sample()
            self._interp = (
                _CubicInterp(self._v, self.grid),
                _CubicInterp(self._h, self.grid),
                _CubicInterp(self._V, self.grid),
            )
        iv, ih, iV = self._interp
        v = np.moveaxis(iv(points), 0, -1)
        V = np.moveaxis(iV(points), 0, -1)
        h = ih(points).reshape((3, 3) + points.shape[:-1])
        h = np.moveaxis(np.moveaxis(h, 0, -1), 0, -1)
        return v, h, V

    def with_grid(self, grid: ParameterGrid) -> "TripleField":
        """Resample a closed-form triple on another grid."""
        if not self.closed_form:
            raise InvalidParams("only closed-form triples can be regridded")
        return TripleField.from_functions(
            grid, self.delta, self.spec, self.v_fn, self.V_fn, self.h_fn
        )

    def valid_mask(self) -> np.ndarray:
        if self.masked is None:
            return np.ones(self.grid.n, dtype=bool)
        return ~self.masked


def _stencil_safe_mask(t: TripleField) -> np.ndarray:
    """Valid nodes whose finite-difference stencils avoid masked nodes."""
    valid = t.valid_mask()
    if t.masked is None or not t.masked.any():
        return valid
    bad = ndimage.binary_dilation(t.masked, structure=np.ones((7, 7, 7), dtype=bool))
    return valid & ~bad


def triple_residuals(t: TripleField) -> ResidualReport:
    """Residuals of the integrability system plus the two added equations.

    Entries: '3.i', '3.ii', '3.iii', '3.iv', '4', '5'.  Derivatives follow
    the module stencil (central interior, one-sided faces, both order 2).
    """
    t.grid.require_resolution(5)
    v, h, V = t.v, t.h, t.V
    delta = t.delta
    eps, c = t.spec.eps, t.spec.c
    sp = t.grid.spacing

    dv = np.stack([np.stack([partial_derivative(v[i], a, sp[a]) for a in range(3)])
                   for i in range(3)])          # dv[i, a] = dv_i/du_a
    dV = np.stack([np.stack([partial_derivative(V[i], a, sp[a]) for a in range(3)])
                   for i in range(3)])
    dh = np.stack([np.stack([np.stack([partial_derivative(h[i, j], a, sp[a])
                                       for a in range(3)])
                             for j in range(3)])
                   for i in range(3)])          # dh[i, j, a] = dh_ij/du_a

    mask = _stencil_safe_mask(t)
    report = ResidualReport(metadata={"stencil": "order-2 central/one-sided",
                                      "spacing": list(sp)})

    res_i, res_ii, res_iv = [], [], []
    for i, j in itertools.permutations(range(3), 2):
        res_i.append(dv[i, j] - h[j, i] * v[j])
        res_iv.append(dV[i, j] - h[j, i] * V[j])
    for i, k in itertools.permutations(range(3), 2):
        j = 3 - i - k
        res_ii.append(dh[i, k, j] - h[i, j] * h[j, k])
    res_iii = []
    for i, j in itertools.combinations(range(3), 2):
        k = 3 - i - j
        res_iii.append(dh[i, j, i] + dh[j, i, j] + h[k, i] * h[k, j]
                       + eps * V[i] * V[j] + c * v[i] * v[j])
    res_4, res_5 = [], []
    for i in range(3):
        j, k = [a for a in range(3) if a != i]
        res_4.append(delta[i] * dv[i, i] + delta[j] * h[i, j] * v[j]
                     + delta[k] * h[i, k] * v[k])
        res_5.append(delta[i] * dV[i, i] + delta[j] * h[i, j] * V[j]
                     + delta[k] * h[i, k] * V[k])

    stackmask = np.broadcast_to(mask, (6,) + mask.shape)
    trimask = np.broadcast_to(mask, (3,) + mask.shape)
    report.add("3.i", np.stack(res_i), stackmask)
    report.add("3.ii", np.stack(res_ii), stackmask)
    report.add("3.iii", np.stack(res_iii), trimask)
    report.add("3.iv", np.stack(res_iv), stackmask)
    report.add("4", np.stack(res_4), trimask)
    report.add("5", np.stack(res_5), trimask)
    return report


@dataclass(frozen=True)
class FirstIntegralTriple:
    """Values of the three delta-weighted conserved sums."""

    K1: float
    K2: float
    K3: float

    def as_tuple(self):
        return (self.K1, self.K2, self.K3)


def first_integrals(t: TripleField, idx) -> FirstIntegralTriple:
    v, _, V = t.at(idx)
    d = np.asarray(t.delta, dtype=float)
    return FirstIntegralTriple(
        K1=float(np.sum(d * v * v)),
        K2=float(np.sum(d * v * V)),
        K3=float(np.sum(d * V * V)),
    )


def first_integral_fields(t: TripleField):
    """K1, K2, K3 evaluated at every node (arrays of shape grid.n)."""
    v, V = t.v, t.V
    return (
        delta_inner(t.delta, v, v),
        delta_inner(t.delta, v, V),
        delta_inner(t.delta, V, V),
    )


@dataclass(frozen=True)
class TildeBranch:
    """One resolution of C = eps_tilde (c - c_tilde)."""

    eps_tilde: int
    c_tilde: float
    spec: SpaceFormSpec


@dataclass(frozen=True)
class Classification:
    kind: str                      # "ProblemStar" | "ConformallyFlat" | "Neither"
    K: FirstIntegralTriple
    drift: float
    eps_hat: int = None
    C: float = None
    branches: tuple = ()
    permutation: tuple = None      # permutation carrying delta to (1, -1, 1)

    @property
    def is_problem_star(self):
        return self.kind == "ProblemStar"

    @property
    def is_conformally_flat(self):
        return self.kind == "ConformallyFlat"


def _delta_canonical_permutation(delta):
    """Lexicographically first permutation p with delta[p] == (1, -1, 1)."""
    for p in itertools.permutations(range(3)):
        if tuple(delta[i] for i in p) == CANONICAL_DELTA:
            return p
    return None


def classify(t: TripleField, tol=DEFAULT_CLASSIFY_TOL) -> Classification:
    """Match the first integrals against the two target patterns.

    ProblemStar: (K1, K2, K3) ~ (+-1, 0, C) with the delta-case rule; the
    target curvature is reported for both choices eps_tilde = +-1 through
    C = eps_tilde (c - c_tilde).  ConformallyFlat: ~ (0, 0, 1) with delta a
    permutation of (1, -1, 1).
    """
    K1f, K2f, K3f = first_integral_fields(t)
    valid = t.valid_mask()
    base = t.grid.base
    if not valid[base]:
        raise PreconditionFailed("grid base node is masked")
    K = FirstIntegralTriple(float(K1f[base]), float(K2f[base]), float(K3f[base]))
    drift = 0.0
    for f, b in ((K1f, K.K1), (K2f, K.K2), (K3f, K.K3)):
        dev = float(np.max(np.abs(f[valid] - b))) if valid.any() else 0.0
        scale = max(1.0, abs(b))
        if dev > tol * scale:
            raise NotAFirstIntegralSolution(
                f"first integrals drift by {dev:.3e} (> {tol:.1e} relative)"
            )
        drift = max(drift, dev)

    perm = _delta_canonical_permutation(t.delta)
    abs_tol = tol * max(1.0, abs(K.K1), abs(K.K2), abs(K.K3))

    eps_hat = None
    if abs(K.K1 - 1.0) <= abs_tol:
        eps_hat = 1
    elif abs(K.K1 + 1.0) <= abs_tol:
        eps_hat = -1
    if eps_hat is not None and abs(K.K2) <= abs_tol:
        C = K.K3
        delta_ok = False
        if eps_hat == 1 and perm is not None:
            delta_ok = True
        elif eps_hat == -1 and C > abs_tol and perm is not None:
            delta_ok = True
        elif eps_hat == -1 and C < -abs_tol and t.delta == ALL_MINUS_DELTA:
            delta_ok = True
        if delta_ok:
            branches = tuple(
                TildeBranch(e, t.spec.c - e * C, SpaceFormSpec(t.spec.c - e * C, (1 - e) // 2))
                for e in (1, -1)
            )
            return Classification("ProblemStar", K, drift, eps_hat=eps_hat, C=C,
                                  branches=branches, permutation=perm)

    if (abs(K.K1) <= abs_tol and abs(K.K2) <= abs_tol
            and abs(K.K3 - 1.0) <= abs_tol and perm is not None):
        return Classification("ConformallyFlat", K, drift, permutation=perm)

    return Classification("Neither", K, drift, permutation=perm)


def principal_curvatures(t: TripleField, idx):
    """lambda_i = V_i / v_i at one node; DegenerateTriple where some v_i = 0."""
    v, _, V = t.at(idx)
    if np.any(v == 0.0):
        raise DegenerateTriple(f"v = {tuple(v)} has a vanishing component at {tuple(idx)}")
    return tuple(V / v)


def companion_V(t: TripleField, tol=DEFAULT_CLASSIFY_TOL) -> np.ndarray:
    """Second fundamental form data of the companion immersion.

    Vtilde_j = (-1)^(j+1) delta_j (v_i V_k - v_k V_i) with (i, k) the
    complement of j in increasing order (1-based signs).  Requires a
    ProblemStar triple.
    """
    cls = classify(t, tol)
    if not cls.is_problem_star:
        raise PreconditionFailed(f"companion data needs a ProblemStar triple, got {cls.kind}")
    v, V = t.v, t.V
    out = np.empty_like(V)
    for j in range(3):
        i, k = [a for a in range(3) if a != j]
        sign = (-1.0) ** j                      # 1-based (-1)^(j+1)
        out[j] = sign * t.delta[j] * (v[i] * V[k] - v[k] * V[i])
    return out


def triple_from_curvatures(lams, delta, spec: SpaceFormSpec, grid: ParameterGrid,
                           problem_star=None, distinct_guard=1e-10) -> TripleField:
    """Recover the holonomic data from principal-curvature fields.

    Conformally flat branch (default): v_j = sqrt(delta_j / ((l_j - l_i)(l_j - l_k))).
    ProblemStar branch (problem_star = (eps_hat, C)):
    v_j = sqrt(delta_j (C + eps_hat l_i l_k) / ((l_j - l_i)(l_j - l_k))).
    V = lambda v; h from finite differences of v.
    """
    delta = _check_delta(delta)
    if callable(lams):
        lam = np.asarray(lams(*grid.meshes()), dtype=float)
    else:
        lam = np.asarray(lams, dtype=float)
    if lam.shape != (3,) + tuple(grid.n):
        raise InvalidParams("lambda fields must have shape (3,) + grid.n")

    for i, j in itertools.combinations(range(3), 2):
        gap = np.min(np.abs(lam[i] - lam[j]))
        if gap < distinct_guard:
            raise UmbilicSetError(f"principal curvatures {i} and {j} coincide (gap {gap:.2e})")

    v = np.empty_like(lam)
    for j in range(3):
        i, k = [a for a in range(3) if a != j]
        numer = 1.0 if problem_star is None else (
            problem_star[1] + problem_star[0] * lam[i] * lam[k]
        )
        radicand = delta[j] * numer / ((lam[j] - lam[i]) * (lam[j] - lam[k]))
        if np.any(radicand <= 0):
            raise BranchViolation(f"nonpositive radicand for component {j}")
        v[j] = np.sqrt(radicand)

    V = lam * v
    h = np.empty((3, 3) + tuple(grid.n))
    sp = grid.spacing
    for i in range(3):
        for j in range(3):
            h[i, j] = partial_derivative(v[j], i, sp[i]) / v[i]
    return TripleField.from_samples(grid, delta, spec, v, h, V)


def permute_triple(t: TripleField, perm) -> TripleField:
    """Relabel coordinates, components, and delta by one permutation.

    ``perm[a]`` is the old index that becomes new index a.
    """
    perm = tuple(perm)
    v, h, V = t.v, t.h, t.V
    axes = tuple(perm)
    v_new = np.transpose(v[list(perm)], (0,) + tuple(1 + p for p in perm))
    V_new = np.transpose(V[list(perm)], (0,) + tuple(1 + p for p in perm))
    h_new = h[np.ix_(list(perm), list(perm))]
    h_new = np.transpose(h_new, (0, 1) + tuple(2 + p for p in perm))
    grid = ParameterGrid(
        tuple(t.grid.lo[p] for p in perm),
        tuple(t.grid.hi[p] for p in perm),
        tuple(t.grid.n[p] for p in perm),
        tuple(t.grid.base[p] for p in perm),
    )
    delta = tuple(t.delta[p] for p in perm)
    masked = None
    if t.masked is not None:
        masked = np.transpose(t.masked, axes)
    return TripleField.from_samples(grid, delta, t.spec, v_new, h_new, V_new, masked)
