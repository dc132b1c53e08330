"""The Ribaucour transformation engine.

Integrates the completely integrable linear system for
(gamma_1..3, v'_1..3, phi, psi, beta) over the grid, monitors its first
integrals K1, K2 and the bilinear obstruction Omega, applies the rational
point transform to the frame field, and emits the transformed holonomic pair.

psi is evolved in the algebraically equivalent non-log form
d(psi)/du_i = -gamma_i v'_i psi / phi so signed psi is allowed; nodes where
|phi| or |psi| fall under the mask tolerance are excluded rather than
extrapolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._sweep import sweep_integrate
from .errors import (
    ConstraintUnsatisfiable,
    EmptyDomain,
    FlatAmbientUnsupported,
    GridMismatch,
    PreconditionFailed,
    SingularPhi,
    SingularPsi,
)
from .frames import FrameField
from .grid import ParameterGrid
from .report import ResidualReport
from .triples import TripleField, delta_inner, triple_residuals
from .verify import ImmersionSample

DEFAULT_MAX_STEP = 1e-2

# state layout: [gamma1, gamma2, gamma3, v'1, v'2, v'3, phi, psi, beta]
_G, _VP, _PHI, _PSI, _BETA = slice(0, 3), slice(3, 6), 6, 7, 8


@dataclass(frozen=True)
class RibaucourState:
    gamma: tuple
    vprime: tuple
    phi: float
    psi: float
    beta: float

    def as_array(self) -> np.ndarray:
        return np.array(list(self.gamma) + list(self.vprime)
                        + [self.phi, self.psi, self.beta], dtype=float)

    @classmethod
    def from_array(cls, y):
        y = np.asarray(y, dtype=float)
        return cls(tuple(y[_G]), tuple(y[_VP]), float(y[_PHI]), float(y[_PSI]),
                   float(y[_BETA]))


def default_mask_tol(grid: ParameterGrid) -> float:
    return 1e-6 * max(1.0, grid.diameter)


@dataclass
class RibaucourField:
    """Grid-sampled solution of the transformation system."""

    grid: ParameterGrid
    states: np.ndarray              # grid.n + (9,)
    source: TripleField
    K2target: float
    mask_tol: float
    masked: np.ndarray = None       # True = singular / contaminated

    @property
    def gamma(self) -> np.ndarray:
        return np.moveaxis(self.states[..., _G], -1, 0)

    @property
    def vprime(self) -> np.ndarray:
        return np.moveaxis(self.states[..., _VP], -1, 0)

    @property
    def phi(self) -> np.ndarray:
        return self.states[..., _PHI]

    @property
    def psi(self) -> np.ndarray:
        return self.states[..., _PSI]

    @property
    def beta(self) -> np.ndarray:
        return self.states[..., _BETA]

    def valid_mask(self) -> np.ndarray:
        ok = np.isfinite(self.states).all(axis=-1)
        if self.masked is not None:
            ok &= ~self.masked
        return ok

    def state_at(self, idx) -> RibaucourState:
        return RibaucourState.from_array(self.states[tuple(idx)])

    @classmethod
    def from_state_function(cls, fn, triple: TripleField, K2target,
                            grid: ParameterGrid = None, mask_tol=None):
        """Sample a closed-form state map u -> RibaucourState over the grid."""
        grid = grid or triple.grid
        mask_tol = mask_tol if mask_tol is not None else default_mask_tol(grid)
        pts = grid.points().reshape(-1, 3)
        states = np.stack([fn(p).as_array() for p in pts])
        states = states.reshape(tuple(grid.n) + (9,))
        masked = (np.abs(states[..., _PHI]) < mask_tol) | (
            np.abs(states[..., _PSI]) < mask_tol
        )
        return cls(grid, states, triple, K2target, mask_tol,
                   masked if masked.any() else None)


def seed_state(triple: TripleField, base_idx, request: RibaucourState,
               K2target) -> RibaucourState:
    """Complete a partial state at the base node so that K1 = 0, K2 = K2target
    and Omega = 0.

    gamma, beta, phi are taken from the request; psi is forced by K1 = 0;
    the requested v' is projected onto the Omega = 0 hyperplane and then
    rescaled inside it onto the K2 quadric (least change wins).
    """
    eps, c = triple.spec.eps, triple.spec.c
    delta = np.asarray(triple.delta, dtype=float)
    v, _, V = triple.at(base_idx)
    gamma = np.asarray(request.gamma, dtype=float)
    beta = float(request.beta)
    phi = float(request.phi)
    if phi == 0.0:
        raise SingularPhi("phi must be nonzero at the base node")

    quad = float(np.sum(gamma**2) + eps * beta**2 + c * phi**2)
    psi = quad / (2.0 * phi)
    if abs(psi) <= 1e-15 * max(1.0, abs(quad)):
        raise SingularPsi("K1 = 0 forces psi = 0; the point transform is undefined")

    # Omega(v') = <w, v'>_E - rho0  with  w_j = delta_j (phi V_j + eps beta v_j)
    w = delta * (phi * V + eps * beta * v)
    rho0 = eps * beta * K2target
    r = np.asarray(request.vprime, dtype=float)
    wn2 = float(np.sum(w * w))

    if wn2 < 1e-30:
        if abs(rho0) > 1e-14 * max(1.0, abs(K2target)):
            raise ConstraintUnsatisfiable("Omega is constant nonzero for this request")
        x_c = np.zeros(3)
        y = r
    else:
        x_c = (rho0 / wn2) * w
        p = r - ((float(np.sum(w * r)) - rho0) / wn2) * w
        y = p - x_c

    # scale within the hyperplane: <x_c + t y, x_c + t y>_delta = K2target
    A = float(np.sum(delta * y * y))
    B = float(np.sum(delta * x_c * y))
    C0 = float(np.sum(delta * x_c * x_c)) - float(K2target)
    scale = max(1.0, abs(A), abs(B), abs(C0))
    if abs(A) < 1e-14 * scale:
        if abs(B) < 1e-14 * scale:
            if abs(C0) < 1e-12 * scale:
                t = 1.0
            else:
                raise ConstraintUnsatisfiable(
                    "the Omega hyperplane misses the K2 quadric for this request"
                )
        else:
            t = -C0 / (2.0 * B)
    else:
        disc = B * B - A * C0
        if disc < 0:
            raise ConstraintUnsatisfiable(
                "the Omega hyperplane misses the K2 quadric branch"
            )
        roots = [(-B + math.sqrt(disc)) / A, (-B - math.sqrt(disc)) / A]
        t = min(roots, key=lambda s: abs(s - 1.0))
    vprime = x_c + t * y
    return RibaucourState(tuple(gamma), tuple(vprime), phi, psi, beta)


def _ribaucour_rhs(triple: TripleField):
    eps = float(triple.spec.eps)
    c = float(triple.spec.c)
    delta = np.asarray(triple.delta, dtype=float)

    def rhs(pts, Y, axis):
        v, h, V = triple.eval_at(pts)
        g = Y[:, _G]
        vp = Y[:, _VP]
        phi = Y[:, _PHI]
        psi = Y[:, _PSI]
        beta = Y[:, _BETA]
        a = axis
        dY = np.empty_like(Y)
        ga = g[:, a]
        vpa = vp[:, a]
        inv_phi = 1.0 / phi

        # h'_aj = h_aj + (v'_j - v_j) gamma_a / phi
        hp = h[:, a, :] + (vp - v) * (ga * inv_phi)[:, None]

        dga = (v[:, a] - vpa) * psi + beta * V[:, a] - c * phi * v[:, a]
        for j in range(3):
            if j == a:
                continue
            dY[:, j] = h[:, j, a] * ga           # (ii) with i = j, j = a
            dga = dga - h[:, j, a] * g[:, j]
        dY[:, a] = dga

        dvp = np.empty_like(vp)
        acc = np.zeros(len(Y))
        for j in range(3):
            if j == a:
                continue
            dvp[:, j] = hp[:, j] * vpa           # (vi)
            acc = acc + delta[j] * hp[:, j] * vp[:, j]
        dvp[:, a] = -delta[a] * acc              # (vii)
        dY[:, _VP] = dvp

        dY[:, _PHI] = v[:, a] * ga               # (i)
        dY[:, _PSI] = -ga * vpa * psi * inv_phi  # (v), non-log form
        dY[:, _BETA] = -eps * V[:, a] * ga       # (iv)
        return dY

    return rhs


def integrate_ribaucour(triple: TripleField, init: RibaucourState,
                        grid: ParameterGrid = None, sweep_order=(0, 1, 2),
                        max_step=DEFAULT_MAX_STEP, mask_tol=None,
                        K2target=None, integrability_tol=None) -> RibaucourField:
    """Sweep-integrate the transformation system from the base node.

    Nodes where |phi| or |psi| falls below ``mask_tol`` are masked and their
    sweep descendants with them; integration continues on the other lines.
    """
    grid = grid or triple.grid
    if integrability_tol is not None:
        res = triple_residuals(triple)
        if res.overall_max > integrability_tol:
            raise PreconditionFailed(
                f"seed residual {res.overall_max:.3e} exceeds {integrability_tol:.1e}"
            )
    mask_tol = mask_tol if mask_tol is not None else default_mask_tol(grid)
    if K2target is None:
        K2target = float(delta_inner(triple.delta, np.asarray(init.vprime),
                                     np.asarray(init.vprime)))

    def node_check(Y):
        return (np.abs(Y[..., _PHI]) < mask_tol) | (np.abs(Y[..., _PSI]) < mask_tol)

    states, masked = sweep_integrate(grid, tuple(sweep_order), init.as_array(),
                                     _ribaucour_rhs(triple), max_step,
                                     node_check=node_check, on_nonfinite="mask")
    return RibaucourField(grid, states, triple, float(K2target), mask_tol,
                          masked if masked.any() else None)


@dataclass(frozen=True)
class InvariantDrift:
    K1: float
    K2: float
    Omega: float

    @property
    def overall(self) -> float:
        return max(self.K1, self.K2, self.Omega)


def invariant_fields(rf: RibaucourField):
    """K1, K2, Omega evaluated at every node."""
    t = rf.source
    eps, c = t.spec.eps, t.spec.c
    g, vp = rf.gamma, rf.vprime
    phi, psi, beta = rf.phi, rf.psi, rf.beta
    with np.errstate(invalid="ignore", over="ignore"):
        K1 = np.sum(g * g, axis=0) + eps * beta**2 + c * phi**2 - 2.0 * phi * psi
        K2 = delta_inner(t.delta, vp, vp)
        omega = phi * delta_inner(t.delta, vp, t.V) - eps * beta * (
            rf.K2target - delta_inner(t.delta, t.v, vp)
        )
    return K1, K2, omega


def invariant_drift(rf: RibaucourField, K1target=0.0) -> InvariantDrift:
    """Max deviation of K1, K2, Omega from their targets over unmasked nodes."""
    K1, K2, omega = invariant_fields(rf)
    ok = rf.valid_mask()
    if not ok.any():
        return InvariantDrift(0.0, 0.0, 0.0)
    return InvariantDrift(
        float(np.abs(K1[ok] - K1target).max()),
        float(np.abs(K2[ok] - rf.K2target).max()),
        float(np.abs(omega[ok]).max()),
    )


def transform_immersion(ff: FrameField, rf: RibaucourField) -> ImmersionSample:
    """Apply F' = F - (1/psi)(sum_i gamma_i X_i + beta N + c phi F) nodewise."""
    if not ff.grid.same_as(rf.grid):
        raise GridMismatch("frame and transformation fields live on different grids")
    spec = ff.triple.spec
    c = spec.c
    g = rf.states[..., _G]
    correction = np.einsum("...i,...id->...d", g, ff.X)
    correction += rf.beta[..., None] * ff.N
    if c != 0:
        correction += c * rf.phi[..., None] * ff.f
    fprime = ff.f - correction / rf.psi[..., None]
    masked = rf.masked
    if masked is not None:
        fprime = np.where(masked[..., None], np.nan, fprime)
    return ImmersionSample(rf.grid, fprime, spec, masked)


def transformed_triple(t: TripleField, rf: RibaucourField) -> TripleField:
    """Holonomic data (v', h', V') of the transformed hypersurface.

    V'_i = V_i + (v_i - v'_i) eps beta / phi;
    h'_ij = h_ij + (v'_j - v_j) gamma_i / phi.  Same delta and ambient.
    """
    ok = rf.valid_mask()
    if not ok.any():
        raise EmptyDomain("every node of the transformation field is masked")
    eps = t.spec.eps
    v, h, V = t.v, t.h, t.V
    vp = rf.vprime
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = eps * rf.beta / rf.phi
        Vp = V + (v - vp) * ratio
        hp = np.empty_like(h)
        for i in range(3):
            for j in range(3):
                hp[i, j] = h[i, j] + (vp[j] - v[j]) * rf.gamma[i] / rf.phi
    masked = None if ok.all() else ~ok
    if masked is not None:
        vp = np.where(masked, np.nan, vp)
        Vp = np.where(masked, np.nan, Vp)
        hp = np.where(masked, np.nan, hp)
    return TripleField.from_samples(rf.grid, t.delta, t.spec, vp, hp, Vp, masked)


def parallel_triple(t: TripleField, tau) -> TripleField:
    """Holonomic pair of the parallel hypersurface at signed distance tau.

    (v, V) maps by the rotation/boost with rate sqrt|c|, h is unchanged;
    requires nonzero ambient curvature.
    """
    if t.spec.c == 0:
        raise FlatAmbientUnsupported("parallel families need c != 0 in this model")
    root = math.sqrt(abs(t.spec.c))
    check = t.spec.eps * (1 if t.spec.c > 0 else -1)
    if check == 1:
        cp, sp = math.cos(root * tau), math.sin(root * tau)
    else:
        cp, sp = math.cosh(root * tau), math.sinh(root * tau)

    if t.closed_form:
        v_fn, V_fn, h_fn = t.v_fn, t.V_fn, t.h_fn

        def v_new(u1, u2, u3):
            return cp * v_fn(u1, u2, u3) - (sp / root) * V_fn(u1, u2, u3)

        def V_new(u1, u2, u3):
            return check * root * sp * v_fn(u1, u2, u3) + cp * V_fn(u1, u2, u3)

        return TripleField.from_functions(t.grid, t.delta, t.spec, v_new, V_new, h_fn)

    v, h, V = t.v, t.h, t.V
    v_new = cp * v - (sp / root) * V
    V_new = check * root * sp * v + cp * V
    return TripleField.from_samples(t.grid, t.delta, t.spec, v_new, h.copy(), V_new,
                                    t.masked)
