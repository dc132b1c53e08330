"""Deterministic lattice sweep integration shared by the frame and Ribaucour engines.

A sweep integrates axis by axis: along the first axis from the base node,
then along the second axis from every node of the first line, then along the
third from every node of that sheet.  Lines advance node to node with classic
4th-order Runge-Kutta substeps so the effective step never exceeds
``max_step``.  Within each line the evaluation order is fixed, so outputs are
byte-identical for identical inputs.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import NonFiniteState


def rk4_march(rhs, pts, axis, u_from, u_to, y, max_step, frozen):
    """Advance the batch state y from u_from to u_to along one axis.

    Overflow inside a step is tolerated here; callers detect non-finite
    states on node arrival.
    """
    span = u_to - u_from
    nsub = max(1, math.ceil(abs(span) / max_step))
    dt = span / nsub
    u = u_from
    for _ in range(nsub):
        p0 = pts.copy()
        p0[:, axis] = u
        pm = pts.copy()
        pm[:, axis] = u + 0.5 * dt
        p1 = pts.copy()
        p1[:, axis] = u + dt
        k1 = rhs(p0, y)
        k2 = rhs(pm, y + 0.5 * dt * k1)
        k3 = rhs(pm, y + 0.5 * dt * k2)
        k4 = rhs(p1, y + dt * k3)
        y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if frozen is not None and frozen.any():
            y_new[frozen] = y[frozen]
        y = y_new
        u += dt
    return y


def sweep_integrate(grid, order, y0, rhs, max_step, node_check=None,
                    on_nonfinite="raise"):
    """Integrate a pointwise ODE system over the whole grid.

    rhs(points (B, 3), Y (B,) + state_shape, axis) -> dY.
    ``node_check(Y) -> bool array`` flags nodes to mask (evaluated on arrival);
    masked lines freeze and the flag propagates along the sweep.
    Returns (states grid.n + state_shape, masked bool array).
    """
    n = grid.n
    y0 = np.asarray(y0, dtype=float)
    state_shape = y0.shape
    states = np.full(tuple(n) + state_shape, np.nan)
    states[grid.base] = y0
    masked = np.zeros(n, dtype=bool)

    if node_check is not None and node_check(y0[None])[0]:
        masked[grid.base] = True

    done = []
    for axis in order:
        ranges = [range(n[a]) if a in done else [grid.base[a]] for a in range(3)]
        starts = np.array(list(itertools.product(*ranges)), dtype=int)  # (B, 3)
        B = len(starts)
        y_start = states[tuple(starts.T)]
        bad_start = masked[tuple(starts.T)]
        pts_start = np.stack([grid.axis(a)[starts[:, a]] for a in range(3)], axis=-1)
        ax_vals = grid.axis(axis)
        i0 = grid.base[axis]

        def _rhs(p, y):
            return rhs(p, y, axis)

        for direction in (+1, -1):
            y = y_start.copy()
            bad = bad_start.copy()
            idx = i0
            while 0 <= idx + direction < n[axis]:
                nxt = idx + direction
                with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                    y = rk4_march(_rhs, pts_start, axis, ax_vals[idx], ax_vals[nxt],
                                  y, max_step, frozen=bad)
                nonfinite = ~np.isfinite(y.reshape(B, -1)).all(axis=1)
                if nonfinite.any() and not bad[nonfinite].all():
                    if on_nonfinite == "raise":
                        raise NonFiniteState(
                            f"state overflowed along axis {axis} at node {nxt}"
                        )
                    bad |= nonfinite
                if node_check is not None:
                    bad |= node_check(y)
                write = starts.copy()
                write[:, axis] = nxt
                states[tuple(write.T)] = y
                masked[tuple(write.T)] |= bad
                idx = nxt
        done.append(axis)
    return states, masked
