"""High-accuracy initial value integration of the augmented shooting system.

The state is (u, u', w, w') where u solves u'' + q(t) g(u) = 0 and w solves
the variational equation w'' + q(t) g'(u) w = 0 along u.  Integration uses
an adaptive high-order embedded Runge-Kutta pair (DOP853) with free dense
output.  Declared discontinuities of q are forced to be step boundaries so
every step sees smooth data, and a down-crossing of u through zero is
located on the interpolant (optionally terminating the integration).

Because g vanishes on (-inf, 0], the dynamics below zero are exact affine
continuation; no special casing is needed there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NonFiniteState, StepSizeUnderflow
from .nonlinearity import Nonlinearity

__all__ = [
    "Trajectory",
    "LinearTrajectory",
    "integrate",
    "solve_linearized",
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
ESCAPE_LIMIT = 1e8


class _PiecewiseDense:
    """Dense output glued from per-segment interpolants."""

    def __init__(self, segments):
        # segments: list of (t0, t1, OdeSolution)
        self._segments = segments
        self._starts = np.asarray([s[0] for s in segments])
        self.t_min = segments[0][0]
        self.t_max = segments[-1][1]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        ts = np.atleast_1d(t)
        idx = np.clip(np.searchsorted(self._starts, ts, side="right") - 1, 0, len(self._segments) - 1)
        out = np.empty((self._segments[0][2](self.t_min).shape[0], ts.size))
        for j in np.unique(idx):
            sel = idx == j
            out[:, sel] = self._segments[j][2](ts[sel])
        return out[:, 0] if scalar else out


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Dense numerical solution of the augmented system on [t0, t_end].

    ``t_end`` equals the right end of the requested span, or the location of
    the first zero of u when integration was truncated there, or the escape
    time when u blew past the escape threshold.
    """

    t_nodes: np.ndarray
    states: np.ndarray  # shape (n, 4)
    first_zero: float | None
    accepted_steps: int
    tolerance_used: tuple[float, float]
    escaped: bool
    dense: _PiecewiseDense

    @property
    def t_start(self) -> float:
        return float(self.t_nodes[0])

    @property
    def t_end(self) -> float:
        return float(self.t_nodes[-1])

    def dense_eval(self, t) -> np.ndarray:
        """Full state (u, u', w, w') at t (scalar or array)."""
        return self.dense(t)

    def u(self, t):
        return self.dense(t)[0]

    def du(self, t):
        return self.dense(t)[1]

    def w(self, t):
        return self.dense(t)[2]

    def dw(self, t):
        return self.dense(t)[3]


@dataclass(frozen=True, eq=False)
class LinearTrajectory:
    """Dense solution (w, w') of a linearized equation along a frozen base."""

    t_nodes: np.ndarray
    states: np.ndarray  # shape (n, 2)
    dense: _PiecewiseDense

    @property
    def t_start(self) -> float:
        return float(self.t_nodes[0])

    @property
    def t_end(self) -> float:
        return float(self.t_nodes[-1])

    def w(self, t):
        return self.dense(t)[0]

    def dw(self, t):
        return self.dense(t)[1]


def _segment_edges(t0: float, t1: float, breakpoints: Sequence[float]) -> list[float]:
    gap = 1e-12 * max(1.0, abs(t1 - t0))
    pts = [t0]
    for p in sorted(breakpoints):
        if t0 + gap < p < t1 - gap and p - pts[-1] > gap:
            pts.append(float(p))
    pts.append(t1)
    return pts


def _run_segments(rhs, y0, edges, rtol, atol, events_factory):
    """solve_ivp over consecutive segments, chaining state; stops on terminal events."""
    segments = []
    t_nodes = [edges[0]]
    states = [np.asarray(y0, dtype=float)]
    steps = 0
    y = np.asarray(y0, dtype=float)
    event_hits: list[list[float]] = [[] for _ in events_factory(None)]
    terminated = None
    for c, d in zip(edges[:-1], edges[1:]):
        events = events_factory(None)
        res = solve_ivp(
            rhs,
            (c, d),
            y,
            method="DOP853",
            dense_output=True,
            rtol=rtol,
            atol=atol,
            events=events or None,
        )
        if res.status == -1:
            if not np.all(np.isfinite(res.y[:, -1])):
                raise NonFiniteState(f"non-finite state near t={res.t[-1]:.6g}")
            raise StepSizeUnderflow(res.message, t_last=float(res.t[-1]))
        segments.append((res.t[0], res.t[-1], res.sol))
        t_nodes.extend(res.t[1:].tolist())
        for row in res.y[:, 1:].T:
            states.append(row.copy())
        steps += len(res.t) - 1
        for k, te in enumerate(res.t_events or []):
            event_hits[k].extend(te.tolist())
        y = res.y[:, -1]
        if res.status == 1:  # a terminal event fired inside this segment
            for k, ev in enumerate(events):
                if getattr(ev, "terminal", False) and res.t_events[k].size:
                    terminated = k
            break
    if not np.all(np.isfinite(states[-1])):
        raise NonFiniteState(f"non-finite state at t={t_nodes[-1]:.6g}")
    return segments, np.asarray(t_nodes), np.asarray(states), steps, event_hits, terminated


def integrate(
    q_eff: Callable,
    g: Nonlinearity,
    init: Sequence[float],
    span: tuple[float, float],
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    stop_at_zero: bool = False,
    breakpoints: Sequence[float] = (),
    escape: float = ESCAPE_LIMIT,
) -> Trajectory:
    """Integrate (u, u', w, w') with u'' = -q g(u), w'' = -q g'(u) w.

    Down-crossings of u through zero are located on the interpolant; with
    ``stop_at_zero`` the trajectory is truncated at the first one.  An upward
    escape of u through ``escape`` always terminates (superlinear blow-up on
    negativity intervals); the result is flagged ``escaped``.
    """
    t0, t1 = float(span[0]), float(span[1])
    if not t1 > t0:
        raise ValueError("span must satisfy t1 > t0")
    if rtol <= 0.0 or atol <= 0.0:
        raise ValueError("rtol and atol must be positive")

    gg, gp = g.g, g.g_prime

    def rhs(t, y):
        q = q_eff(t)
        return (y[1], -q * gg(y[0]), y[3], -q * gp(y[0]) * y[2])

    def events_factory(_):
        def zero(t, y):
            return y[0]

        zero.direction = -1
        zero.terminal = bool(stop_at_zero)

        def blow(t, y):
            return y[0] - escape

        blow.direction = 1
        blow.terminal = True
        return [zero, blow]

    edges = _segment_edges(t0, t1, breakpoints)
    segments, t_nodes, states, steps, hits, terminated = _run_segments(
        rhs, init, edges, rtol, atol, events_factory
    )
    first_zero = min(hits[0]) if hits[0] else None
    escaped = bool(hits[1])
    return Trajectory(
        t_nodes=t_nodes,
        states=states,
        first_zero=first_zero,
        accepted_steps=steps,
        tolerance_used=(rtol, atol),
        escaped=escaped,
        dense=_PiecewiseDense(segments),
    )


def solve_linearized(
    q_eff: Callable,
    g: Nonlinearity,
    base_traj: Trajectory,
    w0: float,
    w0p: float,
    rtol: float | None = None,
    atol: float | None = None,
) -> LinearTrajectory:
    """Integrate w'' + q(t) g'(u(t)) w = 0 along a frozen base trajectory.

    The base solution enters only through its dense output; the linear system
    is stepped with the same integrator and the same forced step boundaries.
    """
    rtol = base_traj.tolerance_used[0] if rtol is None else rtol
    atol = base_traj.tolerance_used[1] if atol is None else atol
    gp = g.g_prime
    u_of = base_traj.u

    def rhs2(t, y):
        return (y[1], -q_eff(t) * gp(u_of(t)) * y[0])

    edges = [base_traj.t_start] + [
        seg_t1 for (_, seg_t1, _) in base_traj.dense._segments
    ]
    segments, t_nodes, states, _, _, _ = _run_segments(
        rhs2, (w0, w0p), edges, rtol, atol, lambda _: []
    )
    return LinearTrajectory(t_nodes=t_nodes, states=states, dense=_PiecewiseDense(segments))
