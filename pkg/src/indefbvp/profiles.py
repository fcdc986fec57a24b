"""Limit profiles: per-interval positive solutions glued with zeros.

As mu grows, positive solutions localize: they vanish on the negativity
intervals and converge, on each activated positivity interval, to a positive
Dirichlet solution of u'' + h+(t) g(u) = 0 there.  A limit profile selects,
independently per positivity interval, either the zero function or one of
that interval's positive solutions (several can coexist, as for
Moore-Nehari-type interval weights); the all-zero selection is excluded, so
with k_i solutions on the i-th interval there are prod(1 + k_i) - 1 profiles,
reducing to 2^m - 1 when every interval has a unique solution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .errors import MultipleSolutions, NoSolution
from .ivp import DEFAULT_ATOL, DEFAULT_RTOL, Trajectory
from .nonlinearity import Nonlinearity
from .shooting import (
    DEFAULT_EVENT_TOL,
    PositiveSolution,
    ShootingProblem,
    scan_alpha_roots,
    solutions_on_problem,
)
from .weights import WeightFamily, check_arch_weight

__all__ = [
    "ProfilePiece",
    "LimitProfile",
    "interval_solutions",
    "interval_piece_heights",
    "solve_limit_interval",
    "enumerate_profiles",
    "profile_distance",
]


@dataclass(frozen=True, eq=False)
class ProfilePiece:
    """One positive solution of the limit problem on a positivity interval."""

    interval_index: int  # 1-based
    grid: np.ndarray
    values: np.ndarray
    alpha: float
    height: float
    w_b: float
    trajectory: Trajectory


@dataclass(frozen=True, eq=False)
class LimitProfile:
    """Zero outside its active pieces, a limit-problem solution on each.

    ``choices[i-1]`` is 0 when interval i is inactive, else the 1-based index
    of the selected piece; ``label`` concatenates the digits (used for output
    file names).  ``composed`` evaluates the glued profile on [a, b].
    """

    lambda_set: frozenset[int]
    choices: tuple[int, ...]
    pieces: Mapping[int, ProfilePiece]
    piece_alphas: Mapping[int, float]
    composed: Callable
    label: str
    uniqueness: Mapping[int, bool]


def _limit_problem(h: WeightFamily, g: Nonlinearity, i: int) -> ShootingProblem:
    intervals = h.structure.positivity_intervals()
    if not 1 <= i <= len(intervals):
        raise ValueError(f"interval index {i} out of range 1..{len(intervals)}")
    si, ti = intervals[i - 1]
    bps = tuple(p for p in h.all_breakpoints() if si < p < ti)
    return ShootingProblem(q=h.plus, g=g, a=si, b=ti, breakpoints=bps)


def interval_solutions(
    h: WeightFamily,
    g: Nonlinearity,
    i: int,
    *,
    alpha_max: float = 64.0,
    n_scan: int = 512,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    event_tol: float = DEFAULT_EVENT_TOL,
    grid_points: int = 1601,
) -> list[ProfilePiece]:
    """All positive solutions of the limit problem on the i-th positivity interval."""
    prob = _limit_problem(h, g, i)
    alphas = scan_alpha_roots(
        prob, alpha_max=alpha_max, n_scan=n_scan,
        rtol=rtol, atol=atol, event_tol=event_tol,
    )
    sols = solutions_on_problem(
        prob, math.inf, alphas, [(prob.a, prob.b)],
        rtol=rtol, atol=atol, event_tol=event_tol,
    )
    pieces = []
    for s in sols:
        grid = np.linspace(prob.a, prob.b, grid_points)
        values = s.trajectory.dense_eval(grid)[0]
        values = np.maximum(values, 0.0)
        pieces.append(
            ProfilePiece(
                interval_index=i,
                grid=grid,
                values=values,
                alpha=s.alpha,
                height=float(values.max()),
                w_b=s.w_b,
                trajectory=s.trajectory,
            )
        )
    return pieces


@lru_cache(maxsize=32)
def _cached_interval_solutions(h: WeightFamily, g: Nonlinearity) -> tuple[tuple[ProfilePiece, ...], ...]:
    return tuple(
        tuple(interval_solutions(h, g, i))
        for i in range(1, h.structure.m + 1)
    )


def interval_piece_heights(h: WeightFamily, g: Nonlinearity) -> list[list[float]]:
    """Per positivity interval, the heights of its limit-problem solutions."""
    all_pieces = _cached_interval_solutions(h, g)
    heights = [[p.height for p in per] for per in all_pieces]
    if any(not per for per in heights):
        empty = [i + 1 for i, per in enumerate(heights) if not per]
        raise NoSolution(f"limit problem has no positive solution on interval(s) {empty}")
    return heights


def solve_limit_interval(h: WeightFamily, g: Nonlinearity, i: int, **kwargs):
    """The unique positive limit solution on interval i, with its certificate.

    Returns (piece, alpha, uniqueness) where uniqueness is True when the
    sweep found exactly one solution and the interval weight passes the
    symmetric-arch hypotheses (the at-most-one criterion applies).

    Raises
    ------
    NoSolution
        If the sweep finds nothing (unexpected for h+ > 0 with superlinear g).
    MultipleSolutions
        If several solutions coexist; the exception carries all pieces.
    """
    pieces = interval_solutions(h, g, i, **kwargs)
    if not pieces:
        raise NoSolution(f"no positive solution of the limit problem on interval {i}")
    if len(pieces) > 1:
        raise MultipleSolutions(
            f"interval {i} admits {len(pieces)} positive limit solutions", pieces
        )
    piece = pieces[0]
    si, ti = h.structure.positivity_intervals()[i - 1]
    arch_ok = check_arch_weight(h.plus, si, ti).ok
    return piece, piece.alpha, bool(arch_ok)


def _compose(structure, active: dict[int, ProfilePiece], event_tol: float) -> Callable:
    intervals = structure.positivity_intervals()

    def composed(t):
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(ts)
        for i, piece in active.items():
            si, ti = intervals[i - 1]
            mask = (ts >= si) & (ts <= ti)
            if not np.any(mask):
                continue
            vals = np.interp(ts[mask], piece.grid, piece.values)
            out[mask] = np.where(vals > event_tol, vals, 0.0)
        return float(out[0]) if scalar else out

    return composed


def enumerate_profiles(
    h: WeightFamily,
    g: Nonlinearity,
    *,
    event_tol: float = DEFAULT_EVENT_TOL,
    **kwargs,
) -> list[LimitProfile]:
    """All limit profiles: every per-interval selection except all-zero.

    The count is prod over intervals of (1 + #solutions) minus one; the list
    is deterministic (lexicographic in the choice tuple).
    """
    m = h.structure.m
    if kwargs:
        all_pieces = tuple(
            tuple(interval_solutions(h, g, i, **kwargs)) for i in range(1, m + 1)
        )
    else:
        all_pieces = _cached_interval_solutions(h, g)
    uniqueness = {}
    for i in range(1, m + 1):
        si, ti = h.structure.positivity_intervals()[i - 1]
        uniqueness[i] = len(all_pieces[i - 1]) == 1 and check_arch_weight(h.plus, si, ti).ok

    counts = [len(per) for per in all_pieces]
    expected = int(np.prod([1 + k for k in counts])) - 1
    profiles = []
    for choices in itertools.product(*[range(0, k + 1) for k in counts]):
        if all(c == 0 for c in choices):
            continue
        active = {
            i: all_pieces[i - 1][c - 1] for i, c in enumerate(choices, start=1) if c > 0
        }
        profiles.append(
            LimitProfile(
                lambda_set=frozenset(active),
                choices=tuple(choices),
                pieces=dict(active),
                piece_alphas={i: p.alpha for i, p in active.items()},
                composed=_compose(h.structure, active, event_tol),
                label="".join(str(c) for c in choices),
                uniqueness=dict(uniqueness),
            )
        )
    if len(profiles) != expected:
        raise RuntimeError(
            f"profile enumeration mismatch: built {len(profiles)}, expected {expected}"
        )
    return profiles


def profile_distance(sol: PositiveSolution, prof: LimitProfile, n: int = 2049) -> float:
    """Sup-norm distance between a solution and a profile on a shared grid.

    The grid is the union of a uniform grid on [a, b] with every active
    piece's own grid, so the piecewise-linear profile representation carries
    no interpolation error at the comparison points.
    """
    a, b = sol.problem.a, sol.problem.b
    grids = [np.linspace(a, b, n)]
    grids += [p.grid for p in prof.pieces.values()]
    ts = np.unique(np.concatenate(grids))
    u = sol.trajectory.dense_eval(ts)[0]
    return float(np.max(np.abs(u - prof.composed(ts))))
