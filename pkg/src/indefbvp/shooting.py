"""Shooting for positive Dirichlet solutions at fixed mu.

The shooting map sends the initial slope alpha = u'(a) to the trajectory of
u'' + q(t) g(u) = 0 with u(a) = 0.  Its first zero B(alpha) in (a, b], the
end value u(b; alpha) and the sensitivity w = d u / d alpha (computed from
the variational equation integrated alongside u) drive everything here:
root finding for Dirichlet solutions, their classification by which
positivity intervals carry a large bump, and the linearized-endpoint
certificates for non-degeneracy and for sign tracking on arch weights.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import AmbiguousClassification, ScanTooCoarse
from .ivp import DEFAULT_ATOL, DEFAULT_RTOL, Trajectory, integrate, solve_linearized
from .nonlinearity import Nonlinearity
from .weights import WeightFamily, check_arch_weight

__all__ = [
    "ShootingProblem",
    "ShootingOutcome",
    "PositiveSolution",
    "MoroneyCertificate",
    "problem_from_weight",
    "shoot",
    "scan_alpha_roots",
    "solutions_on_problem",
    "find_all_solutions",
    "classify",
    "nondegeneracy_certificate",
    "moroney_sign_certificate",
    "check_symmetry",
    "ratio_trace",
    "solution_action",
    "nondeg_threshold",
]

DEFAULT_EVENT_TOL = 1e-9
DEFAULT_DEDUP_TOL = 1e-9
SCAN_RTOL = 1e-6
SCAN_ATOL = 1e-9


@dataclass(frozen=True)
class ShootingProblem:
    """u'' + q(t) g(u) = 0 on [a, b] with q smooth between breakpoints."""

    q: Callable
    g: Nonlinearity
    a: float
    b: float
    breakpoints: tuple[float, ...] = ()

    def trajectory(self, alpha: float, rtol: float = DEFAULT_RTOL,
                   atol: float = DEFAULT_ATOL, stop_at_zero: bool = False) -> Trajectory:
        return integrate(
            self.q,
            self.g,
            (0.0, alpha, 0.0, 1.0),
            (self.a, self.b),
            rtol=rtol,
            atol=atol,
            stop_at_zero=stop_at_zero,
            breakpoints=self.breakpoints,
        )


def problem_from_weight(h: WeightFamily, g: Nonlinearity, mu: float) -> ShootingProblem:
    """Shooting problem for the effective weight q_mu = h+ - mu h-."""
    return ShootingProblem(
        q=h.q_mu(mu), g=g, a=h.a, b=h.b, breakpoints=h.all_breakpoints()
    )


@dataclass(frozen=True, eq=False)
class ShootingOutcome:
    """End data of one shot: first zero, end values and their alpha-derivatives.

    ``dBdalpha`` is -w(B)/u'(B) with both factors read off the same
    trajectory; it is None when u has no zero in (a, b].  For escaped shots
    (superlinear blow-up before b) ``u_b`` is +inf.
    """

    alpha: float
    B: float | None
    u_b: float
    dudalpha_b: float
    dBdalpha: float | None
    trajectory: Trajectory


def _outcome(prob: ShootingProblem, alpha: float, rtol: float, atol: float) -> ShootingOutcome:
    traj = prob.trajectory(alpha, rtol=rtol, atol=atol, stop_at_zero=False)
    if traj.escaped:
        return ShootingOutcome(
            alpha=alpha, B=None, u_b=math.inf, dudalpha_b=math.nan,
            dBdalpha=None, trajectory=traj,
        )
    u_b = float(traj.states[-1, 0])
    w_b = float(traj.states[-1, 2])
    B = traj.first_zero
    dBdalpha = None
    if B is not None:
        uB, upB, wB, _ = traj.dense_eval(B)
        dBdalpha = float(-wB / upB)
    return ShootingOutcome(
        alpha=alpha, B=B, u_b=u_b, dudalpha_b=w_b, dBdalpha=dBdalpha, trajectory=traj
    )


def shoot(h: WeightFamily, g: Nonlinearity, mu: float, alpha: float,
          rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> ShootingOutcome:
    """Shoot with slope alpha at fixed mu and report the outcome."""
    if not alpha > 0.0:
        raise ValueError("shooting slope alpha must be positive")
    return _outcome(problem_from_weight(h, g, mu), alpha, rtol, atol)


# ---------------------------------------------------------------------------
# alpha sweep
# ---------------------------------------------------------------------------


def _residual(prob: ShootingProblem, alpha: float, rtol: float, atol: float):
    """rho(alpha) = u(b; alpha) with affine continuation below zero.

    rho < 0 iff the first zero precedes b, so simple Dirichlet solutions are
    simple sign changes of rho.  Returns (rho, d rho/d alpha, sup|u|); an
    escaped shot (blow-up before b) reports rho = +inf.
    """
    traj = prob.trajectory(alpha, rtol=rtol, atol=atol, stop_at_zero=False)
    if traj.escaped:
        return math.inf, math.nan, float(np.max(traj.states[:, 0]))
    return (
        float(traj.states[-1, 0]),
        float(traj.states[-1, 2]),
        float(np.max(np.abs(traj.states[:, 0]))),
    )


@dataclass(frozen=True)
class _Sample:
    """One scan evaluation of rho plus its structural fingerprint.

    ``t_struct`` is the escape time for blow-up shots, the first zero of u
    for crossed shots, and None for shots that stay positive through b.  It
    varies continuously within one qualitative regime and jumps across
    hidden blow-up windows or surviving valleys, so a jump between adjacent
    samples flags a cell that needs probing.
    """

    alpha: float
    rho: float
    drho: float
    escaped: bool
    t_struct: float | None


def _dip_may_cross(s0: _Sample, s1: _Sample) -> bool:
    """Can rho dip through zero between same-sign finite endpoints?

    Uses the parabola matching (rho0, drho0, rho1); subdivision is warranted
    when the endpoint derivatives disagree in sign (interior extremum) and
    the model vertex reaches the opposite sign.
    """
    f0, d0, f1, d1 = s0.rho, s0.drho, s1.rho, s1.drho
    if not (math.isfinite(d0) and math.isfinite(d1)):
        return False
    if d0 * d1 >= 0.0:
        return False
    w = s1.alpha - s0.alpha
    c = (f1 - f0 - d0 * w) / (w * w)
    if c == 0.0:
        return False
    vertex = f0 - d0 * d0 / (4.0 * c)
    margin = 0.25 * min(abs(f0), abs(f1))
    return (vertex - margin <= 0.0) if f0 > 0.0 else (vertex + margin >= 0.0)


def _refine_root(prob, lo, hi, f_lo, f_hi, rtol, atol, event_tol):
    """Bisection seeded, Newton accelerated root of rho in a sign bracket.

    Returns None when the bracket does not converge to a small residual:
    that happens at escape-window boundaries, where rho flips sign through
    infinity without a zero.
    """
    x, fx, dfx, sup_u = hi, f_hi, math.nan, 1.0
    for _ in range(80):
        newton_ok = math.isfinite(dfx) and dfx != 0.0
        if newton_ok:
            x_new = x - fx / dfx
            if not (lo < x_new < hi):
                x_new = 0.5 * (lo + hi)
        else:
            x_new = 0.5 * (lo + hi)
        x = x_new
        fx, dfx, sup_u = _residual(prob, x, rtol, atol)
        if not math.isfinite(fx):
            fx, dfx = math.inf, math.nan
        if (fx > 0.0) == (f_lo > 0.0):
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
        if abs(fx) <= event_tol * (1.0 + sup_u) or (hi - lo) <= 1e-14 * hi:
            break
    if abs(fx) <= max(event_tol * (1.0 + sup_u), 1e3 * rtol * (1.0 + sup_u)):
        return x
    return None


def scan_alpha_roots(
    prob: ShootingProblem,
    alpha_max: float = 64.0,
    n_scan: int = 512,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    event_tol: float = DEFAULT_EVENT_TOL,
    dedup_tol: float = DEFAULT_DEDUP_TOL,
    width_floor_rel: float = 1e-11,
    expand_until_t: float | None = None,
) -> list[float]:
    """All shooting slopes alpha with u(b; alpha) = 0, by log-uniform sweep.

    The sweep evaluates rho at relaxed tolerances and refines every sign
    bracket at the configured tolerances (bisection seeded Newton on the
    variational derivative).  Cells without a sign change are probed further
    when structure may hide inside:

    * an interior extremum of rho whose parabola model reaches zero
      (near-coincident root pairs),
    * a blow-up window boundary (finite | escaped cell): solution slopes pin
      close to these boundaries as mu grows, so boundaries are drilled down
      to a relative width floor,
    * a jump of the escape time between two escaped endpoints (a surviving
      valley hidden inside a blow-up window).

    alpha_max is doubled (capped) until the trajectory's first zero has
    retreated to ``expand_until_t`` (default the first quarter of the span):
    for superlinear g the first zero moves toward a as alpha grows, so every
    solution slope lies below that point.  Stopping merely at the first
    vanishing trajectory could land between solutions.
    """
    if n_scan < 256:
        raise ValueError("n_scan must be at least 256")
    scan_rtol = max(rtol, SCAN_RTOL)
    scan_atol = max(atol, SCAN_ATOL)
    span = prob.b - prob.a
    done_t = (prob.a + 0.25 * span) if expand_until_t is None else expand_until_t

    def sample(alpha: float) -> _Sample:
        traj = prob.trajectory(alpha, rtol=scan_rtol, atol=scan_atol)
        if traj.escaped:
            return _Sample(alpha, math.inf, math.nan, True, traj.t_end)
        return _Sample(alpha, float(traj.states[-1, 0]),
                       float(traj.states[-1, 2]), False, traj.first_zero)

    def beyond_all_roots(s: _Sample) -> bool:
        return (not s.escaped) and s.t_struct is not None and s.t_struct <= done_t

    a_hi = float(alpha_max)
    s_hi = sample(a_hi)
    doublings = 0
    while not beyond_all_roots(s_hi) and doublings < 24:
        a_hi *= 2.0
        doublings += 1
        s_hi = sample(a_hi)

    a_lo = a_hi * 1e-8
    s_lo = sample(a_lo)
    lowerings = 0
    while s_lo.rho <= 0.0 and lowerings < 8:
        a_lo /= 16.0
        lowerings += 1
        s_lo = sample(a_lo)

    grid = np.geomspace(a_lo, a_hi, int(n_scan))
    samples = [s_lo if j == 0 else (s_hi if j == n_scan - 1 else sample(float(a)))
               for j, a in enumerate(grid)]

    t_jump = 0.05 * span
    budget = [40 * int(n_scan)]
    roots: list[float] = []

    def needs_probe(s0: _Sample, s1: _Sample, depth: int) -> bool:
        if s0.escaped != s1.escaped:
            return True  # blow-up window boundary: drill to the width floor
        if s0.t_struct is not None and s1.t_struct is not None:
            if abs(s0.t_struct - s1.t_struct) > t_jump:
                return True  # escape time / first zero jumped: hidden regime
        return depth > 0 and _dip_may_cross(s0, s1)

    stack: list[tuple[_Sample, _Sample, int]] = [
        (s0, s1, 24) for s0, s1 in zip(samples[:-1], samples[1:])
    ]
    while stack:
        s0, s1, depth = stack.pop()
        if s0.rho == 0.0:
            roots.append(s0.alpha)
            continue
        refine_failed = False
        if not (s0.escaped or s1.escaped) and (s0.rho > 0.0) != (s1.rho > 0.0):
            root = _refine_root(prob, s0.alpha, s1.alpha, s0.rho, s1.rho,
                                rtol, atol, event_tol)
            if root is not None:
                roots.append(root)
                continue
            # an escape window inside the bracket defeated the refinement;
            # subdivide to separate it from the true crossings
            refine_failed = True
        if s1.alpha - s0.alpha <= width_floor_rel * s1.alpha:
            continue
        if budget[0] <= 0 or not (refine_failed or needs_probe(s0, s1, depth)):
            continue
        budget[0] -= 1
        sm = sample(math.sqrt(s0.alpha * s1.alpha))
        stack.append((s0, sm, depth - 1))
        stack.append((sm, s1, depth - 1))
    if samples[-1].rho == 0.0:
        roots.append(samples[-1].alpha)
    if budget[0] <= 0:
        warnings.warn(
            "alpha sweep probing budget exhausted; the root set may be "
            "incomplete (increase n_scan)",
            ScanTooCoarse,
        )

    roots.sort()
    deduped: list[float] = []
    merged = False
    for r in roots:
        if not deduped or abs(r - deduped[-1]) > dedup_tol * abs(r):
            deduped.append(r)
        elif abs(r - deduped[-1]) > 1e-11 * abs(r):
            merged = True  # distinct brackets collapsed onto one root
    if merged:
        warnings.warn(
            "adjacent scan brackets refined to the same root; "
            "increase n_scan to resolve near-coincident slopes",
            ScanTooCoarse,
        )
    return deduped


# ---------------------------------------------------------------------------
# positive solutions and their classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PositiveSolution:
    """A converged positive Dirichlet solution at fixed mu.

    ``interval_maxima`` lists max u over each positivity interval;
    ``lambda_set`` is the set of interval indices (1-based) where that
    maximum exceeds the classification threshold r.  ``w_b`` is the
    linearized end value for w(a)=0, w'(a)=1: non-degeneracy holds when
    |w_b| exceeds :func:`nondeg_threshold`.
    """

    mu: float
    alpha: float
    trajectory: Trajectory
    interval_maxima: tuple[float, ...]
    lambda_set: frozenset[int]
    w_b: float
    action: float
    sup_norm: float
    problem: ShootingProblem

    def u(self, t):
        return self.trajectory.u(t)


def nondeg_threshold(sol: PositiveSolution) -> float:
    """Scale-aware threshold for |w(b)|: 1e-6 (1 + |w'(b)| (b - a))."""
    wpb = float(sol.trajectory.states[-1, 3])
    return 1e-6 * (1.0 + abs(wpb) * (sol.problem.b - sol.problem.a))


def solution_action(sol_or_traj, prob: ShootingProblem, n: int = 4097) -> float:
    """Action 1/2 int (u')^2 - int q G(u) by Simpson quadrature on [a, b].

    The grid is uniform, hence reflection symmetric: mirror-image solutions
    receive identical quadrature bias and their actions compare exactly.
    """
    traj = sol_or_traj.trajectory if isinstance(sol_or_traj, PositiveSolution) else sol_or_traj
    if prob.g.g_int is None:
        return math.nan
    ts = np.linspace(prob.a, prob.b, n)
    state = traj.dense_eval(ts)
    u, up = state[0], state[1]
    q = np.asarray(prob.q(ts), dtype=float)
    integrand = 0.5 * up**2 - q * prob.g.g_int(u)
    return float(simpson(integrand, x=ts))


def _interval_maxima(traj: Trajectory, intervals, n: int = 2049) -> tuple[float, ...]:
    out = []
    for c, d in intervals:
        ts = np.linspace(c, d, n)
        out.append(float(np.max(traj.dense_eval(ts)[0])))
    return tuple(out)


def classify(sol: PositiveSolution, r, R: float,
             margin=None) -> frozenset[int]:
    """Indices i with max u over the i-th positivity interval above r.

    ``r`` may be a scalar or one threshold per positivity interval.  Raises
    AmbiguousClassification when a maximum falls within ``margin`` of its
    threshold (classification would be unstable), when a maximum reaches R,
    or when every maximum is small (a positive solution small on all
    positivity intervals contradicts the classification premise).
    """
    maxima = sol.interval_maxima
    rs = np.broadcast_to(np.asarray(r, dtype=float), (len(maxima),))
    if not np.all(rs < R):
        raise ValueError("need r < R")
    margins = 0.05 * rs if margin is None else np.broadcast_to(
        np.asarray(margin, dtype=float), (len(maxima),)
    )
    for i, (mx, ri, mi) in enumerate(zip(maxima, rs, margins), start=1):
        if ri - mi <= mx <= ri + mi:
            raise AmbiguousClassification(
                f"interval {i} maximum {mx:.6g} lies within {mi:.3g} of r={ri:.6g}"
            )
        if mx >= R:
            raise AmbiguousClassification(
                f"interval {i} maximum {mx:.6g} exceeds the a-priori bound R={R:.6g}"
            )
    lam = frozenset(
        i for i, (mx, ri) in enumerate(zip(maxima, rs), start=1) if mx > ri
    )
    if not lam:
        raise AmbiguousClassification(
            "all interval maxima are below r; only the zero solution is that small"
        )
    return lam


@lru_cache(maxsize=32)
def _classification_r(h: WeightFamily, g: Nonlinearity) -> float:
    """r tied to the problem's own scale: 10% of the lowest profile height."""
    from .profiles import interval_piece_heights  # deferred: profiles uses this module

    heights = interval_piece_heights(h, g)
    flat = [hh for per_interval in heights for hh in per_interval]
    return 0.1 * min(flat)


def _gap_split(maxima: Sequence[float], min_ratio: float) -> float | None:
    """Geometric-mean split at the largest gap of a sorted positive sample."""
    vals = sorted(m for m in maxima if m > 0.0)
    if len(vals) < 2:
        return None
    ratios = [b / a for a, b in zip(vals[:-1], vals[1:])]
    k = int(np.argmax(ratios))
    if ratios[k] < min_ratio:
        return None
    return math.sqrt(vals[k] * vals[k + 1])


def _auto_r(sols: Sequence[PositiveSolution], h: WeightFamily, g: Nonlinearity) -> float:
    """Small/large threshold from the solutions' own maxima when bimodal.

    At moderate mu the small bumps have not yet shrunk below 10% of the
    profile height, so the fixed profile-based r would cut through them.
    The observed interval maxima are bimodal long before that: split at the
    largest geometric gap when it exceeds a factor 4, else fall back to the
    profile rule.
    """
    split = _gap_split([m for s in sols for m in s.interval_maxima], 4.0)
    return split if split is not None else _classification_r(h, g)


def _auto_r_per_interval(sols: Sequence[PositiveSolution], h: WeightFamily,
                         g: Nonlinearity) -> list[float]:
    """Per-interval thresholds for mu where no global split exists.

    Each interval's maxima are split at their own largest gap (>= 2.5x),
    capped at 35% of the interval's smallest profile height so coexisting
    profiles of different heights (Moore-Nehari-type intervals) are never
    separated into active/inactive.
    """
    from .profiles import interval_piece_heights

    heights = interval_piece_heights(h, g)
    m = len(heights)
    out = []
    for i in range(m):
        cap = 0.35 * min(heights[i])
        split = _gap_split([s.interval_maxima[i] for s in sols], 2.5)
        out.append(min(split, cap) if split is not None else cap)
    return out


def solutions_on_problem(
    prob: ShootingProblem,
    mu: float,
    alphas: Sequence[float],
    intervals,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    event_tol: float = DEFAULT_EVENT_TOL,
) -> list[PositiveSolution]:
    """Materialize PositiveSolution records for converged slopes."""
    sols = []
    for alpha in alphas:
        traj = prob.trajectory(alpha, rtol=rtol, atol=atol, stop_at_zero=False)
        ts = np.linspace(prob.a, prob.b, 4097)[1:-1]
        u_vals = traj.dense_eval(ts)[0]
        sup_norm = float(np.max(np.abs(u_vals)))
        if float(np.min(u_vals)) <= -event_tol * (1.0 + sup_norm):
            continue  # signed root of rho, not a positive solution
        sols.append(
            PositiveSolution(
                mu=mu,
                alpha=alpha,
                trajectory=traj,
                interval_maxima=_interval_maxima(traj, intervals),
                lambda_set=frozenset(),
                w_b=float(traj.states[-1, 2]),
                action=solution_action(traj, prob),
                sup_norm=sup_norm,
                problem=prob,
            )
        )
    return sols


def find_all_solutions(
    h: WeightFamily,
    g: Nonlinearity,
    mu: float,
    alpha_max: float = 64.0,
    n_scan: int = 512,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    event_tol: float = DEFAULT_EVENT_TOL,
    dedup_tol: float = DEFAULT_DEDUP_TOL,
    r: float | None = None,
    classify_solutions: bool = True,
) -> list[PositiveSolution]:
    """All positive Dirichlet solutions at fixed mu, sorted by alpha.

    Runs the alpha sweep, refines every bracket, keeps the positive
    trajectories and attaches classification (lambda set against r, with
    R = 2 (1 + largest sup norm)) plus the linearized end value w_b.
    When r is None it defaults to 10% of the smallest limit-profile height,
    tying the small/large split to the problem's own scales.
    """
    prob = problem_from_weight(h, g, mu)
    intervals = h.structure.positivity_intervals()
    s1, t1 = intervals[0]
    alphas = scan_alpha_roots(
        prob, alpha_max=alpha_max, n_scan=n_scan,
        rtol=rtol, atol=atol, event_tol=event_tol, dedup_tol=dedup_tol,
        expand_until_t=0.5 * (s1 + t1),
    )
    sols = solutions_on_problem(
        prob, mu, alphas, intervals, rtol=rtol, atol=atol, event_tol=event_tol
    )
    if not sols or not classify_solutions:
        return sols
    R = 2.0 * (1.0 + max(s.sup_norm for s in sols))
    if r is not None:
        return [replace(s, lambda_set=classify(s, r, R)) for s in sols]
    try:
        return [replace(s, lambda_set=classify(s, _auto_r(sols, h, g), R))
                for s in sols]
    except AmbiguousClassification:
        pass
    try:
        r_vec = _auto_r_per_interval(sols, h, g)
        return [replace(s, lambda_set=classify(s, r_vec, R)) for s in sols]
    except AmbiguousClassification:
        # moderate mu: bumps still mid-flight between 0 and profile height;
        # classify by the nearest limit profile instead of a threshold
        return _match_profiles_lambda(sols, h, g)


def _match_profiles_lambda(sols: list[PositiveSolution], h: WeightFamily,
                           g: Nonlinearity) -> list[PositiveSolution]:
    from .profiles import enumerate_profiles, profile_distance

    profs = enumerate_profiles(h, g)
    out = []
    for s in sols:
        dists = sorted(
            (profile_distance(s, p), p.lambda_set) for p in profs
        )
        if len(dists) > 1:
            d1, d2 = dists[0][0], dists[1][0]
            if d2 - d1 <= 0.05 * max(d1, 0.01 * s.sup_norm):
                raise AmbiguousClassification(
                    f"solution alpha={s.alpha:.8g} is equally close to two "
                    f"limit profiles (distances {d1:.4g}, {d2:.4g})"
                )
        out.append(replace(s, lambda_set=dists[0][1]))
    return out


# ---------------------------------------------------------------------------
# certificates and diagnostics
# ---------------------------------------------------------------------------


def nondegeneracy_certificate(sol: PositiveSolution, rtol: float | None = None,
                              atol: float | None = None) -> float:
    """w(b) of the linearized equation along sol with w(a)=0, w'(a)=1.

    A nonzero value certifies that the Dirichlet linearization at sol has
    only the trivial solution.  Integrated independently of the augmented
    system (fresh linear solve along the frozen base trajectory).
    """
    lin = solve_linearized(sol.problem.q, sol.problem.g, sol.trajectory,
                           0.0, 1.0, rtol=rtol, atol=atol)
    return float(lin.states[-1, 0])


@dataclass(frozen=True)
class MoroneyCertificate:
    """Endpoint signs of a linearized solution on a symmetric arch interval.

    For a positive Dirichlet solution on an interval whose weight is
    non-negative, symmetric and non-decreasing up to the midpoint, any
    nontrivial linearized solution with w(c) >= 0, w'(c) >= 0 must end with
    w(d) < 0 and w'(d) < 0.  ``margin`` reports the realized value
    -max(w(d), w'(d)) / (w(c) + w'(c)).
    """

    w_end: float
    wp_end: float
    hypotheses_ok: bool
    passed: bool
    margin: float


def moroney_sign_certificate(
    sol: PositiveSolution,
    w0: float,
    w0p: float,
    *,
    rtol: float | None = None,
    atol: float | None = None,
    hypotheses_tol: float = 1e-8,
) -> MoroneyCertificate:
    """Linearized endpoint signs along a positive arch solution.

    The weight hypotheses are re-checked on the solution's own interval;
    when they fail the end values are still returned but the certificate is
    not asserted (``hypotheses_ok`` False, ``passed`` False).
    """
    if w0 < 0.0 or w0p < 0.0 or (w0 == 0.0 and w0p == 0.0):
        raise ValueError("initial data must be nonnegative and not both zero")
    prob = sol.problem
    report = check_arch_weight(prob.q, prob.a, prob.b, tol=hypotheses_tol)
    lin = solve_linearized(prob.q, prob.g, sol.trajectory, w0, w0p,
                           rtol=rtol, atol=atol)
    w_end = float(lin.states[-1, 0])
    wp_end = float(lin.states[-1, 1])
    return MoroneyCertificate(
        w_end=w_end,
        wp_end=wp_end,
        hypotheses_ok=report.ok,
        passed=bool(report.ok and w_end < 0.0 and wp_end < 0.0),
        margin=-max(w_end, wp_end) / (w0 + w0p),
    )


def check_symmetry(sol: PositiveSolution, n: int = 2049) -> float:
    """Asymmetry defect max |u(t) - u(a+b-t)| on a mirror-invariant grid."""
    a, b = sol.problem.a, sol.problem.b
    ts = np.linspace(a, b, n)
    u = sol.trajectory.dense_eval(ts)[0]
    return float(np.max(np.abs(u - u[::-1])))


def ratio_trace(w_traj, n: int = 2048, ratio_floor: float = 1e-6):
    """Diagnostic ratio r = w / w' where |w'| is above a relative floor.

    Accepts an augmented Trajectory (w components) or a LinearTrajectory.
    Returns (t, r) arrays restricted to the points where r is defined.
    """
    ts = np.linspace(w_traj.t_start, w_traj.t_end, n)
    w = w_traj.w(ts)
    wp = w_traj.dw(ts)
    floor = ratio_floor * max(1.0, float(np.max(np.abs(wp))))
    mask = np.abs(wp) > floor
    return ts[mask], w[mask] / wp[mask]
