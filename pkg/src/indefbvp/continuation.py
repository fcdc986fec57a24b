"""Branch continuation in mu over a finite-difference collocation mesh.

Solutions are discretized by second-order centered differences on a graded
mesh aligned with the weight's sign-change points (denser near them by a
factor of 4).  A damped Newton corrector drives the collocation residual to
zero; branches in mu are traced by pseudo-arclength continuation with a
secant tangent and a bordered corrector, so folds are traversed.  Each
accepted point records scalar coordinates (initial slope, L2 norm of u'),
the action value, and a marching certificate w_b for the linearization
(its sign change brackets degeneracy, hence folds).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import spsolve

from .errors import NewtonDiverged, SingularJacobian, StepUnderflow
from .nonlinearity import Nonlinearity
from .weights import WeightFamily

__all__ = [
    "DiscreteSolution",
    "BranchPoint",
    "Branch",
    "FoldPoint",
    "make_mesh",
    "residual",
    "newton_correct",
    "march_certificate",
    "branch_coordinates",
    "action",
    "seed_from_profile",
    "trace_branch",
    "detect_folds",
    "cluster_branch_events",
]

DEFAULT_NEWTON_TOL = 1e-10
DEFAULT_FOLD_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class DiscreteSolution:
    """u at mesh nodes (boundary values pinned to zero) at parameter mu."""

    mesh: np.ndarray
    values: np.ndarray
    mu: float

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def _trapz(y: np.ndarray, x: np.ndarray) -> float:
    dx = np.diff(x)
    return float(np.sum(0.5 * dx * (y[1:] + y[:-1])))


def make_mesh(h: WeightFamily, n_interior: int = 800) -> np.ndarray:
    """Graded mesh on [a, b] with sigma/tau and jump points as nodes.

    Within each smooth segment the node density is 4x higher at the segment
    ends than in the middle, resolving the layers that form next to the
    sign-change points at large mu.
    """
    raw = sorted(set(h.all_breakpoints()) | {h.a, h.b})
    total = h.b - h.a
    pts = [raw[0]]
    for p in raw[1:]:
        if p - pts[-1] > 1e-9 * total:
            pts.append(p)
    pts[-1] = h.b
    # normalized grading map: density 1 + 3 (2 xi - 1)^2, CDF inverted on a table
    xi = np.linspace(0.0, 1.0, 513)
    cdf = (xi + 0.5 * ((2.0 * xi - 1.0) ** 3 + 1.0)) / 2.0
    mesh = [pts[0]]
    for c, d in zip(pts[:-1], pts[1:]):
        n_seg = max(8, int(round(n_interior * (d - c) / total)))
        targets = np.arange(1, n_seg + 1) / n_seg
        xs = np.interp(targets, cdf, xi)
        mesh.extend((c + (d - c) * xs).tolist())
    out = np.asarray(mesh)
    out[-1] = h.b
    return out


def _q_nodes(h: WeightFamily, mu: float, mesh: np.ndarray) -> np.ndarray:
    return h.plus(mesh) - mu * h.minus(mesh)


def residual(d: DiscreteSolution, h: WeightFamily, g: Nonlinearity) -> np.ndarray:
    """Centered second-order collocation residual; boundary rows are u(a), u(b)."""
    t, u = d.mesh, d.values
    q = _q_nodes(h, d.mu, t)
    h_l = t[1:-1] - t[:-2]
    h_r = t[2:] - t[1:-1]
    upp = 2.0 * ((u[2:] - u[1:-1]) / h_r - (u[1:-1] - u[:-2]) / h_l) / (h_l + h_r)
    res = np.empty_like(u)
    res[0] = u[0]
    res[-1] = u[-1]
    res[1:-1] = upp + q[1:-1] * g.g(u[1:-1])
    return res


def _jacobian_bands(d: DiscreteSolution, h: WeightFamily, g: Nonlinearity):
    """(sub, diag, sup) diagonals of the tridiagonal collocation Jacobian."""
    t, u = d.mesh, d.values
    q = _q_nodes(h, d.mu, t)
    h_l = t[1:-1] - t[:-2]
    h_r = t[2:] - t[1:-1]
    sub_i = 2.0 / (h_l * (h_l + h_r))
    sup_i = 2.0 / (h_r * (h_l + h_r))
    n = u.size
    sub = np.zeros(n)
    diag = np.ones(n)
    sup = np.zeros(n)
    sub[1:-1] = sub_i
    sup[1:-1] = sup_i
    diag[1:-1] = -(sub_i + sup_i) + q[1:-1] * g.g_prime(u[1:-1])
    return sub, diag, sup


def _residual_floor(d: DiscreteSolution, h: WeightFamily, g: Nonlinearity) -> float:
    """Rounding floor of the raw residual; dominates near mu ~ 1e6 meshes."""
    t, u = d.mesh, d.values
    q = _q_nodes(h, d.mu, t)
    h_l = t[1:-1] - t[:-2]
    h_r = t[2:] - t[1:-1]
    umax = np.maximum.reduce(
        [np.abs(u[:-2]), np.abs(u[1:-1]), np.abs(u[2:])]
    )
    stiff = 4.0 * umax / (h_l * h_r)
    source = np.abs(q[1:-1] * g.g(u[1:-1]))
    return 32.0 * np.finfo(float).eps * float(np.max(stiff + source, initial=0.0))


def _newton_tol_eff(d, h, g, newton_tol: float) -> float:
    return newton_tol * (1.0 + d.sup_norm) + _residual_floor(d, h, g)


def newton_correct(
    d: DiscreteSolution,
    h: WeightFamily,
    g: Nonlinearity,
    newton_tol: float = DEFAULT_NEWTON_TOL,
    max_iter: int = 40,
) -> DiscreteSolution:
    """Damped Newton on the collocation residual at fixed mu.

    Backtracks over damping factors 1, 1/2, ..., 2^-10; converged when the
    max-norm residual falls below newton_tol (1 + sup|u|) plus the rounding
    floor of the stencil.
    """
    cur = DiscreteSolution(d.mesh, d.values.copy(), d.mu)
    res = residual(cur, h, g)
    norm = float(np.max(np.abs(res)))
    for _ in range(max_iter):
        if norm <= _newton_tol_eff(cur, h, g, newton_tol):
            return cur
        sub, diag, sup = _jacobian_bands(cur, h, g)
        ab = np.zeros((3, diag.size))
        ab[0, 1:] = sup[:-1]
        ab[1, :] = diag
        ab[2, :-1] = sub[1:]
        try:
            delta = solve_banded((1, 1), ab, -res)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian("banded solve produced non-finite correction")
        for k in range(11):
            trial = DiscreteSolution(cur.mesh, cur.values + delta * (0.5**k), cur.mu)
            res_t = residual(trial, h, g)
            norm_t = float(np.max(np.abs(res_t)))
            if norm_t < norm or norm_t <= _newton_tol_eff(trial, h, g, newton_tol):
                cur, res, norm = trial, res_t, norm_t
                break
        else:
            raise NewtonDiverged(
                f"no damping factor reduced the residual (norm {norm:.3e}) at mu={cur.mu:.6g}"
            )
    if norm <= _newton_tol_eff(cur, h, g, newton_tol):
        return cur
    raise NewtonDiverged(f"Newton did not converge in {max_iter} iterations at mu={cur.mu:.6g}")


def march_certificate(d: DiscreteSolution, h: WeightFamily, g: Nonlinearity) -> float:
    """w(b) of the discrete linearization with w(a)=0, w'(a)=1, by marching.

    This is the mesh analogue of the shooting certificate: its zero crossing
    along a branch marks degeneracy of the Dirichlet linearization.
    """
    t, u = d.mesh, d.values
    q = _q_nodes(h, d.mu, t)
    coef = q * g.g_prime(u)
    w_prev = 0.0
    w_cur = t[1] - t[0]
    for i in range(1, t.size - 1):
        h_l = t[i] - t[i - 1]
        h_r = t[i + 1] - t[i]
        w_next = w_cur + h_r * ((w_cur - w_prev) / h_l - 0.5 * (h_l + h_r) * coef[i] * w_cur)
        w_prev, w_cur = w_cur, w_next
    return float(w_cur)


def branch_coordinates(d: DiscreteSolution) -> tuple[float, float]:
    """(one-sided u'(a) of order 2, sqrt of trapezoidal int (u')^2)."""
    t, u = d.mesh, d.values
    h0 = t[1] - t[0]
    h1 = t[2] - t[1]
    uprime0 = (
        -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * u[0]
        + (h0 + h1) / (h0 * h1) * u[1]
        - h0 / (h1 * (h0 + h1)) * u[2]
    )
    up = np.gradient(u, t, edge_order=2)
    l2grad = math.sqrt(max(0.0, _trapz(up**2, t)))
    return float(uprime0), l2grad


def action(d: DiscreteSolution, h: WeightFamily, g: Nonlinearity) -> float:
    """Action 1/2 int (u')^2 - int q_mu G(u) on the mesh (trapezoid / P1)."""
    if g.g_int is None:
        raise ValueError("action needs a nonlinearity with a primitive (g_int)")
    t, u = d.mesh, d.values
    du = np.diff(u)
    dt = np.diff(t)
    kinetic = 0.5 * float(np.sum(du * du / dt))
    q = _q_nodes(h, d.mu, t)
    potential = _trapz(q * np.asarray(g.g_int(u)), t)
    return kinetic - potential


@dataclass(frozen=True, eq=False)
class BranchPoint:
    mu: float
    solution: DiscreteSolution
    coord_uprime0: float
    coord_l2gradnorm: float
    action: float
    w_b: float


@dataclass(frozen=True, eq=False)
class FoldPoint:
    """A turning point of mu along a branch, refined to ``resolution`` in mu."""

    mu: float
    solution: DiscreteSolution
    resolution: float
    w_b_before: float
    w_b_after: float


@dataclass(eq=False)
class Branch:
    """Ordered accepted points of one continuation run, plus detected folds."""

    points: list[BranchPoint]
    weight: WeightFamily
    nonlinearity: Nonlinearity
    origin: str | None = None
    end_reason: str = ""
    folds: list[FoldPoint] = field(default_factory=list)

    @property
    def mus(self) -> np.ndarray:
        return np.asarray([p.mu for p in self.points])


def _make_point(d: DiscreteSolution, h, g) -> BranchPoint:
    up0, l2 = branch_coordinates(d)
    return BranchPoint(
        mu=d.mu,
        solution=d,
        coord_uprime0=up0,
        coord_l2gradnorm=l2,
        action=action(d, h, g),
        w_b=march_certificate(d, h, g),
    )


def seed_from_profile(prof, h: WeightFamily, g: Nonlinearity, mu: float,
                      n_interior: int = 800,
                      newton_tol: float = DEFAULT_NEWTON_TOL) -> DiscreteSolution:
    """Interpolate a limit profile onto the mesh and converge it at fixed mu."""
    mesh = make_mesh(h, n_interior=n_interior)
    values = np.asarray(prof.composed(mesh), dtype=float)
    values[0] = 0.0
    values[-1] = 0.0
    return newton_correct(DiscreteSolution(mesh, values, mu), h, g, newton_tol=newton_tol)


# ---------------------------------------------------------------------------
# pseudo-arclength stepping
# ---------------------------------------------------------------------------


def _scales(u: np.ndarray, mu: float) -> tuple[float, float]:
    return max(1.0, float(np.max(np.abs(u)))), max(1.0, abs(mu))


def _tangent(u0, mu0, u1, mu1, u_scale, mu_scale):
    """Unit secant tangent in weighted coordinates, oriented 0 -> 1."""
    rootn = math.sqrt(u0.size)
    du = (u1 - u0) / (u_scale * rootn)
    dmu = (mu1 - mu0) / mu_scale
    norm = math.sqrt(float(du @ du) + dmu * dmu)
    if norm == 0.0:
        raise ValueError("coincident branch points; cannot form a tangent")
    return du / norm, dmu / norm


def _corrector(
    u_pred, mu_pred, v_u, v_mu, u_scale, mu_scale, h, g, mesh,
    newton_tol, max_iter=12,
):
    """Bordered Newton: collocation residual plus arclength constraint."""
    rootn = math.sqrt(u_pred.size)
    c_u = v_u / (u_scale * rootn)
    c_mu = v_mu / mu_scale
    u = u_pred.copy()
    mu = mu_pred
    for it in range(max_iter):
        d = DiscreteSolution(mesh, u, mu)
        res = residual(d, h, g)
        cons = float(c_u @ (u - u_pred)) + c_mu * (mu - mu_pred)
        tol_eff = _newton_tol_eff(d, h, g, newton_tol)
        if float(np.max(np.abs(res))) <= tol_eff and abs(cons) <= 1e-10:
            return d, it
        sub, diag, sup = _jacobian_bands(d, h, g)
        n = u.size
        J = sp.diags([sub[1:], diag, sup[:-1]], offsets=[-1, 0, 1], format="csc")
        dres_dmu = np.zeros(n)
        dres_dmu[1:-1] = -h.minus(mesh[1:-1]) * np.asarray(g.g(u[1:-1]))
        A = sp.bmat(
            [[J, dres_dmu[:, None]], [c_u[None, :], np.array([[c_mu]])]],
            format="csc",
        )
        rhs = -np.concatenate([res, [cons]])
        try:
            delta = spsolve(A, rhs)
        except RuntimeError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian("bordered solve produced non-finite correction")
        u = u + delta[:-1]
        mu = mu + float(delta[-1])
    raise NewtonDiverged("bordered corrector did not converge")


def _arclength_step(u_cur, mu_cur, u_prev, mu_prev, ds, h, g, mesh, newton_tol):
    """One predictor-corrector step of signed weighted arclength ds."""
    u_scale, mu_scale = _scales(u_cur, mu_cur)
    v_u, v_mu = _tangent(u_prev, mu_prev, u_cur, mu_cur, u_scale, mu_scale)
    rootn = math.sqrt(u_cur.size)
    u_pred = u_cur + ds * v_u * u_scale * rootn
    mu_pred = mu_cur + ds * v_mu * mu_scale
    u_pred[0] = 0.0
    u_pred[-1] = 0.0
    return _corrector(u_pred, mu_pred, v_u, v_mu, u_scale, mu_scale,
                      h, g, mesh, newton_tol)


def trace_branch(
    start: DiscreteSolution,
    h: WeightFamily,
    g: Nonlinearity,
    mu_stop: float,
    *,
    ds0: float = 0.05,
    ds_max: float = 0.4,
    ds_min: float = 1e-9,
    max_steps: int = 4000,
    mu_max: float | None = None,
    newton_tol: float = DEFAULT_NEWTON_TOL,
    pos_tol_rel: float = 1e-9,
    origin: str | None = None,
    strict: bool = False,
) -> Branch:
    """Trace the branch through ``start`` toward decreasing mu.

    Secant-tangent predictor, bordered Newton corrector, adaptive step
    (halved on corrector failure or positivity loss, grown by 1.3 after
    three easy successes).  Terminates at mu_stop (the endpoint is corrected
    to land exactly there), at mu_max (branches folding back toward large
    mu; default 1.05 mu_start), at loss of positivity, on step underflow, or
    after max_steps.
    """
    mesh = start.mesh
    d0 = newton_correct(start, h, g, newton_tol=newton_tol)
    mu_max = 1.05 * abs(d0.mu) + 1.0 if mu_max is None else mu_max
    branch = Branch(points=[_make_point(d0, h, g)], weight=h, nonlinearity=g,
                    origin=origin)

    # second point by natural continuation at slightly smaller mu
    ds = ds0
    d1 = None
    while d1 is None and not branch.end_reason:
        step = ds * max(1.0, abs(d0.mu))
        try:
            d1 = newton_correct(
                DiscreteSolution(mesh, d0.values.copy(), d0.mu - step),
                h, g, newton_tol=newton_tol,
            )
        except (NewtonDiverged, SingularJacobian):
            ds *= 0.5
            if ds < ds_min:
                branch.end_reason = "step_underflow"

    if d1 is not None:
        branch.points.append(_make_point(d1, h, g))
        prev, cur = d0, d1
        streak = 0
        ds_floor_deg = max(4.0 * ds_min, 1e-3 * ds0)
        while True:
            if len(branch.points) >= max_steps:
                branch.end_reason = "max_steps"
                break
            if cur.mu <= mu_stop:
                branch.end_reason = "mu_stop"
                break
            if cur.mu >= mu_max and len(branch.points) > 2:
                branch.end_reason = "mu_max"
                break
            # approach degeneracies (w_b -> 0: folds, symmetry breaking) with
            # small steps so the corrector cannot jump across to a crossing
            # branch; the certificate is linear in arclength near the zero
            step = ds
            w0, w1 = branch.points[-2].w_b, branch.points[-1].w_b
            if w0 != w1 and w1 != 0.0 and (w1 > 0.0) == (w0 > 0.0):
                s_to_zero = -w1 / (w1 - w0)  # in units of the last step
                if 0.0 < s_to_zero < 3.0:
                    step = min(ds, max(0.5 * s_to_zero * ds, ds_floor_deg))
            try:
                new, iters = _arclength_step(
                    cur.values, cur.mu, prev.values, prev.mu, step, h, g, mesh,
                    newton_tol,
                )
            except (NewtonDiverged, SingularJacobian):
                ds *= 0.5
                streak = 0
                if ds < ds_min:
                    branch.end_reason = "step_underflow"
                    break
                continue
            if float(np.min(new.values)) < -pos_tol_rel * (1.0 + new.sup_norm):
                ds *= 0.5
                streak = 0
                if ds < ds_min:
                    branch.end_reason = "lost_positivity"
                    break
                continue
            branch.points.append(_make_point(new, h, g))
            prev, cur = cur, new
            if iters <= 3:
                streak += 1
                if streak >= 3:
                    ds = min(ds * 1.3, ds_max)
                    streak = 0
            else:
                streak = 0

        if branch.end_reason == "mu_stop":
            # land exactly on mu_stop; drop the overshoot so the recorded mu
            # sequence stays monotone at the tail (no spurious fold there)
            guess = cur.values.copy()
            while branch.points and branch.points[-1].mu < mu_stop:
                branch.points.pop()
            try:
                final = newton_correct(
                    DiscreteSolution(mesh, guess, mu_stop), h, g,
                    newton_tol=newton_tol,
                )
                branch.points.append(_make_point(final, h, g))
            except (NewtonDiverged, SingularJacobian):
                pass

    branch.folds = detect_folds(branch, newton_tol=newton_tol)
    if strict and branch.end_reason == "step_underflow":
        raise StepUnderflow("arclength step underflow", branch=branch)
    return branch


# ---------------------------------------------------------------------------
# fold detection
# ---------------------------------------------------------------------------


def _weighted_dist(p: BranchPoint, q: BranchPoint) -> float:
    u_scale, mu_scale = _scales(p.solution.values, p.mu)
    rootn = math.sqrt(p.solution.values.size)
    du = (q.solution.values - p.solution.values) / (u_scale * rootn)
    return math.sqrt(float(du @ du) + ((q.mu - p.mu) / mu_scale) ** 2)


def _parabola_vertex(s, mu):
    coef = np.polyfit(s, mu, 2)
    if coef[0] == 0.0:
        return float(s[1]), float(mu[1])
    s_star = -coef[1] / (2.0 * coef[0])
    mu_star = float(np.polyval(coef, s_star))
    return float(s_star), mu_star


def detect_folds(
    branch: Branch,
    fold_tol: float = DEFAULT_FOLD_TOL,
    refine: bool = True,
    newton_tol: float = DEFAULT_NEWTON_TOL,
    max_refine: int = 30,
) -> list[FoldPoint]:
    """Locate sign changes of d mu / d s along the branch and refine them.

    Refinement fits mu as a parabola in arclength through a moving triple of
    corrected points and re-steps toward the vertex until the triple's mu
    spread drops below fold_tol * max(1, |mu_fold|).
    """
    pts = branch.points
    if len(pts) < 3:
        return []
    h, g = branch.weight, branch.nonlinearity
    mus = [p.mu for p in pts]
    folds: list[FoldPoint] = []
    for k in range(1, len(pts) - 1):
        d_prev = mus[k] - mus[k - 1]
        d_next = mus[k + 1] - mus[k]
        if d_prev == 0.0 or d_next == 0.0 or (d_prev > 0.0) == (d_next > 0.0):
            continue
        triple = [pts[k - 1], pts[k], pts[k + 1]]
        mu_star = triple[1].mu
        spread = max(p.mu for p in triple) - min(p.mu for p in triple)
        if refine:
            for _ in range(max_refine):
                gap_l = _weighted_dist(triple[0], triple[1])
                gap_r = _weighted_dist(triple[1], triple[2])
                s = np.array([0.0, gap_l, gap_l + gap_r])
                s_star, mu_star = _parabola_vertex(s, np.array([p.mu for p in triple]))
                spread = max(p.mu for p in triple) - min(p.mu for p in triple)
                if spread <= fold_tol * max(1.0, abs(mu_star)):
                    break
                # step to the vertex when it is well separated from the middle
                # point, otherwise halve the larger gap
                span = gap_l + gap_r
                if (s[0] + 0.1 * gap_l <= s_star <= s[2] - 0.1 * gap_r
                        and abs(s_star - s[1]) > 0.05 * span):
                    ds_loc = s_star - s[1]
                elif gap_r >= gap_l:
                    ds_loc = 0.5 * gap_r
                else:
                    ds_loc = -0.5 * gap_l
                try:
                    new, _ = _arclength_step(
                        triple[1].solution.values, triple[1].mu,
                        triple[0].solution.values, triple[0].mu,
                        ds_loc, h, g, triple[1].solution.mesh, newton_tol,
                    )
                except (NewtonDiverged, SingularJacobian):
                    break
                new_pt = _make_point(new, h, g)
                # keep the consecutive triple (by arclength) straddling the reversal
                anchor = triple[0]
                ordered = sorted(triple + [new_pt],
                                 key=lambda p: _weighted_dist(anchor, p))
                found = None
                for j in range(1, len(ordered) - 1):
                    lo = ordered[j].mu - ordered[j - 1].mu
                    hi = ordered[j + 1].mu - ordered[j].mu
                    if lo != 0.0 and hi != 0.0 and (lo > 0.0) != (hi > 0.0):
                        found = [ordered[j - 1], ordered[j], ordered[j + 1]]
                        break
                if found is None:
                    break
                triple = found
        folds.append(
            FoldPoint(
                mu=float(mu_star),
                solution=triple[1].solution,
                resolution=float(spread),
                w_b_before=triple[0].w_b,
                w_b_after=triple[2].w_b,
            )
        )
    return folds


def cluster_branch_events(branches: Sequence[Branch], tol: float = 1e-4):
    """Group branch endpoints and folds that coincide in (mu, L2 coordinate).

    Distances are relative (scaled by max(1, |mu|) and max(1, coord)).
    Returns a list of clusters, each a list of (branch_index, kind, mu, coord)
    tuples with kind in {"endpoint", "fold"}.
    """
    events = []
    for bi, br in enumerate(branches):
        if br.points:
            last = br.points[-1]
            events.append((bi, "endpoint", last.mu, last.coord_l2gradnorm))
        for f in br.folds:
            up0, l2 = branch_coordinates(f.solution)
            events.append((bi, "fold", f.mu, l2))

    def _close(e1, e2):
        dmu = abs(e1[2] - e2[2]) / max(1.0, abs(e1[2]), abs(e2[2]))
        dco = abs(e1[3] - e2[3]) / max(1.0, abs(e1[3]), abs(e2[3]))
        return math.hypot(dmu, dco) <= tol

    clusters: list[list] = []
    for ev in events:
        for cl in clusters:
            if any(_close(ev, other) for other in cl):
                cl.append(ev)
                break
        else:
            clusters.append([ev])
    return clusters
