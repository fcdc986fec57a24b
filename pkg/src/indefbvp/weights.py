"""Sign-changing weights on [a, b]: detection of the positivity/negativity
layout, the mu-parameterized effective weight, and structural checks.

A weight h partitions [a, b] into m positivity intervals [sigma_i, tau_i]
separated by (possibly degenerate) negativity intervals.  Everything
downstream (shooting, limit profiles, continuation meshes) consumes that
layout through :class:`SignStructure` and :class:`WeightFamily`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AmbiguousStructure, NoSignChange

__all__ = [
    "SignStructure",
    "WeightFamily",
    "ArchReport",
    "ExactnessReport",
    "detect_sign_structure",
    "eval_mu",
    "check_arch_weight",
    "check_exactness_hypotheses",
    "make_weight",
    "weight_from_descriptor",
]

DETECT_TOL = 1e-12
BISECT_XTOL = 1e-13


@dataclass(frozen=True)
class SignStructure:
    """Interleaved points a = tau_0 <= sigma_1 < tau_1 <= ... <= sigma_{m+1} = b.

    ``sigma`` holds (sigma_1, ..., sigma_{m+1}) and ``tau`` holds
    (tau_0, ..., tau_m); the i-th positivity interval is [sigma_i, tau_i]
    and the i-th negativity interval is [tau_i, sigma_{i+1}] (length zero
    allowed, matching the tau_0 = a and sigma_{m+1} = b cases).
    """

    a: float
    b: float
    sigma: tuple[float, ...]
    tau: tuple[float, ...]
    m: int

    def __post_init__(self):
        if self.m < 1 or len(self.sigma) != self.m + 1 or len(self.tau) != self.m + 1:
            raise AmbiguousStructure(
                f"need m >= 1 with len(sigma) = len(tau) = m+1, got m={self.m}"
            )
        if self.tau[0] != self.a or self.sigma[-1] != self.b:
            raise AmbiguousStructure("tau_0 must equal a and sigma_{m+1} must equal b")
        chain_ok = self.a <= self.sigma[0]
        for i in range(self.m):
            chain_ok &= self.sigma[i] < self.tau[i + 1] <= self.sigma[i + 1]
        if not chain_ok:
            raise AmbiguousStructure("sigma/tau points violate interleaving")

    def positivity_intervals(self) -> list[tuple[float, float]]:
        """[(sigma_i, tau_i)] for i = 1..m."""
        return [(self.sigma[i], self.tau[i + 1]) for i in range(self.m)]

    def negativity_intervals(self) -> list[tuple[float, float]]:
        """[(tau_i, sigma_{i+1})] for i = 0..m, degenerate ones included."""
        out = [(self.tau[0], self.sigma[0])]
        out += [(self.tau[i + 1], self.sigma[i + 1]) for i in range(self.m)]
        return out

    def special_points(self) -> tuple[float, ...]:
        """All sigma/tau points, sorted and deduplicated."""
        pts = sorted(set(self.sigma) | set(self.tau))
        return tuple(pts)


@dataclass(frozen=True)
class WeightFamily:
    """An evaluatable weight with its sign structure and declared jump points.

    The effective weight of the parameterized problem is
    q_mu(t) = h+(t) - mu * h-(t) with h+ = max(h, 0), h- = max(-h, 0).
    Instances are immutable and safe to share across concurrent solvers.
    """

    evaluator: Callable
    structure: SignStructure
    descriptor: str = "custom"
    breakpoints: tuple[float, ...] = ()
    is_symmetric_per_plus_interval: bool = False
    is_monotone_half_per_plus_interval: bool = False

    @property
    def a(self) -> float:
        return self.structure.a

    @property
    def b(self) -> float:
        return self.structure.b

    @property
    def properties(self) -> dict:
        return {
            "is_symmetric_per_plus_interval": self.is_symmetric_per_plus_interval,
            "is_monotone_half_per_plus_interval": self.is_monotone_half_per_plus_interval,
        }

    def __call__(self, t):
        return self.evaluator(t)

    def plus(self, t):
        """h+(t) = max(h(t), 0)."""
        return np.maximum(self.evaluator(t), 0.0)

    def minus(self, t):
        """h-(t) = max(-h(t), 0)."""
        return np.maximum(-np.asarray(self.evaluator(t)), 0.0)

    def q_mu(self, mu: float) -> Callable:
        """Effective weight t -> h+(t) - mu*h-(t) as a standalone callable."""
        ev = self.evaluator
        mu = float(mu)

        def q(t):
            h = ev(t)
            if np.ndim(h) == 0:
                h = float(h)
                return h if h >= 0.0 else -mu * (-h)
            h = np.asarray(h, dtype=float)
            return np.maximum(h, 0.0) - mu * np.maximum(-h, 0.0)

        return q

    def all_breakpoints(self) -> tuple[float, ...]:
        """Declared jumps plus sigma/tau points, for forced integrator steps."""
        pts = set(self.breakpoints) | set(self.structure.special_points())
        return tuple(sorted(pts))


def eval_mu(h: WeightFamily, mu: float, t):
    """Pointwise effective weight h+(t) - mu*h-(t)."""
    return h.q_mu(mu)(t)


# ---------------------------------------------------------------------------
# sign structure detection
# ---------------------------------------------------------------------------


def _sample_grid(a: float, b: float, n_samples: int, breakpoints: Sequence[float]) -> np.ndarray:
    ts = np.linspace(a, b, n_samples)
    if breakpoints:
        eps = 1e-9 * (b - a)
        extra = []
        for p in breakpoints:
            if a < p < b:
                extra += [p - eps, p + eps]
        ts = np.unique(np.concatenate([ts, np.asarray(extra)]))
    return ts


def _negativity_edge(h: Callable, lo: float, hi: float, tol: float, xtol: float) -> float:
    """Boundary of {h < -tol} inside [lo, hi] by bisection.

    Works for continuous crossings, jumps and zero plateaus alike; a plateau
    between signs is attributed to the positivity side, so the returned point
    always has strictly negative values on its negative side.
    """
    neg_lo = h(lo) < -tol
    for _ in range(200):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if (h(mid) < -tol) == neg_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def detect_sign_structure(
    h: Callable,
    a: float,
    b: float,
    n_samples: int = 4096,
    tol: float = DETECT_TOL,
    *,
    xtol: float = BISECT_XTOL,
    breakpoints: Sequence[float] = (),
) -> SignStructure:
    """Locate the interleaved sigma/tau points of a sign-changing weight.

    Samples h on a grid (seeded at declared breakpoints so jumps are not
    missed), brackets each sign change, and refines it by bisection to
    ``xtol``.  Zero plateaus are attached to the adjacent positivity
    interval, so h is not identically zero on the negativity side of any
    returned point.

    Raises
    ------
    NoSignChange
        If h never exceeds +tol, never falls below -tol, or does only one
        of the two (constant-sign weight); ``sign`` reports which case.
    AmbiguousStructure
        If the sampled pattern cannot be resolved at this resolution.
    """
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    ts = _sample_grid(a, b, n_samples, breakpoints)
    try:
        vals = np.asarray(h(ts), dtype=float)
        if vals.shape != ts.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.asarray([h(t) for t in ts], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise AmbiguousStructure("weight evaluated to non-finite values")
    signs = np.zeros(ts.size, dtype=int)
    signs[vals > tol] = 1
    signs[vals < -tol] = -1

    has_pos = bool(np.any(signs > 0))
    has_neg = bool(np.any(signs < 0))
    if not (has_pos and has_neg):
        sign = 1 if has_pos else (-1 if has_neg else 0)
        raise NoSignChange(f"weight has constant sign ({sign:+d})", sign=sign)

    # Runs of nonzero sign; zero samples between them form plateaus.
    nz = np.flatnonzero(signs)
    run_signs = [signs[nz[0]]]
    crossings: list[float] = []
    snap = max(10.0 * xtol, 1e-9 * (b - a))
    for j_prev, j_next in zip(nz[:-1], nz[1:]):
        if signs[j_next] == run_signs[-1]:
            continue
        run_signs.append(signs[j_next])
        c = _negativity_edge(h, ts[j_prev], ts[j_next], tol, xtol)
        for p in breakpoints:
            if abs(c - p) <= snap:
                c = float(p)  # a declared breakpoint is the exact crossing
                break
        crossings.append(c)
    if any(x >= y for x, y in zip(crossings[:-1], crossings[1:])):
        raise AmbiguousStructure("refined crossings are not strictly increasing")

    # Assemble sigma/tau; positivity absorbs leading/trailing plateaus.
    sigma: list[float] = []
    tau: list[float] = [a]
    if run_signs[0] > 0:
        sigma.append(a)
    pos = run_signs[0] > 0
    for c in crossings:
        if pos:
            tau.append(c)
        else:
            sigma.append(c)
        pos = not pos
    if pos:
        tau.append(b)
    sigma.append(b)
    m = len(tau) - 1
    return SignStructure(a=a, b=b, sigma=tuple(sigma), tau=tuple(tau), m=m)


# ---------------------------------------------------------------------------
# structural hypotheses: symmetric arch, monotone up to the midpoint
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArchReport:
    """Sampled evidence that q is a symmetric arch on [c, d].

    ``symmetry_defect`` is max |q(t) - q(c+d-t)|; ``monotone_violation`` is
    the worst decrease of q on the left half [c, (c+d)/2].  Both are
    absolute, compared against tol * max(1, sup|q|).
    """

    c: float
    d: float
    nonneg_ok: bool
    symmetric_ok: bool
    symmetry_defect: float
    monotone_ok: bool
    monotone_violation: float

    @property
    def ok(self) -> bool:
        return self.nonneg_ok and self.symmetric_ok and self.monotone_ok


def check_arch_weight(q: Callable, c: float, d: float, tol: float = 1e-8,
                      n: int = 1024) -> ArchReport:
    """Check q >= 0, q(t) = q(c+d-t) and q non-decreasing on [c, (c+d)/2].

    Sampling uses a midpoint grid: it is exactly mirror-invariant and avoids
    the interval endpoints, which may coincide with declared jump points.
    """
    ts = c + (d - c) * (np.arange(1, n + 1) - 0.5) / n
    vals = np.asarray(q(ts), dtype=float)
    scale = max(1.0, float(np.max(np.abs(vals))))
    mirror = np.asarray(q(c + d - ts), dtype=float)
    sym_defect = float(np.max(np.abs(vals - mirror)))
    half = vals[: (n + 1) // 2]
    mono_viol = float(max(0.0, -np.min(np.diff(half), initial=0.0)))
    return ArchReport(
        c=c,
        d=d,
        nonneg_ok=bool(np.min(vals) >= -tol * scale),
        symmetric_ok=sym_defect <= tol * scale,
        symmetry_defect=sym_defect,
        monotone_ok=mono_viol <= tol * scale,
        monotone_violation=mono_viol,
    )


@dataclass(frozen=True)
class ExactnessReport:
    """Per-positivity-interval arch reports and their conjunction."""

    intervals: tuple[ArchReport, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.intervals)


def check_exactness_hypotheses(h: WeightFamily, tol: float = 1e-8,
                               n: int = 1024) -> ExactnessReport:
    """Check that h+ is a symmetric, half-monotone arch on every I_i+."""
    reports = [
        check_arch_weight(h.plus, si, ti, tol=tol, n=n)
        for (si, ti) in h.structure.positivity_intervals()
    ]
    return ExactnessReport(intervals=tuple(reports))


# ---------------------------------------------------------------------------
# built-in weight descriptors
# ---------------------------------------------------------------------------


def make_weight(
    evaluator: Callable,
    a: float,
    b: float,
    descriptor: str = "custom",
    breakpoints: Sequence[float] = (),
    structure: SignStructure | None = None,
    n_samples: int = 4096,
    tol: float = DETECT_TOL,
) -> WeightFamily:
    """Wrap an evaluator into a WeightFamily, detecting the structure if needed."""
    if structure is None:
        structure = detect_sign_structure(
            evaluator, a, b, n_samples=n_samples, tol=tol, breakpoints=breakpoints
        )
    probe = WeightFamily(
        evaluator=evaluator,
        structure=structure,
        descriptor=descriptor,
        breakpoints=tuple(sorted(breakpoints)),
    )
    report = check_exactness_hypotheses(probe)
    return WeightFamily(
        evaluator=evaluator,
        structure=structure,
        descriptor=descriptor,
        breakpoints=tuple(sorted(breakpoints)),
        is_symmetric_per_plus_interval=all(r.symmetric_ok for r in report.intervals),
        is_monotone_half_per_plus_interval=all(r.monotone_ok for r in report.intervals),
    )


def _sin_evaluator(k: int, a: float, b: float) -> Callable:
    scale = k * math.pi / (b - a)

    def h(t):
        return np.sin(scale * (np.asarray(t, dtype=float) - a)) if np.ndim(t) else math.sin(scale * (t - a))

    return h


def _moore_nehari_structure(a: float, b: float) -> SignStructure:
    return SignStructure(a=a, b=b, sigma=(a, b), tau=(a, b), m=1)


def weight_from_descriptor(descriptor: str, a: float = 0.0, b: float = 1.0) -> WeightFamily:
    """Build a WeightFamily from a CLI descriptor string.

    Supported forms::

        sin:<k>            sin(k pi (t-a)/(b-a))
        moore-nehari       (2t-1)^2 on [0,1] (rescaled to [a,b]); non-negative
        h3sols             (t-1/4)^2 on [0,1/2), -sin(4 pi t) on [1/2,1]
        sin3-eps:<eps>     sin(3 pi t/(1-eps)) on [0,1-eps], 0 after
        poly:<json>        piecewise polynomials [[t0,t1,[c0,c1,...]], ...]
                           with ascending coefficients evaluated in t
    """
    descriptor = descriptor.strip()
    name, _, arg = descriptor.partition(":")
    name = name.lower()

    if name == "sin":
        k = int(arg)
        if k < 2:
            raise ValueError("sin:<k> needs k >= 2 to change sign")
        ev = _sin_evaluator(k, a, b)
        zeros = [a + j * (b - a) / k for j in range(1, k)]
        return make_weight(ev, a, b, descriptor=descriptor, breakpoints=zeros)

    if name == "moore-nehari":
        span = b - a

        def ev(t):
            x = (np.asarray(t, dtype=float) - a) / span
            return (2.0 * x - 1.0) ** 2

        return WeightFamily(
            evaluator=ev,
            structure=_moore_nehari_structure(a, b),
            descriptor=descriptor,
            is_symmetric_per_plus_interval=True,
            is_monotone_half_per_plus_interval=False,
        )

    if name == "h3sols":
        if (a, b) != (0.0, 1.0):
            raise ValueError("h3sols is defined on [0, 1]")

        def ev(t):
            t = np.asarray(t, dtype=float)
            left = (t - 0.25) ** 2
            right = -np.sin(4.0 * math.pi * t)
            return np.where(t < 0.5, left, right)

        return make_weight(ev, a, b, descriptor=descriptor, breakpoints=[0.5])

    if name == "sin3-eps":
        eps = float(arg)
        if not 0.0 < eps < 1.0:
            raise ValueError("sin3-eps:<eps> needs 0 < eps < 1")
        if (a, b) != (0.0, 1.0):
            raise ValueError("sin3-eps is defined on [0, 1]")
        cut = 1.0 - eps
        scale = 3.0 * math.pi / cut

        def ev(t):
            t = np.asarray(t, dtype=float)
            return np.where(t <= cut, np.sin(scale * np.minimum(t, cut)), 0.0)

        zeros = [j * cut / 3.0 for j in (1, 2)]
        return make_weight(ev, a, b, descriptor=descriptor, breakpoints=zeros + [cut])

    if name == "poly":
        pieces = json.loads(arg)
        if not pieces:
            raise ValueError("poly descriptor needs at least one piece")
        segs = [(float(t0), float(t1), [float(c) for c in coeffs]) for t0, t1, coeffs in pieces]
        segs.sort(key=lambda s: s[0])

        def ev(t):
            scalar = np.ndim(t) == 0
            t = np.atleast_1d(np.asarray(t, dtype=float))
            out = np.zeros_like(t)
            for t0, t1, coeffs in segs:
                mask = (t >= t0) & (t <= t1) if (t1 == segs[-1][1]) else (t >= t0) & (t < t1)
                acc = np.zeros_like(t[mask])
                for c in reversed(coeffs):
                    acc = acc * t[mask] + c
                out[mask] = acc
            return float(out[0]) if scalar else out

        bps = sorted({s[0] for s in segs} | {s[1] for s in segs})
        bps = [p for p in bps if a < p < b]
        return make_weight(ev, a, b, descriptor=descriptor, breakpoints=bps)

    raise ValueError(f"unknown weight descriptor {descriptor!r}")
