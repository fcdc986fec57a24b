"""Superlinear nonlinearities g and numerical audits of their growth hypotheses.

Every nonlinearity is extended by g(s) = 0 for s <= 0, so initial value
problems remain well defined after the solution crosses zero (the solution
continues as an affine function there).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidExponent

__all__ = ["Nonlinearity", "make_power", "audit_hypotheses", "HypothesesAudit"]


@dataclass(frozen=True)
class Nonlinearity:
    """A C^1 nonlinearity with its derivative and (optionally) a primitive.

    Attributes
    ----------
    g : callable
        g(s); vanishes identically for s <= 0.
    g_prime : callable
        g'(s); vanishes identically for s <= 0.
    descriptor : str
        Symbolic tag, e.g. ``"power:3"``.
    g_int : callable or None
        Primitive G of g with G(0) = 0, used by the action functional.
        None for custom nonlinearities without a closed form.
    """

    g: Callable
    g_prime: Callable
    descriptor: str = "custom"
    g_int: Callable | None = None


def make_power(p: float) -> Nonlinearity:
    """Build g(s) = s^p (s > 0, else 0) with derivative p s^(p-1).

    Raises
    ------
    InvalidExponent
        If p <= 1 (the superlinear range requires p > 1).
    """
    if not p > 1.0:
        raise InvalidExponent(f"power nonlinearity needs p > 1, got p={p}")
    p = float(p)
    # Clamp far beyond any physical scale so rejected trial steps of the
    # adaptive integrator stay finite during superlinear blow-up.
    cap = 10.0 ** (280.0 / (p + 1.0))

    def g(s):
        if np.ndim(s) == 0:
            s = float(s)
            return min(s, cap) ** p if s > 0.0 else 0.0
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        pos = s > 0.0
        out[pos] = np.minimum(s[pos], cap) ** p
        return out

    def g_prime(s):
        if np.ndim(s) == 0:
            s = float(s)
            return p * min(s, cap) ** (p - 1.0) if s > 0.0 else 0.0
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        pos = s > 0.0
        out[pos] = p * np.minimum(s[pos], cap) ** (p - 1.0)
        return out

    def g_int(s):
        if np.ndim(s) == 0:
            s = float(s)
            return min(s, cap) ** (p + 1.0) / (p + 1.0) if s > 0.0 else 0.0
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        pos = s > 0.0
        out[pos] = np.minimum(s[pos], cap) ** (p + 1.0) / (p + 1.0)
        return out

    return Nonlinearity(g=g, g_prime=g_prime, descriptor=f"power:{p:g}", g_int=g_int)


@dataclass(frozen=True)
class HypothesesAudit:
    """Grid evidence for the growth hypotheses of a nonlinearity.

    ``gs_margin_min`` is min over the grid of g'(s) - g(s)/s (strict
    star-shapedness needs it > 0).  ``ratio_at_0`` and ``ratio_at_inf`` are
    g(s)/s at the smallest and largest grid points; superlinearity needs the
    former near 0 and the latter growing.
    """

    gs_margin_min: float
    ratio_at_0: float
    ratio_mid: float
    ratio_at_inf: float
    positive_ok: bool
    gs_ok: bool
    g0_ok: bool
    ginf_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.positive_ok and self.gs_ok and self.g0_ok and self.ginf_ok


def audit_hypotheses(g: Nonlinearity, s_grid) -> HypothesesAudit:
    """Audit positivity, star-shapedness and the limits of g(s)/s on a grid.

    The audit falsifies, it does not prove: verdicts are grid evidence only,
    and the margins are returned so callers can judge borderline cases.
    """
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or s.size < 3 or np.any(s <= 0.0) or np.any(np.diff(s) <= 0.0):
        raise ValueError("s_grid must be a sorted 1-d grid of positive values")
    gs = np.asarray(g.g(s), dtype=float)
    gps = np.asarray(g.g_prime(s), dtype=float)
    ratio = gs / s
    margin = gps - ratio

    mid = ratio[s.size // 2]
    top = ratio[int(s.size * 0.9):]
    return HypothesesAudit(
        gs_margin_min=float(margin.min()),
        ratio_at_0=float(ratio[0]),
        ratio_mid=float(mid),
        ratio_at_inf=float(ratio[-1]),
        positive_ok=bool(np.all(gs > 0.0)),
        gs_ok=bool(margin.min() > 0.0),
        g0_ok=bool(ratio[0] <= 0.1 * max(mid, np.finfo(float).tiny)),
        ginf_ok=bool(np.all(np.diff(top) > 0.0) and ratio[-1] >= 10.0 * mid),
    )
