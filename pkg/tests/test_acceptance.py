"""Acceptance criteria: one test per criterion, at the stated tolerances.

Each test prints a single pass/fail line (visible with pytest -s or in the
captured output of a failing run).
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

import indefbvp as ib
from indefbvp.cli import arch_corpus
from indefbvp.continuation import (
    cluster_branch_events,
    seed_from_profile,
    trace_branch,
)
from indefbvp.profiles import enumerate_profiles, profile_distance
from indefbvp.shooting import (
    ShootingProblem,
    moroney_sign_certificate,
    nondeg_threshold,
    problem_from_weight,
    scan_alpha_roots,
    solutions_on_problem,
)


def _report(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def test_criterion_01_exact_counts(g3):
    cases = [("sin:3", (8.0, 20.0, 50.0), 3),
             ("sin:5", (8.0, 20.0), 7),
             ("sin:4", (8.0, 20.0), 3)]
    details = []
    ok = True
    for desc, mus, expected in cases:
        h = ib.weight_from_descriptor(desc)
        for mu in mus:
            t0 = time.time()
            base = ib.find_all_solutions(h, g3, mu)
            t_base = time.time() - t0
            t0 = time.time()
            dense = ib.find_all_solutions(h, g3, mu, n_scan=2048,
                                          classify_solutions=False)
            t_dense = time.time() - t0
            t0 = time.time()
            tight = ib.find_all_solutions(h, g3, mu, rtol=1e-11, atol=1e-13,
                                          classify_solutions=False)
            t_tight = time.time() - t0
            counts = (len(base), len(dense), len(tight))
            case_ok = counts == (expected,) * 3
            case_ok &= max(t_base, t_dense, t_tight) < 60.0
            ok &= case_ok
            details.append(
                f"{desc}@mu={mu:g}: counts {counts} expect {expected} "
                f"[{t_base:.0f}/{t_dense:.0f}/{t_tight:.0f}s]"
            )
    _report(1, "exact counts, scan and tolerance stable", ok, "; ".join(details))


def test_criterion_02_sin3_fold_location(h_sin3, g3, sin3_profiles):
    t0 = time.time()
    branches = []
    for p in sin3_profiles:
        seed = seed_from_profile(p, h_sin3, g3, 1e6)
        branches.append(trace_branch(seed, h_sin3, g3, mu_stop=-3.0, origin=p.label))
    elapsed = time.time() - t0
    events = [(br.origin, f.mu) for br in branches for f in br.folds]
    events += [(br.origin, br.points[-1].mu) for br in branches
               if br.end_reason in ("step_underflow", "lost_positivity")]
    near = [mu for _, mu in events if abs(mu - (-0.21)) <= 0.05]
    clusters = cluster_branch_events(branches, tol=5e-3)
    clustered = any(
        len(cl) >= 2 and all(abs(e[2] - (-0.21)) <= 0.05 for e in cl)
        for cl in clusters
    )
    ok = len(near) >= 2 and clustered and elapsed < 300.0
    _report(2, "three branches meet at mu = -0.21 +/- 0.05", ok,
            f"events near -0.21: {[f'{mu:.4f}' for _, mu in events]}, "
            f"clustered={clustered}, {elapsed:.0f}s")


def test_criterion_03_moore_nehari(h_mne, g3):
    t0 = time.time()
    sols = ib.find_all_solutions(h_mne, g3, 0.0)
    elapsed = time.time() - t0
    certs = [(abs(s.w_b), nondeg_threshold(s)) for s in sols]
    ok = (len(sols) == 3
          and all(w > thr for w, thr in certs)
          and elapsed < 30.0)
    _report(3, "Moore-Nehari-type weight: 3 nondegenerate solutions", ok,
            f"count={len(sols)}, |w(b)| vs threshold: "
            + ", ".join(f"{w:.3g}>{t:.2g}" for w, t in certs)
            + f", {elapsed:.0f}s")


def test_criterion_04_seven_branches(h_h3sols, g3):
    t0 = time.time()
    profs = enumerate_profiles(h_h3sols, g3)
    branches = []
    for p in profs:
        seed = seed_from_profile(p, h_h3sols, g3, 1e6)
        branches.append(trace_branch(seed, h_h3sols, g3, mu_stop=-1.0,
                                     origin=p.label))
    elapsed = time.time() - t0
    fold_mus = sorted(f.mu for br in branches for f in br.folds)
    high = [mu for mu in fold_mus if 2.4e4 <= mu <= 2.8e4]
    low = [mu for mu in fold_mus if 0.4 <= mu <= 0.8]
    survivors = [br for br in branches
                 if br.end_reason == "mu_stop" and br.points[-1].mu <= -1.0 + 1e-6]
    ok = (len(profs) == 7 and len(branches) == 7
          and len(high) == 4 and len(low) == 2 and len(survivors) == 1
          and elapsed < 1800.0)
    _report(4, "seven branches with folds at ~26250 and ~0.56", ok,
            f"profiles={len(profs)}, folds high={[f'{m:.0f}' for m in high]}, "
            f"low={[f'{m:.3f}' for m in low]}, survivors={len(survivors)}, "
            f"{elapsed:.0f}s")


def test_criterion_05_profile_convergence(h_sin3, g3, sin3_profiles):
    t0 = time.time()
    dists = {}
    for mu in (1e3, 1e4):
        sols = ib.find_all_solutions(h_sin3, g3, mu)
        assert len(sols) == 3
        for s in sols:
            ranked = sorted((profile_distance(s, p), p.lambda_set)
                            for p in sin3_profiles)
            d_best, lam_best = ranked[0]
            dists[(mu, frozenset(s.lambda_set))] = (d_best, lam_best)
    elapsed = time.time() - t0
    ok = True
    lines = []
    for lam in (frozenset({1}), frozenset({2}), frozenset({1, 2})):
        d_lo, match_lo = dists[(1e3, lam)]
        d_hi, match_hi = dists[(1e4, lam)]
        ok &= match_lo == lam and match_hi == lam and d_hi < d_lo
        lines.append(f"lam={sorted(lam)}: {d_lo:.4f} -> {d_hi:.4f}")
    ok &= elapsed < 120.0
    _report(5, "limit-profile distances decrease from mu=1e3 to 1e4", ok,
            "; ".join(lines) + f", {elapsed:.0f}s")


def test_criterion_06_variational_fidelity(g3):
    t0 = time.time()
    rng = np.random.default_rng(1234)
    corpus = [("sin:3", 8.0), ("sin:3", 0.5), ("sin:4", 8.0), ("sin:5", 3.0),
              ("sin:5", 8.0), ("moore-nehari", 0.0), ("h3sols", 5.0),
              ("sin3-eps:0.1", 5.0)]
    problems = [(d, mu, problem_from_weight(ib.weight_from_descriptor(d), g3, mu))
                for d, mu in corpus]
    worst, checked, tried = 0.0, 0, 0
    while checked < 20 and tried < 200:
        tried += 1
        desc, mu, prob = problems[int(rng.integers(len(problems)))]
        alpha = float(10.0 ** rng.uniform(-1.0, 1.2))
        traj = prob.trajectory(alpha)
        if traj.escaped:
            continue
        delta = 1e-5 * alpha
        tp = prob.trajectory(alpha + delta)
        tm = prob.trajectory(alpha - delta)
        if tp.escaped or tm.escaped:
            continue
        fd = (tp.states[-1, 0] - tm.states[-1, 0]) / (2.0 * delta)
        if abs(fd) < 1e-8:
            continue
        rel = abs(traj.states[-1, 2] - fd) / abs(fd)
        worst = max(worst, rel)
        checked += 1
    elapsed = time.time() - t0
    ok = checked == 20 and worst <= 1e-5 and elapsed < 60.0
    _report(6, "d u(b)/d alpha matches finite differences (<= 1e-5)", ok,
            f"{checked} cases, worst {worst:.2e}, {elapsed:.0f}s")


def test_criterion_07_moroney_certificates(g3, g15):
    t0 = time.time()
    failures = []
    n_checked = 0
    for name, c, d, q in arch_corpus():
        for g in (g3, g15):
            prob = ShootingProblem(q=q, g=g, a=c, b=d)
            roots = scan_alpha_roots(prob, alpha_max=32.0, n_scan=256)
            sols = solutions_on_problem(prob, math.inf, roots[:1], [(c, d)])
            if not sols:
                failures.append(f"{name}/{g.descriptor}: no solution")
                continue
            for w0, w0p in ((0.0, 1.0), (1.0, 0.0)):
                cert = moroney_sign_certificate(sols[0], w0, w0p)
                n_checked += 1
                if not (cert.w_end < 0.0 and cert.wp_end < 0.0 and cert.hypotheses_ok):
                    failures.append(f"{name}/{g.descriptor}/({w0},{w0p}): "
                                    f"w(b)={cert.w_end:.2e} w'(b)={cert.wp_end:.2e}")
    elapsed = time.time() - t0
    ok = not failures and n_checked == 40 and elapsed < 60.0
    _report(7, "linearized endpoint signs on 10 arches x 2 nonlinearities", ok,
            (f"{n_checked} certificates all negative, {elapsed:.0f}s"
             if not failures else "; ".join(failures)))


def test_criterion_08_symmetry(h_sin3, g3):
    t0 = time.time()
    worst = 0.0
    counts = []
    for mu in (-5.0, -1.0):
        sols = ib.find_all_solutions(h_sin3, g3, mu)
        counts.append(len(sols))
        for s in sols:
            worst = max(worst, ib.check_symmetry(s) / s.sup_norm)
    elapsed = time.time() - t0
    ok = counts == [1, 1] and worst <= 1e-8 and elapsed < 30.0
    _report(8, "unique solutions at mu in {-5, -1} are symmetric", ok,
            f"counts={counts}, worst relative defect {worst:.2e}, {elapsed:.0f}s")


def test_criterion_09_scaling(g3):
    t0 = time.time()
    prob = ShootingProblem(q=lambda t: 1.0, g=g3, a=0.0, b=60.0)
    worst = 0.0
    for lam in (2.0, 5.0):
        for alpha in (0.1, 1.0, 10.0):
            b1 = prob.trajectory(alpha, stop_at_zero=True).first_zero
            b2 = prob.trajectory(lam * lam * alpha, stop_at_zero=True).first_zero
            worst = max(worst, abs(b2 - b1 / lam) / (b1 / lam))
    elapsed = time.time() - t0
    ok = worst <= 1e-8 and elapsed < 10.0
    _report(9, "first-zero scaling B(lam^2 a) = B(a)/lam", ok,
            f"worst relative defect {worst:.2e}, {elapsed:.0f}s")


def test_criterion_10_action_ordering(sin3_sols_mu8):
    t0 = time.time()
    by_lam = {frozenset(s.lambda_set): s for s in sin3_sols_mu8}
    a1 = by_lam[frozenset({1})].action
    a2 = by_lam[frozenset({2})].action
    a12 = by_lam[frozenset({1, 2})].action
    elapsed = time.time() - t0
    equal = abs(a1 - a2) <= 1e-8 * abs(a1)
    ordered = a1 < a12 and a2 < a12
    ok = equal and ordered and elapsed < 30.0
    _report(10, "mirror-pair actions equal and below the symmetric one", ok,
            f"A(asym)={a1:.9g},{a2:.9g} (rel diff {abs(a1-a2)/abs(a1):.1e}), "
            f"A(sym)={a12:.9g}, {elapsed:.0f}s")
