"""Command line interface: counting, solving, profiles, branches and
verification suites, emitting plain two-column data files and JSON manifests.

All outputs are deterministic: fixed numeric formats, sorted JSON keys, and
a pipeline with no randomness (the verification sampler uses a fixed seed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import continuation, profiles, shooting
from .errors import AmbiguousClassification, SolverError
from .nonlinearity import Nonlinearity, audit_hypotheses, make_power
from .weights import WeightFamily, check_exactness_hypotheses, weight_from_descriptor

FLOAT_FMT = "%.15e"


@dataclass
class RunConfig:
    """Everything a command needs; flags override config-file entries."""

    weight: str = "sin:3"
    g: str = "power:3"
    a: float = 0.0
    b: float = 1.0
    mu: tuple = (8.0,)
    mu_start: float = 1e6
    mu_stop: float = -3.0
    rtol: float = 1e-10
    atol: float = 1e-12
    event_tol: float = 1e-9
    newton_tol: float = 1e-10
    fold_tol: float = 1e-3
    alpha_max: float = 64.0
    n_scan: int = 512
    mesh: int = 800
    coord: str = "uprime0"
    out: str = ""
    deterministic: bool = True

    def weight_family(self) -> WeightFamily:
        return weight_from_descriptor(self.weight, self.a, self.b)

    def nonlinearity(self) -> Nonlinearity:
        name, _, arg = self.g.partition(":")
        if name.strip().lower() != "power":
            raise ValueError(f"unknown nonlinearity descriptor {self.g!r}")
        return make_power(float(arg))

    def out_dir(self) -> Path:
        out = self.out or os.environ.get("INDEFBVP_OUT", ".")
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        return path


def _parse_mu_list(values) -> tuple:
    mus = []
    for v in values:
        mus.extend(float(x) for x in str(v).split(",") if x)
    return tuple(mus)


def _load_config_file(path: str) -> dict:
    data = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        data[key.strip().replace("-", "_")] = value.strip()
    return data


def _build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        raw = _load_config_file(args.config)
        kwargs = {}
        for f in fields(RunConfig):
            if f.name not in raw:
                continue
            if f.name == "mu":
                kwargs["mu"] = _parse_mu_list([raw["mu"]])
            elif f.type in ("float", float):
                kwargs[f.name] = float(raw[f.name])
            elif f.type in ("int", int):
                kwargs[f.name] = int(raw[f.name])
            elif f.type in ("bool", bool):
                kwargs[f.name] = raw[f.name].lower() in ("1", "true", "yes")
            else:
                kwargs[f.name] = raw[f.name]
        cfg = replace(cfg, **kwargs)
    overrides = {}
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            overrides[f.name] = val
    if "mu" in overrides:
        overrides["mu"] = _parse_mu_list(overrides["mu"])
    return replace(cfg, **overrides)


def _write_xy(path: Path, xs, ys) -> None:
    lines = [f"{FLOAT_FMT % x} {FLOAT_FMT % y}" for x, y in zip(xs, ys)]
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _solve_all(cfg: RunConfig, h, g, mu: float):
    return shooting.find_all_solutions(
        h, g, mu,
        alpha_max=cfg.alpha_max, n_scan=cfg.n_scan,
        rtol=cfg.rtol, atol=cfg.atol, event_tol=cfg.event_tol,
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_count(cfg: RunConfig) -> int:
    h = cfg.weight_family()
    g = cfg.nonlinearity()
    report = []
    for mu in cfg.mu:
        try:
            sols = _solve_all(cfg, h, g, mu)
        except AmbiguousClassification as exc:
            print(f"mu={mu:g}: ambiguous classification: {exc}", file=sys.stderr)
            return 2
        except SolverError as exc:
            print(f"mu={mu:g}: solver failure: {exc}", file=sys.stderr)
            return 3
        print(f"mu={mu:g}: {len(sols)} positive solution(s)")
        print(f"  {'alpha':>18} {'lambda':>10} {'|w(b)|':>12} {'sup':>10} {'action':>14}")
        entry = {"mu": mu, "count": len(sols), "solutions": []}
        for s in sols:
            lam = "{" + ",".join(str(i) for i in sorted(s.lambda_set)) + "}"
            print(f"  {s.alpha:18.12g} {lam:>10} {abs(s.w_b):12.4e} "
                  f"{s.sup_norm:10.4f} {s.action:14.8g}")
            entry["solutions"].append({
                "alpha": s.alpha,
                "lambda_set": sorted(s.lambda_set),
                "w_b": s.w_b,
                "nondeg_threshold": shooting.nondeg_threshold(s),
                "sup_norm": s.sup_norm,
                "action": s.action,
            })
        report.append(entry)
    _write_json(cfg.out_dir() / "counts.json", report)
    return 0


def cmd_solve(cfg: RunConfig) -> int:
    h = cfg.weight_family()
    g = cfg.nonlinearity()
    out = cfg.out_dir()
    ts = np.linspace(cfg.a, cfg.b, 2001)
    written = []
    for mu in cfg.mu:
        try:
            sols = _solve_all(cfg, h, g, mu)
        except SolverError as exc:
            print(f"mu={mu:g}: solver failure: {exc}", file=sys.stderr)
            return 3
        for k, s in enumerate(sols):
            name = f"sol-mu{mu:g}-{k}.dat"
            _write_xy(out / name, ts, s.trajectory.dense_eval(ts)[0])
            written.append(name)
        print(f"mu={mu:g}: wrote {len(sols)} solution file(s)")
    _write_json(out / "solutions.json", {"files": written})
    return 0


def cmd_profiles(cfg: RunConfig) -> int:
    h = cfg.weight_family()
    g = cfg.nonlinearity()
    out = cfg.out_dir()
    profs = profiles.enumerate_profiles(
        h, g,
        alpha_max=cfg.alpha_max, n_scan=cfg.n_scan,
        rtol=cfg.rtol, atol=cfg.atol, event_tol=cfg.event_tol,
    )
    ts = np.linspace(cfg.a, cfg.b, 2001)
    manifest = []
    for p in profs:
        name = f"profile-{p.label}.dat"
        _write_xy(out / name, ts, p.composed(ts))
        manifest.append({
            "file": name,
            "label": p.label,
            "lambda_set": sorted(p.lambda_set),
            "piece_alphas": {str(i): a for i, a in sorted(p.piece_alphas.items())},
            "uniqueness": {str(i): bool(u) for i, u in sorted(p.uniqueness.items())},
        })
    _write_json(out / "profiles.json", manifest)
    print(f"{len(profs)} limit profile(s) written")
    return 0


def cmd_branch(cfg: RunConfig) -> int:
    h = cfg.weight_family()
    g = cfg.nonlinearity()
    out = cfg.out_dir()
    profs = profiles.enumerate_profiles(
        h, g,
        alpha_max=cfg.alpha_max, n_scan=cfg.n_scan,
        rtol=cfg.rtol, atol=cfg.atol, event_tol=cfg.event_tol,
    )
    manifest = {"branches": [], "clusters": []}
    branches = []
    for k, p in enumerate(profs):
        seed = continuation.seed_from_profile(
            p, h, g, cfg.mu_start, n_interior=cfg.mesh, newton_tol=cfg.newton_tol
        )
        br = continuation.trace_branch(
            seed, h, g, cfg.mu_stop,
            newton_tol=cfg.newton_tol, origin=p.label,
        )
        br.folds = continuation.detect_folds(
            br, fold_tol=cfg.fold_tol, newton_tol=cfg.newton_tol
        )
        branches.append(br)
        name = f"branch-{k}.dat"
        coords = [
            pt.coord_uprime0 if cfg.coord == "uprime0" else pt.coord_l2gradnorm
            for pt in br.points
        ]
        _write_xy(out / name, [pt.mu for pt in br.points], coords)
        last = br.points[-1]
        entry = {
            "file": name,
            "origin": p.label,
            "end_reason": br.end_reason,
            "n_points": len(br.points),
            "endpoint": {
                "mu": last.mu,
                "uprime0": last.coord_uprime0,
                "l2gradnorm": last.coord_l2gradnorm,
                "action": last.action,
                "w_b": last.w_b,
            },
            "folds": [
                {"mu": f.mu, "resolution": f.resolution,
                 "w_b_before": f.w_b_before, "w_b_after": f.w_b_after}
                for f in br.folds
            ],
        }
        if br.end_reason == "step_underflow":
            entry["warning"] = "arclength step underflow; branch data is partial"
        manifest["branches"].append(entry)
        folds = ", ".join(f"{f.mu:.6g}" for f in br.folds) or "none"
        print(f"branch {k} (profile {p.label}): {len(br.points)} points, "
              f"end={br.end_reason} at mu={last.mu:.6g}, folds: {folds}")
    clusters = continuation.cluster_branch_events(branches, tol=10.0 * cfg.fold_tol)
    for cl in clusters:
        if len(cl) > 1:
            manifest["clusters"].append([
                {"branch": bi, "kind": kind, "mu": mu, "coord": coord}
                for bi, kind, mu, coord in cl
            ])
    _write_json(out / "branches.json", manifest)
    return 0


def cmd_hypotheses(cfg: RunConfig) -> int:
    h = cfg.weight_family()
    g = cfg.nonlinearity()
    report = check_exactness_hypotheses(h)
    print(f"weight {cfg.weight}: m={h.structure.m} positivity interval(s)")
    for i, r in enumerate(report.intervals, start=1):
        print(f"  I{i}+ = [{r.c:.6g}, {r.d:.6g}]: symmetric={r.symmetric_ok} "
              f"(defect {r.symmetry_defect:.3e}), monotone-half={r.monotone_ok} "
              f"(violation {r.monotone_violation:.3e})")
    print(f"  overall: {'pass' if report.ok else 'FAIL'}")
    grid = np.geomspace(1e-2, 1e2, 201)
    audit = audit_hypotheses(g, grid)
    print(f"nonlinearity {cfg.g}: positive={audit.positive_ok} "
          f"star-shaped margin={audit.gs_margin_min:.3e} ({audit.gs_ok}) "
          f"g/s at 0={audit.ratio_at_0:.3e} ({audit.g0_ok}) "
          f"g/s at inf={audit.ratio_at_inf:.3e} ({audit.ginf_ok})")
    return 0 if (report.ok and audit.all_ok) else 1


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------


def arch_corpus() -> list[tuple[str, float, float, object]]:
    """Ten symmetric arch weights, non-decreasing up to their midpoint."""

    def on(c, d, f):
        return lambda t: f((np.asarray(t, dtype=float) - c) / (d - c))

    # no constant arch: for autonomous q the (1, 0) linearized solution is
    # u'/alpha, whose end slope -q g(u(b))/alpha vanishes identically, so the
    # strict endpoint signs hold with zero margin there
    specs = [
        ("sine", 0.0, 1.0, lambda s: np.sin(np.pi * s)),
        ("shifted-cosine", 0.0, 1.0, lambda s: 2.0 - np.cos(2.0 * np.pi * s)),
        ("parabola", 0.0, 1.0, lambda s: s * (1.0 - s)),
        ("quartic", 0.0, 1.0, lambda s: (s * (1.0 - s)) ** 2),
        ("tent", 0.0, 1.0, lambda s: np.minimum(s, 1.0 - s)),
        ("sqrt-sine", 0.2, 0.9, lambda s: np.sqrt(np.abs(np.sin(np.pi * s)))),
        ("gaussian", 0.0, 2.0, lambda s: np.exp(-((s - 0.5) ** 2) / 0.05)),
        ("sin-squared", 0.0, 1.0, lambda s: np.sin(np.pi * s) ** 2),
        ("trapezoid", 0.0, 1.0, lambda s: np.minimum(1.0, 4.0 * np.minimum(s, 1.0 - s))),
        ("offset-quartic", -1.0, 1.0, lambda s: (s * (1.0 - s)) ** 2 + 0.1),
    ]
    return [(name, c, d, on(c, d, f)) for name, c, d, f in specs]


def _verify_derivative(cfg: RunConfig) -> tuple[bool, str]:
    rng = np.random.default_rng(20240817)
    cases = [("sin:3", 0.5), ("sin:3", 8.0), ("sin:4", 8.0), ("sin:5", 3.0),
             ("moore-nehari", 0.0)]
    worst = 0.0
    checked = 0
    for desc, mu in cases:
        h = weight_from_descriptor(desc)
        g = make_power(3)
        prob = shooting.problem_from_weight(h, g, mu)
        tried = 0
        while checked < 4 * (cases.index((desc, mu)) + 1) and tried < 40:
            tried += 1
            alpha = float(10.0 ** rng.uniform(-1.0, 1.5))
            tr = prob.trajectory(alpha, rtol=cfg.rtol, atol=cfg.atol)
            if tr.escaped:
                continue
            delta = 1e-5 * alpha
            trp = prob.trajectory(alpha + delta, rtol=cfg.rtol, atol=cfg.atol)
            trm = prob.trajectory(alpha - delta, rtol=cfg.rtol, atol=cfg.atol)
            if trp.escaped or trm.escaped:
                continue
            fd = (trp.states[-1, 0] - trm.states[-1, 0]) / (2.0 * delta)
            wb = tr.states[-1, 2]
            if abs(fd) < 1e-8:
                continue
            worst = max(worst, abs(wb - fd) / abs(fd))
            checked += 1
    ok = checked >= 15 and worst <= 1e-5
    return ok, f"{checked} cases, worst relative deviation {worst:.3e} (tol 1e-5)"


def _verify_symmetry(cfg: RunConfig) -> tuple[bool, str]:
    h = weight_from_descriptor("sin:3")
    g = make_power(3)
    worst = 0.0
    for mu in (-5.0, -1.0):
        sols = _solve_all(cfg, h, g, mu)
        if len(sols) != 1:
            return False, f"expected a unique solution at mu={mu}, got {len(sols)}"
        defect = shooting.check_symmetry(sols[0]) / sols[0].sup_norm
        worst = max(worst, defect)
    return worst <= 1e-8, f"worst relative asymmetry defect {worst:.3e} (tol 1e-8)"


def _verify_moroney(cfg: RunConfig) -> tuple[bool, str]:
    failures = []
    margin_min = math.inf
    for name, c, d, q in arch_corpus():
        for g in (make_power(3), make_power(1.5)):
            prob = shooting.ShootingProblem(q=q, g=g, a=c, b=d)
            roots = shooting.scan_alpha_roots(prob, alpha_max=32.0, n_scan=256,
                                              rtol=cfg.rtol, atol=cfg.atol)
            sols = shooting.solutions_on_problem(prob, math.inf, roots[:1], [(c, d)],
                                                 rtol=cfg.rtol, atol=cfg.atol)
            if not sols:
                failures.append(f"{name}/{g.descriptor}: no solution")
                continue
            for w0, w0p in ((0.0, 1.0), (1.0, 0.0)):
                cert = shooting.moroney_sign_certificate(sols[0], w0, w0p)
                margin_min = min(margin_min, cert.margin)
                if not cert.passed:
                    failures.append(
                        f"{name}/{g.descriptor}/(w0,w0p)=({w0},{w0p}): "
                        f"w(b)={cert.w_end:.3e}, w'(b)={cert.wp_end:.3e}, "
                        f"hypotheses_ok={cert.hypotheses_ok}"
                    )
    if failures:
        return False, "; ".join(failures)
    return True, f"all endpoint signs negative; smallest realized margin {margin_min:.4f}"


def _verify_scaling(cfg: RunConfig) -> tuple[bool, str]:
    g = make_power(3)
    prob = shooting.ShootingProblem(q=lambda t: 1.0, g=g, a=0.0, b=50.0)
    worst = 0.0
    for lam in (2.0, 5.0):
        for alpha in (0.1, 1.0, 10.0):
            b1 = prob.trajectory(alpha, rtol=cfg.rtol, atol=cfg.atol,
                                 stop_at_zero=True).first_zero
            b2 = prob.trajectory(lam * lam * alpha, rtol=cfg.rtol, atol=cfg.atol,
                                 stop_at_zero=True).first_zero
            rel = abs(b2 - b1 / lam) / (b1 / lam)
            worst = max(worst, rel)
    return worst <= 1e-8, f"worst relative scaling defect {worst:.3e} (tol 1e-8)"


def _verify_convergence(cfg: RunConfig) -> tuple[bool, str]:
    g = make_power(3)
    worst = 0.0
    for desc, mu, alpha in [("sin:3", 8.0, 3.0), ("sin:4", 8.0, 2.0),
                            ("sin:5", 3.0, 2.0), ("moore-nehari", 0.0, 30.0),
                            ("h3sols", 5.0, 2.0), ("sin3-eps:0.1", 5.0, 3.0)]:
        h = weight_from_descriptor(desc)
        prob = shooting.problem_from_weight(h, g, mu)
        t1 = prob.trajectory(alpha, rtol=cfg.rtol, atol=cfg.atol)
        t2 = prob.trajectory(alpha, rtol=cfg.rtol / 2.0, atol=cfg.atol / 2.0)
        if t1.escaped or t2.escaped:
            return False, f"unexpected escape for {desc} at mu={mu}, alpha={alpha}"
        sup = float(np.max(np.abs(t1.states[:, 0])))
        diff = abs(t1.states[-1, 0] - t2.states[-1, 0]) / (100.0 * cfg.rtol * sup)
        worst = max(worst, diff)
    return worst <= 1.0, f"worst |du(b)| / (100 rtol sup|u|) = {worst:.3f} (tol 1)"


VERIFY_SUITES = {
    "derivative": _verify_derivative,
    "symmetry": _verify_symmetry,
    "moroney": _verify_moroney,
    "scaling": _verify_scaling,
    "convergence": _verify_convergence,
}


def cmd_verify(cfg: RunConfig, suites) -> int:
    names = suites or sorted(VERIFY_SUITES)
    for name in names:
        if name not in VERIFY_SUITES:
            print(f"unknown suite {name!r}; available: {sorted(VERIFY_SUITES)}",
                  file=sys.stderr)
            return 1
        ok, detail = VERIFY_SUITES[name](cfg)
        print(f"verify {name}: {'pass' if ok else 'FAIL'} ({detail})")
        if not ok:
            return 1
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file (flags override)")
    parser.add_argument("--weight", help="weight descriptor, e.g. sin:3, h3sols")
    parser.add_argument("--g", help="nonlinearity descriptor, default power:3")
    parser.add_argument("--a", type=float, help="left endpoint (default 0)")
    parser.add_argument("--b", type=float, help="right endpoint (default 1)")
    parser.add_argument("--rtol", type=float, help="integrator relative tolerance")
    parser.add_argument("--atol", type=float, help="integrator absolute tolerance")
    parser.add_argument("--event-tol", dest="event_tol", type=float)
    parser.add_argument("--n-scan", dest="n_scan", type=int)
    parser.add_argument("--alpha-max", dest="alpha_max", type=float)
    parser.add_argument("--mesh", type=int, help="interior mesh nodes for continuation")
    parser.add_argument("--newton-tol", dest="newton_tol", type=float)
    parser.add_argument("--fold-tol", dest="fold_tol", type=float)
    parser.add_argument("--out", help="output directory (or $INDEFBVP_OUT)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="indefbvp",
        description="Positive solutions of u'' + (h+ - mu h-) g(u) = 0, "
                    "u(a)=u(b)=0: counting, profiles, branches.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_count = sub.add_parser("count", help="count positive solutions at fixed mu")
    p_count.add_argument("--mu", action="append", help="mu value(s), repeatable or comma separated")
    _add_common(p_count)

    p_solve = sub.add_parser("solve", help="export solutions as (t, u) data files")
    p_solve.add_argument("--mu", action="append")
    _add_common(p_solve)

    p_prof = sub.add_parser("profiles", help="limit profiles for mu -> infinity")
    _add_common(p_prof)

    p_branch = sub.add_parser("branch", help="trace solution branches in mu")
    p_branch.add_argument("--mu-start", dest="mu_start", type=float)
    p_branch.add_argument("--mu-stop", dest="mu_stop", type=float)
    p_branch.add_argument("--coord", choices=("uprime0", "l2grad"))
    _add_common(p_branch)

    p_verify = sub.add_parser("verify", help="run a named property suite")
    p_verify.add_argument("suite", nargs="*",
                          help=f"suites: {', '.join(sorted(VERIFY_SUITES))} (default all)")
    _add_common(p_verify)

    p_hyp = sub.add_parser("hypotheses", help="audit weight and nonlinearity hypotheses")
    _add_common(p_hyp)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _build_config(args)
    if args.command == "count":
        return cmd_count(cfg)
    if args.command == "solve":
        return cmd_solve(cfg)
    if args.command == "profiles":
        return cmd_profiles(cfg)
    if args.command == "branch":
        return cmd_branch(cfg)
    if args.command == "verify":
        return cmd_verify(cfg, args.suite)
    if args.command == "hypotheses":
        return cmd_hypotheses(cfg)
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
