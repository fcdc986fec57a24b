"""Limit profiles: per-interval solutions, enumeration, distances."""

from __future__ import annotations

import math

import numpy as np
import pytest

import indefbvp as ib
from indefbvp.errors import MultipleSolutions
from indefbvp.profiles import (
    enumerate_profiles,
    interval_piece_heights,
    interval_solutions,
    profile_distance,
    solve_limit_interval,
)
from indefbvp.shooting import moroney_sign_certificate, nondeg_threshold


class TestIntervalSolutions:
    def test_sin3_unique_per_interval(self, h_sin3, g3):
        piece, alpha, unique = solve_limit_interval(h_sin3, g3, 1)
        assert unique
        assert alpha > 0.0
        assert piece.height == pytest.approx(11.678, rel=1e-3)

    def test_sin3_pieces_are_congruent(self, h_sin3, g3):
        p1 = interval_solutions(h_sin3, g3, 1)[0]
        p2 = interval_solutions(h_sin3, g3, 2)[0]
        # the second arch is the first translated by 2/3
        np.testing.assert_allclose(p2.values,
                                   np.interp(p2.grid - 2.0 / 3.0, p1.grid, p1.values),
                                   atol=1e-6)
        assert p2.alpha == pytest.approx(p1.alpha, rel=1e-8)

    def test_h3sols_first_interval_multiple(self, h_h3sols, g3):
        with pytest.raises(MultipleSolutions) as exc:
            solve_limit_interval(h_h3sols, g3, 1)
        assert len(exc.value.pieces) == 3

    def test_pieces_symmetric_on_symmetric_arch(self, h_sin3, g3):
        piece = interval_solutions(h_sin3, g3, 1)[0]
        vals = piece.values
        assert np.max(np.abs(vals - vals[::-1])) <= 1e-8 * piece.height

    def test_piece_certificates(self, h_sin3, g3, sin3_profiles):
        prof = sin3_profiles[0]
        for i, piece in prof.pieces.items():
            assert abs(piece.w_b) > 0.0
        # Moroney signs hold on the sine arch interval
        pieces = interval_solutions(h_sin3, g3, 1)
        from indefbvp.shooting import ShootingProblem, solutions_on_problem

        si, ti = h_sin3.structure.positivity_intervals()[0]
        prob = ShootingProblem(q=h_sin3.plus, g=g3, a=si, b=ti)
        (sol,) = solutions_on_problem(prob, math.inf, [pieces[0].alpha], [(si, ti)])
        cert = moroney_sign_certificate(sol, 0.0, 1.0)
        assert cert.passed


class TestEnumeration:
    @pytest.mark.parametrize("desc,count", [("sin:3", 3), ("sin:5", 7)])
    def test_power_of_two_counts(self, desc, count, g3):
        h = ib.weight_from_descriptor(desc)
        profs = enumerate_profiles(h, g3)
        assert len(profs) == count

    def test_h3sols_seven(self, h_h3sols, g3):
        profs = enumerate_profiles(h_h3sols, g3)
        assert len(profs) == 7
        heights = interval_piece_heights(h_h3sols, g3)
        expected = int(np.prod([1 + len(per) for per in heights])) - 1
        assert expected == 7  # (1+3)(1+1) - 1

    def test_labels_and_lambda_sets(self, sin3_profiles):
        labels = sorted(p.label for p in sin3_profiles)
        assert labels == ["01", "10", "11"]
        for p in sin3_profiles:
            active = {i + 1 for i, c in enumerate(p.choices) if c > 0}
            assert active == set(p.lambda_set)

    def test_composed_vanishes_off_support(self, sin3_profiles):
        by_label = {p.label: p for p in sin3_profiles}
        p10 = by_label["10"]
        ts = np.linspace(0.40, 1.0, 101)
        assert np.max(np.abs(p10.composed(ts))) == 0.0
        inner = np.linspace(0.05, 0.28, 51)
        assert np.min(p10.composed(inner)) > 0.0

    def test_composed_nonnegative(self, sin3_profiles):
        ts = np.linspace(0.0, 1.0, 2001)
        for p in sin3_profiles:
            assert np.min(p.composed(ts)) >= 0.0


class TestDistances:
    def test_solution_matches_own_lambda_profile(self, h_sin3, g3, sin3_profiles):
        sols = ib.find_all_solutions(h_sin3, g3, 100.0)
        for s in sols:
            dists = {p.lambda_set: profile_distance(s, p) for p in sin3_profiles}
            best = min(dists, key=dists.get)
            assert best == s.lambda_set

    def test_distance_decreases_with_mu(self, h_sin3, g3, sin3_profiles):
        by_lam = {p.lambda_set: p for p in sin3_profiles}
        sols_lo = ib.find_all_solutions(h_sin3, g3, 100.0)
        sols_hi = ib.find_all_solutions(h_sin3, g3, 400.0)
        for lam in by_lam:
            s_lo = next(s for s in sols_lo if s.lambda_set == lam)
            s_hi = next(s for s in sols_hi if s.lambda_set == lam)
            d_lo = profile_distance(s_lo, by_lam[lam])
            d_hi = profile_distance(s_hi, by_lam[lam])
            assert d_hi < d_lo
