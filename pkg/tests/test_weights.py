"""Sign-structure detection, effective weight, and structural checks."""

from __future__ import annotations

import numpy as np
import pytest

import indefbvp as ib
from indefbvp.errors import AmbiguousStructure, NoSignChange
from indefbvp.weights import (
    SignStructure,
    check_arch_weight,
    detect_sign_structure,
    make_weight,
)


class TestDetection:
    def test_sin3_structure(self, h_sin3):
        st = h_sin3.structure
        assert st.m == 2
        np.testing.assert_allclose(st.sigma, (0.0, 2.0 / 3.0, 1.0), atol=1e-12)
        np.testing.assert_allclose(st.tau, (0.0, 1.0 / 3.0, 1.0), atol=1e-12)

    def test_sin5_structure(self, h_sin5):
        st = h_sin5.structure
        assert st.m == 3
        expected = [(0.0, 0.2), (0.4, 0.6), (0.8, 1.0)]
        for (lo, hi), (elo, ehi) in zip(st.positivity_intervals(), expected):
            assert lo == pytest.approx(elo, abs=1e-12)
            assert hi == pytest.approx(ehi, abs=1e-12)

    def test_h3sols_structure(self, h_h3sols):
        st = h_h3sols.structure
        assert st.m == 2
        (s1, t1), (s2, t2) = st.positivity_intervals()
        assert (s1, t1) == pytest.approx((0.0, 0.5), abs=1e-9)
        assert (s2, t2) == pytest.approx((0.75, 1.0), abs=1e-12)

    def test_sin3_eps_zero_tail_joins_positivity(self):
        h = ib.weight_from_descriptor("sin3-eps:0.1")
        st = h.structure
        assert st.m == 2
        (_, t1), (s2, t2) = st.positivity_intervals()
        assert t1 == pytest.approx(0.3, abs=1e-12)
        assert s2 == pytest.approx(0.6, abs=1e-12)
        assert t2 == 1.0  # h == 0 on [0.9, 1] is absorbed into I_2+

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_sin_k_interval_count(self, k):
        h = ib.weight_from_descriptor(f"sin:{k}")
        assert h.structure.m == (k + 1) // 2

    def test_resolution_stability(self):
        h = lambda t: np.sin(3 * np.pi * t)
        st1 = detect_sign_structure(h, 0.0, 1.0, n_samples=512)
        st2 = detect_sign_structure(h, 0.0, 1.0, n_samples=1024)
        np.testing.assert_allclose(st1.sigma, st2.sigma, atol=1e-11)
        np.testing.assert_allclose(st1.tau, st2.tau, atol=1e-11)

    def test_constant_sign_raises(self):
        with pytest.raises(NoSignChange) as exc:
            detect_sign_structure(lambda t: 1.0 + 0.0 * t, 0.0, 1.0)
        assert exc.value.sign == 1
        with pytest.raises(NoSignChange) as exc:
            detect_sign_structure(lambda t: -1.0 - np.asarray(t), 0.0, 1.0)
        assert exc.value.sign == -1

    def test_interleaving_validation(self):
        with pytest.raises(AmbiguousStructure):
            SignStructure(a=0.0, b=1.0, sigma=(0.5, 1.0), tau=(0.0, 0.4), m=1)


class TestEvalMu:
    def test_pointwise_examples(self, h_sin3):
        assert ib.eval_mu(h_sin3, 8.0, 0.5) == pytest.approx(-8.0, rel=1e-12)
        ts = np.linspace(0.0, 1.0, 101)
        np.testing.assert_allclose(ib.eval_mu(h_sin3, 0.0, ts), h_sin3.plus(ts))
        np.testing.assert_allclose(
            ib.eval_mu(h_sin3, -1.0, ts), np.abs(h_sin3(ts)), atol=1e-15
        )

    def test_part_identities(self, h_h3sols):
        ts = np.linspace(0.0, 1.0, 257)
        hp, hm = h_h3sols.plus(ts), h_h3sols.minus(ts)
        np.testing.assert_allclose(hp - hm, h_h3sols(ts), atol=1e-15)
        assert np.max(hp * hm) == 0.0

    def test_mu_ordering(self, h_sin5):
        ts = np.linspace(0.0, 1.0, 257)
        low = ib.eval_mu(h_sin5, 1.0, ts)
        high = ib.eval_mu(h_sin5, -1.0, ts)
        hval = np.asarray(h_sin5(ts))
        assert np.all(low <= hval + 1e-15)
        assert np.all(hval <= high + 1e-15)


class TestExactnessHypotheses:
    def test_sin3_passes(self, h_sin3):
        rep = ib.check_exactness_hypotheses(h_sin3)
        assert rep.ok
        assert h_sin3.is_symmetric_per_plus_interval
        assert h_sin3.is_monotone_half_per_plus_interval

    def test_h3sols_first_interval_monotone_fails(self, h_h3sols):
        rep = ib.check_exactness_hypotheses(h_h3sols)
        first, second = rep.intervals
        assert first.symmetric_ok  # (t - 1/4)^2 is symmetric about 1/4
        assert not first.monotone_ok  # decreasing on [0, 1/4]
        assert first.monotone_violation > 1e-4
        assert second.ok
        assert not rep.ok

    def test_declared_constant_weight_passes(self):
        st = SignStructure(a=0.0, b=1.0, sigma=(0.0, 1.0), tau=(0.0, 1.0), m=1)
        h = make_weight(lambda t: np.ones_like(np.asarray(t, dtype=float)),
                        0.0, 1.0, descriptor="const", structure=st)
        assert ib.check_exactness_hypotheses(h).ok

    def test_arch_report_fields(self):
        rep = check_arch_weight(lambda t: np.sin(np.pi * np.asarray(t)), 0.0, 1.0)
        assert rep.ok
        assert rep.symmetry_defect < 1e-12


class TestDescriptors:
    def test_poly_piecewise(self):
        # (t - 1/4)^2 on [0, 1/2), then -1 on [1/2, 1]
        desc = 'poly:[[0, 0.5, [0.0625, -0.5, 1.0]], [0.5, 1.0, [-1.0]]]'
        h = ib.weight_from_descriptor(desc)
        assert h.structure.m == 1
        assert h(0.0) == pytest.approx(0.0625)
        assert h(0.75) == pytest.approx(-1.0)
        (s1, t1), = h.structure.positivity_intervals()
        assert t1 == pytest.approx(0.5, abs=1e-9)

    def test_moore_nehari(self, h_mne):
        assert h_mne.structure.m == 1
        assert h_mne(0.5) == pytest.approx(0.0)
        assert h_mne(0.0) == pytest.approx(1.0)
        assert h_mne.is_symmetric_per_plus_interval
        assert not h_mne.is_monotone_half_per_plus_interval

    def test_unknown_descriptor(self):
        with pytest.raises(ValueError):
            ib.weight_from_descriptor("nope:1")

    def test_breakpoints_include_structure(self, h_sin3):
        pts = h_sin3.all_breakpoints()
        for z in (1.0 / 3.0, 2.0 / 3.0):
            assert any(abs(p - z) < 1e-12 for p in pts)
