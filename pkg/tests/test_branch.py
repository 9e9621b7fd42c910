"""Unit tests for the two-species branch algebra."""

import math

import numpy as np
import pytest
from scipy.special import lambertw

import pnp_steric as ps
from pnp_steric import branch
from pnp_steric.errors import DomainError, SubcriticalError, SupercriticalError

from oracles import bisect, central_difference, newton_pair_solution


def pair(g, z, q=1.0):
    return ps.TwoSpeciesParams(g, z, q)


class TestParams:
    def test_rejects_negative_couplings(self):
        with pytest.raises(DomainError):
            ps.TwoSpeciesParams(-0.1, 1.0)
        with pytest.raises(DomainError):
            ps.TwoSpeciesParams(1.0, -1.0)

    def test_rejects_subunit_valence(self):
        with pytest.raises(DomainError):
            ps.TwoSpeciesParams(1.0, 1.0, 0.5)

    def test_hashable_and_frozen(self):
        assert pair(1, 2) == pair(1, 2)
        assert hash(pair(1, 2)) == hash(pair(1, 2))


class TestSigmaZ:
    def test_zero_couplings_closed_form(self):
        assert ps.sigma_z(pair(0, 0)) == 2.0

    def test_lambert_w_closed_forms(self):
        # sigma = 2 exp(-a sigma/2) <=> a sigma/... => sigma = 2 W(a)/a for a=g+z
        assert ps.sigma_z(pair(1, 1)) == pytest.approx(
            float(lambertw(2).real), abs=1e-12
        )
        assert ps.sigma_z(pair(1, 3)) == pytest.approx(
            float(lambertw(4).real) / 2.0, abs=1e-12
        )

    def test_bisection_oracle(self):
        p = pair(0.7, 2.3)
        a = p.g + p.z
        ref = bisect(lambda s: s - 2.0 * math.exp(-0.5 * a * s), 1e-12, 2.0)
        assert ps.sigma_z(p) == pytest.approx(ref, abs=1e-12)

    def test_defining_residual(self):
        for p in [pair(0, 0.5), pair(1, 10), pair(2, 25, 2)]:
            sz = ps.sigma_z(p)
            resid = sz * sz - 4.0 * math.exp(-(p.g + p.z) * sz)
            assert abs(resid) <= 1e-12 * sz * sz


class TestGCrit:
    def test_g_zero_is_e(self):
        assert ps.g_crit(0.0) == pytest.approx(math.e, abs=1e-8)

    def test_lower_bound(self):
        for g in [0.0, 0.5, 1.0, 2.0]:
            assert ps.g_crit(g) > math.sqrt(1.0 + g * g)

    def test_indicator_sign_change(self):
        g = 1.0
        gc = ps.g_crit(g)
        assert ps.stability_indicator(pair(g, gc - 0.01)) > 0
        assert ps.stability_indicator(pair(g, gc + 0.01)) < 0
        assert abs(ps.stability_indicator(pair(g, gc))) < 1e-10


class TestSigmaC:
    def test_g_zero_closed_form(self):
        # (z^2) e^{z sigma} ... reduces to sigma_c = 2 ln(z)/z at g=0
        for z in [3.0, 5.0, math.e**2]:
            assert ps.sigma_c(pair(0, z)) == pytest.approx(
                2.0 * math.log(z) / z, abs=1e-12
            )

    def test_subcritical_raises(self):
        with pytest.raises(SubcriticalError):
            ps.sigma_c(pair(1, 2))

    def test_between_sigma_z_and_infinity(self):
        p = pair(1, 20)
        assert ps.sigma_z(p) < ps.sigma_c(p)

    def test_f_tilde_vanishes_at_sigma_c(self):
        p = pair(1, 20)
        sc = ps.sigma_c(p)
        E = math.exp(-(p.g + p.z) * sc)
        assert abs(1 + p.g * sc + (p.g**2 - p.z**2) * E) < 1e-12


class TestBranchValues:
    def test_phi_example_value(self):
        # g=0, z=1, q=1, sigma=2: ln(1+sqrt(1-e^-2)) + 1 - sqrt(1-e^-2)
        s = math.sqrt(1.0 - math.exp(-2.0))
        ref = math.log(1.0 + s) + 1.0 - s
        assert ps.phi_on_branch(2.0, pair(0, 1), "A") == pytest.approx(ref, abs=1e-14)

    def test_phi_antisymmetry(self):
        p = pair(1, 10, 2)
        sig = np.linspace(ps.sigma_z(p), ps.sigma_z(p) + 5, 100)
        a = ps.phi_on_branch(sig, p, "A")
        b = ps.phi_on_branch(sig, p, "B")
        assert np.max(np.abs(a + b)) < 1e-10

    def test_product_closure(self):
        p = pair(1, 25)
        sig = np.linspace(ps.sigma_z(p), ps.sigma_z(p) + 5, 200)
        c1, c2 = ps.concentrations(sig, p, "A")
        resid = np.log(c1) + np.log(c2) + (p.g + p.z) * sig
        assert np.max(np.abs(resid)) < 1e-10

    def test_concentrations_match_raw_system(self):
        p = pair(1, 20)
        phi = 0.4
        sig = ps.inverse_sigma(phi, p, "A1")
        c1, c2 = ps.concentrations(sig, p, "A")
        ref = newton_pair_solution(p.g, p.z, p.q, phi, (c1, c2))
        assert c1 == pytest.approx(ref[0], rel=1e-10)
        assert c2 == pytest.approx(ref[1], rel=1e-10)

    def test_branches_swap(self):
        p = pair(0.5, 8)
        sig = ps.sigma_z(p) + 1.0
        a1, a2 = ps.concentrations(sig, p, "A")
        b1, b2 = ps.concentrations(sig, p, "B")
        assert (a1, a2) == (b2, b1)
        assert a1 >= a2
        assert ps.c_diff(sig, p, "A") == -ps.c_diff(sig, p, "B")

    def test_below_threshold_raises(self):
        p = pair(1, 5)
        with pytest.raises(DomainError):
            ps.concentrations(0.9 * ps.sigma_z(p), p, "A")

    def test_bad_branch_name(self):
        with pytest.raises(DomainError):
            ps.concentrations(2.0, pair(0, 0), "C")


class TestDerivatives:
    def test_dphi_dsigma_matches_finite_differences(self):
        p = pair(1, 10, 2)
        sz = ps.sigma_z(p)
        sig = np.geomspace(sz + 0.05, sz + 5.0, 40)
        for branch_label in ("A", "B"):
            exact = ps.dphi_dsigma(sig, p, branch_label)
            for s, d in zip(sig, np.atleast_1d(exact)):
                h = 1e-6 * max(1.0, s)
                fd = central_difference(
                    lambda t: ps.phi_on_branch(t, p, branch_label), s, h
                )
                assert d == pytest.approx(fd, rel=1e-6)

    def test_singular_at_sigma_z(self):
        p = pair(1, 5)
        with pytest.raises(DomainError):
            ps.dphi_dsigma(ps.sigma_z(p), p, "A")


class TestInverses:
    def test_roundtrip_identity(self):
        p = pair(1, 20)
        sc = ps.sigma_c(p)
        sig = np.geomspace(sc + 1e-8, sc + 3.0, 60)
        phi = ps.phi_on_branch(sig, p, "A")
        back = ps.inverse_sigma(phi, p, "A1")
        assert np.max(np.abs(back - sig) / sig) < 1e-8

    def test_endpoint_closure(self):
        p = pair(1, 20)
        assert ps.inverse_sigma(-ps.phi_crit(p), p, "A1") == pytest.approx(
            ps.sigma_c(p), rel=1e-12
        )

    def test_endpoint_clamp_within_slack(self):
        p = pair(1, 20)
        pac = ps.phi_crit(p)
        val = ps.inverse_sigma(-pac - 1e-13, p, "A1")
        assert val == pytest.approx(ps.sigma_c(p), rel=1e-10)
        with pytest.raises(DomainError):
            ps.inverse_sigma(-pac - 1e-3, p, "A1")

    def test_inner_segments(self):
        p = pair(1, 20)
        sz, sc = ps.sigma_z(p), ps.sigma_c(p)
        pac = ps.phi_crit(p)
        phis = np.linspace(-0.95 * pac, -0.05 * pac, 50)
        sig = ps.inverse_sigma(phis, p, "A2")
        assert np.all((sig >= sz) & (sig <= sc))
        back = ps.phi_on_branch(sig, p, "A")
        assert np.max(np.abs(back - phis)) < 1e-10

    def test_b_segments_mirror_a(self):
        p = pair(1, 20)
        pac = ps.phi_crit(p)
        phis = np.linspace(-2.0, 0.9 * pac, 30)
        assert np.allclose(
            ps.inverse_sigma(phis, p, "B1"),
            ps.inverse_sigma(-phis, p, "A1"),
            rtol=0,
            atol=0,
        )

    def test_unified_sigma_symmetry_and_origin(self):
        p = pair(1, 0.5)
        assert ps.unified_sigma(0.0, p) == pytest.approx(ps.sigma_z(p), rel=1e-12)
        assert ps.unified_sigma(0.3, p) == pytest.approx(
            ps.unified_sigma(-0.3, p), rel=1e-12
        )
        ref = bisect(
            lambda s: ps.phi_on_branch(s, p, "A") - 1.0,
            ps.sigma_z(p) + 1e-9,
            20.0,
        )
        assert ps.unified_sigma(1.0, p) == pytest.approx(ref, rel=1e-10)

    def test_unified_rejects_supercritical(self):
        with pytest.raises(SupercriticalError):
            ps.unified_sigma(0.1, pair(1, 20))


class TestSegmentComposition:
    def test_endpoint_values(self):
        p = pair(1, 20)
        sc = ps.sigma_c(p)
        pac = ps.phi_crit(p)
        s_c = math.sqrt(sc * sc - 4.0 * math.exp(-(p.g + p.z) * sc))
        assert ps.c_diff_on_segment(-pac, p, "A1") == pytest.approx(s_c, rel=1e-10)
        assert ps.c_diff_on_segment(pac, p, "B1") == pytest.approx(-s_c, rel=1e-10)

    def test_strictly_increasing(self):
        p = pair(1, 15)
        pac = ps.phi_crit(p)
        for seg, lo, hi in (("A1", -0.98 * pac, 2.0), ("B1", -2.0, 0.98 * pac)):
            phis = np.linspace(lo, hi, 500)
            vals = ps.c_diff_on_segment(phis, p, seg)
            assert np.all(np.diff(vals) > 0)

    def test_derivative_matches_finite_differences(self):
        p = pair(1, 20)
        pac = ps.phi_crit(p)
        for seg in ("A1", "B1"):
            phis = np.linspace(-0.6 * pac, 0.6 * pac, 25)
            exact = ps.c_diff_segment_derivative(phis, p, seg)
            for phi, d in zip(phis, exact):
                fd = central_difference(
                    lambda t: ps.c_diff_on_segment(t, p, seg), phi, 1e-6
                )
                assert d == pytest.approx(fd, rel=1e-6)
                assert d > 0


class TestCriticalSet:
    def test_supercritical_bundle(self):
        cs = ps.critical_set(pair(1, 20))
        assert cs.sigma_c is not None and cs.phi_crit is not None
        assert cs.sigma_z < cs.sigma_c
        assert cs.phi_crit > 0

    def test_subcritical_bundle(self):
        cs = ps.critical_set(pair(1, 2))
        assert cs.sigma_c is None and cs.phi_crit is None
        assert cs.g_crit > 1.0
