"""Unit tests for the excess current evaluations."""

import math
import warnings

import numpy as np
import pytest

import pnp_steric as ps
from pnp_steric import branch, bvp, current
from pnp_steric.errors import (
    BoundsError,
    BranchMismatchError,
    ConsistencyError,
    DomainError,
    EndpointSingularityWarning,
)

PAIR = ps.TwoSpeciesParams(1.0, 20.0, 1.0)
CONFIG = ps.ThreeSpeciesConfig(PAIR, 1.0, 0.5)
DIFF = ps.DiffusionSet((1.0, 2.0, 1.0))


@pytest.fixture(scope="module")
def solved():
    fn = ps.assemble_three_species(CONFIG, "A")
    bc = bvp.RobinBC(fn.root + 0.15, fn.root - 0.1, 0.0)
    sol = bvp.solve(bvp.BvpProblem(5e-2, fn, bc, 2001))
    return fn, sol


class TestDiffusionSet:
    def test_rejects_nonpositive_coefficients(self):
        with pytest.raises(DomainError):
            ps.DiffusionSet((1.0, -2.0, 1.0))
        with pytest.raises(DomainError):
            ps.DiffusionSet((1.0, 2.0), 0.0)


class TestPointwise:
    def test_constant_solution_zero_current(self, solved):
        fn, _ = solved
        x = np.linspace(-1, 1, 101)
        phi = np.full_like(x, fn.root)
        prof = current.pointwise_current_three((x, phi), CONFIG, DIFF, "A")
        assert np.max(np.abs(prof.values)) == 0.0

    def test_equal_diffusion_drops_difference_terms(self):
        # with D1 = D2 the (D2-D1)/2 blocks vanish identically
        sig = np.linspace(ps.sigma_c(PAIR) + 0.1, ps.sigma_c(PAIR) + 1.0, 20)
        fa = current._pair_current_factor(sig, PAIR, (1.5, 1.5), "A")
        fb = current._pair_current_factor(sig, PAIR, (1.5, 1.5), "B")
        assert np.allclose(fa, fb)

    def test_branch_mismatch(self, solved):
        _, sol = solved
        phi_bad = sol.values - 2.0 * ps.phi_crit(PAIR)
        with pytest.raises(BranchMismatchError):
            current.pointwise_current_three((sol.nodes, phi_bad), CONFIG, DIFF, "A")


class TestWindowIntegrals:
    def test_degenerate_window_is_zero(self, solved):
        fn, sol = solved
        prof = current.pointwise_current_three(sol, CONFIG, DIFF, "A")
        assert current.integral_current_x(prof, 0.3, 0.3) == 0.0
        assert (
            current.integral_current_sigma_three(sol, CONFIG, DIFF, "A", 0.3, 0.3)
            == 0.0
        )

    def test_bad_bounds(self, solved):
        _, sol = solved
        prof = current.pointwise_current_three(sol, CONFIG, DIFF, "A")
        with pytest.raises(BoundsError):
            current.integral_current_x(prof, 0.5, -0.5)
        with pytest.raises(BoundsError):
            current.integral_current_x(prof, -1.5, 0.5)

    def test_additivity(self, solved):
        _, sol = solved
        prof = current.pointwise_current_three(sol, CONFIG, DIFF, "A")
        whole = current.integral_current_x(prof, -0.8, 0.6)
        split = current.integral_current_x(prof, -0.8, -0.1)
        split += current.integral_current_x(prof, -0.1, 0.6)
        assert whole == pytest.approx(split, abs=1e-10)

    def test_dual_route_agreement(self, solved):
        _, sol = solved
        prof = current.pointwise_current_three(sol, CONFIG, DIFF, "A")
        for window in [(-0.8, 0.7), (-0.5, 0.5), (-0.2, 0.9)]:
            ix = current.integral_current_x(prof, *window)
            isg = current.integral_current_sigma_three(
                sol, CONFIG, DIFF, "A", *window
            )
            assert abs(ix - isg) <= max(1e-6, 1e-4 * abs(isg))

    def test_turning_point_warning(self):
        fn = ps.assemble_three_species(CONFIG, "A")
        x = np.linspace(-1, 1, 101)
        phi = np.linspace(-ps.phi_crit(PAIR), fn.root, 101)
        with pytest.warns(EndpointSingularityWarning):
            with np.errstate(all="ignore"):
                current.integral_current_sigma_three(
                    (x, phi), CONFIG, DIFF, "A", -1.0, 0.5
                )


class TestFourSpecies:
    P12 = ps.TwoSpeciesParams(1, 25, 1)
    P34 = ps.TwoSpeciesParams(1, 25, 2)
    CFG = ps.FourSpeciesConfig(P12, P34, -0.3)
    D4 = ps.DiffusionSet((1.0, 2.0, 1.0, 0.5))

    def test_dual_route_agreement_both_labels(self):
        for label, offset in (("A", 0.08), ("B", 0.002)):
            fn = ps.assemble_four_species(self.CFG, label)
            bc = bvp.RobinBC(fn.root + offset, fn.root - offset, 0.0)
            sol = bvp.solve(bvp.BvpProblem(5e-2, fn, bc, 2001))
            prof = current.pointwise_current_four(sol, self.CFG, self.D4, label)
            for window in [(-0.8, 0.7), (-0.4, 0.3)]:
                ix = current.integral_current_x(prof, *window)
                isg = current.integral_current_sigma_four(
                    sol, self.CFG, self.D4, label, *window
                )
                assert abs(ix - isg) <= max(1e-6, 1e-4 * abs(isg))

    def test_needs_four_coefficients(self):
        fn = ps.assemble_four_species(self.CFG, "A")
        x = np.linspace(-1, 1, 51)
        phi = np.full_like(x, fn.root)
        with pytest.raises(DomainError):
            current.pointwise_current_four((x, phi), self.CFG, DIFF, "A")


class TestGenericFormula:
    def _profiles(self, slope=0.05, n=4001):
        fn = ps.assemble_three_species(CONFIG, "A")
        x = np.linspace(-1, 1, n)
        phi = fn.root + slope * x
        sig = branch.inverse_sigma(phi, PAIR, "A1")
        c1, c2 = branch.concentrations(sig, PAIR, "A")
        c3 = np.exp(-CONFIG.z3 * phi)
        coupling = np.array(
            [[PAIR.g, PAIR.z, 0.0], [PAIR.z, PAIR.g, 0.0], [0.0, 0.0, 0.0]]
        )
        valences = [-PAIR.q, PAIR.q, CONFIG.z3]
        return x, phi, [c1, c2, c3], valences, coupling

    def test_matches_branch_formula(self):
        x, phi, conc, valences, coupling = self._profiles()
        prof_b = current.pointwise_current_three((x, phi), CONFIG, DIFF, "A")
        prof_g = current.generic_current((x, phi), conc, valences, DIFF, coupling)
        err = np.max(np.abs(prof_b.values[1:-1] - prof_g.values[1:-1]))
        assert err <= 1e-6

    def test_third_species_contribution_vanishes(self):
        x, phi, conc, _, _ = self._profiles()
        c3 = conc[2]
        contrib = current.grid_derivative(x, c3) + CONFIG.z3 * c3 * (
            current.grid_derivative(x, phi)
        )
        assert np.max(np.abs(contrib[1:-1])) <= 1e-10

    def test_all_gradients_zero(self):
        fn = ps.assemble_three_species(CONFIG, "A")
        x = np.linspace(-1, 1, 101)
        phi = np.full_like(x, fn.root)
        sig = branch.inverse_sigma(phi, PAIR, "A1")
        c1, c2 = branch.concentrations(sig, PAIR, "A")
        c3 = np.exp(-phi)
        coupling = np.array([[1.0, 20, 0], [20, 1.0, 0], [0, 0, 0]])
        prof = current.generic_current(
            (x, phi), [c1, c2, c3], [-1.0, 1.0, 1.0], DIFF, coupling
        )
        assert np.max(np.abs(prof.values)) == 0.0

    def test_inconsistent_profiles_rejected(self):
        x, phi, conc, valences, coupling = self._profiles(n=101)
        conc[0] = conc[0] * 1.01
        with pytest.raises(ConsistencyError):
            current.generic_current((x, phi), conc, valences, DIFF, coupling)
