"""Commutator catalogue, moment integrals, Trotter and quadrature bounds, gate counts."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lchs_fvm import analysis, blocks, fvm
from lchs_fvm.analysis import BoundReport
from lchs_fvm.lchs import make_outer_plan, make_plan


class TestBoundReport:
    def test_ratio_and_flag(self):
        r = BoundReport("x", 2.0, 4.0)
        assert r.ratio == 0.5 and r.ok
        assert r.line().startswith("PASS x: measured=2.000000e+00")
        assert not BoundReport("y", 5.0, 4.0).ok

    def test_zero_bound(self):
        assert BoundReport("z", 0.0, 0.0).ratio == 0.0
        assert BoundReport("z", 1e-3, 0.0).ratio == math.inf

    def test_claim_strips_prefix(self):
        assert analysis.claim(BoundReport("n=3 pair1 [H1,[H1,H3]]", 0, 1)) == "[H1,[H1,H3]]"
        assert analysis.is_erratum(BoundReport("n=3 pair0 [L,[L,H]]", 0, 1))
        assert not analysis.is_erratum(BoundReport("n=3 pair0 [L,[L,H]] [corrected]", 0, 1))


class TestCommutators:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_corrected_catalogue_holds(self, n):
        bad = [r.line() for r in analysis.commutator_suite(n) if not r.ok and not analysis.is_erratum(r)]
        assert bad == []

    def test_printed_errata_are_detected(self):
        reps = analysis.commutator_suite(3)
        flagged = {analysis.claim(r) for r in reps if not r.ok}
        assert flagged <= set(analysis.PRINTED_ERRATA)
        # every identity erratum fails as printed at n = 3
        identity_errata = {k for k in analysis.PRINTED_ERRATA if "||" not in k and "<=" not in k}
        assert identity_errata <= flagged

    def test_corrected_entries_present(self):
        names = [r.name for r in analysis.commutator_suite(3)]
        assert any(name.endswith("[corrected]") for name in names)
        assert not any(n.endswith("[corrected]") for n in
                       (r.name for r in analysis.commutator_suite(3, corrected=False)))

    def test_range(self):
        with pytest.raises(ValueError):
            analysis.commutator_suite(7)

    def test_key_identity(self):
        lhs, rhs = analysis.key_identity(3)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    @pytest.mark.parametrize("n,lam", [(3, 0.0), (4, 0.4), (5, -1.1)])
    def test_periodic_spectrum_closed_form(self, n, lam):
        assert max(analysis.periodic_spectrum_gap(n, lam)) < 1e-9

    def test_printed_periodic_spectrum_is_an_erratum(self):
        assert max(analysis.periodic_spectrum_gap(3, 0.4, printed=True)) > 1.0
        reps = [r for r in analysis.norm_claims(3) if r.name.startswith("n=3 lam=0.300 spec")]
        assert [analysis.is_erratum(r) for r in reps] == [True, False]
        assert not reps[0].ok and reps[1].ok

    def test_comm_is_antisymmetric(self):
        a, b = blocks.h1(3, 0.2), blocks.h2(3, 0.7)
        np.testing.assert_allclose(analysis.comm(a, b), -analysis.comm(b, a))


class TestMoments:
    @pytest.mark.parametrize("gamma,delta", analysis.IK_POINTS)
    @pytest.mark.parametrize("k", range(4))
    def test_closed_form_matches_quadrature(self, gamma, delta, k):
        assert analysis.Ik(gamma, delta, k) == pytest.approx(analysis.Ik_numeric(gamma, delta, k), rel=1e-6)

    def test_zeroth_moment_is_kernel_norm(self):
        from lchs_fvm.lchs import kernel_l1
        assert analysis.Ik(6.8261, 0.4, 0) == pytest.approx(kernel_l1(6.8261, 0.4), rel=1e-10)

    @pytest.mark.parametrize("k", [1, 3])
    def test_expansion_error_shrinks_with_gamma(self, k):
        gaps = [abs(analysis.Ik_expansion(g, 0.4, k) / analysis.Ik(g, 0.4, k) - 1) for g in (3.0, 6.0)]
        assert gaps[1] < gaps[0] / 4

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            analysis.Ik(2.0, 0.4, 4)
        with pytest.raises(ValueError):
            analysis.Ik_expansion(2.0, 0.4, 2)


class TestTrotterBounds:
    def test_bound_suite_passes(self):
        bad = [r.line() for r in analysis.bound_suite() if not r.ok]
        assert bad == []

    @settings(max_examples=10, deadline=None)
    @given(st.sampled_from(["robin", "periodic", "periodic_alpha0"]), st.integers(0, 10 ** 6),
           st.floats(0.01, 0.4))
    def test_per_node_errors_within_bounds(self, kind, seed, tau):
        from lchs_fvm import circuits
        rng = np.random.default_rng(seed)
        p = analysis._random_params(rng, kind, 3)
        plan = None if kind == "periodic_alpha0" else make_plan(1e-3, 0.4, 2, R=3.0)
        meas = analysis.per_node_trotter_errors(p, plan, tau)
        nodes = plan.nodes if plan is not None else np.zeros(1)
        bnd = analysis.node_bounds(p, nodes, tau, circuits.variant(p))
        assert np.all(meas <= bnd * (1 + 1e-9))

    def test_weighted_bound_never_exceeds_closed_form(self):
        rng = np.random.default_rng(5)
        p = analysis._random_params(rng, "robin", 3)
        plan = make_plan(1e-3, 0.4, 6)
        tb = analysis.trotter_bound(p, plan, 0.3, r_steps=2)
        # the node sum is a Riemann sum of the moment integrals over a finite window
        assert tb.weighted <= tb.closed * 1.05
        assert tb.per_node.shape == plan.nodes.shape

    def test_steps_reduce_bound_quadratically(self):
        p = analysis._random_params(np.random.default_rng(1), "periodic", 3)
        plan = make_plan(1e-3, 0.4, 3, R=2.0)
        b1 = analysis.trotter_bound(p, plan, 0.5, r_steps=1).weighted
        b2 = analysis.trotter_bound(p, plan, 0.5, r_steps=2).weighted
        assert b1 / b2 == pytest.approx(4.0)

    def test_unknown_variant(self):
        p = analysis._random_params(np.random.default_rng(1), "robin", 2)
        with pytest.raises(ValueError):
            analysis.node_bounds(p, np.zeros(1), 0.1, "spiral")


class TestQuadratureBounds:
    def test_max_step_inverts_discretisation_bound(self):
        dr = analysis.max_step(1e-4, 0.4, 3.0, 1.0)
        assert analysis.discretisation_bound(0.4, 3.0, 1.0, dr) == pytest.approx(1e-4, rel=1e-10)
        with pytest.raises(ValueError):
            analysis.max_step(0.5, 0.4, 3.0, 1.0)

    def test_reports_include_outer_terms(self):
        plan = make_plan(1e-3, 0.4, 6)
        outer = make_outer_plan(1.0, 3, lambda t: np.ones(2))
        reps = analysis.quadrature_bounds(plan, outer, 2.0, 1.0, f_sup=1.0, B_Af=1.0,
                                          measured={"truncation": 1e-4})
        names = [r.name for r in reps]
        assert names[:3] == ["truncation", "discretisation", "inner total"]
        assert "inhomogeneous total" in names and "outer midpoint" in names
        assert reps[0].measured == 1e-4 and math.isnan(reps[1].measured)

    def test_outer_midpoint_bound_on_scalar_integral(self):
        a, T, M_o = 1.5, 1.0, 8
        op = make_outer_plan(T, 3, lambda t: np.array([1.0]))
        approx = np.sum(op.weights * np.exp(-a * (T - op.times)))
        err = abs(approx + math.expm1(-a * T) / a)
        # second derivative of the integrand is a^2 e^{-a (T - s)} <= a^2
        assert err <= analysis.outer_midpoint_bound(T, M_o, 1.0, a ** 2)

    def test_success_probability_estimate(self):
        assert analysis.success_probability_estimate(1.0, 1.0, 0.0) == 1.0
        assert analysis.success_probability_estimate(0.5, 1.0, 0.4) == pytest.approx(0.25 * math.exp(-0.8))


class TestStepRequirement:
    def problem(self, b):
        return fvm.PdeProblem((1.0,), (b,), (1.0,), (fvm.dirichlet(),), "central" if b else "upwind", (5,))

    def test_diffusive_scaling_in_grid(self):
        r5 = analysis.step_requirement(self.problem(0.5), 0.01, 1e-3)
        pr6 = fvm.PdeProblem((1.0,), (0.5,), (1.0,), (fvm.dirichlet(),), "central", (6,))
        r6 = analysis.step_requirement(pr6, 0.01, 1e-3)
        assert r6 / r5 == pytest.approx(8.0, rel=0.01)

    def test_inhomogeneous_needs_radius(self):
        with pytest.raises(ValueError):
            analysis.step_requirement(self.problem(0.5), 0.01, 1e-3, "inhomogeneous")
        assert analysis.step_requirement(self.problem(0.0), 0.01, 1e-3, "inhomogeneous", R=10.0) >= 1

    def test_bad_variant(self):
        with pytest.raises(ValueError):
            analysis.step_requirement(self.problem(0.5), 0.01, 1e-3, "neither")


class TestGateCounts:
    @pytest.mark.parametrize("kind", ["SEL_R", "CSEL_R", "CSEL_P"])
    @pytest.mark.parametrize("n,m", [(5, 3), (6, 4), (8, 4)])
    def test_cnot_counts_match_closed_form(self, kind, n, m):
        g = analysis.gate_counts(kind, n, m)
        assert g["emitted"].cnot == g["formula"].cnot
        assert g["emitted"].phi == g["formula"].phi

    @pytest.mark.parametrize("n,m", [(5, 3), (6, 4), (8, 4)])
    def test_periodic_select_gap_is_one_controlled_ladder_per_node_qubit(self, n, m):
        g = analysis.gate_counts("SEL_P", n, m)
        assert g["formula"].cnot - g["emitted"].cnot == m * (28 * n - 28)

    def test_gate_count_addition(self):
        a = analysis.GateCount(1, ((4, 1),), 2)
        b = analysis.GateCount(2, ((4, 1), (5, 2)), 3)
        s = a + b
        assert s == analysis.GateCount(3, ((4, 2), (5, 2)), 5)
        assert s.single_value() == 3 + 2 * 16 + 2 * 25

    def test_block_cost_lookup(self):
        assert analysis.block_cost("W", 1, 0, 5) == analysis.GateCount(5, (), 0)
        assert analysis.block_cost("P", 2, 1, 5) == analysis.GateCount(3, (), 2)
        with pytest.raises(ValueError):
            analysis.block_cost("W", 2, 3, 5)

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            analysis.gate_counts("SEL_R", 4, 2)
        with pytest.raises(ValueError):
            analysis.table2_formula("SEL_X", 5, 2)


class TestSuites:
    def test_block_suite(self):
        reps = analysis.block_suite(draws=5)
        assert reps and all(r.ok for r in reps)

    def test_eigen_suite(self):
        reps = analysis.eigen_suite()
        assert reps and all(r.ok for r in reps)
