"""Classical references and the catalogue of closed-form test solutions."""
import math

import numpy as np
import pytest
import scipy.sparse as sp

from lchs_fvm import fvm, reference


def random_dissipative(n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, n))
    return X @ X.T / n + 0.2 * (X - X.T)


class TestEvolution:
    @pytest.mark.parametrize("method", ["eig", "krylov"])
    def test_methods_agree_with_pade(self, method):
        A = random_dissipative(12)
        u0 = np.linspace(-1, 1, 12)
        ref = reference.expm_apply(A, u0, 0.7)
        np.testing.assert_allclose(reference.expm_apply(A, u0, 0.7, method), ref, atol=1e-10)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            reference.expm_apply(np.eye(2), np.ones(2), 1.0, "taylor")

    def test_dense_limit(self):
        A = sp.identity(reference.DENSE_LIMIT + 1, format="csr")
        with pytest.raises(ValueError):
            reference.expm_apply(A, np.ones(A.shape[0]), 1.0)

    def test_duhamel_matches_rk4(self):
        A = random_dissipative(6, 1)
        f = lambda t: np.sin(3 * t) * np.arange(6) + 1.0
        exact = reference.duhamel(A, f, 1.2)
        np.testing.assert_allclose(reference.rk4(A, f, np.zeros(6), 1.2, 800), exact, atol=1e-9)

    def test_duhamel_constant_source_closed_form(self):
        A = np.diag([0.5, 2.0])
        out = reference.duhamel(A, lambda t: np.ones(2), 1.0)
        np.testing.assert_allclose(out, -np.expm1(-np.diag(A)) / np.diag(A), atol=1e-12)

    def test_duhamel_zero_horizon(self):
        assert not np.any(reference.duhamel(np.eye(3), lambda t: np.ones(3), 0.0))

    def test_rk4_fourth_order(self):
        A = random_dissipative(5, 2)
        u0 = np.ones(5)
        exact = reference.expm_apply(A, u0, 1.0)
        e1 = np.abs(reference.rk4(A, None, u0, 1.0, 10) - exact).max()
        e2 = np.abs(reference.rk4(A, None, u0, 1.0, 20) - exact).max()
        assert e1 / e2 > 12


def _pde_residual(case, t=0.007, h=1e-4, x=0.37, y=0.61):
    """Central-difference residual of u_t + sum_p (a_p u_p - b_p u_pp) + c u - f."""
    pts = (x, y)[:case.d]
    u = lambda tt, *p: float(case.exact(tt, *p))
    res = (u(t + h, *pts) - u(t - h, *pts)) / (2 * h) + case.c * u(t, *pts)
    for p in range(case.d):
        up, um = list(pts), list(pts)
        up[p] += h
        um[p] -= h
        ux = (u(t, *up) - u(t, *um)) / (2 * h)
        uxx = (u(t, *up) - 2 * u(t, *pts) + u(t, *um)) / h ** 2
        res += case.a[p] * ux - case.b[p] * uxx
    if case.f is not None:
        res -= float(case.f(t, *pts))
    return res


class TestCases:
    @pytest.mark.parametrize("cid", sorted(reference.EXPERIMENTS))
    def test_closed_form_satisfies_pde(self, cid):
        assert abs(_pde_residual(reference.get_case(cid))) < 1e-5

    @pytest.mark.parametrize("cid", sorted(reference.EXPERIMENTS))
    def test_initial_condition_consistent(self, cid):
        case = reference.get_case(cid)
        pr = case.problem()
        if case.u0 is None:
            assert not np.any(case.exact(0.0, *pr.grid()))
        else:
            np.testing.assert_allclose(pr.initial_vector(), case.exact(0.0, *pr.grid()), atol=1e-14)

    @pytest.mark.parametrize("cid", [1, 4, 7])
    def test_dirichlet_boundaries_vanish(self, cid):
        case = reference.get_case(cid)
        assert abs(case.exact(0.01, 0.0)) < 1e-14 and abs(case.exact(0.01, 1.0)) < 1e-12

    def test_neumann_case_has_zero_flux(self):
        h = 1e-6
        case = reference.get_case(2)
        for x in (0.0, 1.0):
            assert abs(case.exact(0.01, x + h) - case.exact(0.01, x - h)) / (2 * h) < 1e-6

    @pytest.mark.parametrize("cid", [3, 5])
    def test_periodic_cases_wrap(self, cid):
        case = reference.get_case(cid)
        assert case.exact(0.01, 0.0) == pytest.approx(case.exact(0.01, 1.0), abs=1e-12)

    def test_mixed_two_dimensional_boundaries(self):
        case = reference.get_case(8)
        assert abs(case.exact(0.01, 1.0, 0.3)) < 1e-14
        h = 1e-6
        assert abs(case.exact(0.01, h, 0.3) - case.exact(0.01, -h, 0.3)) / (2 * h) < 1e-6

    def test_unknown_case(self):
        with pytest.raises(KeyError):
            reference.get_case(9)
        with pytest.raises(KeyError):
            reference.get_case("x")

    def test_analytic_checks_domain(self):
        with pytest.raises(ValueError):
            reference.analytic(1, 0.0, 1.5)
        with pytest.raises(ValueError):
            reference.analytic(8, 0.0, 0.5)
        assert reference.analytic(1, 0.0, 0.5) == pytest.approx(1.0)

    def test_scheme_guard(self):
        with pytest.raises(ValueError):
            reference.get_case(1).problem("upwind")

    def test_radius_rules(self):
        c3 = reference.get_case(3)
        assert c3.R("upwind", 4) == pytest.approx(1.6 * 16)
        assert c3.R("central", 4) is None and c3.plan("central") is None
        assert reference.get_case(6).R("upwind", 4) == 34.0
        assert reference.get_case(6).default_m("upwind") == 4


class TestTables:
    def test_every_table_names_a_known_case_and_scheme(self):
        for t in reference.PAPER_TABLES:
            case = reference.get_case(t.experiment)
            assert t.scheme in case.schemes
            assert t.sweep in ("n", "m", "m_o")

    def test_table_runs_apply_the_sweep(self):
        t = next(t for t in reference.PAPER_TABLES if t.number == 4)
        runs = list(reference.table_runs(t))
        assert [r[1] for r in runs] == [3, 4, 5]
        assert {r[0] for r in runs} == {9}

    def test_duplicate_tables_carry_the_same_values(self):
        rows = {t.number: t.rows for t in reference.PAPER_TABLES}
        assert rows[3] == rows[5] and rows[4] == rows[6]


class TestClassicalCost:
    def test_stability_limited(self):
        # diffusion term dominates on a fine grid
        c = reference.classical_cost(1, 10, 2, 1.0, 1e-3, 0.0, 1.0, 2.0 ** -10)
        assert c == pytest.approx(3 * 2 ** 10 * 2.0 ** 20)

    def test_accuracy_limited(self):
        c = reference.classical_cost(1, 2, 1, 1.0, 1e-3, 0.0, 0.0, 0.25)
        assert c == pytest.approx(3 * 4 * 1e3)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            reference.classical_cost(1, 2, 1, 0.0, 1e-3, 0.0, 0.0, 0.25)


def test_grid_matches_fvm_centres():
    pr = reference.get_case(10).problem(n=2)
    x, y = pr.grid()
    c = (np.arange(4) + 0.5) / 4
    np.testing.assert_allclose(x, np.repeat(c, 4))
    np.testing.assert_allclose(y, np.tile(c, 4))
    assert isinstance(pr, fvm.PdeProblem)
    assert math.isclose(pr.lengths[0], 1.0)
