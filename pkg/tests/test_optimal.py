import math
import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from cloneq.ensembles import (
    ObservableSet,
    eigenstate_ensemble,
    ensemble_from_bases,
    mub_bases,
    participation,
    participation_total,
)
from cloneq.errors import ConvergenceWarning, NotPrime, TooManyBases
from cloneq.optimal import (
    SWEEP_COLUMNS,
    BasisOptConfig,
    _ascent_direction,
    fopt_mub,
    g_function,
    mr_fidelity_bounds,
    optimal_cloning_fidelity,
    optimal_from_participation,
    optimize_basis,
    q_optimal,
    qc_upper_bound,
    search_basis,
    sweep,
    sweep_row,
)
from cloneq.qcm import average_cloning_fidelity, f_avg, params_from_q, q_regime_max
from cloneq.qmath import OrthonormalBasis, haar_unitary, random_hermitian

FAST = BasisOptConfig(restarts=4)


def grid_best(ratio, d, points):
    qs = np.linspace(0.0, q_regime_max(d), points)
    ps = np.sqrt(np.maximum(0.0, 1 - 2 * (d - 1) * qs**2))
    vals = ratio * (ps**2 - 2 * ps * qs) + 2 * ps * qs + (d - 1) * qs**2
    k = int(np.argmax(vals))
    return qs[k], vals[k]


def commuting_set(d, n, rng):
    u = haar_unitary(d, rng)
    return ObservableSet(tuple(u @ np.diag(rng.normal(size=d)) @ u.conj().T for _ in range(n)))


class TestGFunction:
    def test_qubit_mub_pair(self):
        assert g_function(3, 4, 2) == pytest.approx(math.sqrt(2), abs=1e-15)

    @pytest.mark.parametrize("d", [2, 5, 7])
    def test_full_mub(self, d):
        want = -2 * math.sqrt(2 * (d - 1)) / (d - 3)
        assert g_function(2 * d, d * (d + 1), d) == pytest.approx(want, rel=1e-14)

    def test_full_mub_d3_singular(self):
        assert math.isinf(g_function(6, 12, 3))

    def test_commuting_limit(self):
        assert g_function(8, 8, 4) == 0.0


class TestQOptimal:
    def test_qubit_mub_pair(self):
        params, f = optimal_from_participation(3, 4, 2)
        assert params.q == pytest.approx(0.325057583672, abs=1e-12)
        assert f == pytest.approx(0.841506350946, abs=1e-12)
        assert params.meta["branch"] == "closed"

    def test_qutrit_mub_pair(self):
        _, f = optimal_from_participation(4, 6, 3)
        assert f == pytest.approx(0.769672331458, abs=1e-12)

    def test_commuting_gives_q_zero(self):
        params, f = optimal_from_participation(6, 6, 3)
        assert params.q == 0.0 and f == 1.0

    def test_half_branch(self):
        params = q_optimal(6, 12, 3)
        assert params.meta["branch"] == "half"
        assert params.q == pytest.approx(1 / (2 * math.sqrt(2)), abs=1e-15)

    @pytest.mark.parametrize("d,ratio", [(2, 0.6), (2, 0.9), (3, 0.55), (3, 0.8), (5, 0.7), (7, 0.95)])
    def test_against_fine_grid(self, d, ratio):
        points = int(q_regime_max(d) / 1e-6) + 1
        q_grid, f_grid = grid_best(ratio, d, points)
        params = q_optimal(ratio * 1000, 1000, d)
        assert abs(params.q - q_grid) <= 1e-6
        assert f_avg(ratio, d, params.p, params.q) >= f_grid - 1e-12

    def test_maximality_random(self, rng):
        for _ in range(50):
            d = int(rng.integers(2, 9))
            ratio = rng.uniform(max(1 / d, 2 / (d + 1)), 1.0)
            params = q_optimal(ratio * 1000, 1000, d)
            _, f_grid = grid_best(ratio, d, 100_000)
            assert f_grid - f_avg(ratio, d, params.p, params.q) <= 1e-9

    def test_below_regime_threshold_is_clamped(self):
        # A/M = 1/d sits below 2/(d+1) for d > 1: the stationary point lies beyond the regime.
        params = q_optimal(5, 25, 5)
        assert params.meta["branch"] == "clamped"
        assert params.q == pytest.approx(q_regime_max(5))

    def test_d1_rejected(self):
        with pytest.raises(ValueError):
            q_optimal(1, 1, 1)


class TestMubClosedForms:
    @pytest.mark.parametrize("d", [2, 3, 5, 7])
    def test_full_set_universal(self, d):
        f, q = fopt_mub(d + 1, d)
        assert q == pytest.approx(1 / math.sqrt(2 * (d + 1)), abs=1e-12)
        assert f == pytest.approx((d + 3) / (2 * (d + 1)), abs=1e-12)

    def test_d3_full(self):
        f, q = fopt_mub(4, 3)
        assert f == pytest.approx(0.75, abs=1e-15)
        assert q == pytest.approx(1 / (2 * math.sqrt(2)), abs=1e-15)

    def test_too_many(self):
        with pytest.raises(TooManyBases):
            fopt_mub(4, 2)

    def test_single_basis_perfect(self):
        assert fopt_mub(1, 5) == (1.0, 0.0)

    def test_upper_bound_branches(self):
        assert qc_upper_bound(2, 2) == pytest.approx(0.158493649054, abs=1e-12)
        assert qc_upper_bound(3, 2) == pytest.approx(1 / 6, abs=1e-15)
        assert qc_upper_bound(10, 2) == pytest.approx(1 / 6, abs=1e-15)

    def test_upper_bound_large_d_limit(self):
        d = 4001
        assert qc_upper_bound(d + 1, d) == pytest.approx((d - 1) / (2 * (d + 1)), abs=1e-12)
        assert qc_upper_bound(d + 1, d) < 0.5

    def test_mr_bounds(self):
        f, qb = mr_fidelity_bounds(3, 5)
        assert f == (3 + 5 - 1) / (3 * 5)
        assert qb == pytest.approx((1 - 1 / 3) * (1 - 1 / 5), abs=1e-15)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_mr_equals_q0_fidelity(self, d):
        for n in range(1, d + 2):
            s = ensemble_from_bases(mub_bases(d, n))
            f0 = average_cloning_fidelity(s, s.group(0), params_from_q(d, 0.0))
            assert f0 == pytest.approx(mr_fidelity_bounds(n, d)[0], abs=1e-12)


class TestBasisSearch:
    def test_gradient_matches_finite_difference(self, rng):
        d = 4
        states = ensemble_from_bases([OrthonormalBasis(haar_unitary(d, rng)) for _ in range(3)]).states
        u = haar_unitary(d, rng)
        value, g = _ascent_direction(states.conj(), u)
        assert value == pytest.approx(participation_total(states, u), abs=1e-12)
        h = random_hermitian(d, rng)
        x = 1j * h  # anti-Hermitian direction
        eps = 1e-6
        fd = (participation_total(states, u @ expm(eps * x))
              - participation_total(states, u @ expm(-eps * x))) / (2 * eps)
        analytic = float(np.real(np.trace(g.conj().T @ x)))
        assert analytic == pytest.approx(fd, abs=1e-6)

    @pytest.mark.parametrize("n,d", [(2, 2), (3, 2), (2, 3), (4, 3), (2, 5)])
    def test_mub_recovery(self, n, d):
        s = ensemble_from_bases(mub_bases(d, n))
        _, a = optimize_basis(s, BasisOptConfig(restarts=8))
        assert a == pytest.approx(n + d - 1, abs=1e-4)

    def test_soundness_against_random_bases(self, rng):
        s = ensemble_from_bases([OrthonormalBasis(haar_unitary(3, rng)) for _ in range(3)])
        basis, a = optimize_basis(s, FAST)
        assert participation(s, basis).A == pytest.approx(a, abs=1e-12)
        for _ in range(200):
            assert participation(s, OrthonormalBasis(haar_unitary(3, rng))).A <= a + 1e-9

    def test_value_in_range(self, rng):
        s = eigenstate_ensemble(ObservableSet((random_hermitian(4, rng), random_hermitian(4, rng))))
        res = search_basis(s, FAST)
        assert s.size / s.dim - 1e-12 <= res.value <= s.size + 1e-12
        assert len(res.records) == 2 + FAST.restarts
        assert res.converged

    def test_deterministic(self, rng):
        s = eigenstate_ensemble(ObservableSet((random_hermitian(3, rng), random_hermitian(3, rng))))
        r1 = search_basis(s, FAST)
        r2 = search_basis(s, BasisOptConfig(restarts=4, workers=3))
        assert r1.value == r2.value
        np.testing.assert_array_equal(r1.basis.vectors, r2.basis.vectors)

    def test_convergence_warning(self, rng):
        s = eigenstate_ensemble(ObservableSet((random_hermitian(4, rng), random_hermitian(4, rng))))
        with pytest.warns(ConvergenceWarning):
            rep = optimal_cloning_fidelity(s, BasisOptConfig(restarts=2, max_iters=1))
        assert not rep.converged

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BasisOptConfig(restarts=0)
        with pytest.raises(ValueError):
            BasisOptConfig(value_tol=0)


class TestPipeline:
    def test_commuting_example(self):
        x = ObservableSet((np.diag([1.0, -1.0]), np.diag([3.0, -1.0])))
        rep = optimal_cloning_fidelity(eigenstate_ensemble(x), FAST)
        assert rep.Q_c <= 1e-12
        assert rep.params_opt.q == 0.0

    def test_qubit_mub_pair(self):
        rep = optimal_cloning_fidelity(ensemble_from_bases(mub_bases(2, 2)), FAST)
        assert rep.A_opt == pytest.approx(3.0, abs=1e-9)
        assert rep.Q_c == pytest.approx(0.158493649054, abs=1e-9)

    def test_joint_grid_qubit_mub_pair(self):
        # Joint search over basis angle and q through the explicit formula.
        s = ensemble_from_bases(mub_bases(2, 2))
        rep = optimal_cloning_fidelity(s, FAST)
        best = 0.0
        for t in np.linspace(0, np.pi, 181):
            v = np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]], dtype=complex)
            ratio = participation(s, OrthonormalBasis(v)).A / 4
            best = max(best, grid_best(ratio, 2, 2001)[1])
        assert best <= rep.F_opt + 1e-12
        assert best >= rep.F_opt - 1e-4

    def test_d3_full_mub(self):
        rep = optimal_cloning_fidelity(ensemble_from_bases(mub_bases(3)), FAST)
        assert rep.F_opt == pytest.approx(0.75, abs=1e-9)

    def test_report_dict(self):
        rep = optimal_cloning_fidelity(ensemble_from_bases(mub_bases(2, 2)), FAST)
        d = rep.to_dict()
        for key in ("A_opt", "q_opt", "F_opt", "Q_c", "G", "bound_Qc", "bound_Q", "basis_opt", "diagnostics"):
            assert key in d
        assert len(d["diagnostics"]["restarts"]) == 2 + FAST.restarts

    def test_faithfulness(self, rng):
        for k in range(10):
            d = 2 + k % 3
            rep = optimal_cloning_fidelity(eigenstate_ensemble(commuting_set(d, 3, rng)), FAST)
            assert rep.Q_c <= 1e-6
        for k in range(10):
            d = 2 + k % 3
            x = ObservableSet((random_hermitian(d, rng), random_hermitian(d, rng)))
            rep = optimal_cloning_fidelity(eigenstate_ensemble(x), FAST)
            assert rep.Q_c >= 1e-4
            assert rep.Q_c <= rep.bound_Qc + 1e-9

    def test_qc_monotone_under_adding_observable(self, rng):
        a, b, c = (random_hermitian(3, rng) for _ in range(3))
        small = optimal_cloning_fidelity(eigenstate_ensemble(ObservableSet((a, b))), FAST)
        assert small.Q_c <= small.bound_Qc + 1e-9
        big = optimal_cloning_fidelity(eigenstate_ensemble(ObservableSet((a, b, c))), FAST)
        assert big.Q_c <= big.bound_Qc + 1e-9


class TestSweeps:
    def test_vary_d(self):
        rows = sweep("vary_d", [2, 3, 5, 7, 11], 2)
        assert [r["d"] for r in rows] == [2, 3, 5, 7, 11]
        qc = [r["Q_c"] for r in rows]
        assert all(b > a for a, b in zip(qc, qc[1:]))
        assert all(r["Q_c"] < r["Q_bound"] for r in rows)
        assert set(rows[0]) == set(SWEEP_COLUMNS)

    def test_vary_n(self):
        rows = sweep("vary_N", range(2, 13), 11)
        qc = [r["Q_c"] for r in rows]
        assert all(b > a for a, b in zip(qc, qc[1:]))
        assert all(r["Q_c"] < r["Q_bound"] for r in rows)
        assert rows[-1]["Q_c"] == pytest.approx(0.416666666667, abs=1e-12)

    def test_construct_matches_closed_form(self):
        closed = sweep_row(2, 5)
        built = sweep_row(2, 5, construct=True, cfg=FAST)
        assert built["Q_c"] == pytest.approx(closed["Q_c"], abs=1e-6)

    def test_construct_needs_prime(self):
        with pytest.raises(NotPrime):
            sweep_row(2, 4, construct=True)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            sweep("vary_x", [2], 2)
