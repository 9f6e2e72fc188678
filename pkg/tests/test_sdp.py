import dataclasses

import numpy as np
import pytest

from magbeam.baseline import OracleConfig, multistart_qcqp
from magbeam.closedform import solve_unconstrained
from magbeam.errors import InfeasibleProblem, RankDeficiencyUnexpected, Unbounded, ZeroCoupling
from magbeam.instances import PAPER_OMEGA, paper_params
from magbeam.model import RxCoil, Status, SystemParams, TxCoil, build_system, load_power
from magbeam.sdp import (SdrSolution, extract_rank_one, formulate, max_deliverable_power,
                         solve_p1, solve_sdr, verify_kkt)

from conftest import random_models

TABLE2_60 = np.array([7.0698, 0.0342, 0.1296, 0.0342, 0.6617])


@pytest.fixture(scope="module")
def sol60(paper):
    return solve_p1(paper, 60.0)


@pytest.fixture(scope="module")
def sol73(paper):
    return solve_p1(paper, 73.5)


class TestFormulate:
    def test_trivial_threshold(self, trivial):
        prob = formulate(trivial, 0.5)
        assert prob.threshold == pytest.approx(1.0)
        assert prob.voltage_idx == () and prob.current_idx == ()

    def test_paper_threshold(self, paper):
        prob = formulate(paper, 60.0)
        assert prob.threshold == pytest.approx(2 * 50.336**2 * 60 / (PAPER_OMEGA**2 * 50), rel=1e-14)
        assert len(prob.constraints()) == 11

    def test_hermitian_rows(self, paper):
        for _, _, H, _, _ in formulate(paper, 60.0).constraints():
            assert np.max(np.abs(H - H.conj().T)) <= 1e-12 * np.max(np.abs(H))

    def test_rejects(self, paper):
        with pytest.raises(ValueError):
            formulate(paper, 0.0)
        with pytest.raises(ZeroCoupling):
            formulate(build_system(paper_params().replace(m=np.zeros(5))), 1.0)


class TestPaperResults:
    def test_beta60(self, sol60):
        assert sol60.status is Status.OPTIMAL
        assert sol60.total_power == pytest.approx(68.87, rel=5e-3)
        assert np.abs(sol60.currents) == pytest.approx(TABLE2_60, rel=1e-2)
        assert sol60.binding == ("P0",)

    def test_beta60_frozen(self, sol60):
        assert sol60.total_power == pytest.approx(68.877144577683, rel=1e-9)
        assert np.abs(sol60.currents) == pytest.approx(
            [7.069905, 0.034251, 0.129812, 0.034251, 0.661337], rel=1e-5)

    def test_beta60_matches_closedform(self, paper_free, sol60):
        cf = solve_unconstrained(paper_free, 60.0)
        assert sol60.currents.real == pytest.approx(cf.currents, rel=1e-4, abs=1e-8)

    def test_beta73(self, sol73):
        mag = np.abs(sol73.currents)
        assert mag[[0, 2, 4]] == pytest.approx(7.071, rel=1e-3)
        assert mag[[1, 3]] == pytest.approx(3.499, rel=1e-2)
        assert {"A1", "A3", "A5"} <= set(sol73.binding)
        # i3 is opposite in sign to i1
        assert np.real(sol73.currents[2] / sol73.currents[0]) < 0

    def test_beta73_frozen(self, sol73):
        assert sol73.total_power == pytest.approx(103.35112, rel=1e-6)
        assert np.abs(sol73.currents[1]) == pytest.approx(3.51747, rel=1e-5)

    def test_beta100_infeasible(self, paper):
        with pytest.raises(InfeasibleProblem) as info:
            solve_p1(paper, 100.0)
        cert = info.value.certificate
        assert 73.69 <= cert["max_load_power_w"] < 100.0
        assert np.all(cert["rho"] >= 0) and np.all(cert["mu"] >= 0)


class TestKkt:
    def test_paper_residuals(self, sol60, sol73):
        for sol in (sol60, sol73):
            kkt = sol.info["kkt"]
            assert kkt.max_residual <= 1e-6
            assert kkt.ok()
            assert sol.info["rank_ratio"] <= 1e-6

    def test_lambda_perturbation_detected(self, paper, sol60):
        sdr = sol60.info["sdr"]
        bad = dataclasses.replace(sdr, lam=1.1 * sdr.lam)
        assert verify_kkt(paper, 60.0, bad).stationarity > 1e-3

    def test_zero_lambda_flags_complementarity(self, paper, sol60):
        sdr = sol60.info["sdr"]
        prob = sdr.problem
        bad = dataclasses.replace(sdr, lam=0.0, S=prob.dual_matrix(0.0, sdr.rho, sdr.mu))
        rep = verify_kkt(paper, 60.0, bad)
        assert "complementarity" in rep.flags

    def test_full_rank_dual(self, sol73):
        kkt = sol73.info["kkt"]
        assert kkt.full_rank and kkt.rank_X == 1


class TestExtraction:
    def test_exact_rank_one(self):
        v = np.array([1.0, 1j])
        i = extract_rank_one(SdrSolution(X=np.outer(v, v.conj())))
        assert abs(abs(np.vdot(i, v)) - 2.0) <= 1e-12

    def test_identity_rejected(self):
        with pytest.raises(RankDeficiencyUnexpected):
            extract_rank_one(SdrSolution(X=np.eye(3)))


def test_real_and_complex_embeddings_agree(paper):
    for beta0 in (60.0, 73.5):
        prob = formulate(paper, beta0)
        a = solve_sdr(prob, embedding="real", polish=False)
        b = solve_sdr(prob, embedding="complex", polish=False)
        assert a.objective == pytest.approx(b.objective, rel=1e-9)


def test_unconstrained_equals_closedform(paper_free):
    for beta0 in (1.0, 60.0, 500.0):
        a = solve_p1(paper_free, beta0).total_power
        b = solve_unconstrained(paper_free, beta0).solution.total_power
        assert a == pytest.approx(b, rel=1e-6)


def test_monotone_in_beta0(paper):
    powers = [solve_p1(paper, b).total_power for b in np.linspace(5.0, 73.0, 12)]
    assert all(q >= p for p, q in zip(powers, powers[1:]))


def test_random_tightness_and_oracle_dominance():
    for model, beta0 in random_models(2024, 8, sizes=(2, 3, 4)):
        sol = solve_p1(model, beta0)
        assert sol.status is Status.OPTIMAL
        assert sol.info["rank_ratio"] <= 1e-6
        assert load_power(model, sol.currents) >= beta0 * (1 - 1e-7)
        orc = multistart_qcqp(model, beta0, OracleConfig(restarts=4, seed=0))
        assert sol.total_power <= orc.total_power * (1 + 1e-6)


class TestMaxPower:
    def test_paper(self, paper):
        beta, sol = max_deliverable_power(paper)
        assert beta == pytest.approx(73.6, rel=2e-2)
        assert beta == pytest.approx(73.69232, rel=1e-5)
        assert sol.status is Status.OPTIMAL

    def test_single_coil_current_limited(self):
        p = SystemParams(2.0, [TxCoil(0.5, max_current=3.0)], RxCoil(0.2, 1.5), [0.7], [[0.0]])
        model = build_system(p)
        beta, _ = max_deliverable_power(model)
        exact = p.omega**2 * 1.5 / (2 * p.r0**2) * 0.7**2 * 3.0**2
        assert beta == pytest.approx(exact, rel=2e-6)
        assert beta <= exact * (1 + 1e-9)

    def test_limits_doubled(self):
        p = SystemParams(2.0, [TxCoil(0.5, max_current=1.0), TxCoil(0.8, max_current=2.0)],
                         RxCoil(0.2, 1.5), [0.7, -0.4], [[0.0, 0.1], [0.1, 0.0]])
        b1, _ = max_deliverable_power(build_system(p))
        p2 = p.replace(tx=[TxCoil(0.5, max_current=2.0), TxCoil(0.8, max_current=4.0)])
        b2, _ = max_deliverable_power(build_system(p2))
        assert b2 == pytest.approx(4 * b1, rel=5e-6)

    def test_unbounded(self, paper_free):
        with pytest.raises(Unbounded):
            max_deliverable_power(paper_free)
