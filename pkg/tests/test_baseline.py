import numpy as np
import pytest
from hypothesis import given, strategies as st

from magbeam.baseline import (OracleConfig, equal_current_max_power, equal_current_min_power,
                              multistart_qcqp)
from magbeam.closedform import solve_unconstrained
from magbeam.errors import NoFeasiblePointFound, Unbounded, ZeroCoupling
from magbeam.instances import paper_params
from magbeam.model import RxCoil, Status, SystemParams, TxCoil, build_system, load_power
from magbeam.sdp import max_deliverable_power, solve_p1

from conftest import random_models

FAST = OracleConfig(restarts=6, seed=0)


@given(st.floats(0.01, 60.0))
def test_equal_current_efficiency_independent_of_beta0(beta0):
    model = build_system(paper_params(limits=False))
    sol = equal_current_min_power(model, beta0)
    assert sol.efficiency == pytest.approx(0.62027, abs=5e-5)
    assert load_power(model, sol.currents) == pytest.approx(beta0, rel=1e-12)


def test_equal_current_frozen(paper_free):
    sol = equal_current_min_power(paper_free, 60.0)
    assert sol.total_power == pytest.approx(60.0 / 0.6202703, rel=1e-5)
    assert np.allclose(sol.currents, sol.currents[0])


def test_equal_current_single_tx_is_optimal(trivial):
    a = equal_current_min_power(trivial, 0.5).total_power
    b = solve_unconstrained(trivial, 0.5).solution.total_power
    assert a == pytest.approx(b, rel=1e-12)


def test_equal_current_zero_sum():
    p = SystemParams(1.0, [TxCoil(1.0), TxCoil(1.0)], RxCoil(0.1, 1.0), [1e-6, -1e-6],
                     np.zeros((2, 2)))
    with pytest.raises(ZeroCoupling):
        equal_current_min_power(build_system(p), 1.0)


def test_equal_current_marks_infeasible(paper):
    sol = equal_current_min_power(paper, 60.0)
    assert sol.status is Status.INFEASIBLE
    assert sol.violated


def test_equal_current_max_power(paper):
    beta, sol = equal_current_max_power(paper)
    assert beta == pytest.approx(36.0, rel=3e-2)
    assert beta == pytest.approx(36.7950, rel=1e-4)
    assert any(b.startswith("V") for b in sol.binding)


def test_equal_current_max_power_current_limited():
    model = build_system(paper_params().replace(
        tx=[TxCoil(0.336, None, 5 * np.sqrt(2)) for _ in range(5)]))
    beta, sol = equal_current_max_power(model)
    assert np.abs(sol.currents) == pytest.approx(5 * np.sqrt(2), rel=1e-12)
    assert beta == pytest.approx(69.3668, rel=1e-5)


def test_equal_current_unbounded(paper_free):
    with pytest.raises(Unbounded):
        equal_current_max_power(paper_free)


def test_beamforming_dominates_equal_current(paper):
    bf, _ = max_deliverable_power(paper)
    eq, _ = equal_current_max_power(paper)
    assert bf >= eq
    for beta0 in (5.0, 20.0, 35.0):
        assert solve_p1(paper, beta0).total_power <= equal_current_min_power(paper, beta0).total_power


class TestOracle:
    def test_deterministic(self, paper):
        a = multistart_qcqp(paper, 60.0, FAST)
        b = multistart_qcqp(paper, 60.0, FAST)
        assert np.array_equal(a.currents, b.currents)
        assert a.info == b.info

    def test_threads_do_not_change_result(self, paper):
        a = multistart_qcqp(paper, 60.0, FAST)
        b = multistart_qcqp(paper, 60.0, OracleConfig(restarts=6, seed=0, workers=3))
        assert np.array_equal(a.currents, b.currents)

    def test_paper_points(self, paper):
        for beta0 in (60.0, 73.5):
            orc = multistart_qcqp(paper, beta0, FAST)
            ref = solve_p1(paper, beta0)
            assert orc.total_power == pytest.approx(ref.total_power, rel=1e-4)
            assert orc.total_power >= ref.total_power * (1 - 1e-6)
            assert not orc.violated

    def test_random_instances(self):
        for model, beta0 in random_models(11, 5):
            orc = multistart_qcqp(model, beta0, FAST)
            ref = solve_p1(model, beta0)
            assert orc.total_power == pytest.approx(ref.total_power, rel=1e-4)

    def test_infeasible_target(self, paper):
        with pytest.raises(NoFeasiblePointFound):
            multistart_qcqp(paper, 100.0, OracleConfig(restarts=2, seed=0, outer_iters=10))

    def test_rejects(self, paper):
        with pytest.raises(ValueError):
            multistart_qcqp(paper, -1.0)
