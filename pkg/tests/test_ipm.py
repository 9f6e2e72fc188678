import numpy as np
import pytest

from magbeam import ipm


def _no_slack(m):
    return np.zeros((m, 0)), np.zeros(0)


def test_min_eigenvalue_sdp():
    C = np.diag([3.0, 1.0, 2.0])
    a, c = _no_slack(1)
    res = ipm.solve(ipm.ConeProblem(C, np.array([np.eye(3)]), np.array([1.0]), a, c))
    assert res.status == "optimal"
    assert res.pobj == pytest.approx(1.0, rel=1e-8)
    assert res.X[1, 1] == pytest.approx(1.0, rel=1e-6)


def test_inequality_with_slack():
    # min tr(X)  s.t.  X12 >= 1  ->  X = [[1, 1], [1, 1]]
    E = np.array([[0.0, 0.5], [0.5, 0.0]])
    res = ipm.solve(ipm.ConeProblem(np.eye(2), np.array([E]), np.array([1.0]),
                                    np.array([[-1.0]]), np.zeros(1)))
    assert res.status == "optimal"
    assert res.pobj == pytest.approx(2.0, rel=1e-8)
    assert res.X == pytest.approx(np.ones((2, 2)), abs=1e-6)


def test_hermitian_block():
    H = np.array([[2.0, 1j], [-1j, 2.0]])
    a, c = _no_slack(1)
    res = ipm.solve(ipm.ConeProblem(H, np.array([np.eye(2, dtype=complex)]), np.array([1.0]), a, c))
    assert res.status == "optimal"
    assert res.pobj == pytest.approx(1.0, rel=1e-8)


def test_infeasible_certificate():
    # X11 + s = -1 with X >= 0, s >= 0 has no solution
    res = ipm.solve(ipm.ConeProblem(np.eye(2), np.array([np.diag([1.0, 0.0])]), np.array([-1.0]),
                                    np.array([[1.0]]), np.zeros(1)))
    assert res.status == "infeasible"
    y = res.certificate["y"]
    # Farkas: b.y > 0 while -A^T y is in the dual cone
    assert -1.0 * y[0] > 0
    assert y[0] < 0


def test_gap_identity_along_path():
    E = np.array([[0.0, 0.5], [0.5, 0.0]])
    res = ipm.solve(ipm.ConeProblem(np.eye(2), np.array([E]), np.array([1.0]),
                                    np.array([[-1.0]]), np.zeros(1)))
    for h in res.history:
        gap = h["pobj"] - h["dobj"]
        assert gap - h["residual_term"] == pytest.approx(h["complementarity"], rel=1e-8, abs=1e-10)
        assert h["complementarity"] >= 0
