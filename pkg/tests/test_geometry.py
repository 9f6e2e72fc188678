import numpy as np
import pytest
from hypothesis import given, strategies as st

from magbeam.errors import (DegenerateGeometry, InvalidGeometry, LoopsIntersect,
                            QuadratureTooCoarse)
from magbeam.geometry import (MU0, Loop, ellipk_ellipe, inductance_matrices,
                              mutual_inductance_coaxial, mutual_inductance_neumann,
                              self_inductance_loop)

Z = (0.0, 0.0, 1.0)


def coax(r1, r2, d, turns=(1, 1)):
    a = Loop((0, 0, 0), Z, r1, turns[0])
    b = Loop((0, 0, d), Z, r2, turns[1])
    return a, b


def test_elliptic_reference_values():
    K, E = ellipk_ellipe(0.0)
    assert K == E == pytest.approx(np.pi / 2, rel=1e-15)
    # K(1/sqrt 2) = Gamma(1/4)^2 / (4 sqrt(pi))
    K, E = ellipk_ellipe(np.sqrt(0.5))
    assert K == pytest.approx(1.8540746773013719, rel=1e-14)
    assert E == pytest.approx(1.3506438810476755, rel=1e-14)
    with pytest.raises(ValueError):
        ellipk_ellipe(1.0)


def test_coaxial_frozen():
    assert mutual_inductance_coaxial(0.1, 0.1, 0.1) == pytest.approx(4.9407846307982733e-08,
                                                                     rel=1e-13)


def test_coaxial_far_field_dipole():
    r1, r2, d = 0.01, 0.02, 5.0
    dipole = MU0 * np.pi * r1**2 * r2**2 / (2 * (d**2 + (r1 + r2) ** 2) ** 1.5)
    assert mutual_inductance_coaxial(r1, r2, d) == pytest.approx(dipole, rel=1e-4)


def test_self_inductance():
    assert self_inductance_loop(0.1, 1e-4, 1) == pytest.approx(8.780370480391046e-07, rel=1e-13)
    assert self_inductance_loop(0.1, 1e-4, 3) == pytest.approx(9 * 8.780370480391046e-07)
    with pytest.raises(InvalidGeometry):
        self_inductance_loop(1e-3, 1e-3)


def test_neumann_matches_coaxial():
    a, b = coax(0.1, 0.1, 0.1)
    assert mutual_inductance_neumann(a, b) == pytest.approx(
        mutual_inductance_coaxial(0.1, 0.1, 0.1), rel=1e-12)


def test_orthogonal_loops_decouple():
    a = Loop((0, 0, 0), Z, 0.1)
    b = Loop((0.3, 0, 0), (1.0, 0.0, 0.0), 0.1)
    assert abs(mutual_inductance_neumann(a, b)) <= 1e-20


def test_error_estimate_returned():
    a, b = coax(0.1, 0.05, 0.08)
    m, err = mutual_inductance_neumann(a, b, with_error=True)
    assert 0 <= err <= 1e-6 * abs(m)


radii = st.floats(0.02, 0.5)
gaps = st.floats(0.02, 1.0)


@given(radii, radii, gaps)
def test_neumann_vs_coaxial_property(r1, r2, d):
    a, b = coax(r1, r2, d)
    try:
        quad = mutual_inductance_neumann(a, b, 512)
    except QuadratureTooCoarse:
        return
    assert quad == pytest.approx(mutual_inductance_coaxial(r1, r2, d), rel=1e-6)


def _loop(draw_c, draw_ax, r):
    ax = np.asarray(draw_ax, dtype=float)
    ax = ax / np.linalg.norm(ax)
    return Loop(tuple(draw_c), tuple(ax), r)


vec = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
    lambda v: np.linalg.norm(v) > 0.1)


@given(vec, vec, st.floats(0.05, 0.2), st.floats(0.05, 0.2))
def test_reciprocity_and_flip_exact(ax1, ax2, r1, r2):
    a = _loop((0.0, 0.0, 0.0), ax1, r1)
    b = _loop((0.0, 0.2, 0.6), ax2, r2)
    try:
        m = mutual_inductance_neumann(a, b)
    except (QuadratureTooCoarse, LoopsIntersect):
        return
    assert mutual_inductance_neumann(b, a) == m
    assert mutual_inductance_neumann(a.flipped(), b) == -m
    assert mutual_inductance_neumann(a, b.flipped()) == -m


@given(st.integers(1, 5), st.integers(1, 5))
def test_turns_linear(n1, n2):
    a, b = coax(0.1, 0.07, 0.15)
    one = mutual_inductance_neumann(a, b)
    a, b = coax(0.1, 0.07, 0.15, (n1, n2))
    assert mutual_inductance_neumann(a, b) == pytest.approx(n1 * n2 * one, rel=1e-14)


def test_decays_with_distance():
    vals = [mutual_inductance_coaxial(0.1, 0.1, d) for d in np.linspace(0.01, 2.0, 40)]
    assert all(x > y > 0 for x, y in zip(vals, vals[1:]))


def test_small_modulus_series_continuous():
    # the bracket switches to a power series at k^2 = 0.25
    r = 0.1
    d = np.sqrt(4 * r * r / 0.25 - 4 * r * r)
    lo = mutual_inductance_coaxial(r, r, d * (1 + 1e-9))
    hi = mutual_inductance_coaxial(r, r, d * (1 - 1e-9))
    assert lo == pytest.approx(hi, rel=1e-7)


class TestErrors:
    def test_bad_loops(self):
        with pytest.raises(InvalidGeometry):
            Loop((0, 0, 0), (0, 0, 2), 0.1)
        with pytest.raises(InvalidGeometry):
            Loop((0, 0, 0), Z, -0.1)
        with pytest.raises(InvalidGeometry):
            Loop((0, 0, 0), Z, 0.1, turns=0)
        with pytest.raises(InvalidGeometry):
            Loop((0, 0), Z, 0.1)

    def test_degenerate_coaxial(self):
        with pytest.raises(DegenerateGeometry):
            mutual_inductance_coaxial(0.1, 0.1, 0.0)
        with pytest.raises(DegenerateGeometry):
            mutual_inductance_coaxial(0.0, 0.1, 0.1)

    def test_intersecting(self):
        # concentric coplanar loops whose wires overlap
        a = Loop((0, 0, 0), Z, 0.1)
        b = Loop((0, 0, 0), Z, 0.1001)
        with pytest.raises(LoopsIntersect):
            mutual_inductance_neumann(a, b)

    def test_too_coarse(self):
        a, b = coax(0.1, 0.1, 0.002)
        with pytest.raises(QuadratureTooCoarse):
            mutual_inductance_neumann(a, b, 64)

    def test_segment_floor(self):
        a, b = coax(0.1, 0.1, 0.1)
        with pytest.raises(ValueError):
            mutual_inductance_neumann(a, b, 32)


def test_inductance_matrices_shape_and_symmetry():
    tx = [Loop((x, 0, 0), Z, 0.05) for x in (-0.12, 0.0, 0.12)]
    rx = Loop((0, 0, 0.1), Z, 0.05)
    m, m_tx, l_tx, l_rx = inductance_matrices(tx, rx)
    assert m.shape == (3,) and m_tx.shape == (3, 3)
    assert np.array_equal(m_tx, m_tx.T) and np.all(np.diag(m_tx) == 0)
    assert m[0] == pytest.approx(m[2], rel=1e-12)
    # side-by-side coplanar loops couple negatively
    assert m_tx[0, 1] < 0
    assert l_rx == pytest.approx(self_inductance_loop(0.05, 1e-4))
