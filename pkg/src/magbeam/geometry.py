"""Mutual and self inductances of thin circular loops.

Two routes to the mutual inductance are provided.  The Neumann double line
integral handles arbitrary placement and orientation; Maxwell's closed form
covers coaxial loops and serves as the analytic check on the quadrature.

Elliptic integrals use the *modulus* convention: ``K(k)`` and ``E(k)`` with
``k`` the modulus, parameter ``m = k**2``.  At ``k = 0`` both equal ``pi/2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateGeometry, InvalidGeometry, LoopsIntersect, QuadratureTooCoarse

MU0 = 4e-7 * np.pi
AXIS_TOL = 1e-12
DEFAULT_SEGMENTS = 256
QUADRATURE_RTOL = 1e-6


@dataclass(frozen=True)
class Loop:
    """A thin circular coil of ``turns`` co-located turns (SI units)."""

    center: tuple
    axis: tuple
    radius: float
    turns: int = 1
    wire_radius: float = 1e-4

    def __post_init__(self):
        c = tuple(float(x) for x in self.center)
        a = tuple(float(x) for x in self.axis)
        if len(c) != 3 or len(a) != 3:
            raise InvalidGeometry("center and axis must be 3-vectors")
        if not all(np.isfinite(c + a)):
            raise InvalidGeometry("non-finite loop coordinates")
        if abs(np.linalg.norm(a) - 1.0) > AXIS_TOL:
            raise InvalidGeometry(f"axis {a} is not a unit vector")
        if not (self.radius > 0 and self.wire_radius > 0):
            raise InvalidGeometry("radius and wire_radius must be positive")
        if not self.radius > self.wire_radius:
            raise InvalidGeometry("radius must exceed wire_radius")
        if int(self.turns) != self.turns or self.turns < 1:
            raise InvalidGeometry("turns must be an integer >= 1")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "axis", a)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "wire_radius", float(self.wire_radius))
        object.__setattr__(self, "turns", int(self.turns))

    def flipped(self) -> "Loop":
        return Loop(self.center, tuple(-x for x in self.axis), self.radius, self.turns,
                    self.wire_radius)


# ---------------------------------------------------------------- elliptic

def _agm_ke(k: float):
    """K(k), E(k) by the arithmetic-geometric mean, iterated to 1e-15."""
    a, b = 1.0, np.sqrt((1.0 - k) * (1.0 + k))
    c = k
    s = 0.5 * c * c
    p = 0.5
    for _ in range(60):
        if abs(c) <= 1e-15 * a:
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        p *= 2.0
        s += p * c * c
    K = np.pi / (2.0 * a)
    return K, K * (1.0 - s)


def ellipk_ellipe(k: float):
    """Complete elliptic integrals of the first and second kind, modulus ``k``."""
    if not 0.0 <= k < 1.0:
        raise ValueError("modulus must lie in [0, 1)")
    return _agm_ke(k)


def _maxwell_bracket(k: float) -> float:
    """``(2/k - k) K(k) - (2/k) E(k)``, stable for small ``k``.

    For small parameter ``m = k^2`` the difference ``(1 - m/2) K - E`` loses all
    its digits to cancellation, so it is summed as a power series whose
    leading term is ``pi m^2 / 32``.
    """
    m = k * k
    if m >= 0.25:
        K, E = _agm_ke(k)
        return (2.0 / k - k) * K - (2.0 / k) * E
    a_prev, a = 1.0, 0.25  # a_n = ((2n)! / (4^n n!^2))^2 for n = 0, 1
    total, mn = 0.0, m
    for n in range(2, 200):
        a_prev, a = a, a * ((2 * n - 1) / (2 * n)) ** 2
        mn *= m
        term = (a * 2 * n / (2 * n - 1) - a_prev / 2.0) * mn
        total += term
        if term <= 1e-17 * total:
            break
    return (2.0 / k) * 0.5 * np.pi * total


def mutual_inductance_coaxial(r1: float, r2: float, d: float) -> float:
    """Maxwell's formula for two coaxial single-turn loops ``d`` apart."""
    if not (r1 > 0 and r2 > 0):
        raise DegenerateGeometry("loop radii must be positive")
    k2 = 4.0 * r1 * r2 / ((r1 + r2) ** 2 + d * d)
    if 1.0 - k2 <= 1e-14:
        raise DegenerateGeometry("coincident loops (k -> 1)")
    k = np.sqrt(k2)
    return float(MU0 * np.sqrt(r1 * r2) * _maxwell_bracket(k))


def self_inductance_loop(radius: float, wire_radius: float, turns: int = 1) -> float:
    """Approximate self inductance ``mu0 R (ln(8R/a) - 2) N^2``.

    Valid for ``R >> a`` and tightly bundled turns.
    """
    if not (radius > 0 and wire_radius > 0) or int(turns) != turns or turns < 1:
        raise InvalidGeometry("radius, wire_radius must be positive and turns >= 1")
    if radius <= 10.0 * wire_radius:
        raise InvalidGeometry("thin-wire formula needs radius >> wire_radius")
    return float(MU0 * radius * (np.log(8.0 * radius / wire_radius) - 2.0) * turns**2)


# ---------------------------------------------------------------- Neumann

def _canonical_axis(axis):
    """Axis with its first nonzero component positive, and the sign removed."""
    a = np.asarray(axis, dtype=float)
    for x in a:
        if x != 0.0:
            return (a, 1.0) if x > 0 else (-a, -1.0)
    raise InvalidGeometry("zero axis")


def _frame(axis):
    """Orthonormal ``u, w`` with ``u x w = axis``."""
    e = np.zeros(3)
    e[int(np.argmin(np.abs(axis)))] = 1.0
    u = e - np.dot(e, axis) * axis
    u /= np.linalg.norm(u)
    w = np.cross(axis, u)
    return u, w


def _nodes(loop: Loop, axis, segments: int):
    theta = 2.0 * np.pi * np.arange(segments) / segments
    u, w = _frame(axis)
    c, s = np.cos(theta)[:, None], np.sin(theta)[:, None]
    pts = np.asarray(loop.center) + loop.radius * (c * u + s * w)
    tangent = loop.radius * (-s * u + c * w) * (2.0 * np.pi / segments)
    return pts, tangent


def _neumann_sum(a: Loop, axa, b: Loop, axb, segments: int) -> float:
    pa, ta = _nodes(a, axa, segments)
    pb, tb = _nodes(b, axb, segments)
    diff = pa[:, None, :] - pb[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    if np.min(dist) <= a.wire_radius + b.wire_radius:
        raise LoopsIntersect("loops touch or cross each other")
    return float(np.sum((ta @ tb.T) / dist)) * MU0 / (4.0 * np.pi)


def _key(loop: Loop):
    return (loop.center, loop.radius, loop.turns, loop.wire_radius, loop.axis)


def mutual_inductance_neumann(a: Loop, b: Loop, segments: int = DEFAULT_SEGMENTS,
                              with_error: bool = False):
    """Neumann's double integral by the trapezoidal rule on both loops.

    The integrand is smooth and periodic, so the rule converges spectrally.
    The error estimate is the change from ``segments // 2`` to ``segments``;
    if that exceeds ``1e-6`` relative the loops are too close for the grid and
    :class:`QuadratureTooCoarse` is raised.

    The result is exactly antisymmetric under flipping either axis and exactly
    symmetric in its arguments.
    """
    if int(segments) != segments or segments < 64:
        raise ValueError("segments must be an integer >= 64")
    segments = int(segments)
    if _key(b) < _key(a):
        a, b = b, a
    axa, sa = _canonical_axis(a.axis)
    axb, sb = _canonical_axis(b.axis)
    coarse = _neumann_sum(a, axa, b, axb, segments // 2)
    fine = _neumann_sum(a, axa, b, axb, segments)
    err = abs(fine - coarse)
    # loops at right angles give M = 0, so compare against the coupling scale too
    scale = max(abs(fine), 1e-9 * MU0 * np.sqrt(a.radius * b.radius))
    if err > QUADRATURE_RTOL * scale:
        raise QuadratureTooCoarse(
            f"result moved by {err / scale:.2e} relative between {segments // 2} and "
            f"{segments} segments")
    m = sa * sb * a.turns * b.turns * fine
    return (m, a.turns * b.turns * err) if with_error else m


def inductance_matrices(tx_loops: Sequence[Loop], rx_loop: Loop,
                        segments: int = DEFAULT_SEGMENTS):
    """TX->RX vector ``m``, TX-TX matrix ``m_tx`` and self inductances.

    Returns ``(m, m_tx, tx_self, rx_self)`` in henries.
    """
    n = len(tx_loops)
    m = np.array([mutual_inductance_neumann(t, rx_loop, segments) for t in tx_loops])
    m_tx = np.zeros((n, n))
    for j in range(n):
        for k in range(j + 1, n):
            m_tx[j, k] = m_tx[k, j] = mutual_inductance_neumann(tx_loops[j], tx_loops[k], segments)
    tx_self = np.array([self_inductance_loop(t.radius, t.wire_radius, t.turns) for t in tx_loops])
    rx_self = self_inductance_loop(rx_loop.radius, rx_loop.wire_radius, rx_loop.turns)
    return m, m_tx, tx_self, rx_self
