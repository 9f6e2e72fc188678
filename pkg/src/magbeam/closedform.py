"""Minimum-power currents when only the load-power requirement is enforced.

Without voltage or current limits the problem reduces to a real-valued
generalized eigenproblem.  The optimal current is the null vector of

    T(v) = R + w^2 (r0 - v r_l0) / r0^2 * m m^T

where the dual variable ``v`` is tuned until the smallest eigenvalue of
``T(v)`` reaches zero.  The dual value is then ``beta0 * v``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotIdenticalResistances, NumericalFailure, ZeroCoupling
from .linalg import jacobi_eigh
from .model import CurrentSolution, SystemModel, evaluate

MAX_BISECTIONS = 200


@dataclass(frozen=True, eq=False)
class ClosedFormSolution:
    currents: np.ndarray
    dual_v: float
    alpha: float
    eigvec: np.ndarray
    solution: CurrentSolution
    duality_gap: float = 0.0


def t_matrix(model: SystemModel, v: float) -> np.ndarray:
    p = model.params
    coeff = p.omega**2 * (p.r0 - v * p.rx.load_resistance) / p.r0**2
    return np.diag(p.r) + coeff * np.outer(p.m, p.m)


def _lambda_min(model, v):
    w, vecs = jacobi_eigh(t_matrix(model, v))
    return w[0], vecs[:, 0]


def _check(model, beta0):
    if not beta0 > 0:
        raise ValueError("beta0 must be positive")
    if not np.any(model.m != 0):
        raise ZeroCoupling("all TX-RX mutual inductances are zero")


def _finish(model, beta0, u, v_star):
    m = model.m
    proj = float(np.dot(m, u))
    if proj == 0.0:
        raise NumericalFailure("null vector is orthogonal to the coupling vector")
    if proj < 0:
        u = -u
        proj = -proj
    alpha = float(np.sqrt(beta0 / (model.load_coeff * proj * proj)))
    currents = alpha * u
    primal = 0.5 * float(currents @ model.B_bar @ currents)
    dual = beta0 * v_star
    gap = abs(primal - dual) / primal
    sol = evaluate(model, currents, beta0, info={"dual_v": v_star, "duality_gap": gap})
    return ClosedFormSolution(currents, float(v_star), alpha, u, sol, gap)


def solve_unconstrained(model: SystemModel, beta0: float) -> ClosedFormSolution:
    """Optimal real currents by bisection on the dual variable.

    ``lambda_min(T(v))`` is non-increasing in ``v`` and positive at ``v = 0``
    (where ``T = B_bar``), so the root is bracketed by doubling an upper end.
    """
    _check(model, beta0)
    r_norm = np.linalg.norm(np.diag(model.params.r))
    lo, hi = 0.0, 1.0
    lam_lo, _ = _lambda_min(model, lo)
    if lam_lo <= 0:
        raise NumericalFailure("B_bar is not positive definite")
    lam_hi, _ = _lambda_min(model, hi)
    doublings = 0
    while lam_hi >= 0:
        hi *= 2.0
        doublings += 1
        if doublings > 200:
            raise NumericalFailure("could not bracket the dual variable")
        lam_hi, _ = _lambda_min(model, hi)
    v = hi
    lam, u = lam_hi, None
    for _ in range(MAX_BISECTIONS):
        v = 0.5 * (lo + hi)
        lam, u = _lambda_min(model, v)
        if abs(lam) <= 1e-10 * r_norm:
            break
        if lam > 0:
            lo = v
        else:
            hi = v
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            t_norm = np.linalg.norm(t_matrix(model, v))
            if abs(lam) <= 1e-12 * t_norm:
                break
            raise NumericalFailure(f"bisection stalled with lambda_min = {lam:.3e}")
    else:
        raise NumericalFailure("bisection did not converge")
    return _finish(model, beta0, u, v)


def solve_identical_r(model: SystemModel, beta0: float) -> ClosedFormSolution:
    """Currents proportional to the coupling vector (identical TX resistances).

    The dual variable is ``1 + r_p0/r_l0 + r r0^2 / (r_l0 w^2 |m|^2)``.
    """
    _check(model, beta0)
    p = model.params
    r = p.r
    if np.max(np.abs(r - r[0])) > 1e-12 * r[0]:
        raise NotIdenticalResistances("TX resistances differ")
    m = p.m
    mm = float(m @ m)
    rl = p.rx.load_resistance
    v_star = 1.0 + p.rx.parasitic_resistance / rl + r[0] * p.r0**2 / (rl * p.omega**2 * mm)
    return _finish(model, beta0, m / np.sqrt(mm), v_star)
