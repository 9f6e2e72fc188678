"""Dense primal-dual interior-point method for one PSD block plus a nonnegative orthant.

Primal and dual pair::

    min  <C, X> + c.x          max  b.y
    s.t. <A_i, X> + a_i.x = b_i     s.t. sum_i y_i A_i + S = C
         X >= 0, x >= 0                  a^T y + z = c,  S >= 0, z >= 0

``<U, V>`` is ``Re tr(U^H V)`` so the PSD block may be real symmetric or
complex Hermitian.  Search directions are HKM with a Mehrotra
predictor-corrector; the start point is infeasible.  Infeasibility of the
primal is reported when the dual iterates trace out a Farkas ray.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

log = logging.getLogger(__name__)


@dataclass
class ConeProblem:
    C: np.ndarray
    A: np.ndarray  # (m, n, n)
    b: np.ndarray  # (m,)
    a: np.ndarray  # (m, l)
    c: np.ndarray  # (l,)


@dataclass
class IpmResult:
    status: str  # "optimal" | "infeasible" | "max_iterations" | "stalled"
    X: np.ndarray
    x: np.ndarray
    y: np.ndarray
    S: np.ndarray
    z: np.ndarray
    pobj: float
    dobj: float
    rel_gap: float
    pinf: float
    dinf: float
    iterations: int
    certificate: Optional[dict] = None
    history: list = field(default_factory=list)


def _inner(u, v):
    return float(np.real(np.vdot(u, v)))


def _herm(u):
    return 0.5 * (u + u.conj().T)


def _max_step(X, dX):
    """Largest alpha with X + alpha dX PSD (inf if unbounded)."""
    L = np.linalg.cholesky(X)
    Li = np.linalg.inv(L)
    w = np.linalg.eigvalsh(_herm(Li @ dX @ Li.conj().T))
    lo = w[0]
    return np.inf if lo >= 0 else -1.0 / lo


def _max_step_lin(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def _chol_regularized(M):
    """Cholesky factor of the Schur matrix, with a diagonal shift if it is
    numerically indefinite (happens close to the optimum)."""
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        pass
    d = np.max(np.abs(np.diag(M)), initial=1.0)
    for shift in (1e-14, 1e-12, 1e-10):
        try:
            return np.linalg.cholesky(M + shift * d * np.eye(M.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError("Schur complement is not positive definite")


class _Scaled:
    """Row-normalized copy of a problem, plus the maps back to original units."""

    def __init__(self, prob: ConeProblem):
        A = np.asarray(prob.A)
        m = A.shape[0]
        row = np.array([np.linalg.norm(A[i]) for i in range(m)])
        for i in range(m):
            if row[i] == 0:
                row[i] = max(np.linalg.norm(prob.a[i]), 1.0)
        self.row = row
        A = A / row[:, None, None]
        a = prob.a / row[:, None]
        col = np.linalg.norm(a, axis=0)
        col[col == 0] = 1.0
        self.col = col
        a = a / col
        c = prob.c / col
        b = prob.b / row
        self.bscale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
        self.cscale = max(1.0, float(np.linalg.norm(prob.C)), float(np.linalg.norm(c)))
        self.prob = ConeProblem(prob.C / self.cscale, A, b / self.bscale, a, c / self.cscale)

    def unscale(self, X, x, y, S, z):
        return (X * self.bscale, x * self.bscale / self.col, y * self.cscale / self.row,
                S * self.cscale, z * self.cscale * self.col)


def solve(prob: ConeProblem, tol: float = 1e-9, feastol: float = 1e-10,
          max_iter: int = 100, infeas_threshold: float = 1e6) -> IpmResult:
    sc = _Scaled(prob)
    P = sc.prob
    C, A, b, a, c = P.C, P.A, P.b, P.a, P.c
    m, n = A.shape[0], C.shape[0]
    l = c.shape[0]
    nu = n + l
    dtype = np.result_type(C, A)

    def Aop(X, x):
        return np.array([_inner(A[i], X) for i in range(m)]) + a @ x

    def Aadj(y):
        return np.tensordot(y, A, axes=1)

    normb = 1.0 + np.linalg.norm(b)
    normC = 1.0 + np.linalg.norm(C) + np.linalg.norm(c)

    xi = max(10.0, np.sqrt(n), float(np.max((1.0 + np.abs(b)) / (1.0 + np.array(
        [np.linalg.norm(A[i]) for i in range(m)])), initial=1.0)) * n)
    # the power constraint row is the only ">=" row; make the start satisfy it strictly
    for i in range(m):
        tr = _inner(A[i], np.eye(n))
        if tr > 0 and b[i] > 0:
            xi = max(xi, 2.0 * b[i] / tr)
    eta = max(10.0, np.sqrt(n), float(np.max([np.linalg.norm(A[i]) for i in range(m)], initial=1.0)),
              np.linalg.norm(C))
    X = xi * np.eye(n, dtype=dtype)
    x = xi * np.ones(l)
    S = eta * np.eye(n, dtype=dtype)
    z = eta * np.ones(l)
    y = np.zeros(m)

    history = []
    best = (np.inf, -1, None, None)
    stall_merit, stall_window = 1e-8, 5
    status = "max_iterations"
    certificate = None
    it = 0
    pobj = dobj = rel_gap = pinf = dinf = np.nan
    for it in range(max_iter + 1):
        Rp = b - Aop(X, x)
        Rd = C - Aadj(y) - S
        rdl = c - a.T @ y - z
        mu = (_inner(X, S) + float(x @ z)) / nu
        pobj = _inner(C, X) + float(c @ x)
        dobj = float(b @ y)
        comp = _inner(X, S) + float(x @ z)
        rel_gap = max(abs(pobj - dobj), comp) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(Rp) / normb
        dinf = (np.linalg.norm(Rd) + np.linalg.norm(rdl)) / normC
        history.append(dict(pobj=pobj * sc.cscale * sc.bscale, dobj=dobj * sc.cscale * sc.bscale,
                            complementarity=(_inner(X, S) + float(x @ z)) * sc.cscale * sc.bscale,
                            residual_term=(_inner(X, Rd) + float(x @ rdl) - float(y @ Rp))
                            * sc.cscale * sc.bscale,
                            pinf=pinf, dinf=dinf, mu=mu))
        log.debug("it %d pobj %.9e dobj %.9e gap %.2e pinf %.2e dinf %.2e",
                  it, pobj, dobj, rel_gap, pinf, dinf)
        if rel_gap <= tol and pinf <= feastol and dinf <= feastol:
            status = "optimal"
            break
        merit = max(rel_gap, pinf, dinf)
        if merit < best[0]:
            best = (merit, it, (X, x, y, S, z), (pobj, dobj, rel_gap, pinf, dinf))
        elif best[0] <= stall_merit and it - best[1] >= stall_window:
            # no progress near the precision floor; fall back to the best iterate
            status = "stalled"
            break
        if dobj > 0:
            yr = y / dobj
            Sr = -Aadj(yr)
            zr = -a.T @ yr
            viol = max(0.0, -np.linalg.eigvalsh(_herm(Sr))[0]) + max(0.0, -float(np.min(zr, initial=0.0)))
            scale = np.linalg.norm(Sr) + np.linalg.norm(zr)
            if dobj > infeas_threshold * max(1.0, abs(pobj)) and viol <= 1e-8 * max(scale, 1.0):
                status = "infeasible"
                certificate = dict(y=yr / sc.row, S=Sr, z=zr, dual_objective=dobj, violation=viol)
                break
        if it == max_iter:
            break

        try:
            Sinv = np.linalg.inv(S)
            Sinv = _herm(Sinv)
            G = [X @ A[j] @ Sinv for j in range(m)]
            M = np.empty((m, m))
            for i in range(m):
                for j in range(i, m):
                    # Re tr(A_i X A_j S^-1); elementwise form of the trace
                    M[i, j] = M[j, i] = float(np.real(np.sum(A[i].T * G[j])))
            M += (a * (x / z)) @ a.T
            M = 0.5 * (M + M.T)
            Lm = _chol_regularized(M)
        except np.linalg.LinAlgError:
            status = "stalled"
            break

        def direction(sig_mu, K, kl):
            D = sig_mu * Sinv - X - X @ Rd @ Sinv
            if K is not None:
                D = D - K @ Sinv
            dl = (sig_mu - x * z - x * rdl - kl) / z
            rhs = Rp - Aop(D, np.zeros(l)) - a @ dl
            dy = np.linalg.solve(Lm.T, np.linalg.solve(Lm, rhs))
            Ady = Aadj(dy)
            dS = Rd - Ady
            dX = _herm(D + X @ Ady @ Sinv)
            dz = rdl - a.T @ dy
            dx = dl + (x / z) * (a.T @ dy)
            return dX, dx, dy, dS, dz

        def steps(dX, dx, dS, dz):
            ap = min(_max_step(X, dX), _max_step_lin(x, dx))
            ad = min(_max_step(S, dS), _max_step_lin(z, dz))
            return ap, ad

        try:
            dXa, dxa, dya, dSa, dza = direction(0.0, None, 0.0)
            ap, ad = steps(dXa, dxa, dSa, dza)
            ap, ad = min(1.0, ap), min(1.0, ad)
            mu_aff = (_inner(X + ap * dXa, S + ad * dSa) + float((x + ap * dxa) @ (z + ad * dza))) / nu
            sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
            dX, dx, dy, dS, dz = direction(sigma * mu, dXa @ dSa, dxa * dza)
            ap, ad = steps(dX, dx, dS, dz)
        except np.linalg.LinAlgError:
            status = "stalled"
            break
        gamma = 0.9 + 0.09 * min(1.0, max(0.0, 1.0 - sigma))
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
        X = _herm(X + ap * dX)
        x = x + ap * dx
        y = y + ad * dy
        S = _herm(S + ad * dS)
        z = z + ad * dz

    if status in ("stalled", "max_iterations") and best[2] is not None:
        X, x, y, S, z = best[2]
        pobj, dobj, rel_gap, pinf, dinf = best[3]
    Xo, xo, yo, So, zo = sc.unscale(X, x, y, S, z)
    return IpmResult(status, Xo, xo, yo, So, zo, pobj * sc.cscale * sc.bscale,
                     dobj * sc.cscale * sc.bscale, rel_gap, pinf, dinf, it, certificate, history)
