"""Full constrained problem via its semidefinite relaxation.

The quadratic program over complex currents ``i`` is lifted to ``X = i i^H``::

    min  0.5 tr(B_bar X)
    s.t. tr(M X)   >= 2 r0^2 beta0 / (w^2 r_l0),   M   = m m^T
         tr(B_n X) <= V_n^2,                       B_n = b_n b_n^H
         X_nn      <= A_n^2
         X >= 0

Dropping ``rank(X) = 1`` gives a convex problem whose optimum is rank one, so
the leading eigenpair of ``X`` recovers the optimal currents.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import ipm
from .errors import (InfeasibleProblem, MaxIterationsReached, NumericalFailure,
                     RankDeficiencyUnexpected, Unbounded, ZeroCoupling)
from .linalg import hermitian_from_embedding, hermitize, real_embedding
from .model import CurrentSolution, Status, SystemModel, align_phase, evaluate

RANK_TOL = 1e-6
RANK_FAIL = 1e-4
DEFAULT_TOL = 1e-7
# the interior-point loop runs past the requested gap: the misalignment
# between X and S shrinks only like sqrt(gap)
INNER_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class SdpProblem:
    n: int
    beta0: float
    objective: np.ndarray  # 0.5 * B_bar
    M: np.ndarray
    threshold: float
    voltage_idx: tuple
    B_mats: tuple
    V2: np.ndarray
    current_idx: tuple
    Q_mats: tuple
    A2: np.ndarray
    m: np.ndarray

    def constraints(self):
        """(kind, index, matrix, rhs, sense) per row; sense +1 for <=, -1 for >=."""
        rows = [("P0", -1, self.M, self.threshold, -1)]
        rows += [("V", k, B, v2, 1) for k, B, v2 in zip(self.voltage_idx, self.B_mats, self.V2)]
        rows += [("A", k, Q, a2, 1) for k, Q, a2 in zip(self.current_idx, self.Q_mats, self.A2)]
        return rows

    def dual_matrix(self, lam, rho, mu) -> np.ndarray:
        """0.5 B_bar - lam M + sum rho_n B_n + sum mu_n Q_n (rho, mu are length n)."""
        out = self.objective.astype(complex) - lam * self.M
        for k, B in zip(self.voltage_idx, self.B_mats):
            out = out + rho[k] * B
        for k, Q in zip(self.current_idx, self.Q_mats):
            out = out + mu[k] * Q
        return hermitize(out)


@dataclass(eq=False)
class SdrSolution:
    X: np.ndarray
    problem: Optional[SdpProblem] = None
    lam: float = float("nan")
    rho: Optional[np.ndarray] = None
    mu: Optional[np.ndarray] = None
    S: Optional[np.ndarray] = None
    objective: float = float("nan")
    dual_objective: float = float("nan")
    gap: float = float("nan")
    rank_ratio: float = float("nan")
    currents: Optional[np.ndarray] = None
    iterations: int = 0
    embedding: str = "real"
    history: list = field(default_factory=list)
    X_interior: Optional[np.ndarray] = None
    polished: bool = False


def formulate(model: SystemModel, beta0: float) -> SdpProblem:
    if not beta0 > 0:
        raise ValueError("beta0 must be positive")
    p = model.params
    if not np.any(p.m != 0):
        raise ZeroCoupling("all TX-RX mutual inductances are zero")
    n = p.n
    B = model.B
    vidx = tuple(k for k, v in enumerate(p.v_max) if v is not None)
    aidx = tuple(k for k, a in enumerate(p.a_max) if a is not None)
    B_mats = tuple(hermitize(np.outer(B[:, k], B[:, k].conj())) for k in vidx)
    Q_mats = []
    for k in aidx:
        Q = np.zeros((n, n))
        Q[k, k] = 1.0
        Q_mats.append(Q)
    return SdpProblem(
        n=n,
        beta0=float(beta0),
        objective=0.5 * np.array(model.B_bar),
        M=np.outer(p.m, p.m),
        threshold=2.0 * p.r0**2 * beta0 / (p.omega**2 * p.rx.load_resistance),
        voltage_idx=vidx,
        B_mats=B_mats,
        V2=np.array([p.v_max[k] ** 2 for k in vidx]),
        current_idx=aidx,
        Q_mats=tuple(Q_mats),
        A2=np.array([p.a_max[k] ** 2 for k in aidx]),
        m=p.m.copy(),
    )


def _cone_problem(problem: SdpProblem, embedding: str) -> ipm.ConeProblem:
    rows = problem.constraints()
    if embedding == "real":
        C = 0.5 * real_embedding(problem.objective)
        A = np.array([0.5 * real_embedding(H) for _, _, H, _, _ in rows])
    elif embedding == "complex":
        C = problem.objective.astype(complex)
        A = np.array([np.asarray(H, dtype=complex) for _, _, H, _, _ in rows])
    else:
        raise ValueError(f"unknown embedding {embedding!r}")
    b = np.array([rhs for _, _, _, rhs, _ in rows], dtype=float)
    a = np.diag([float(s) for _, _, _, _, s in rows])
    return ipm.ConeProblem(C=C, A=A, b=b, a=a, c=np.zeros(len(rows)))


def solve_sdr(problem: SdpProblem, tol: float = DEFAULT_TOL, embedding: str = "real",
              max_iter: int = 100, polish: bool = True) -> SdrSolution:
    """Solve the relaxation with the interior-point method.

    Raises :class:`InfeasibleProblem` (with a dual-ray certificate) or
    :class:`MaxIterationsReached`.
    """
    cone = _cone_problem(problem, embedding)
    res = ipm.solve(cone, tol=min(tol, INNER_TOL), feastol=1e-11, max_iter=max_iter)
    if res.status == "infeasible":
        cert = _certificate(problem, res.certificate)
        raise InfeasibleProblem(
            f"no currents deliver {problem.beta0:g} W within the limits "
            f"(certified load-power bound {cert['max_load_power_w']:.6g} W)", cert)
    if res.status != "optimal":
        acceptable = (res.rel_gap <= tol and res.pinf <= 1e-8 and res.dinf <= 1e-8)
        if not acceptable:
            raise MaxIterationsReached(
                f"interior point {res.status} after {res.iterations} iterations "
                f"(gap {res.rel_gap:.2e}, pinf {res.pinf:.2e}, dinf {res.dinf:.2e})")
    X = hermitian_from_embedding(res.X) if embedding == "real" else hermitize(res.X)
    lam, rho, mu = _split_duals(problem, res.y)
    S = 2.0 * hermitian_from_embedding(res.S) if embedding == "real" else hermitize(res.S)
    w = np.linalg.eigvalsh(X)
    rank_ratio = float(w[-2] / w[-1]) if problem.n > 1 and w[-1] > 0 else 0.0
    sol = SdrSolution(
        X=X, problem=problem, lam=lam, rho=rho, mu=mu, S=S,
        objective=float(np.real(np.trace(problem.objective @ X))),
        dual_objective=float(res.dobj), gap=float(res.rel_gap), rank_ratio=max(rank_ratio, 0.0),
        iterations=res.iterations, embedding=embedding, history=res.history, X_interior=X,
    )
    sol.currents = extract_rank_one(sol, raise_on_rank=False)
    if polish and rank_ratio <= RANK_FAIL:
        refined = _polish(problem, sol.currents, lam, rho, mu)
        if refined is not None:
            i, lam, rho, mu = refined
            sol.X = np.outer(i, i.conj())
            sol.lam, sol.rho, sol.mu = lam, rho, mu
            sol.S = problem.dual_matrix(lam, rho, mu)
            sol.currents = i
            sol.polished = True
    return sol


def _polish(problem: SdpProblem, i0, lam, rho, mu, max_steps: int = 8):
    """Gauss-Newton refinement of a rank-one KKT point on the active set.

    Solves ``G(lam, rho, mu) i = 0`` together with the active constraints held
    at equality, starting from the interior-point estimate.  Interior-point
    iterates stop a distance ~sqrt(gap) from the optimal face; this recovers
    the remaining digits.  Returns ``None`` when the refined point fails any
    optimality check, in which case the caller keeps the unrefined one.
    """
    rows = problem.constraints()
    n = problem.n
    duals = [lam if kind == "P0" else (rho[k] if kind == "V" else mu[k]) for kind, k, *_ in rows]
    vals = [float(np.real(np.vdot(i0, H @ i0))) for _, _, H, _, _ in rows]
    obj = float(np.real(np.vdot(i0, problem.objective @ i0)))
    active = [j for j, (row, d) in enumerate(zip(rows, duals)) if d * row[3] > 1e-9 * obj]
    if 0 not in active:
        return None
    E = [real_embedding(H) for _, _, H, _, _ in rows]
    signs = [-1.0 if kind == "P0" else 1.0 for kind, *_ in rows]
    Ec = real_embedding(problem.objective)
    u = np.concatenate([i0.real, i0.imag])
    d = np.array([duals[j] for j in active], dtype=float)

    def residual(u, d):
        G = Ec + sum(signs[j] * dj * E[j] for j, dj in zip(active, d))
        r1 = G @ u
        r2 = np.array([u @ E[j] @ u - rows[j][3] for j in active])
        return G, r1, r2

    u_scale = np.linalg.norm(u)
    d_scale = np.abs(d) + 1e-300
    best = None
    for _ in range(max_steps):
        G, r1, r2 = residual(u, d)
        # scale by the terms of G, not G itself, which vanishes when n = 1
        g_scale = (np.linalg.norm(Ec) + sum(abs(dj) * np.linalg.norm(E[j])
                                            for j, dj in zip(active, d))) * u_scale
        rhs_scale = np.array([rows[j][3] for j in active])
        res_norm = max(np.linalg.norm(r1) / g_scale, float(np.max(np.abs(r2) / rhs_scale)))
        if best is None or res_norm < best[0]:
            best = (res_norm, u.copy(), d.copy())
        if res_norm < 1e-14:
            break
        J = np.zeros((2 * n + len(active), 2 * n + len(active)))
        J[:2 * n, :2 * n] = G / g_scale
        for c, j in enumerate(active):
            J[:2 * n, 2 * n + c] = signs[j] * (E[j] @ u) / g_scale
            J[2 * n + c, :2 * n] = 2.0 * (E[j] @ u) / rhs_scale[c]
        F = np.concatenate([r1 / g_scale, r2 / rhs_scale])
        col = np.concatenate([np.full(2 * n, u_scale), d_scale])
        step = np.linalg.lstsq(J * col, -F, rcond=None)[0] * col
        u = u + step[:2 * n]
        d = d + step[2 * n:]
    res_norm, u, d = best
    if res_norm > 1e-12 or np.any(d < 0):
        return None
    lam2 = 0.0
    rho2, mu2 = np.zeros(n), np.zeros(n)
    for j, dj in zip(active, d):
        kind, k = rows[j][0], rows[j][1]
        if kind == "P0":
            lam2 = float(dj)
        elif kind == "V":
            rho2[k] = dj
        else:
            mu2[k] = dj
    i = align_phase(u[:n] + 1j * u[n:], problem.m)
    S = problem.dual_matrix(lam2, rho2, mu2)
    wS = np.linalg.eigvalsh(S)
    if wS[0] < -1e-10 * wS[-1]:
        return None
    for kind, k, H, rhs, sense in rows:
        val = float(np.real(np.vdot(i, H @ i)))
        if (rhs - val if sense < 0 else val - rhs) > 1e-10 * rhs:
            return None
    return i, lam2, rho2, mu2


def _split_duals(problem, y):
    n = problem.n
    lam = float(y[0])
    rho = np.zeros(n)
    mu = np.zeros(n)
    off = 1
    for j, k in enumerate(problem.voltage_idx):
        rho[k] = -y[off + j]
    off += len(problem.voltage_idx)
    for j, k in enumerate(problem.current_idx):
        mu[k] = -y[off + j]
    return lam, rho, mu


def _certificate(problem, raw):
    """Translate the IPM Farkas ray into (lam, rho, mu) form.

    With ``lam = 1`` the ray satisfies ``M <= sum rho_n B_n + sum mu_n Q_n`` so
    ``tr(M X) <= bound`` on the limit-feasible set, and ``bound < threshold``.
    """
    y = np.asarray(raw["y"], dtype=float)
    lam, rho, mu = _split_duals(problem, y)
    if lam <= 0:
        raise NumericalFailure("degenerate infeasibility certificate")
    rho, mu = rho / lam, mu / lam
    bound = float(sum(rho[k] * v2 for k, v2 in zip(problem.voltage_idx, problem.V2))
                  + sum(mu[k] * a2 for k, a2 in zip(problem.current_idx, problem.A2)))
    return dict(lam=1.0, rho=rho, mu=mu, bound=bound, threshold=problem.threshold,
                max_load_power_w=problem.beta0 * bound / problem.threshold)


def extract_rank_one(sdr: SdrSolution, raise_on_rank: bool = True) -> np.ndarray:
    """Leading eigenpair ``sqrt(l1) u1`` of ``X``, phase-aligned with ``m``."""
    X = hermitize(np.asarray(sdr.X, dtype=complex))
    w, U = np.linalg.eigh(X)
    top = w[-1]
    if top <= 0:
        raise RankDeficiencyUnexpected("X has no positive eigenvalue", 0.0)
    ratio = float(max(w[-2], 0.0) / top) if len(w) > 1 else 0.0
    if raise_on_rank and ratio > RANK_FAIL:
        raise RankDeficiencyUnexpected(f"X is not rank one (lambda2/lambda1 = {ratio:.3e})", ratio)
    i = np.sqrt(top) * U[:, -1]
    if sdr.problem is not None:
        return align_phase(i, sdr.problem.m)
    return align_phase(i, np.zeros(len(i)))


@dataclass(frozen=True)
class KktReport:
    stationarity: float
    complementarity: float
    scalar_complementarity: float
    primal_infeasibility: float
    dual_infeasibility: float
    min_eig_X: float
    min_eig_S: float
    full_rank_cond: float
    full_rank: bool
    rank_X: int
    flags: tuple

    @property
    def max_residual(self) -> float:
        return max(self.stationarity, self.complementarity, self.scalar_complementarity,
                   self.primal_infeasibility, self.dual_infeasibility)

    def ok(self, tol: float = 1e-6) -> bool:
        return self.max_residual <= tol and self.full_rank and self.rank_X == 1


def verify_kkt(model: SystemModel, beta0: float, sdr: SdrSolution,
               S: Optional[np.ndarray] = None, tol: float = 1e-6) -> KktReport:
    """Relative residuals of the optimality system of the relaxation.

    Every residual is normalized by the size of the terms it balances, so the
    report is unit-free.  ``S`` defaults to the one stored on ``sdr``.
    """
    problem = sdr.problem if sdr.problem is not None and sdr.problem.beta0 == beta0 \
        else formulate(model, beta0)
    X = hermitize(np.asarray(sdr.X, dtype=complex))
    S = hermitize(np.asarray(sdr.S if S is None else S, dtype=complex))
    lam = float(sdr.lam)
    rho = np.zeros(problem.n) if sdr.rho is None else np.asarray(sdr.rho, dtype=float)
    mu = np.zeros(problem.n) if sdr.mu is None else np.asarray(sdr.mu, dtype=float)

    G = problem.dual_matrix(lam, rho, mu)
    scale = (np.linalg.norm(problem.objective) + abs(lam) * np.linalg.norm(problem.M)
             + sum(abs(rho[k]) * np.linalg.norm(B) for k, B in zip(problem.voltage_idx, problem.B_mats))
             + sum(abs(mu[k]) for k in problem.current_idx) + np.linalg.norm(S))
    stationarity = float(np.linalg.norm(G - S) / scale)

    nX, nS = np.linalg.norm(X), np.linalg.norm(S)
    complementarity = float(np.linalg.norm(S @ X) / max(nX * nS, 1e-300))

    obj = max(abs(0.5 * float(np.real(np.trace(np.array(model.B_bar) @ X)))), 1e-300)
    pinf = 0.0
    scomp = 0.0
    for kind, k, H, rhs, sense in problem.constraints():
        val = float(np.real(np.trace(H @ X)))
        viol = (rhs - val) if sense < 0 else (val - rhs)
        pinf = max(pinf, max(viol, 0.0) / rhs)
        dual = lam if kind == "P0" else (rho[k] if kind == "V" else mu[k])
        # dual * slack, in units of the objective (dual * rhs is a power)
        scomp = max(scomp, abs(dual * (val - rhs)) / obj)
    wX = np.linalg.eigvalsh(X)
    wS = np.linalg.eigvalsh(S)
    min_eig_X = float(wX[0] / max(wX[-1], 1e-300))
    min_eig_S = float(wS[0] / max(abs(wS[-1]), 1e-300))
    pinf = max(pinf, max(-min_eig_X, 0.0))
    dinf = max(0.0, -lam, -float(np.min(rho, initial=0.0)), -float(np.min(mu, initial=0.0)))
    dinf = dinf / max(abs(lam), 1e-300) if lam > 0 else dinf
    dinf = max(dinf, max(-min_eig_S, 0.0))

    F = problem.dual_matrix(0.0, rho, mu)
    wF = np.linalg.eigvalsh(F)
    cond = float(wF[0] / wF[-1]) if wF[-1] > 0 else 0.0
    full_rank = cond > 1e-12
    rank_X = int(np.sum(wX > RANK_TOL * wX[-1])) if wX[-1] > 0 else 0

    flags = []
    if stationarity > tol:
        flags.append("stationarity")
    if complementarity > tol or scomp > tol:
        flags.append("complementarity")
    if pinf > tol:
        flags.append("primal_feasibility")
    if dinf > tol:
        flags.append("dual_feasibility")
    if not full_rank:
        flags.append("rank_deficient_dual")
    if rank_X != 1:
        flags.append("rank_X")
    return KktReport(stationarity, complementarity, scomp, pinf, dinf, min_eig_X, min_eig_S,
                     cond, full_rank, rank_X, tuple(flags))


def solve_p1(model: SystemModel, beta0: float, tol: float = DEFAULT_TOL,
             embedding: str = "real") -> CurrentSolution:
    """Minimum total source power subject to load power and TX limits."""
    problem = formulate(model, beta0)
    sdr = solve_sdr(problem, tol=tol, embedding=embedding)
    currents = extract_rank_one(sdr)
    kkt = verify_kkt(model, beta0, sdr)
    info = dict(rank_ratio=sdr.rank_ratio, kkt_max_residual=kkt.max_residual,
                sdr_objective=sdr.objective, duality_gap=sdr.gap, iterations=sdr.iterations,
                lam=sdr.lam, rho=sdr.rho, mu=sdr.mu, kkt=kkt, sdr=sdr)
    sol = evaluate(model, currents, beta0, info=info)
    tight = sdr.rank_ratio <= RANK_TOL
    status = Status.OPTIMAL if (tight and sol.report.feasible) else Status.MAX_ITERATIONS
    if status is not Status.OPTIMAL:
        sol = evaluate(model, currents, beta0, status=status, info=info)
    return sol


def max_deliverable_power(model: SystemModel, rel_width: float = 1e-6,
                          tol: float = DEFAULT_TOL):
    """Largest load power the limits allow, by bisection on feasibility.

    Returns ``(beta0_max, solution)`` where ``solution`` solves the problem at
    the largest ``beta0`` proven feasible.
    """
    p = model.params
    if not p.has_finite_limits():
        raise Unbounded("no finite voltage or current limit")

    def attempt(beta):
        try:
            sol = solve_p1(model, beta, tol=tol)
        except (InfeasibleProblem, MaxIterationsReached, RankDeficiencyUnexpected):
            return None
        return sol if sol.status is Status.OPTIMAL else None

    # bracket: start from the unconstrained optimum scaled onto the limits
    lo, lo_sol = None, None
    beta = 1.0
    for _ in range(200):
        sol = attempt(beta)
        if sol is None:
            break
        lo, lo_sol = beta, sol
        beta *= 2.0
    else:
        raise Unbounded("load power grows without bound under the given limits")
    hi = beta
    if lo is None:
        lo = hi
        for _ in range(200):
            lo *= 0.5
            sol = attempt(lo)
            if sol is not None:
                lo_sol = sol
                break
            hi = lo
        else:
            raise NumericalFailure("no feasible load power found")
    while hi - lo > rel_width * lo:
        mid = 0.5 * (lo + hi)
        sol = attempt(mid)
        if sol is None:
            hi = mid
        else:
            lo, lo_sol = mid, sol
    return lo, lo_sol
