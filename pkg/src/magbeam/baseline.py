"""Reference schemes used to judge the optimal currents.

``equal_current_*`` is the uncoordinated benchmark where every TX carries the
same in-phase current.  ``multistart_qcqp`` is a local-search oracle that
attacks the original non-convex problem directly, with no relaxation, so it
can cross-check the global optimality of the SDP route.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NoFeasiblePointFound, Unbounded, ZeroCoupling
from .linalg import real_embedding
from .model import (CurrentSolution, Status, SystemModel, align_phase, evaluate,
                    load_power, tx_voltages)


def equal_current_min_power(model: SystemModel, beta0: float) -> CurrentSolution:
    """Smallest common current ``alpha * 1`` meeting the load power."""
    if not beta0 > 0:
        raise ValueError("beta0 must be positive")
    p = model.params
    total = float(np.sum(p.m))
    if total == 0.0 or abs(total) <= 1e-12 * np.sum(np.abs(p.m)):
        raise ZeroCoupling("sum of TX-RX mutual inductances is zero")
    alpha = np.sqrt(2.0 * p.r0**2 * beta0 / (p.omega**2 * p.rx.load_resistance)) / abs(total)
    i = np.full(p.n, alpha, dtype=complex)
    sol = evaluate(model, i, beta0, info={"alpha": alpha})
    if sol.violated:
        sol = evaluate(model, i, beta0, status=Status.INFEASIBLE, info={"alpha": alpha})
    return sol


def equal_current_max_power(model: SystemModel):
    """Largest load power reachable with equal in-phase currents.

    Returns ``(beta0_max, solution)``.
    """
    p = model.params
    if not p.has_finite_limits():
        raise Unbounded("no finite voltage or current limit")
    if float(np.sum(p.m)) == 0.0:
        raise ZeroCoupling("sum of TX-RX mutual inductances is zero")
    unit_v = np.abs(tx_voltages(model, np.ones(p.n)))
    caps = [a for a in p.a_max if a is not None]
    caps += [v / unit_v[k] for k, v in enumerate(p.v_max) if v is not None and unit_v[k] > 0]
    alpha = min(caps)
    i = np.full(p.n, alpha, dtype=complex)
    beta_max = load_power(model, i)
    return beta_max, evaluate(model, i, beta_max, info={"alpha": alpha})


@dataclass(frozen=True)
class OracleConfig:
    """Settings for :func:`multistart_qcqp`.

    Start points come from numpy's PCG64 generator seeded with ``seed``, which
    gives the same stream on every platform.
    """

    restarts: int = 50
    max_iters: int = 4000
    step_tol: float = 1e-10
    seed: int = 0
    outer_iters: int = 60
    feas_tol: float = 1e-6
    workers: int = 1


class _AugLag:
    """Real-coordinate form of the problem: ``u = [Re i, Im i]``."""

    def __init__(self, model: SystemModel, beta0: float):
        p = model.params
        n = p.n
        self.n = n
        self.beta0 = beta0
        bb = np.asarray(model.B_bar)
        self.P = 0.5 * np.block([[bb, np.zeros((n, n))], [np.zeros((n, n)), bb]]) / beta0
        K = model.load_coeff * np.outer(p.m, p.m)
        mats = [-np.block([[K, np.zeros((n, n))], [np.zeros((n, n)), K]]) / beta0]
        offs = [1.0]
        B = model.B
        for k, v in enumerate(p.v_max):
            if v is not None:
                Bk = np.outer(B[:, k], B[:, k].conj())
                mats.append(real_embedding(0.5 * (Bk + Bk.conj().T)) / v**2)
                offs.append(-1.0)
        # g_k(u) = u^T G_k u + offs_k <= 0
        self.G = np.array(mats)
        self.offs = np.array(offs)
        self.a_max = np.array([np.inf if a is None else a for a in p.a_max])

    def project(self, u):
        n = self.n
        mag = np.hypot(u[:n], u[n:])
        scale = np.where(mag > self.a_max, self.a_max / np.maximum(mag, 1e-300), 1.0)
        return np.concatenate([u[:n] * scale, u[n:] * scale])

    def cons(self, u):
        Gu = self.G @ u
        return Gu @ u + self.offs, Gu

    def value_grad(self, u, y, c):
        Pu = self.P @ u
        g, Gu = self.cons(u)
        t = np.maximum(0.0, y + c * g)
        val = Pu @ u + (np.sum(t * t) - np.sum(y * y)) / (2.0 * c)
        grad = 2.0 * Pu + 2.0 * (t @ Gu)
        return val, grad, g

    def violation(self, u):
        g, _ = self.cons(u)
        return float(np.max(np.maximum(g, 0.0)))


def _inner_solve(al: _AugLag, u, y, c, max_iters, tol):
    """Projected gradient with Barzilai-Borwein trial steps and Armijo backtracking."""
    val, grad, _ = al.value_grad(u, y, c)
    step = 1.0 / max(np.linalg.norm(al.P, 2) + c * np.linalg.norm(al.G[0], 2), 1e-12)
    iters = 0
    for iters in range(1, max_iters + 1):
        t = step
        while True:
            u_new = al.project(u - t * grad)
            d = u_new - u
            val_new, grad_new, _ = al.value_grad(u_new, y, c)
            if val_new <= val + 1e-4 * float(grad @ d) or t < 1e-16:
                break
            t *= 0.5
        s, r = d, grad_new - grad
        sr = float(s @ r)
        step = float(s @ s) / sr if sr > 1e-300 else step * 2.0
        step = min(max(step, 1e-12), 1e12)
        u, val, grad = u_new, val_new, grad_new
        if np.linalg.norm(d) <= tol * max(1.0, np.linalg.norm(u)):
            break
    return u, iters


def _run_one(al: _AugLag, u0, cfg: OracleConfig):
    y = np.zeros(len(al.offs))
    c = 10.0
    u = al.project(u0)
    prev_viol = np.inf
    total = 0
    for _ in range(cfg.outer_iters):
        u, it = _inner_solve(al, u, y, c, cfg.max_iters, cfg.step_tol)
        total += it
        g, _ = al.cons(u)
        y = np.maximum(0.0, y + c * g)
        viol = float(np.max(np.maximum(g, 0.0)))
        if viol <= 1e-10 and it <= 2:
            break
        if viol > cfg.feas_tol and viol > 0.25 * prev_viol:
            c *= 2.0
        prev_viol = viol
    # a load-power shortfall left by the penalty is closed by radial scaling
    g0 = float(u @ al.G[0] @ u + al.offs[0])
    if g0 > 0:
        p0 = 1.0 - g0
        if p0 > 0:
            u = al.project(u * np.sqrt(1.0 / p0))
    return u, total


def multistart_qcqp(model: SystemModel, beta0: float, config: OracleConfig = OracleConfig()) -> CurrentSolution:
    """Best of several augmented-Lagrangian local searches over complex currents.

    Current limits are enforced by projection; load-power and voltage limits
    through the augmented Lagrangian.  Start points are drawn uniformly from
    the box ``|Re i_n|, |Im i_n| <= A_n`` (unit box where ``A_n`` is absent)
    and rescaled radially so the load power equals ``beta0``.
    """
    if not beta0 > 0:
        raise ValueError("beta0 must be positive")
    if not np.any(model.m != 0):
        raise ZeroCoupling("all TX-RX mutual inductances are zero")
    al = _AugLag(model, beta0)
    n = model.n
    rng = np.random.Generator(np.random.PCG64(config.seed))
    box = np.where(np.isfinite(al.a_max), al.a_max, 1.0)
    starts = []
    for _ in range(config.restarts):
        u = np.concatenate([rng.uniform(-box, box), rng.uniform(-box, box)])
        g0 = float(u @ al.G[0] @ u + al.offs[0])
        p0 = 1.0 - g0
        if p0 > 0:
            u = u / np.sqrt(p0)
        starts.append(u)

    def work(u0):
        return _run_one(al, u0, config)

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            results = list(pool.map(work, starts))
    else:
        results = [work(u0) for u0 in starts]

    best = None
    feasible = 0
    for k, (u, iters) in enumerate(results):
        if al.violation(u) > config.feas_tol:
            continue
        feasible += 1
        obj = float(u @ al.P @ u)
        if best is None or obj < best[0]:
            best = (obj, k, u)
    if best is None:
        raise NoFeasiblePointFound(f"none of {config.restarts} restarts reached feasibility")
    _, k, u = best
    i = align_phase(u[:n] + 1j * u[n:], model.m)
    return evaluate(model, i, beta0, info={"best_restart": k, "feasible_restarts": feasible,
                                           "violation": al.violation(u)})
